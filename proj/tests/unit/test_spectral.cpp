#include "helpers.hpp"

#include <kcut/eigensolvers.hpp>
#include <kcut/kmeans.hpp>
#include <kcut/spectral_embed.hpp>

using namespace kcut;
using namespace testing;

TEST_SUITE("spectral_embed") {

TEST_CASE("dense eigendecomposition reconstructs and sorts descending") {
    Rng r(41);
    Mat A = random_symmetric(r, 12, -1, 1);
    EigenDecomposition e = eig_sym(A);
    for (int i = 1; i < 12; ++i) CHECK(e.values[i] <= e.values[i - 1]);
    CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - A).norm() < 1e-10);
}

TEST_CASE("Lanczos matches the dense top and bottom of the spectrum") {
    Rng r(42);
    const int n = 150, k = 6;
    Mat A = random_symmetric(r, n, -1, 1);
    EigenPairs dense = dense_eigen(A);
    EigenPairs top = lanczos_largest([&](const Vec& x) { return Vec(A * x); }, n, k);
    EigenPairs bot = lanczos_smallest([&](const Vec& x) { return Vec(A * x); }, n, k);
    for (int i = 0; i < k; ++i) {
        CHECK(top.values[i] == doctest::Approx(dense.values[i]).epsilon(1e-8));
        CHECK(std::abs(top.vectors.col(i).dot(dense.vectors.col(i))) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(bot.values[0] == doctest::Approx(dense.values[n - 1]).epsilon(1e-8));
    for (int i = 0; i < k; ++i) CHECK((A * top.vectors.col(i) - top.values[i] * top.vectors.col(i)).norm() < 1e-6);
}

TEST_CASE("exact embedding reproduces a p.s.d. Gram matrix") {
    Rng r(43);
    Mat B = random_points(r, 20, 5);
    Mat K = B * B.transpose();
    Embedding e = exact_embedding(K);
    CHECK((e.gram() - K).norm() < 1e-9);
    CHECK_THROWS_AS(exact_embedding(-K), DegenerateError);
}

TEST_CASE("rank-m NC embedding: weighted Gram reconstruction at m = n") {
    Rng r(44);
    const int n = 25;
    Mat A = random_gaussian_kernel(r, n);
    Affinity a = Affinity::dense(A);
    Embedding e = rank_m_embedding(Objective::NC, a, n);
    Vec d = A.rowwise().sum();
    // diag(d) Phi Phi' diag(d) = A + delta D
    Mat G = d.asDiagonal() * e.gram() * d.asDiagonal();
    Mat expect = A + e.delta * Mat(d.asDiagonal());
    CHECK((G - expect).norm() < 1e-8 * expect.norm());
    CHECK(e.frobenius_error() == doctest::Approx(0.0));
}

TEST_CASE("optimal shift is minus the mean of the discarded eigenvalues") {
    Vec d(4);
    d << 0.5, 0.1, -0.2, -0.4;
    CHECK(optimal_shift(d) == doctest::Approx(0.0));
    Vec d2(2);
    d2 << 1.0, 3.0;
    CHECK(optimal_shift(d2) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(optimal_shift(Vec(0)), ParameterError);
}

TEST_CASE("Frobenius error is the shifted tail norm") {
    Rng r(45);
    Mat A = random_gaussian_kernel(r, 30);
    EigenDecomposition full = eig_sym(A);
    for (int m : {1, 5, 12}) {
        double s = 0.0;
        for (int i = m; i < 30; ++i) s += std::pow(full.values[i] + 0.05, 2);
        CHECK(frobenius_error(full, m, 0.05) == doctest::Approx(std::sqrt(s)));
        RankOptions ro;
        ro.delta = 0.0;
        Embedding e = rank_m_embedding(Objective::AA, Affinity::dense(A), m, ro);
        CHECK((A - e.gram()).norm() == doctest::Approx(e.frobenius_error()).epsilon(1e-8));
    }
}

TEST_CASE("iterative and dense rank-m embeddings agree") {
    Rng r(46);
    Mat X = random_points(r, 300, 2);
    Affinity A = Affinity::sparse(knn_affinity(Dataset::from_features(X), 8));
    RankOptions dense_opt, it_opt;
    it_opt.force_iterative = true;
    Embedding a = rank_m_embedding(Objective::NC, A, 6, dense_opt);
    Embedding b = rank_m_embedding(Objective::NC, A, 6, it_opt);
    CHECK((a.kept - b.kept).norm() < 1e-7);
    CHECK(a.delta == doctest::Approx(b.delta).epsilon(1e-7));
    CHECK((a.gram() - b.gram()).norm() < 1e-5 * a.gram().norm());
}

TEST_CASE("default rank meets the relative error target") {
    Rng r(47);
    Mat A = random_gaussian_kernel(r, 40);
    Embedding e = rank_m_embedding(Objective::AA, Affinity::dense(A), 0);
    CHECK(e.m >= 1);
    CHECK(e.m <= 40);
    CHECK(e.relative_frobenius_error() <= 0.1 + 1e-12);
}

TEST_CASE("spectral energy is weighted K-means on the embedding") {
    Rng r(48);
    for (int t = 0; t < 20; ++t) {
        const int n = pick(r, 5, 30), K = pick(r, 2, 4);
        Mat A = random_gaussian_kernel(r, n);
        Embedding e = rank_m_embedding(Objective::NC, Affinity::dense(A), pick(r, 1, n));
        Labeling S = random_labeling(r, n, K);
        CHECK(rel(spectral_energy(e, S), km_energy(e.points, e.weights, S)) < 1e-10);
        Labeling St = random_labeling(r, n, K, true);
        UnaryBound b = spectral_unary_bound(e, St);
        CHECK(rel(b.value(St), spectral_energy(e, St)) < 1e-10);
        for (int u = 0; u < 20; ++u) {
            Labeling S2 = random_labeling(r, n, K);
            CHECK(b.value(S2) >= spectral_energy(e, S2) - 1e-9);
        }
    }
}

TEST_CASE("rank outside 0..n is rejected") {
    Rng r(49);
    Affinity A = Affinity::dense(random_gaussian_kernel(r, 5));
    CHECK_THROWS_AS(rank_m_embedding(Objective::AA, A, 6), ParameterError);
}

}
