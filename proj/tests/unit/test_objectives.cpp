#include "helpers.hpp"

#include <kcut/objectives.hpp>

using namespace kcut;
using namespace testing;

namespace {

// oracle: explicit double loops over each segment
double assoc(const Mat& A, const Labeling& S, int k) {
    double s = 0.0;
    for (int p = 0; p < S.n(); ++p)
        for (int q = 0; q < S.n(); ++q)
            if (S[p] == k && S[q] == k) s += A(p, q);
    return s;
}

double cut(const Mat& A, const Labeling& S, int k) {
    double s = 0.0;
    for (int p = 0; p < S.n(); ++p)
        for (int q = 0; q < S.n(); ++q)
            if (S[p] == k && S[q] != k) s += A(p, q);
    return s;
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("AA, AC and NC against direct sums") {
    Rng r(21);
    for (int t = 0; t < 100; ++t) {
        const int n = pick(r, 2, 20), K = pick(r, 1, 4);
        Mat A = random_symmetric(r, n);
        Affinity a = Affinity::dense(A);
        Labeling S = random_labeling(r, n, K);
        Vec d = A.rowwise().sum();
        double aa = 0, ac = 0, nc = 0;
        auto sz = S.sizes();
        for (int k = 0; k < K; ++k) {
            if (sz[k] == 0) continue;
            double vol = 0;
            for (int p = 0; p < n; ++p)
                if (S[p] == k) vol += d[p];
            aa -= assoc(A, S, k) / sz[k];
            ac += cut(A, S, k) / sz[k];
            nc -= assoc(A, S, k) / vol;
        }
        CHECK(rel(eval_aa(a, S), aa) < 1e-12);
        CHECK(rel(eval_ac(a, S), ac) < 1e-12);
        CHECK(rel(eval_nc(a, S), nc) < 1e-12);
        CHECK(rel(eval_aa(Affinity::sparse(A.sparseView()), S), aa) < 1e-12);
    }
}

TEST_CASE("pairwise forms reproduce every objective") {
    Rng r(22);
    for (int t = 0; t < 60; ++t) {
        const int n = pick(r, 2, 20), K = pick(r, 1, 4);
        Affinity a = Affinity::dense(random_symmetric(r, n));
        Labeling S = random_labeling(r, n, K);
        CHECK(rel(eval_pairwise(pairwise_form(Objective::AA, a), S), eval_aa(a, S)) < 1e-12);
        CHECK(rel(eval_pairwise(pairwise_form(Objective::AC, a), S), eval_ac(a, S)) < 1e-12);
        CHECK(rel(eval_pairwise(pairwise_form(Objective::NC, a), S), eval_nc(a, S)) < 1e-12);
        Vec w(n);
        for (int p = 0; p < n; ++p) w[p] = unif(r, 0.5, 2);
        CHECK(rel(eval_pairwise(pairwise_form(Objective::WKKM, a, w), S), eval_wkkm(a, w, S)) < 1e-12);
    }
}

TEST_CASE("segment association and volume") {
    Mat A(3, 3);
    A << 1, 2, 0, 2, 1, 3, 0, 3, 1;
    Labeling S({0, 0, 1}, 2);
    Vec as = segment_association(Affinity::dense(A), S);
    CHECK(as[0] == doctest::Approx(6.0));
    CHECK(as[1] == doctest::Approx(1.0));
    Vec v = segment_volume(Vec::Constant(3, 2.0), S);
    CHECK(v[0] == doctest::Approx(4.0));
    CHECK(v[1] == doctest::Approx(2.0));
}

TEST_CASE("NC rejects zero degrees, wKKM rejects non-positive weights") {
    Mat A = Mat::Zero(3, 3);
    A(0, 1) = A(1, 0) = 1.0;
    Labeling S({0, 1, 1}, 2);
    CHECK_THROWS_AS(eval_nc(Affinity::dense(A), S), DegenerateError);
    CHECK_THROWS_AS(eval_wkkm(Affinity::dense(A), Vec::Zero(3), S), DegenerateError);
    CHECK_THROWS_AS(eval_aa(Affinity::dense(A), Labeling({0, 1}, 2)), DimensionError);
}

TEST_CASE("MRF terms") {
    Labeling S({0, 0, 1, 2, 2}, 4);
    PottsEdges e{{{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 0.5}, {3, 4, 7.0}}};
    CHECK(eval_potts(e, S) == doctest::Approx(2.5));
    Vec h(4);
    h << 1, 10, 100, 1000;
    CHECK(eval_label_cost(S, h) == doctest::Approx(111));
    // factor {0,1,2}: 1 minority point; factor {0..4}: 3 outside the mode
    RobustPnPotts rp = RobustPnPotts::uniform({{0, 1, 2}, {0, 1, 2, 3, 4}}, 2.0);
    CHECK(eval_robust_pn(S, rp) == doctest::Approx(1.0 + 2.0));
    RobustPnPotts fr = RobustPnPotts::fractional({{0, 1, 2, 3, 4}}, 0.2);
    CHECK(fr.T[0] == doctest::Approx(1.0));

    JointEnergySpec spec;
    spec.affinity = Affinity::dense(Mat::Ones(5, 5));
    spec.objective = Objective::AA;
    spec.K = 4;
    spec.gamma = 0.5;
    spec.mrf = {e, LabelCost{h}, rp};
    EnergyBreakdown b = eval_joint(spec, S);
    CHECK(b.potts == doctest::Approx(2.5));
    CHECK(b.label_cost == doctest::Approx(111));
    CHECK(b.robust_pn == doctest::Approx(3.0));
    CHECK(b.total == doctest::Approx(b.clustering + 0.5 * (2.5 + 111 + 3.0)));
    CHECK(b.clustering == doctest::Approx(eval_aa(spec.affinity, S)));
}

TEST_CASE("contrast weights on a grid") {
    Dataset img;
    img.features = Mat(4, 1);
    img.features << 0, 0, 1, 1;  // 2x2, top row dark
    img.grid = Grid{2, 2, 4};
    PottsEdges e4 = contrast_weights(img, 4);
    CHECK(e4.edges.size() == 4);
    PottsEdges e8 = contrast_weights(img, 8);
    CHECK(e8.edges.size() == 6);
    double same = 0, diff = 0;
    for (const auto& ed : e4.edges) (img.features(ed.p, 0) == img.features(ed.q, 0) ? same : diff) = ed.w;
    CHECK(same > diff);
    PottsEdges len = contrast_weights(img, 4, PottsMode::Length);
    for (const auto& ed : len.edges) CHECK(ed.w == doctest::Approx(len.edges[0].w));
    Dataset no_grid = Dataset::from_features(Mat::Zero(4, 1));
    CHECK_THROWS_AS(contrast_weights(no_grid), ParameterError);
}

TEST_CASE("validate reports violations") {
    JointEnergySpec spec;
    spec.affinity = Affinity::dense(Mat::Ones(3, 3));
    spec.K = 2;
    CHECK(validate(spec, 3).ok());
    CHECK_FALSE(validate(spec, 4).ok());
    spec.hard = {0, 2, -1};
    CHECK_FALSE(validate(spec, 3).ok());
    spec.hard.clear();
    spec.gamma = -1;
    CHECK_FALSE(validate(spec, 3).ok());
    spec.gamma = 1;
    spec.mrf.push_back(PottsEdges{{{0, 0, 1.0}}});
    CHECK_FALSE(validate(spec, 3).ok());
    spec.mrf = {LabelCost{Vec::Ones(3)}};
    CHECK_FALSE(validate(spec, 3).ok());
}

TEST_CASE("objective names") {
    for (Objective o : {Objective::AA, Objective::AC, Objective::NC, Objective::WKKM})
        CHECK(objective_from_string(to_string(o)) == o);
    CHECK(objective_from_string("NC") == Objective::NC);
    CHECK_THROWS_AS(objective_from_string("xx"), ParameterError);
}

}
