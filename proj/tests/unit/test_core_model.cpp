#include "helpers.hpp"

using namespace kcut;
using namespace testing;

TEST_SUITE("core_model") {

TEST_CASE("external labels round-trip") {
    Rng r(1);
    for (int t = 0; t < 200; ++t) {
        const int n = pick(r, 1, 40), K = pick(r, 1, 6);
        Labeling S = random_labeling(r, n, K);
        std::vector<int> ext = S.to_external();
        for (int v : ext) CHECK((v >= 1 && v <= K));
        CHECK(Labeling::from_external(ext, K) == S);
    }
}

TEST_CASE("labels outside 1..K are rejected") {
    CHECK_THROWS_AS(Labeling::from_external({1, 0, 2}, 2), ParameterError);
    CHECK_THROWS_AS(Labeling::from_external({1, 3}, 2), ParameterError);
    Labeling bad({0, 5}, 3);
    CHECK_THROWS_AS(bad.check(), ParameterError);
}

TEST_CASE("sizes, nonempty count and indicators agree") {
    Rng r(2);
    for (int t = 0; t < 100; ++t) {
        const int n = pick(r, 1, 30), K = pick(r, 1, 5);
        Labeling S = random_labeling(r, n, K);
        auto sz = S.sizes();
        auto X = indicators(S);
        int nonempty = 0, total = 0;
        for (int k = 0; k < K; ++k) {
            CHECK(X[k].sum() == doctest::Approx(sz[k]));
            nonempty += sz[k] > 0;
            total += sz[k];
        }
        CHECK(total == n);
        CHECK(S.nonempty_count() == nonempty);
        Vec sum = Vec::Zero(n);
        for (const auto& x : X) sum += x;
        CHECK(sum.isOnes());
    }
}

TEST_CASE("hash separates labelings and label counts") {
    Labeling a({0, 1, 1}, 2), b({0, 1, 0}, 2), c({0, 1, 1}, 3);
    CHECK(a.hash() == Labeling({0, 1, 1}, 2).hash());
    CHECK(a.hash() != b.hash());
    CHECK(a.hash() != c.hash());
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS(Dataset::from_features(Mat(0, 2)), ParameterError);
    Mat f = Mat::Zero(3, 2);
    f(1, 1) = std::nan("");
    CHECK_THROWS_AS(Dataset::from_features(f), ParameterError);

    Dataset d = Dataset::from_features(Mat::Zero(6, 1));
    d.grid = Grid{2, 3, 8};
    CHECK_NOTHROW(d.check());
    d.grid = Grid{2, 2, 8};
    CHECK_THROWS_AS(d.check(), DimensionError);
    d.grid = Grid{2, 3, 6};
    CHECK_THROWS_AS(d.check(), ParameterError);
    d.grid.reset();
    d.weights = Vec::Ones(6);
    CHECK_NOTHROW(d.check());
    (*d.weights)[2] = 0.0;
    CHECK_THROWS_AS(d.check(), ParameterError);
    d.weights = Vec::Ones(5);
    CHECK_THROWS_AS(d.check(), DimensionError);
}

TEST_CASE("grid indexing is row-major") {
    Grid g{3, 4, 4};
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(1, 0) == 4);
    CHECK(g.index(2, 3) == 11);
}

}
