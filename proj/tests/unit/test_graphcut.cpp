#include "helpers.hpp"

#include <kcut/graphcut.hpp>

using namespace kcut;
using namespace testing;

TEST_SUITE("graphcut") {

TEST_CASE("max flow equals the brute-force min cut") {
    Rng r(61);
    for (int t = 0; t < 200; ++t) {
        const int n = pick(r, 1, 10);
        FlowGraph g(n);
        std::vector<double> src(n), snk(n);
        std::vector<std::tuple<int, int, double, double>> edges;
        for (int p = 0; p < n; ++p) {
            src[p] = unif(r) < 0.6 ? unif(r, 0, 3) : 0.0;
            snk[p] = unif(r) < 0.6 ? unif(r, 0, 3) : 0.0;
            g.add_terminal(p, src[p], snk[p]);
        }
        for (int e = 0; e < 2 * n; ++e) {
            int p = pick(r, 0, n - 1), q = pick(r, 0, n - 1);
            if (p == q) continue;
            double a = unif(r, 0, 2), b = unif(r) < 0.5 ? 0.0 : unif(r, 0, 2);
            g.add_edge(p, q, a, b);
            edges.emplace_back(p, q, a, b);
        }
        double best = 1e300;
        for (int mask = 0; mask < (1 << n); ++mask) {
            // bit set: source side; cut pays src for sink-side nodes and snk for source-side ones
            double c = 0;
            for (int p = 0; p < n; ++p) c += (mask >> p & 1) ? snk[p] : src[p];
            for (auto [p, q, a, b] : edges) {
                bool sp = mask >> p & 1, sq = mask >> q & 1;
                if (sp && !sq) c += a;
                if (sq && !sp) c += b;
            }
            best = std::min(best, c);
        }
        double f = g.maxflow();
        CHECK(f == doctest::Approx(best).epsilon(1e-9));
        // the reported side assignment attains the cut value
        double c = 0;
        for (int p = 0; p < n; ++p) c += g.source_side(p) ? snk[p] : src[p];
        for (auto [p, q, a, b] : edges) {
            bool sp = g.source_side(p), sq = g.source_side(q);
            if (sp && !sq) c += a;
            if (sq && !sp) c += b;
        }
        CHECK(c == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("binary energy: exact minimum with pairwise and concave cardinality terms") {
    Rng r(62);
    for (int t = 0; t < 200; ++t) {
        const int n = pick(r, 1, 9);
        BinaryEnergy e(n);
        e.add_constant(unif(r, -1, 1));
        for (int i = 0; i < n; ++i) e.add_unary(i, unif(r, -2, 2), unif(r, -2, 2));
        for (int k = 0; k < n; ++k) {
            int i = pick(r, 0, n - 1), j = pick(r, 0, n - 1);
            if (i == j) continue;
            double e00 = unif(r, -1, 1), e11 = unif(r, -1, 1), e01 = unif(r, -1, 1);
            double e10 = e00 + e11 - e01 + unif(r, 0, 1);
            e.add_pairwise(i, j, e00, e01, e10, e11);
        }
        if (n >= 2 && t % 2 == 0) {
            std::vector<int> vars;
            for (int i = 0; i < n; ++i)
                if (unif(r) < 0.7) vars.push_back(i);
            // concave: min(T, s) style and a capped linear shape
            std::vector<double> g(vars.size() + 1);
            const double T = unif(r, 0, vars.size());
            const double scale = unif(r, 0.1, 2);
            for (size_t s = 0; s < g.size(); ++s) g[s] = scale * std::min<double>(s, T);
            e.add_concave_cardinality(vars, g);
        }
        double best = 1e300;
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<char> x(n);
            for (int i = 0; i < n; ++i) x[i] = mask >> i & 1;
            best = std::min(best, e.evaluate(x));
        }
        double v = 0;
        std::vector<char> x = e.minimize(&v);
        CHECK(v == doctest::Approx(best).epsilon(1e-9));
        CHECK(e.evaluate(x) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("non-submodular pairwise term is rejected") {
    BinaryEnergy e(2);
    CHECK_THROWS(e.add_pairwise(0, 1, 0.0, 0.0, 0.0, 1.0));
}

TEST_CASE("grid max flow: separable image splits along the boundary") {
    const int h = 12, w = 12;
    FlowGraph g(h * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int p = y * w + x;
            g.add_terminal(p, x < w / 2 ? 2.0 : 0.0, x < w / 2 ? 0.0 : 2.0);
            if (x + 1 < w) g.add_edge(p, p + 1, 0.5, 0.5);
            if (y + 1 < h) g.add_edge(p, p + w, 0.5, 0.5);
        }
    g.maxflow();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) CHECK(g.source_side(y * w + x) == (x < w / 2));
}

}
