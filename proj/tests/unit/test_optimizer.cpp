#include "helpers.hpp"

#include <kcut/analysis.hpp>
#include <kcut/optimizer.hpp>

using namespace kcut;
using namespace testing;

namespace {

JointEnergySpec blob_spec(Rng& r, Objective o, int n, int K, double gamma, Mat* points = nullptr) {
    Mat X(n, 2);
    for (int p = 0; p < n; ++p) X.row(p) << 3.0 * (p % K) + unif(r, -1, 1), unif(r, -1, 1);
    JointEnergySpec spec;
    spec.objective = o;
    spec.K = K;
    spec.affinity = Affinity::dense(gaussian_kernel(Dataset::from_features(X), 1.0));
    spec.gamma = gamma;
    if (gamma > 0) {
        PottsEdges pe;
        for (int p = 0; p + 1 < n; ++p) pe.edges.push_back({p, p + 1, 0.2});
        spec.mrf.push_back(pe);
    }
    if (points) *points = X;
    return spec;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("kernel cut: monotone true energy, bound above energy, every policy and move kind") {
    Rng r(81);
    for (int t = 0; t < 24; ++t) {
        const Objective o[3] = {Objective::AA, Objective::AC, Objective::NC};
        JointEnergySpec spec = blob_spec(r, o[t % 3], 40, pick(r, 2, 3), t % 2 ? 0.1 : 0.0);
        Labeling init = random_labeling(r, 40, spec.K);
        CutOptions opt;
        opt.schedule.policy = static_cast<BoundPolicy>(t % 3);
        opt.moves = t % 4 < 2 ? MoveKind::Expansion : MoveKind::Swap;
        CutResult res = kernel_cut(spec, init, opt);
        CHECK(res.trace.true_energy_monotone());
        CHECK(res.trace.monotone());
        CHECK(eval_joint(spec, res.labeling).total <= eval_joint(spec, init).total + 1e-12);
        CHECK(res.trace.records.front().true_energy == doctest::Approx(eval_joint(spec, init).total));
        CHECK(res.trace.records.back().true_energy == doctest::Approx(eval_joint(spec, res.labeling).total));
        for (size_t i = 1; i < res.trace.records.size(); ++i) {
            const auto& rec = res.trace.records[i];
            CHECK(rec.bound >= rec.true_energy - 1e-9 * std::max(1.0, std::abs(rec.true_energy)));
        }
    }
}

TEST_CASE("hard constraints hold for every optimizer") {
    Rng r(82);
    JointEnergySpec spec = blob_spec(r, Objective::NC, 30, 2, 0.1);
    spec.hard.assign(30, -1);
    spec.hard[0] = 1;
    spec.hard[1] = 0;
    spec.hard[29] = 0;
    Labeling init = apply_hard(random_labeling(r, 30, 2), spec.hard);
    for (int which = 0; which < 3; ++which) {
        CutResult res = which == 0 ? kernel_cut(spec, init) : which == 1 ? spectral_cut(spec, init) : pseudo_bound_cut(spec, init);
        CHECK(res.labeling[0] == 1);
        CHECK(res.labeling[1] == 0);
        CHECK(res.labeling[29] == 0);
    }
}

TEST_CASE("spectral cut descends its approximate energy") {
    Rng r(83);
    for (int m : {1, 3, 10, 40}) {
        JointEnergySpec spec = blob_spec(r, Objective::NC, 40, 2, 0.05);
        SpectralOptions so;
        so.m = m;
        CutResult res = spectral_cut(spec, random_labeling(r, 40, 2), so);
        CHECK(res.trace.monotone());
        CHECK(res.trace.records.back().true_energy == doctest::Approx(eval_joint(spec, res.labeling).total));
    }
}

TEST_CASE("pseudo-bound cut never ends above its starting energy") {
    Rng r(84);
    for (int t = 0; t < 10; ++t) {
        JointEnergySpec spec = blob_spec(r, t % 2 ? Objective::AA : Objective::NC, 36, 2, t % 3 ? 0.0 : 0.1);
        Labeling init = random_labeling(r, 36, 2);
        CutResult p = pseudo_bound_cut(spec, init);
        CHECK(p.trace.true_energy_monotone());
        CHECK(eval_joint(spec, p.labeling).total <= eval_joint(spec, init).total + 1e-12);
    }
}

TEST_CASE("delta sweep lists the labelings of the lower envelope") {
    Rng r(85);
    for (int t = 0; t < 20; ++t) {
        const int n = pick(r, 4, 20), K = pick(r, 2, 4);
        Affinity A = Affinity::dense(random_symmetric(r, n));
        Labeling St = random_labeling(r, n, K, true);
        PseudoBoundParts parts = pseudo_bound_parts(pairwise_form(Objective::NC, A), St);
        DeltaSweep sw = enumerate_delta_sweep(parts, St);
        REQUIRE(sw.labelings.size() == sw.breakpoints.size() + 1);
        for (size_t i = 1; i < sw.breakpoints.size(); ++i) CHECK(sw.breakpoints[i] >= sw.breakpoints[i - 1]);
        // between breakpoints the listed labeling is the per-point argmin
        for (size_t i = 0; i < sw.labelings.size(); ++i) {
            double lo = i == 0 ? (sw.breakpoints.empty() ? 0.0 : sw.breakpoints[0] - 1.0) : sw.breakpoints[i - 1];
            double hi = i < sw.breakpoints.size() ? sw.breakpoints[i] : lo + 2.0;
            if (hi - lo < 1e-9) continue;
            double mid = 0.5 * (lo + hi);
            Mat c = parts.at(mid).costs;
            for (int p = 0; p < n; ++p) {
                double got = c(p, sw.labelings[i][p]);
                CHECK(got <= c.row(p).minCoeff() + 1e-9 * std::max(1.0, std::abs(got)));
            }
        }
    }
}

TEST_CASE("same input and options give identical results") {
    Rng r(86);
    JointEnergySpec spec = blob_spec(r, Objective::AA, 50, 3, 0.1);
    Labeling init = random_labeling(r, 50, 3);
    CHECK(kernel_cut(spec, init).labeling == kernel_cut(spec, init).labeling);
    CHECK(pseudo_bound_cut(spec, init).labeling == pseudo_bound_cut(spec, init).labeling);
}

TEST_CASE("spectral initialization on separated blobs") {
    Rng r(87);
    Mat X;
    JointEnergySpec spec = blob_spec(r, Objective::NC, 60, 3, 0.0, &X);
    Labeling s = spectral_initialization(spec, 1);
    std::vector<int> truth(60);
    for (int p = 0; p < 60; ++p) truth[p] = p % 3;
    CHECK(nmi(s.labels, truth) > 0.9);
}

TEST_CASE("input validation") {
    Rng r(88);
    JointEnergySpec spec = blob_spec(r, Objective::NC, 10, 2, 0.0);
    CHECK_THROWS_AS(kernel_cut(spec, random_labeling(r, 10, 3)), ParameterError);
    CHECK_THROWS(kernel_cut(spec, random_labeling(r, 9, 2)));
    CHECK(bound_policy_from_string("loop") == BoundPolicy::AfterLoop);
    CHECK(bound_policy_from_string("move") == BoundPolicy::AfterEachMove);
    CHECK(bound_policy_from_string("converge") == BoundPolicy::AtConvergence);
    CHECK_THROWS_AS(bound_policy_from_string("sometimes"), ParameterError);
}

TEST_CASE("trace serialization") {
    RunTrace t;
    t.method = "m";
    t.records.push_back({0, -1.0, -1.0, -1.0, 0.5, 7, 0.0, 0});
    t.records.push_back({1, -2.0, -2.0, -2.0, 0.5, 8, 0.0, 2});
    CHECK(t.monotone());
    std::string j = t.to_jsonl();
    CHECK(std::count(j.begin(), j.end(), '\n') == 2);
    CHECK(j.find("\"method\":\"m\"") != std::string::npos);
    std::string c = t.to_csv();
    CHECK(c.rfind("method,iteration", 0) == 0);
    t.records.push_back({2, -1.5, -1.5, -1.5, 0.5, 9, 0.0, 1});
    CHECK_FALSE(t.monotone());
}

}
