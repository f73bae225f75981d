// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <kcut/experiments.hpp>
#include <kcut/kmeans.hpp>
#include <kcut/pipeline.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace kcut;

namespace {

using Rng = std::mt19937_64;

int failures = 0;

void line(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s [%2d] %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double unif(Rng& r, double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(r); }
int pick(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }

// Either a Gaussian kernel on random points (p.s.d.) or a random symmetric
// non-negative matrix (indefinite in general); degrees stay positive.
Mat random_affinity(Rng& r, int n) {
    if (unif(r) < 0.5) {
        Mat X(n, pick(r, 1, 3));
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(r, -1, 1);
        return gaussian_kernel(Dataset::from_features(X), unif(r, 0.2, 1.5));
    }
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = unif(r) < 0.7 ? unif(r, 0.01, 1.0) : 0.01;
    return A;
}

Labeling random_labeling(Rng& r, int n, int K, bool all_nonempty) {
    Labeling S(std::vector<int>(n), K);
    for (int p = 0; p < n; ++p) S[p] = pick(r, 0, K - 1);
    if (all_nonempty)
        for (int k = 0; k < K && k < n; ++k) S[k] = k;
    return S;
}

Objective random_objective(Rng& r) {
    const Objective o[3] = {Objective::AA, Objective::AC, Objective::NC};
    return o[pick(r, 0, 2)];
}

Vec random_relaxed(Rng& r, int n) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(r, 0.05, 1.0);
    return x;
}

// ---- 1: bound correctness ----
void bound_correctness() {
    auto t0 = std::chrono::steady_clock::now();
    Rng r(101);
    double worst_tangent = 0.0, worst_gap = 0.0, worst_joint = 0.0;
    for (int inst = 0; inst < 1000; ++inst) {
        const int n = pick(r, 4, 30), K = pick(r, 2, 4);
        const Objective obj = random_objective(r);
        Affinity A = Affinity::dense(random_affinity(r, n));
        ConcaveSurrogate s = build_surrogate(obj, A);
        Labeling St = random_labeling(r, n, K, false);
        UnaryBound b = taylor_unary_bound(s, St);
        worst_tangent = std::max(worst_tangent, rel(b.value(St), shifted_clustering_energy(s, St)));

        JointEnergySpec spec;
        spec.objective = obj;
        spec.affinity = A;
        spec.K = K;
        spec.gamma = unif(r, 0.0, 0.5);
        PottsEdges pe;
        for (int e = 0; e < 2 * n; ++e) {
            int p = pick(r, 0, n - 1), q = pick(r, 0, n - 1);
            if (p != q) pe.edges.push_back({p, q, unif(r)});
        }
        spec.mrf.push_back(pe);
        JointBound jb = joint_bound(spec, s, St);
        const double a0 = jb.value(St), e0 = eval_joint(spec, St).total;
        for (int t = 0; t < 200; ++t) {
            Labeling S = random_labeling(r, n, K, false);
            double e = shifted_clustering_energy(s, S);
            double scale = std::max(1.0, std::abs(e));
            worst_gap = std::min(worst_gap, (b.value(S) - e) / scale);
            // joint bound, relative to its touching point
            double ja = jb.value(S) - a0, je = eval_joint(spec, S).total - e0;
            worst_joint = std::min(worst_joint, (ja - je) / std::max(1.0, std::abs(je)));
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = worst_tangent <= 1e-9 && worst_gap >= -1e-9 && worst_joint >= -1e-9 && secs < 60.0;
    line(1, "bound_correctness", ok,
         fmt("1000 inst x 200 S: max |a(St)-E^(St)| rel=%.2e, min slack=%.2e, joint slack=%.2e, %.1fs",
             worst_tangent, worst_gap, worst_joint, secs));
}

// ---- 2: midpoint concavity ----
void midpoint_concavity() {
    Rng r(202);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = pick(r, 3, 30);
        ConcaveSurrogate s = build_surrogate(random_objective(r), Affinity::dense(random_affinity(r, n)));
        Vec x = random_relaxed(r, n), y = random_relaxed(r, n);
        double mid = relaxation_value(s, 0.5 * (x + y));
        double avg = 0.5 * (relaxation_value(s, x) + relaxation_value(s, y));
        worst = std::min(worst, (mid - avg) / std::max(1.0, std::abs(avg)));
    }
    line(2, "midpoint_concavity", worst >= -1e-9, fmt("1000 triples: min slack=%.2e", worst));
}

// ---- 3: gradient vs central differences ----
void gradient_check() {
    Rng r(303);
    double worst = 0.0;
    const double h = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const int n = pick(r, 3, 25);
        ConcaveSurrogate s = build_surrogate(random_objective(r), Affinity::dense(random_affinity(r, n)));
        Vec x = random_relaxed(r, n);
        Vec g = relaxation_gradient(s, x);
        Vec fd(n);
        for (int i = 0; i < n; ++i) {
            Vec a = x, b = x;
            a[i] += h;
            b[i] -= h;
            fd[i] = (relaxation_value(s, a) - relaxation_value(s, b)) / (2 * h);
        }
        worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
    line(3, "gradient_finite_difference", worst <= 1e-5, fmt("100 instances: max rel error=%.2e", worst));
}

// ---- 4: expansion steps on 4x4 grids ----
void grid_expansion_optimality() {
    int steps = 0, bad_steps = 0, bad_runs = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng r(400 + seed);
        Dataset img;
        img.features = Mat(16, 3);
        for (int p = 0; p < 16; ++p)
            for (int c = 0; c < 3; ++c) img.features(p, c) = (p % 4 < 2 ? 0.2 : 0.7) + unif(r, -0.25, 0.25);
        img.grid = Grid{4, 4, seed % 2 ? 8 : 4};
        JointEnergySpec spec;
        spec.objective = seed % 3 == 0 ? Objective::NC : (seed % 3 == 1 ? Objective::AA : Objective::AC);
        spec.K = 2;
        spec.affinity = Affinity::dense(gaussian_kernel(img, unif(r, 0.2, 0.6)));
        spec.gamma = unif(r, 0.05, 0.5);
        spec.mrf.push_back(contrast_weights(img, img.grid->connectivity));
        Labeling init = random_labeling(r, 16, 2, true);

        CutOptions opt;
        opt.observer = [&](const MoveEvent& ev) {
            Labeling arg;
            double best = brute_force_move_min(*ev.context, *ev.before, MoveKind::Expansion, ev.alpha, -1, &arg);
            double got = ev.context->energy(ev.result->proposal);
            double gap = (got - best) / std::max(1.0, std::abs(best));
            worst = std::max(worst, gap);
            ++steps;
            if (gap > 1e-9) ++bad_steps;
        };
        CutResult res = kernel_cut(spec, init, opt);
        if (eval_joint(spec, res.labeling).total > eval_joint(spec, init).total + 1e-12) ++bad_runs;
    }
    line(4, "grid_expansion_optimality", bad_steps == 0 && bad_runs == 0 && steps > 0,
         fmt("20 seeds, %d expansion steps: %d off-optimum (max gap %.2e), %d runs with E_final > E_init", steps,
             bad_steps, worst, bad_runs));
}

// ---- 5: equivalence chain ----
void equivalence_chain() {
    Rng r(505);
    double nc_wkkm = 0.0, shift = 0.0, kkm = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int n = pick(r, 3, 50), K = pick(r, 2, 4);
        Mat A = random_affinity(r, n);
        Affinity Aa = Affinity::dense(A);
        Labeling S = random_labeling(r, n, K, false);

        Vec d = Aa.degrees();
        Mat Kw = d.cwiseInverse().asDiagonal() * A * d.cwiseInverse().asDiagonal();
        nc_wkkm = std::max(nc_wkkm, rel(eval_nc(Aa, S), eval_wkkm(Affinity::dense(Kw), d, S)));

        const double delta = unif(r, -1.0, 2.0);
        for (Objective o : {Objective::AA, Objective::NC}) {
            PairwiseForm f = pairwise_form(o, Aa);
            PairwiseForm g{f.M.plus_diagonal(delta * f.w), f.w};
            double change = eval_pairwise(g, S) - eval_pairwise(f, S);
            shift = std::max(shift, std::abs(change + delta * S.nonempty_count()));
        }

        Mat B(n, pick(r, 1, n));
        for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = unif(r, -1, 1);
        Mat Kp = B * B.transpose();
        Vec w(n);
        for (int p = 0; p < n; ++p) w[p] = unif(r, 0.2, 2.0);
        Embedding e = exact_embedding(Kp);
        double phi2 = (w.array() * e.points.rowwise().squaredNorm().array()).sum();
        double lhs = eval_wkkm(Affinity::dense(Kp), w, S) + phi2;
        kkm = std::max(kkm, rel(lhs, km_energy(e.points, w, S)));
    }
    const bool ok = nc_wkkm <= 1e-12 && shift <= 1e-9 && kkm <= 1e-8;
    line(5, "equivalence_chain", ok,
         fmt("NC vs wKKM %.1e, shift vs delta*K %.1e, kKM vs KM(phi) %.1e", nc_wkkm, shift, kkm));
}

// ---- 6: exact rank spectral and kernel bounds agree ----
void full_rank_argmin() {
    Rng r(606);
    int mismatched = 0;
    for (int t = 0; t < 50; ++t) {
        const int n = pick(r, 6, 40), K = pick(r, 2, 4);
        const Objective obj = random_objective(r);
        Affinity A = Affinity::dense(random_affinity(r, n));
        ConcaveSurrogate s = build_surrogate(obj, A);
        RankOptions ro;
        ro.delta = s.delta;
        Embedding e = rank_m_embedding(obj, A, n, ro);
        Labeling St = random_labeling(r, n, K, true);
        UnaryBound kb = taylor_unary_bound(s, St), sb = spectral_unary_bound(e, St);
        bool same = true;
        for (int p = 0; p < n; ++p) {
            Eigen::Index a = 0, b = 0;
            kb.costs.row(p).minCoeff(&a);
            sb.costs.row(p).minCoeff(&b);
            same = same && a == b;
        }
        mismatched += !same;
    }
    line(6, "full_rank_argmin_match", mismatched == 0, fmt("50 instances at m = n: %d with differing argmin", mismatched));
}

// ---- 7: Frobenius error and optimal shift ----
void frobenius_and_shift() {
    Rng r(707);
    double formula = 0.0;
    int not_min = 0;
    for (int t = 0; t < 30; ++t) {
        const int n = pick(r, 10, 40);
        Mat X(n, 2);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(r, -1, 1);
        Affinity A = Affinity::dense(gaussian_kernel(Dataset::from_features(X), unif(r, 0.3, 1.0)));
        const int m = pick(r, 1, n - 1);
        RankOptions zero;
        zero.delta = 0.0;
        Embedding e = rank_m_embedding(Objective::AA, A, m, zero);
        EigenDecomposition full = eig_sym(A.to_dense());
        double expect = std::sqrt(full.values.tail(n - m).squaredNorm());
        double measured = (A.to_dense() - e.gram()).norm();
        formula = std::max({formula, std::abs(measured - expect), std::abs(e.frobenius_error() - expect)});

        Embedding opt = rank_m_embedding(Objective::AA, A, m);
        double at = frobenius_error(full, m, opt.delta);
        for (int i = -10; i <= 10; ++i) {
            double trial = frobenius_error(full, m, opt.delta + 0.01 * i);
            if (trial < at - 1e-12) ++not_min;
        }
    }
    line(7, "frobenius_error_and_shift", formula <= 1e-8 && not_min == 0,
         fmt("30 kernels: max |error - sqrt(sum lambda^2)|=%.1e, scan points below delta*: %d", formula, not_min));
}

// ---- 8: rings, pseudo bound vs kernel bound ----
void rings_pseudo() {
    int worse = 0, strict = 0;
    std::ostringstream det;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PseudoTrial t = pseudo_bound_trial(seed);
        if (t.pseudo_energy > t.kernel_energy + 1e-12) ++worse;
        if (t.pseudo_energy < t.kernel_energy - 1e-9) ++strict;
    }
    line(8, "rings_pseudo_vs_kernel", worse == 0 && strict >= 7,
         fmt("10 seeds: pseudo worse on %d, strictly better on %d", worse, strict));
}

// ---- 9: Breiman bias and its fixes ----
void breiman() {
    int density_ok = 0, knn_ok = 0, adaptive_ok = 0, camo_ok = 0;
    double min_knn = 100, min_adaptive = 100, worst_cut = 0, best_km = 100;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        BreimanTrial b = breiman_trial(seed);
        density_ok += b.minority_density > b.majority_density;
        knn_ok += b.knn_agreement >= 95.0;
        adaptive_ok += b.adaptive_agreement >= 95.0;
        min_knn = std::min(min_knn, b.knn_agreement);
        min_adaptive = std::min(min_adaptive, b.adaptive_agreement);
        CamouflageTrial c = camouflage_trial(seed);
        camo_ok += c.cut_error < c.km_error;
        worst_cut = std::max(worst_cut, c.cut_error);
        best_km = std::min(best_km, c.km_error);
    }
    line(9, "breiman_bias", density_ok == 10 && knn_ok == 10 && adaptive_ok == 10 && camo_ok == 10,
         fmt("dense minority %d/10, KNN >=95%% %d/10 (min %.2f), adaptive %d/10 (min %.2f), camouflage %d/10 "
             "(cut <= %.2f%%, KM >= %.2f%%)",
             density_ok, knn_ok, min_knn, adaptive_ok, min_adaptive, camo_ok, worst_cut, best_km));
}

// ---- 10: extreme bandwidth ----
void extreme_bandwidth() {
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) worst = std::min(worst, extreme_bandwidth_spearman(seed));
    line(10, "extreme_bandwidth_rank", worst >= 0.99, fmt("12 points, 5 seeds: min Spearman rho=%.6f", worst));
}

// ---- 11: bound update schedules ----
void schedules(const std::string& out_dir) {
    ScheduleTrial t = schedule_trial(0);
    int monotone = 0;
    std::string counts;
    for (const auto& tr : t.traces) {
        monotone += tr.true_energy_monotone();
        counts += fmt(" %s:%zu", tr.method.c_str(), tr.records.size());
    }
    Report rep = run_experiment("schedule_comparison", 0);
    bool emitted = false;
    std::filesystem::create_directories(out_dir);
    for (const auto& [file, content] : rep.artifacts) {
        std::ofstream(std::filesystem::path(out_dir) / file) << content;
        emitted = emitted || !content.empty();
    }
    line(11, "schedule_monotone_report", monotone == 3 && t.traces.size() == 3 && emitted && rep.passed(),
         fmt("%d/3 monotone traces, report %s;%s", monotone, emitted ? "written" : "missing", counts.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out = argc > 1 ? argv[1] : "acceptance_out";
    const std::vector<std::pair<std::string, std::function<void()>>> all = {
        {"1", bound_correctness},    {"2", midpoint_concavity}, {"3", gradient_check},
        {"4", grid_expansion_optimality}, {"5", equivalence_chain}, {"6", full_rank_argmin},
        {"7", frobenius_and_shift},  {"8", rings_pseudo},       {"9", breiman},
        {"10", extreme_bandwidth},   {"11", [&] { schedules(out); }}};
    for (const auto& [id, fn] : all) {
        try {
            fn();
        } catch (const std::exception& e) {
            line(std::stoi(id), "exception", false, e.what());
        }
    }
    std::printf("%s: %d of %zu criteria failed\n", failures ? "FAILED" : "OK", failures, all.size());
    return failures ? 1 : 0;
}
