#include "kcut/experiments.hpp"

#include "kcut/kmeans.hpp"
#include "kcut/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace kcut {

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> experiment_names() {
    return {"breiman", "camouflage", "embedding_dims", "extreme_bandwidth", "pseudo_bound", "rings",
            "schedule_comparison"};
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> energies(const RunTrace& t, bool true_e = true) {
    std::vector<double> v;
    for (auto& r : t.records) v.push_back(true_e ? r.true_energy : r.energy);
    return v;
}

// split by a line through the origin at a seeded angle
Labeling line_split(const Mat& pts, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(0.0, kPi);
    const double a = u(rng);
    Labeling S(std::vector<int>(pts.rows(), 0), 2);
    for (Eigen::Index p = 0; p < pts.rows(); ++p)
        S[static_cast<int>(p)] = std::cos(a) * pts(p, 0) + std::sin(a) * pts(p, 1) > 0 ? 1 : 0;
    return S;
}

double mean_over(const Vec& v, const Labeling& S, int k) {
    double s = 0;
    int c = 0;
    for (int p = 0; p < S.n(); ++p)
        if (S[p] == k) {
            s += v[p];
            ++c;
        }
    return c ? s / c : 0.0;
}

// lowest-energy kKM result over random restarts and a K-means initialization
Labeling best_kernel_kmeans(const Affinity& K, const Mat& points, int labels, std::uint64_t seed, int restarts) {
    KMOptions ko;
    ko.K = labels;
    ko.seed = seed;
    ko.restarts = restarts;
    KMState a = run_kernel_kmeans(K, std::nullopt, ko);
    Labeling km = run_kmeans(points, std::nullopt, ko).labeling;
    ko.init = InitKind::User;
    ko.user_init = km;
    KMState b = run_kernel_kmeans(K, std::nullopt, ko);
    return kkm_energy(K, std::nullopt, b.labeling) < kkm_energy(K, std::nullopt, a.labeling) ? b.labeling : a.labeling;
}

}  // namespace

RingsParams default_rings() { return RingsParams{}; }
double rings_sigma() { return 0.25; }

PseudoTrial pseudo_bound_trial(std::uint64_t seed) {
    PseudoTrial t;
    t.data = two_rings(default_rings(), seed);
    JointEnergySpec spec;
    spec.objective = Objective::NC;
    spec.K = 2;
    spec.affinity = Affinity::dense(gaussian_kernel(t.data.data, rings_sigma()));
    t.init = line_split(t.data.data.features, seed);
    t.init_energy = eval_joint(spec, t.init).total;
    CutResult kc = kernel_cut(spec, t.init);
    CutResult pc = pseudo_bound_cut(spec, t.init);
    t.kernel_energy = eval_joint(spec, kc.labeling).total;
    t.pseudo_energy = eval_joint(spec, pc.labeling).total;
    t.kernel_nmi = nmi(kc.labeling.labels, t.data.truth);
    t.pseudo_nmi = nmi(pc.labeling.labels, t.data.truth);
    t.kernel_trace = kc.trace;
    t.pseudo_trace = pc.trace;
    t.kernel_labels = kc.labeling;
    t.pseudo_labels = pc.labeling;
    return t;
}

BreimanTrial breiman_trial(std::uint64_t seed, const BreimanConfig& cfg) {
    BreimanTrial t;
    t.data = dense_blob_plus_background(DenseBlobParams{}, seed);
    const Dataset& d = t.data.data;

    Affinity small = Affinity::dense(gaussian_kernel(d, cfg.small_sigma));
    t.small_sigma = best_kernel_kmeans(small, d.features, 2, seed, 5);
    auto sz = t.small_sigma.sizes();
    const int minority = sz[0] <= sz[1] ? 0 : 1;
    t.minority_fraction = static_cast<double>(sz[minority]) / d.n();
    t.minority_density = mean_over(t.data.density, t.small_sigma, minority);
    t.majority_density = mean_over(t.data.density, t.small_sigma, 1 - minority);

    Affinity knn = Affinity::sparse(knn_affinity(d, cfg.knn, std::nullopt, seed));
    t.knn = best_kernel_kmeans(knn, d.features, 2, seed, 5);
    t.knn_agreement = 100.0 - best_permutation_error(t.knn.labels, t.data.truth);

    KernelPolicy ap;
    ap.kind = KernelPolicy::Kind::Adaptive;
    Affinity adaptive = build_affinity(d, ap, seed);
    t.adaptive = best_kernel_kmeans(adaptive, d.features, 2, seed, 5);
    t.adaptive_agreement = 100.0 - best_permutation_error(t.adaptive.labels, t.data.truth);

    Affinity large = Affinity::dense(gaussian_kernel(d, cfg.large_sigma));
    Labeling L = best_kernel_kmeans(large, d.features, 2, seed, 5);
    auto lz = L.sizes();
    t.large_sigma_size_ratio = static_cast<double>(std::min(lz[0], lz[1])) / std::max(1, std::max(lz[0], lz[1]));
    return t;
}

CamouflageTrial camouflage_trial(std::uint64_t seed) {
    CamouflageTrial t;
    t.image = camouflage_image(CamouflageParams{}, seed);
    const Grid g = *t.image.image.grid;
    FeatureOptions fo;
    fo.color = ColorSpace::Rgb;
    Dataset feats = image_features(t.image.image.features, g, fo);

    // scribbles: a short stroke inside the object, the image border for background
    t.hard.assign(g.height * g.width, -1);
    int sy = 0, sx = 0, cnt = 0;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (t.image.truth[g.index(y, x)] == 1) {
                sy += y;
                sx += x;
                ++cnt;
            }
    sy /= std::max(cnt, 1);
    sx /= std::max(cnt, 1);
    rasterize_stroke(t.hard, g, {{sx - 3.0, static_cast<double>(sy)}, {sx + 3.0, static_cast<double>(sy)}}, 1.5, 1);
    const double W = g.width - 1, H = g.height - 1;
    rasterize_stroke(t.hard, g, {{0, 0}, {W, 0}, {W, H}, {0, H}, {0, 0}}, 1.0, 0);

    SegmentParams prm;
    prm.objective = Objective::AA;
    prm.kernel = KernelPolicy::parse("knn:100");
    prm.gamma = 0.5;
    prm.K = 2;
    prm.seed = seed;
    SegmentationProblem sp = build_segmentation(feats, prm, t.hard);
    Labeling init = seeded_init(feats, t.hard, 2, seed);
    t.cut = kernel_cut(sp.spec, init).labeling;
    t.cut_error = error_rate(t.cut.labels, t.image.truth);

    KMOptions ko;
    ko.K = 2;
    ko.seed = seed;
    t.km = run_kmeans(feats.features, std::nullopt, ko).labeling;
    t.km_error = best_permutation_error(t.km.labels, t.image.truth);
    return t;
}

double extreme_bandwidth_spearman(std::uint64_t seed, double sigma_factor) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Mat pts(12, 2);
    for (int p = 0; p < 12; ++p) pts.row(p) << z(rng), z(rng);
    const double sigma = sigma_factor * median_pairwise_distance(pts);
    std::vector<double> kkm, var;
    for (const Labeling& S : all_two_partitions(12)) {
        kkm.push_back(pairwise_kkm_energy(pts, sigma, S));
        var.push_back(km_energy(pts, std::nullopt, S));
    }
    return spearman(kkm, var);
}

ScheduleTrial schedule_trial(std::uint64_t seed) {
    BlobsParams bp;
    const double c[4][2] = {{0, 0}, {3, 0}, {0, 3}, {3, 3}};
    for (int k = 0; k < 4; ++k) {
        bp.counts.push_back(40);
        Vec m(2);
        m << c[k][0], c[k][1];
        bp.centers.push_back(m);
        bp.covariances.push_back(Mat::Identity(2, 2) * 0.8);
    }
    Synthetic s = gaussian_blobs(bp, seed);
    JointEnergySpec spec;
    spec.objective = Objective::NC;
    spec.K = 4;
    SpMat A = knn_affinity(s.data, 10, std::nullopt, seed);
    spec.affinity = Affinity::sparse(A);
    PottsEdges pe;
    for (int p = 0; p < A.outerSize(); ++p)
        for (SpMat::InnerIterator it(A, p); it; ++it)
            if (it.col() > p) pe.edges.push_back({p, static_cast<int>(it.col()), 1.0});
    spec.mrf.push_back(pe);
    spec.gamma = 0.01;

    KMOptions ko;
    ko.K = 4;
    ko.seed = seed;
    ko.restarts = 1;
    ko.max_iters = 1;
    Labeling init = run_kmeans(s.data.features, std::nullopt, ko).labeling;
    ScheduleTrial t;
    for (BoundPolicy pol : {BoundPolicy::AfterLoop, BoundPolicy::AfterEachMove, BoundPolicy::AtConvergence}) {
        CutOptions opt;
        opt.schedule.policy = pol;
        t.traces.push_back(kernel_cut(spec, init, opt).trace);
        t.traces.back().method = std::string("kernel_cut/") + to_string(pol);
    }
    return t;
}

EmbeddingDimsTrial embedding_dims_trial(std::uint64_t seed) {
    Synthetic s = two_rings(default_rings(), seed);
    JointEnergySpec spec;
    spec.objective = Objective::NC;
    spec.K = 2;
    spec.affinity = Affinity::sparse(knn_affinity(s.data, 10, std::nullopt, seed));
    Labeling init = line_split(s.data.features, seed);
    EmbeddingDimsTrial t;
    for (int m : {2, 5, 10, 20, 50}) {
        SpectralOptions so;
        so.m = m;
        CutResult r = spectral_cut(spec, init, so);
        RankOptions ro;
        Embedding e = rank_m_embedding(spec.objective, spec.affinity, m, ro);
        t.ranks.push_back(m);
        t.traces.push_back(r.trace);
        t.relative_errors.push_back(e.relative_frobenius_error());
    }
    return t;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Report exp_pseudo_bound(std::uint64_t seed) {
    Report r;
    int strict = 0, ok = 0;
    const int trials = 10;
    for (int i = 0; i < trials; ++i) {
        PseudoTrial t = pseudo_bound_trial(seed + i);
        const bool le = t.pseudo_energy <= t.kernel_energy + 1e-9 * std::abs(t.kernel_energy);
        ok += le;
        strict += t.pseudo_energy < t.kernel_energy - 1e-9 * std::abs(t.kernel_energy);
        r.metric("kernel_energy_" + std::to_string(i), t.kernel_energy);
        r.metric("pseudo_energy_" + std::to_string(i), t.pseudo_energy);
        if (i == 0) {
            r.series.push_back({"kernel_cut", energies(t.kernel_trace)});
            r.series.push_back({"pseudo_bound_cut", energies(t.pseudo_trace)});
            r.artifacts.push_back({"kernel_cut.svg", svg_scatter(t.data.data.features, t.kernel_labels.labels, "kernel bound")});
            r.artifacts.push_back({"pseudo_bound.svg", svg_scatter(t.data.data.features, t.pseudo_labels.labels, "pseudo-bound")});
        }
    }
    r.metric("strict_improvements", strict);
    r.check("pseudo_le_kernel_all", ok == trials, std::to_string(ok) + "/" + std::to_string(trials));
    r.check("pseudo_strict_at_least_7", strict >= 7, std::to_string(strict) + "/" + std::to_string(trials));
    r.artifacts.push_back({"energy.svg", svg_lines(r.series, "NC energy per outer iteration", "iteration", "energy")});
    return r;
}

Report exp_rings(std::uint64_t seed) {
    Report r;
    PseudoTrial t = pseudo_bound_trial(seed);
    JointEnergySpec spec;
    spec.objective = Objective::NC;
    spec.K = 2;
    spec.affinity = Affinity::dense(gaussian_kernel(t.data.data, rings_sigma()));
    SpectralOptions so;
    so.m = 10;
    CutResult sc = spectral_cut(spec, t.init, so);
    Labeling si = spectral_initialization(spec, seed);
    CutResult ki = kernel_cut(spec, si);
    r.metric("init_energy", t.init_energy);
    r.metric("kernel_energy", t.kernel_energy);
    r.metric("pseudo_energy", t.pseudo_energy);
    r.metric("spectral_cut_energy", eval_joint(spec, sc.labeling).total);
    r.metric("spectral_init_kernel_energy", eval_joint(spec, ki.labeling).total);
    r.metric("kernel_nmi", t.kernel_nmi);
    r.metric("pseudo_nmi", t.pseudo_nmi);
    r.metric("spectral_init_kernel_nmi", nmi(ki.labeling.labels, t.data.truth));
    r.check("kernel_cut_monotone", t.kernel_trace.true_energy_monotone());
    r.check("pseudo_le_kernel", t.pseudo_energy <= t.kernel_energy + 1e-9 * std::abs(t.kernel_energy));
    r.artifacts.push_back({"init.svg", svg_scatter(t.data.data.features, t.init.labels, "initialization")});
    r.artifacts.push_back({"kernel_cut.svg", svg_scatter(t.data.data.features, t.kernel_labels.labels, "kernel bound")});
    r.artifacts.push_back({"pseudo_bound.svg", svg_scatter(t.data.data.features, t.pseudo_labels.labels, "pseudo-bound")});
    r.artifacts.push_back({"spectral_init.svg", svg_scatter(t.data.data.features, ki.labeling.labels, "spectral init + kernel cut")});
    return r;
}

Report exp_breiman(std::uint64_t seed) {
    Report r;
    int density_ok = 0, knn_ok = 0;
    const int trials = 10;
    double worst_knn = 100.0, worst_adaptive = 100.0, min_ratio = 1.0;
    for (int i = 0; i < trials; ++i) {
        BreimanTrial t = breiman_trial(seed + i);
        density_ok += t.minority_density > t.majority_density;
        knn_ok += t.knn_agreement >= 95.0;
        worst_knn = std::min(worst_knn, t.knn_agreement);
        worst_adaptive = std::min(worst_adaptive, t.adaptive_agreement);
        min_ratio = std::min(min_ratio, t.large_sigma_size_ratio);
        if (i == 0) {
            r.metric("minority_density", t.minority_density);
            r.metric("majority_density", t.majority_density);
            r.metric("minority_fraction", t.minority_fraction);
            const Mat& X = t.data.data.features;
            r.artifacts.push_back({"small_sigma.svg", svg_scatter(X, t.small_sigma.labels, "fixed small width")});
            r.artifacts.push_back({"knn.svg", svg_scatter(X, t.knn.labels, "KNN kernel")});
            r.artifacts.push_back({"adaptive.svg", svg_scatter(X, t.adaptive.labels, "adaptive width")});
        }
    }
    r.metric("worst_knn_agreement", worst_knn);
    r.metric("worst_adaptive_agreement", worst_adaptive);
    r.metric("min_large_sigma_size_ratio", min_ratio);
    r.check("small_sigma_minority_denser", density_ok == trials, std::to_string(density_ok) + "/10");
    r.check("knn_recovers_split", knn_ok == trials, std::to_string(knn_ok) + "/10");
    return r;
}

Report exp_camouflage(std::uint64_t seed) {
    Report r;
    int wins = 0;
    for (int i = 0; i < 10; ++i) {
        CamouflageTrial t = camouflage_trial(seed + i);
        wins += t.cut_error < t.km_error;
        r.metric("cut_error_" + std::to_string(i), t.cut_error);
        r.metric("km_error_" + std::to_string(i), t.km_error);
    }
    r.check("cut_beats_kmeans", wins == 10, std::to_string(wins) + "/10");
    return r;
}

Report exp_schedule(std::uint64_t seed) {
    Report r;
    ScheduleTrial t = schedule_trial(seed);
    for (auto& tr : t.traces) {
        r.series.push_back({tr.method, energies(tr)});
        r.metric(tr.method + "/final", tr.records.back().true_energy);
        r.metric(tr.method + "/iterations", static_cast<double>(tr.records.size() - 1));
        r.check(tr.method + "/monotone", tr.true_energy_monotone());
    }
    r.artifacts.push_back({"schedules.svg", svg_lines(r.series, "energy per outer iteration", "iteration", "E")});
    return r;
}

Report exp_embedding_dims(std::uint64_t seed) {
    Report r;
    EmbeddingDimsTrial t = embedding_dims_trial(seed);
    for (size_t i = 0; i < t.ranks.size(); ++i) {
        const std::string m = "m=" + std::to_string(t.ranks[i]);
        r.series.push_back({m + " approx", energies(t.traces[i], false)});
        r.series.push_back({m + " true", energies(t.traces[i], true)});
        r.metric(m + "/relative_frobenius_error", t.relative_errors[i]);
        r.metric(m + "/final_true_energy", t.traces[i].records.back().true_energy);
        r.check(m + "/approx_monotone", t.traces[i].monotone());
    }
    r.artifacts.push_back({"embedding_dims.svg", svg_lines(r.series, "spectral cut energies", "iteration", "energy")});
    return r;
}

Report exp_extreme_bandwidth(std::uint64_t seed) {
    Report r;
    double rho = extreme_bandwidth_spearman(seed);
    r.metric("spearman", rho);
    r.check("spearman_ge_0.99", rho >= 0.99, fmt(rho));
    return r;
}

}  // namespace

Report run_experiment(const std::string& name, std::uint64_t seed) {
    Report r;
    if (name == "pseudo_bound") r = exp_pseudo_bound(seed);
    else if (name == "rings") r = exp_rings(seed);
    else if (name == "breiman") r = exp_breiman(seed);
    else if (name == "camouflage") r = exp_camouflage(seed);
    else if (name == "schedule_comparison") r = exp_schedule(seed);
    else if (name == "embedding_dims") r = exp_embedding_dims(seed);
    else if (name == "extreme_bandwidth") r = exp_extreme_bandwidth(seed);
    else {
        std::string list;
        for (auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
        throw ParameterError("unknown experiment '" + name + "'; available: " + list);
    }
    r.name = name;
    r.seed = seed;
    return r;
}

}  // namespace kcut
