#include "commands.hpp"

#include <kcut/experiments.hpp>
#include <kcut/kmeans.hpp>
#include <kcut/knn.hpp>
#include <kcut/pipeline.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace kcut::app {

namespace {

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("missing ") + what + " path");
    if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw UsageError("cannot create output directory: " + dir);
    return p;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path.string(), j.dump(2) + "\n"); }

Objective objective_of(const RunConfig& cfg) {
    try {
        return objective_from_string(cfg.objective);
    } catch (const kcut::Error& e) {
        throw UsageError(e.what());
    }
}

PottsEdges knn_potts(const Dataset& data, int k, std::uint64_t seed) {
    SpMat G = knn_affinity(data, k, std::nullopt, seed);
    PottsEdges pe;
    for (int p = 0; p < G.outerSize(); ++p)
        for (SpMat::InnerIterator it(G, p); it; ++it)
            if (it.col() > p) pe.edges.push_back({p, static_cast<int>(it.col()), 1.0});
    return pe;
}

std::vector<std::vector<int>> grid_patches(const Grid& g, int side) {
    std::vector<std::vector<int>> f;
    for (int y0 = 0; y0 < g.height; y0 += side)
        for (int x0 = 0; x0 < g.width; x0 += side) {
            std::vector<int> c;
            for (int y = y0; y < std::min(g.height, y0 + side); ++y)
                for (int x = x0; x < std::min(g.width, x0 + side); ++x) c.push_back(g.index(y, x));
            f.push_back(std::move(c));
        }
    return f;
}

void add_generic_terms(const RunConfig& cfg, JointEnergySpec& spec) {
    if (cfg.label_cost > 0) spec.mrf.push_back(LabelCost{Vec::Constant(cfg.K, cfg.label_cost)});
}

void check_gamma(const JointEnergySpec& spec) {
    if (!spec.mrf.empty() && spec.gamma <= 0)
        throw UsageError("MRF terms are scaled by gamma; set --gamma > 0");
}

Labeling initial(const RunConfig& cfg, const JointEnergySpec& spec, const Dataset* data) {
    const int n = spec.affinity.n();
    if (cfg.init == "spectral" || (cfg.init == "kmeans" && !data)) return spectral_initialization(spec, cfg.seed);
    KMOptions ko;
    ko.K = cfg.K;
    ko.seed = cfg.seed;
    if (cfg.init == "random") return initial_labeling(n, ko, nullptr, cfg.seed);
    return run_kmeans(data->features, std::nullopt, ko).labeling;
}

nlohmann::json metrics_json(const std::vector<int>& labels, const std::vector<int>& truth) {
    if (labels.size() != truth.size()) throw UsageError("ground truth has a different number of points");
    nlohmann::json m;
    m["nmi"] = nmi(labels, truth);
    m["variation_of_information"] = variation_of_information(labels, truth);
    m["covering"] = covering(labels, truth);
    int kl = 1 + *std::max_element(labels.begin(), labels.end());
    int kt = 1 + *std::max_element(truth.begin(), truth.end());
    if (std::max(kl, kt) <= 9) m["error"] = best_permutation_error(labels, truth);
    return m;
}

// Truth masks hold either labels 1..K or a binary 0/255 mask.
std::vector<int> truth_from_mask(const Image& gray, int K) {
    int hi = *std::max_element(gray.pixels.begin(), gray.pixels.end());
    int lo = *std::min_element(gray.pixels.begin(), gray.pixels.end());
    std::vector<int> t(gray.size());
    for (int p = 0; p < gray.size(); ++p)
        t[p] = (lo >= 1 && hi <= K) ? gray.pixels[p] - 1 : (gray.pixels[p] > 127 ? 1 : 0);
    return t;
}

nlohmann::json run_json(const CutResult& r, const JointEnergySpec& spec) {
    nlohmann::json j;
    j["method"] = r.trace.method;
    j["energy"] = energy_json(eval_joint(spec, r.labeling));
    j["delta"] = r.delta;
    j["outer_iterations"] = r.trace.records.empty() ? 0 : r.trace.records.back().iteration;
    j["true_energy_monotone"] = r.trace.true_energy_monotone();
    j["segment_sizes"] = r.labeling.sizes();
    return j;
}

void write_trace(const fs::path& dir, const RunTrace& t) {
    write_text((dir / "trace.jsonl").string(), t.to_jsonl());
    write_text((dir / "trace.csv").string(), t.to_csv());
}

}  // namespace

CutOptions cut_options(const RunConfig& cfg) {
    CutOptions opt;
    opt.schedule.policy = bound_policy_from_string(cfg.schedule);
    opt.schedule.max_outer = cfg.max_outer;
    opt.schedule.tol = cfg.tol;
    opt.moves = move_kind_from_string(cfg.moves);
    opt.delta = cfg.delta;
    return opt;
}

nlohmann::json energy_json(const EnergyBreakdown& e) {
    return {{"clustering", e.clustering}, {"potts", e.potts},   {"label_cost", e.label_cost},
            {"robust_pn", e.robust_pn},   {"gamma", e.gamma},   {"total", e.total}};
}

nlohmann::json trace_json(const RunTrace& t) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : t.records)
        a.push_back({{"iteration", r.iteration}, {"energy", r.energy}, {"true_energy", r.true_energy},
                     {"bound", r.bound}, {"delta", r.delta}, {"hash", r.hash}, {"moves_accepted", r.moves_accepted}});
    return a;
}

JointEnergySpec cluster_spec(const RunConfig& cfg, const Dataset& data) {
    JointEnergySpec spec;
    spec.objective = objective_of(cfg);
    spec.K = cfg.K;
    spec.gamma = cfg.gamma;
    if (!cfg.affinity.empty()) {
        require_file(cfg.affinity, "affinity");
        spec.affinity = read_affinity(cfg.affinity);
        if (data.n() > 0 && spec.affinity.n() != data.n())
            throw UsageError("affinity size does not match the input points");
    } else {
        spec.affinity = build_affinity(data, KernelPolicy::parse(cfg.kernel), cfg.seed);
    }
    if (cfg.potts_knn > 0) {
        if (data.n() == 0) throw UsageError("potts_knn needs input points");
        spec.mrf.push_back(knn_potts(data, cfg.potts_knn, cfg.seed));
    }
    if (cfg.pn_patch > 0) throw UsageError("robust_pn patches need an image; use the segment command");
    add_generic_terms(cfg, spec);
    check_gamma(spec);
    return spec;
}

int cmd_cluster(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    Dataset data;
    if (!cfg.input.empty() || cfg.affinity.empty()) {
        require_file(cfg.input, "input");
        data = Dataset::from_features(read_csv_matrix(cfg.input));
    }
    if (!cfg.truth.empty()) require_file(cfg.truth, "truth");
    const fs::path out = prepare_out(cfg.out);

    JointEnergySpec spec = cluster_spec(cfg, data);
    if (cfg.K > spec.affinity.n()) throw UsageError("more labels than points");
    Labeling init = initial(cfg, spec, data.n() > 0 ? &data : nullptr);
    CutResult r = solve(spec, init, BoundChoice::parse(cfg.bound), cut_options(cfg));

    write_labels_csv((out / "labels.csv").string(), r.labeling.to_external());
    write_trace(out, r.trace);
    nlohmann::json rep = run_json(r, spec);
    rep["initial_energy"] = eval_joint(spec, init).total;
    if (!cfg.truth.empty()) {
        std::vector<int> t = read_labels_csv(cfg.truth);
        rep["metrics"] = metrics_json(r.labeling.labels, t);
    }
    write_json(out / "report.json", rep);
    save_config((out / "config.yaml").string(), cfg);
    if (data.n() > 0 && data.dim() >= 2)
        write_text((out / "scatter.svg").string(), svg_scatter(data.features.leftCols(2), r.labeling.labels, r.trace.method));

    const auto& e = rep["energy"];
    log << r.trace.method << ": E=" << e["total"].get<double>() << " after " << rep["outer_iterations"].get<int>()
        << " outer iterations";
    if (rep.contains("metrics")) log << ", NMI=" << rep["metrics"]["nmi"].get<double>();
    log << "\n";
    return r.trace.true_energy_monotone() ? 0 : 1;
}

int cmd_segment(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    require_file(cfg.input, "input");
    if (!cfg.seeds_png.empty()) require_file(cfg.seeds_png, "seeds");
    if (!cfg.truth.empty()) require_file(cfg.truth, "truth");
    if (cfg.K < 2) throw UsageError("segmentation needs at least 2 labels");

    Image img = read_image(cfg.input);
    if (cfg.max_pixels > 0 && img.size() > cfg.max_pixels) {
        if (!cfg.seeds_png.empty() || cfg.box || !cfg.truth.empty())
            throw UsageError("max_pixels cannot be combined with pixel-space seeds, box or truth");
        img = downscale_to(img, cfg.max_pixels);
    }
    FeatureOptions fo;
    fo.color = cfg.color == "rgb" ? ColorSpace::Rgb : ColorSpace::Lab;
    fo.beta_xy = cfg.beta_xy;
    Dataset features = image_features(img, fo);
    features.grid->connectivity = cfg.connectivity;
    const Grid grid = *features.grid;

    std::vector<int> hard;
    if (cfg.box) {
        const auto& b = *cfg.box;
        try {
            hard = box_hard_labels(grid, b[0], b[1], b[2], b[3]);
        } catch (const ParameterError& e) {
            throw UsageError(std::string("--box: ") + e.what());
        }
    }
    if (!cfg.seeds_png.empty()) {
        Image s = read_image(cfg.seeds_png, true);
        if (s.height != img.height || s.width != img.width) throw UsageError("seed image size differs from the input image");
        std::vector<int> seeds;
        try {
            seeds = seeds_from_mask(s, cfg.K);
        } catch (const ParameterError& e) {
            throw UsageError(std::string("seeds: ") + e.what());
        }
        if (hard.empty()) hard = seeds;
        else
            for (size_t p = 0; p < hard.size(); ++p)
                if (seeds[p] >= 0) hard[p] = seeds[p];
    }

    SegmentParams prm;
    prm.objective = objective_of(cfg);
    prm.kernel = KernelPolicy::parse(cfg.kernel);
    prm.gamma = cfg.gamma;
    prm.K = cfg.K;
    prm.features = fo;
    prm.potts = cfg.potts == "length" ? PottsMode::Length : PottsMode::Contrast;
    prm.connectivity = cfg.connectivity;
    prm.bound = BoundChoice::parse(cfg.bound);
    prm.cut = cut_options(cfg);
    prm.seed = cfg.seed;
    const fs::path out = prepare_out(cfg.out);

    SegmentationProblem sp = build_segmentation(features, prm, hard);
    if (cfg.pn_patch > 0) sp.spec.mrf.push_back(RobustPnPotts::fractional(grid_patches(grid, cfg.pn_patch), cfg.pn_fraction));
    add_generic_terms(cfg, sp.spec);
    check_gamma(sp.spec);
    Labeling init = seeded_init(sp.features, sp.spec.hard, cfg.K, cfg.seed);
    CutResult r = solve(sp.spec, init, prm.bound, prm.cut);

    write_png((out / "mask.png").string(), label_mask(r.labeling.labels, cfg.K, img.height, img.width));
    write_png((out / "overlay.png").string(), label_overlay(img, r.labeling.labels));
    write_trace(out, r.trace);
    nlohmann::json rep = run_json(r, sp.spec);
    rep["width"] = img.width;
    rep["height"] = img.height;
    int seeded = 0, violated = 0;
    for (size_t p = 0; p < sp.spec.hard.size(); ++p)
        if (sp.spec.hard[p] >= 0) {
            ++seeded;
            violated += r.labeling[static_cast<int>(p)] != sp.spec.hard[p];
        }
    rep["seeded_pixels"] = seeded;
    rep["seed_violations"] = violated;
    if (!cfg.truth.empty()) {
        Image t = read_image(cfg.truth, true);
        if (t.size() != img.size()) throw UsageError("truth mask size differs from the input image");
        std::vector<int> truth = truth_from_mask(t, cfg.K);
        nlohmann::json m = metrics_json(r.labeling.labels, truth);
        m["error_raw"] = error_rate(r.labeling.labels, truth);
        if (seeded > 0) {
            std::vector<char> free(truth.size(), 0);
            for (size_t p = 0; p < free.size(); ++p) free[p] = sp.spec.hard[p] < 0;
            if (seeded < static_cast<int>(truth.size())) m["error_unseeded"] = error_rate(r.labeling.labels, truth, free);
        }
        rep["metrics"] = m;
    }
    write_json(out / "report.json", rep);
    save_config((out / "config.yaml").string(), cfg);

    log << r.trace.method << ": " << img.width << "x" << img.height << ", E=" << rep["energy"]["total"].get<double>();
    if (rep.contains("metrics")) log << ", error=" << rep["metrics"]["error_raw"].get<double>() << "%";
    log << "\n";
    return violated == 0 && r.trace.true_energy_monotone() ? 0 : 1;
}

int cmd_embed(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    Dataset data;
    if (!cfg.input.empty() || cfg.affinity.empty()) {
        require_file(cfg.input, "input");
        data = Dataset::from_features(read_csv_matrix(cfg.input));
    }
    const fs::path out = prepare_out(cfg.out);
    RunConfig plain = cfg;
    plain.potts_knn = 0;
    plain.label_cost = 0;
    JointEnergySpec spec = cluster_spec(plain, data);
    const int n = spec.affinity.n();
    if (cfg.rank > n) throw UsageError("rank exceeds the number of points");

    RankOptions ro;
    ro.delta = cfg.delta;
    Embedding e = rank_m_embedding(spec.objective, spec.affinity, cfg.rank, ro);

    std::vector<std::string> header;
    for (int i = 0; i < e.m; ++i) header.push_back("phi" + std::to_string(i + 1));
    write_csv_matrix((out / "embedding.csv").string(), e.points, header);

    nlohmann::json rep;
    rep["objective"] = to_string(spec.objective);
    rep["n"] = n;
    rep["m"] = e.m;
    rep["delta"] = e.delta;
    rep["kept_eigenvalues"] = std::vector<double>(e.kept.data(), e.kept.data() + e.kept.size());
    rep["discarded_eigenvalues"] = std::vector<double>(e.discarded.data(), e.discarded.data() + e.discarded.size());
    rep["frobenius_error"] = e.frobenius_error();
    rep["relative_frobenius_error"] = e.relative_frobenius_error();
    if (n <= 2000) {
        // residual of the shifted kernel against the embedding Gram matrix
        PairwiseForm f = pairwise_form(spec.objective, spec.affinity);
        Vec root = f.w.cwiseSqrt();
        Mat N = root.cwiseInverse().asDiagonal() * f.M.to_dense() * root.cwiseInverse().asDiagonal();
        N.diagonal().array() += e.delta;
        Mat G = root.asDiagonal() * e.gram() * root.asDiagonal();
        rep["measured_frobenius_error"] = (N - G).norm();
    }
    write_json(out / "eigen.json", rep);

    Series s;
    std::vector<double> all(e.kept.data(), e.kept.data() + e.kept.size());
    all.insert(all.end(), e.discarded.data(), e.discarded.data() + e.discarded.size());
    s.push_back({"eigenvalues", all});
    s.push_back({"kept", std::vector<double>(e.kept.data(), e.kept.data() + e.kept.size())});
    write_text((out / "spectrum.svg").string(), svg_lines(s, "kernel spectrum", "index", "eigenvalue"));
    save_config((out / "config.yaml").string(), cfg);

    log << "rank " << e.m << " embedding of " << n << " points, delta=" << e.delta
        << ", Frobenius error=" << e.frobenius_error() << "\n";
    return 0;
}

int cmd_experiment(const std::string& name, std::uint64_t seed, const std::string& out_dir, std::ostream& log) {
    Report r;
    try {
        r = run_experiment(name, seed);
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
    const fs::path out = prepare_out((fs::path(out_dir) / name).string());
    nlohmann::json j;
    j["name"] = name;
    j["seed"] = seed;
    j["passed"] = r.passed();
    for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    for (const auto& [k, v] : r.series) j["series"][k] = v;
    for (const auto& [file, content] : r.artifacts) {
        write_text((out / file).string(), content);
        j["artifacts"].push_back(file);
    }
    write_json(out / "report.json", j);
    for (const auto& c : r.checks)
        log << (c.passed ? "PASS " : "FAIL ") << name << "/" << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
    return r.passed() ? 0 : 1;
}

int cmd_evaluate(const std::string& labels, const std::string& truth, std::ostream& log) {
    require_file(labels, "labels");
    require_file(truth, "truth");
    std::vector<int> a = read_labels_csv(labels), b = read_labels_csv(truth);
    log << metrics_json(a, b).dump(2) << "\n";
    return 0;
}

}  // namespace kcut::app
