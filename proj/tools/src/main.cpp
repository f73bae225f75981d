#include "commands.hpp"
#include "service.hpp"

#include <kcut/experiments.hpp>
#include <kcut/io.hpp>

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

using namespace kcut::app;

namespace {

// Flag values layered over the config file; unset flags keep the file value.
struct Overrides {
    std::string config, save_config;
    std::optional<std::string> input, truth, affinity, out, objective, kernel, bound, moves, schedule, init;
    std::optional<std::string> seeds_png, box, color, potts;
    std::optional<double> gamma, delta, tol, label_cost, beta_xy, pn_fraction;
    std::optional<int> K, max_outer, potts_knn, connectivity, pn_patch, max_pixels, rank;
    std::optional<std::uint64_t> seed;

    void common(CLI::App* c) {
        c->add_option("--config", config, "YAML run configuration");
        c->add_option("--save-config", save_config, "Write the effective configuration and exit");
        c->add_option("--input", input, "Input features CSV or image");
        c->add_option("--truth", truth, "Ground-truth labels (CSV or mask PNG)");
        c->add_option("--affinity", affinity, "Precomputed affinity (dense or p,q,w CSV)");
        c->add_option("--out", out, "Output directory");
        c->add_option("--objective", objective, "aa, ac or nc");
        c->add_option("--kernel", kernel, "gaussian:SIGMA, knn:K[,sample] or adaptive[:log[,alpha]|:const[,level]]");
        c->add_option("--bound", bound, "kernel, spectral[:m] or pseudo");
        c->add_option("--gamma", gamma, "MRF weight");
        c->add_option("--labels", K, "Number of labels K");
        c->add_option("--moves", moves, "expansion or swap");
        c->add_option("--schedule", schedule, "Bound update policy: loop, move or converge");
        c->add_option("--seed", seed, "Random seed");
        c->add_option("--init", init, "kmeans, spectral or random");
        c->add_option("--delta", delta, "Diagonal shift (default: automatic)");
        c->add_option("--max-outer", max_outer, "Outer iteration cap");
        c->add_option("--tol", tol, "Relative convergence tolerance");
        c->add_option("--label-cost", label_cost, "Per-label cost");
    }
    void cluster(CLI::App* c) { c->add_option("--potts-knn", potts_knn, "Potts edges along a KNN graph"); }
    void segment(CLI::App* c) {
        c->add_option("--seeds-png", seeds_png, "Seed image: 0 unlabeled, k hard label k");
        c->add_option("--box", box, "Bounding box x,y,w,h; outside pixels are background");
        c->add_option("--color", color, "lab or rgb");
        c->add_option("--beta-xy", beta_xy, "Weight of the XY feature columns");
        c->add_option("--potts", potts, "contrast or length");
        c->add_option("--connectivity", connectivity, "4 or 8");
        c->add_option("--pn-patch", pn_patch, "Robust P^n patch side, 0 disables");
        c->add_option("--pn-fraction", pn_fraction, "Robust P^n truncation as a fraction of the patch");
        c->add_option("--max-pixels", max_pixels, "Downscale the image to at most this many pixels");
    }
    void embed(CLI::App* c) { c->add_option("--rank", rank, "Embedding rank m, 0 = automatic"); }

    RunConfig resolve(RunConfig base) const {
        RunConfig c = config.empty() ? base : load_config(config);
        auto set = [](auto& dst, const auto& src) {
            if (src) dst = *src;
        };
        set(c.input, input);
        set(c.truth, truth);
        set(c.affinity, affinity);
        set(c.out, out);
        set(c.objective, objective);
        set(c.kernel, kernel);
        set(c.bound, bound);
        set(c.moves, moves);
        set(c.schedule, schedule);
        set(c.init, init);
        set(c.seeds_png, seeds_png);
        set(c.color, color);
        set(c.potts, potts);
        set(c.gamma, gamma);
        set(c.tol, tol);
        set(c.label_cost, label_cost);
        set(c.beta_xy, beta_xy);
        set(c.pn_fraction, pn_fraction);
        set(c.K, K);
        set(c.max_outer, max_outer);
        set(c.potts_knn, potts_knn);
        set(c.connectivity, connectivity);
        set(c.pn_patch, pn_patch);
        set(c.max_pixels, max_pixels);
        set(c.rank, rank);
        set(c.seed, seed);
        if (delta) c.delta = delta;
        if (box) c.box = parse_box(*box);
        return c;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Kernel and spectral cuts for clustering and segmentation"};
    app.require_subcommand(1);

    Overrides oc, os, oe;
    auto* cluster = app.add_subcommand("cluster", "Cluster a point cloud CSV");
    oc.common(cluster);
    oc.cluster(cluster);
    auto* segment = app.add_subcommand("segment", "Segment an image with seeds or a box");
    os.common(segment);
    os.segment(segment);
    auto* embed = app.add_subcommand("embed", "Low-rank embedding of the objective's kernel");
    oe.common(embed);
    oe.embed(embed);

    std::string exp_name, exp_out = "out";
    std::uint64_t exp_seed = 0;
    bool list = false;
    auto* experiment = app.add_subcommand("experiment", "Run a named experiment and evaluate its checks");
    experiment->add_option("name", exp_name, "Experiment name");
    experiment->add_option("--seed", exp_seed, "Random seed");
    experiment->add_option("--out", exp_out, "Output directory");
    experiment->add_flag("--list", list, "List the available experiments");

    std::string ev_labels, ev_truth;
    auto* evaluate = app.add_subcommand("evaluate", "Compare a labeling against ground truth");
    evaluate->add_option("--labels", ev_labels, "Predicted labels CSV")->required();
    evaluate->add_option("--truth", ev_truth, "Reference labels CSV")->required();

    std::string host = "127.0.0.1";
    int port = 8080;
    ServiceOptions so;
    int ttl = static_cast<int>(so.ttl.count());
    auto* serve = app.add_subcommand("serve", "Run the interactive segmentation service");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--max-pixels", so.max_pixels, "Downscale uploads to at most this many pixels");
    serve->add_option("--iterations", so.iterations_per_solve, "Outer iterations per solve request");
    serve->add_option("--ttl", ttl, "Session lifetime in seconds");
    serve->add_option("--max-upload", so.max_upload_bytes, "Upload limit in bytes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto with_config = [](const Overrides& o, RunConfig base, auto fn) {
        RunConfig cfg = o.resolve(std::move(base));
        if (!o.save_config.empty()) {
            cfg.validate();
            save_config(o.save_config, cfg);
            return 0;
        }
        return fn(cfg);
    };

    if (*cluster) return with_config(oc, RunConfig{}, [](const RunConfig& c) { return cmd_cluster(c, std::cout); });
    if (*segment)
        return with_config(os, RunConfig::segmentation_defaults(), [](const RunConfig& c) { return cmd_segment(c, std::cout); });
    if (*embed) return with_config(oe, RunConfig{}, [](const RunConfig& c) { return cmd_embed(c, std::cout); });
    if (*experiment) {
        if (list || exp_name.empty()) {
            for (const auto& n : kcut::experiment_names()) std::cout << n << "\n";
            return list ? 0 : 2;
        }
        return cmd_experiment(exp_name, exp_seed, exp_out, std::cout);
    }
    if (*evaluate) return cmd_evaluate(ev_labels, ev_truth, std::cout);
    if (*serve) {
        so.ttl = std::chrono::seconds(ttl);
        Service service(so);
        httplib::Server server;
        service.mount(server);
        std::cout << "listening on http://" << host << ":" << port << "/v1" << std::endl;
        if (!server.listen(host, port)) {
            std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
            return 2;
        }
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kcut::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
