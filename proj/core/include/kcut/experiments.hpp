#pragma once

#include "kcut/analysis.hpp"
#include "kcut/io.hpp"
#include "kcut/optimizer.hpp"

namespace kcut {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Check> checks;
    Series series;
    std::vector<std::pair<std::string, std::string>> artifacts;  // file name, content

    bool passed() const;
    void metric(const std::string& k, double v) { metrics.emplace_back(k, v); }
    void check(const std::string& k, bool ok, const std::string& detail = "") { checks.push_back({k, ok, detail}); }
};

std::vector<std::string> experiment_names();
// Throws ParameterError listing the available names for an unknown one.
Report run_experiment(const std::string& name, std::uint64_t seed);

// ---- single trials, shared by the experiments and the acceptance gate ----

struct PseudoTrial {
    double init_energy = 0.0;
    double kernel_energy = 0.0;
    double pseudo_energy = 0.0;
    double kernel_nmi = 0.0;
    double pseudo_nmi = 0.0;
    RunTrace kernel_trace, pseudo_trace;
    Synthetic data;
    Labeling init, kernel_labels, pseudo_labels;
};
RingsParams default_rings();
double rings_sigma();
PseudoTrial pseudo_bound_trial(std::uint64_t seed);

struct BreimanTrial {
    double minority_density = 0.0;  // mean planted density, small-sigma kKM
    double majority_density = 0.0;
    double minority_fraction = 0.0;
    double knn_agreement = 0.0;       // % agreement with the planted split
    double adaptive_agreement = 0.0;  // adaptive-width Gaussian
    double large_sigma_size_ratio = 0.0;
    Synthetic data;
    Labeling small_sigma, knn, adaptive;
};
struct BreimanConfig {
    double small_sigma = 0.1;
    double large_sigma = 20.0;
    int knn = 20;
};
BreimanTrial breiman_trial(std::uint64_t seed, const BreimanConfig& cfg = {});

struct CamouflageTrial {
    double cut_error = 0.0;  // KNN-AA + contrast Potts with seeds
    double km_error = 0.0;   // basic K-means on colour, best label matching
    SyntheticImage image;
    Labeling cut, km;
    std::vector<int> hard;
};
CamouflageTrial camouflage_trial(std::uint64_t seed);

// Spearman correlation between large-sigma kKM and variance energies over
// all two-partitions of 12 points.
double extreme_bandwidth_spearman(std::uint64_t seed, double sigma_factor = 1000.0);

struct ScheduleTrial {
    std::vector<RunTrace> traces;  // after_expansion_loop, after_each_move, at_convergence
};
ScheduleTrial schedule_trial(std::uint64_t seed);

struct EmbeddingDimsTrial {
    std::vector<int> ranks;
    std::vector<RunTrace> traces;
    std::vector<double> relative_errors;
};
EmbeddingDimsTrial embedding_dims_trial(std::uint64_t seed);

}  // namespace kcut
