#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace kcut::app {

// Bad flags, bad config values or missing inputs. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string input;
    std::string truth;
    std::string affinity;  // precomputed affinity file, replaces the kernel
    std::string out = "out";

    std::string objective = "nc";
    std::string kernel = "knn:10";
    std::string bound = "kernel";
    int K = 2;
    double gamma = 0.0;
    std::string moves = "expansion";
    std::string init = "kmeans";  // kmeans, spectral, random
    std::optional<double> delta;
    std::uint64_t seed = 0;

    std::string schedule = "loop";
    int max_outer = 100;
    double tol = 1e-7;

    // MRF terms
    int potts_knn = 0;  // cluster: Potts edges along a KNN graph, 0 = none
    std::string potts = "contrast";
    int connectivity = 8;
    double label_cost = 0.0;
    int pn_patch = 0;  // robust P^n over square patches, 0 = none
    double pn_fraction = 0.1;

    // segmentation
    std::string seeds_png;
    std::optional<std::array<int, 4>> box;
    std::string color = "lab";
    double beta_xy = 0.0;
    int max_pixels = 0;  // 0 keeps the full resolution

    // embedding
    int rank = 0;

    bool operator==(const RunConfig&) const = default;

    static RunConfig segmentation_defaults();
    // Parses every string-valued option and range-checks the numbers.
    void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text);
std::string to_yaml(const RunConfig& cfg);
void save_config(const std::string& path, const RunConfig& cfg);

std::array<int, 4> parse_box(const std::string& s);

}  // namespace kcut::app
