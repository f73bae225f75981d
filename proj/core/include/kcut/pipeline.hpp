#pragma once

#include "kcut/image.hpp"
#include "kcut/optimizer.hpp"

namespace kcut {

struct KernelPolicy {
    enum class Kind { Gaussian, Knn, Adaptive } kind = Kind::Knn;
    double sigma = 0.0;  // Gaussian width; 0 picks the median pairwise distance
    int knn = 10;
    std::optional<int> sample;
    DensityTransform transform;  // Adaptive: sigma_p from the transformed Parzen density
    double parzen_width = 0.0;   // 0 picks the median nearest-neighbor distance scale

    // "gaussian[:sigma]", "knn:K[,sample]", "adaptive[:log[,alpha]|:const[,level]]"
    static KernelPolicy parse(const std::string& s);
    std::string to_string() const;
    bool operator==(const KernelPolicy& o) const;
};

Affinity build_affinity(const Dataset& data, const KernelPolicy& policy, std::uint64_t seed = 0);
double median_pairwise_distance(const Mat& points, std::uint64_t seed = 0);

enum class BoundKind { Kernel, Spectral, Pseudo };

struct BoundChoice {
    BoundKind kind = BoundKind::Kernel;
    int m = 0;  // spectral rank, 0 = automatic

    // "kernel", "spectral[:m]", "pseudo"
    static BoundChoice parse(const std::string& s);
    std::string to_string() const;
};

MoveKind move_kind_from_string(const std::string& s);
const char* to_string(MoveKind k);

CutResult solve(const JointEnergySpec& spec, const Labeling& init, const BoundChoice& bound, const CutOptions& opt);

// ---- interactive segmentation ----

struct SegmentParams {
    Objective objective = Objective::AA;
    KernelPolicy kernel;
    double gamma = 1.0;
    int K = 2;
    FeatureOptions features;
    PottsMode potts = PottsMode::Contrast;
    int connectivity = 8;
    BoundChoice bound;
    CutOptions cut;
    std::uint64_t seed = 0;
};

// Gray scribble image: 0 unlabeled, k in 1..K hard label k (internal k-1).
std::vector<int> seeds_from_mask(const Image& gray, int K);
// Box protocol: pixels outside the box are fixed to the background label.
std::vector<int> box_hard_labels(const Grid& grid, int x, int y, int w, int h, int background = 0);
// Mark a disc of the given radius around each polyline vertex and segment.
void rasterize_stroke(std::vector<int>& hard, const Grid& grid, const std::vector<std::pair<double, double>>& points,
                      double radius, int label);

struct SegmentationProblem {
    Dataset features;
    JointEnergySpec spec;
};

SegmentationProblem build_segmentation(const Dataset& features, const SegmentParams& prm, std::vector<int> hard);
// Nearest seed-mean in feature space when every label has seeds, otherwise
// K-means on the features; seeds applied last. With a box, the inside starts
// as foreground (label 1).
Labeling seeded_init(const Dataset& features, const std::vector<int>& hard, int K, std::uint64_t seed);

}  // namespace kcut
