#pragma once

#include "kcut/objectives.hpp"

namespace kcut {

// ---- synthetic generators (reproducible from parameters and seed) ----

struct Synthetic {
    Dataset data;
    std::vector<int> truth;  // planted labels, 0-based
    Vec density;             // planted density at each point (when known)
};

struct RingsParams {
    int n_inner = 100;
    int n_outer = 200;
    double r_inner = 1.0;
    double r_outer = 2.0;
    double noise = 0.1;
};
Synthetic two_rings(const RingsParams& prm, std::uint64_t seed);

struct BlobsParams {
    std::vector<int> counts;
    std::vector<Vec> centers;
    std::vector<Mat> covariances;  // dim x dim each
};
Synthetic gaussian_blobs(const BlobsParams& prm, std::uint64_t seed);

// Left cluster: a tight core inside a wide halo. Right cluster: one wide
// Gaussian. Truth marks left (0) and right (1); density is the mixture pdf.
struct DenseBlobParams {
    int n_left = 200;
    int n_right = 200;
    double core_fraction = 0.7;
    double core_sigma = 0.05;
    double halo_sigma = 0.5;
    double right_sigma = 0.5;
    double separation = 4.0;
};
Synthetic dense_blob_plus_background(const DenseBlobParams& prm, std::uint64_t seed);

// RGB image in [0,1]; background and object are two-colour textures with the
// same mean colour. truth: 0 background, 1 object.
struct CamouflageParams {
    int height = 40;
    int width = 40;
    double noise = 0.03;
    double color_gap = 0.2;
};
struct SyntheticImage {
    Dataset image;  // features = RGB, grid set
    std::vector<int> truth;
};
SyntheticImage camouflage_image(const CamouflageParams& prm, std::uint64_t seed);

// ---- metrics ----

// mislabeled percentage over the region (all points when region is empty)
double error_rate(const std::vector<int>& labels, const std::vector<int>& truth,
                  const std::vector<char>& region = {});
// error after the best matching of predicted labels to truth labels
double best_permutation_error(const std::vector<int>& labels, const std::vector<int>& truth);
// arithmetic-mean normalization: 2 I / (H(a) + H(b))
double nmi(const std::vector<int>& a, const std::vector<int>& b);
double variation_of_information(const std::vector<int>& a, const std::vector<int>& b);
// covering of the ground-truth regions by the segmentation's regions
double covering(const std::vector<int>& segmentation, const std::vector<int>& truth);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

// ---- analytical energies ----

// normalized Gaussian kernel (2 pi sigma^2)^(-dim/2) exp(-r^2 / 2 sigma^2)
double normalized_gaussian(double r2, double sigma, int dim);
// -sum_k sum_{p in S^k} P_sigma(I_p | S^k)
double parzen_energy(const Mat& points, double sigma, const Labeling& S);
// 1 - sum_i p_i^2 for a discrete distribution
double gini_impurity(const std::vector<double>& probabilities);
// sum_k |S^k| G(S^k) with <d_S, d_S> estimated by within-segment Parzen
// self-products at the fixed resolution delta
double gini_energy(const Mat& points, double delta, const Labeling& S);
// Gini energy from externally supplied within-segment density values:
// sum_k |S^k| (1 - mean_{p in S^k} density_p)
double gini_energy(const Labeling& S, const Vec& segment_densities);

// all labelings of n points into 2 nonempty groups, point 0 fixed to label 0
std::vector<Labeling> all_two_partitions(int n);

}  // namespace kcut
