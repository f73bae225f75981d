#pragma once

#include "kcut/affinity.hpp"

namespace kcut {

enum class InitKind { Random, GridPatches, User, FarthestPoint };

struct KMOptions {
    int K = 2;
    int max_iters = 100;
    double tol = 1e-7;
    InitKind init = InitKind::Random;
    int restarts = 5;  // random init only; best final energy kept
    std::uint64_t seed = 0;
    std::optional<Labeling> user_init;
    std::optional<Grid> grid;  // for GridPatches
    int patches = 5;           // patches per side
    bool reseed_empty = true;
};

struct KMState {
    Labeling labeling;
    Mat means;  // K x dim; empty for implicit kernel runs
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;

    double energy() const { return trace.empty() ? 0.0 : trace.back(); }
};

// Nearest mean, ties to the lowest label.
Labeling km_assign(const Mat& points, const Mat& means);
Mat km_means(const Mat& points, const std::optional<Vec>& weights, const Labeling& S);
// sum_p w_p |I_p - mu_{S_p}|^2
double km_energy(const Mat& points, const std::optional<Vec>& weights, const Labeling& S);

// argmin_k  K_pp - 2 (K W X^k)_p / w'X^k + X^k'WKWX^k / (w'X^k)^2 over nonempty k
Labeling kkm_assign_implicit(const Affinity& K, const std::optional<Vec>& weights, const Labeling& St);
// sum_p w_p K_pp - sum_k X'WKWX / w'X
double kkm_energy(const Affinity& K, const std::optional<Vec>& weights, const Labeling& S);

Labeling initial_labeling(int n, const KMOptions& opt, const Mat* points, std::uint64_t seed);

KMState run_kmeans(const Mat& points, const std::optional<Vec>& weights, const KMOptions& opt);
KMState run_kernel_kmeans(const Affinity& K, const std::optional<Vec>& weights, const KMOptions& opt);

// Weak kernel K-means (K-modes) for the Gaussian kernel of width sigma.
struct KModesState : KMState {
    Mat modes;  // K x dim, in the original feature space
};
KModesState kmodes_weak_kkm(const Mat& points, double sigma, const KMOptions& opt);
// sum_p |phi(I_p) - phi(m_{S_p})|^2 = sum_p (2 - 2 k(I_p, m_{S_p}))
double weak_kkm_energy(const Mat& points, double sigma, const Labeling& S, const Mat& modes);
// sum_k sum_{p,q in S^k} |phi_p - phi_q|^2 / (2 |S^k|)
double pairwise_kkm_energy(const Mat& points, double sigma, const Labeling& S);

}  // namespace kcut
