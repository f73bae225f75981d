#pragma once

#include "kcut/core_model.hpp"

#include <functional>
#include <memory>

namespace kcut {

// Symmetric pairwise matrix, dense or sparse. Products with indicator
// vectors go through apply() so all evaluators work on either form.
// Storage is shared and immutable, so copies are cheap.
class Affinity {
public:
    Affinity() = default;
    static Affinity dense(Mat m);
    static Affinity sparse(SpMat m);

    bool is_sparse() const { return sparse_; }
    int n() const { return static_cast<int>(sparse_ ? sp_->rows() : (dn_ ? dn_->rows() : 0)); }
    long nnz() const;

    Vec apply(const Vec& x) const;
    Mat apply(const Mat& x) const;
    Vec diagonal() const;
    Vec degrees() const;
    double max_abs() const;
    double frobenius() const;

    // A + diag(v); keeps the storage kind.
    Affinity plus_diagonal(const Vec& v) const;
    // diag(l) A diag(r)
    Affinity scaled(const Vec& l, const Vec& r) const;

    Mat to_dense() const;
    const Mat& dense_matrix() const { return *dn_; }
    const SpMat& sparse_matrix() const { return *sp_; }

    // Visit every stored entry (p, q, value) including the diagonal.
    void for_each(const std::function<void(int, int, double)>& f) const;

private:
    bool sparse_ = false;
    std::shared_ptr<const Mat> dn_;
    std::shared_ptr<const SpMat> sp_;
};

Mat gaussian_kernel(const Dataset& data, double sigma);
SpMat knn_affinity(const Dataset& data, int K, std::optional<int> sample_size = std::nullopt,
                   std::uint64_t seed = 0);
Vec parzen_density(const Dataset& data, double delta);

struct DensityTransform {
    enum class Kind { Constant, Log } kind = Kind::Constant;
    double alpha = 1.0;
    double value = 1.0;  // level for Kind::Constant

    double operator()(double d) const;
};

// sigma_p = (d'(d_p)/d_p)^(1/dim), rescaled so the median equals median_sigma.
Vec adaptive_bandwidths(const Vec& densities, const DensityTransform& transform, int dim,
                        double median_sigma = 1.0);
// Symmetrized variable-width Gaussian: average of exp(-r^2/2sigma_p^2) and exp(-r^2/2sigma_q^2).
Mat adaptive_gaussian_kernel(const Dataset& data, const Vec& sigmas);
// Density estimate after the Nash embedding: sum_q exp(-|I_p-I_q|^2 / 2 sigma_q^2).
Vec nash_density(const Dataset& data, const Vec& sigmas);

Vec degrees(const Affinity& A);
Mat symmetrize(const Mat& A);

struct ShiftReport {
    double delta = 0.0;
    double lambda_min = 0.0;
    int iterations = 0;
    bool iterative = false;
};

// delta = max(0, -lambda_0) + 1e-6 (1 + |lambda_0|), where lambda_0 is the smallest
// eigenvalue of M or of W^-1/2 M W^-1/2 when weights are given.
ShiftReport psd_shift(const Affinity& M, const std::optional<Vec>& weights = std::nullopt);
double psd_shift_value(const Mat& M, const std::optional<Vec>& weights = std::nullopt);

}  // namespace kcut
