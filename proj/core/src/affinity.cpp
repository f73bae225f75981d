#include "kcut/affinity.hpp"

#include "kcut/eigensolvers.hpp"
#include "kcut/knn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kcut {

Affinity Affinity::dense(Mat m) {
    if (m.rows() != m.cols()) throw ParameterError("affinity must be square");
    Affinity a;
    a.sparse_ = false;
    a.dn_ = std::make_shared<const Mat>(std::move(m));
    return a;
}

Affinity Affinity::sparse(SpMat m) {
    if (m.rows() != m.cols()) throw ParameterError("affinity must be square");
    Affinity a;
    a.sparse_ = true;
    m.makeCompressed();
    a.sp_ = std::make_shared<const SpMat>(std::move(m));
    return a;
}

long Affinity::nnz() const { return sparse_ ? sp_->nonZeros() : static_cast<long>(dn_->size()); }

Vec Affinity::apply(const Vec& x) const { return sparse_ ? Vec(*sp_ * x) : Vec(*dn_ * x); }
Mat Affinity::apply(const Mat& x) const { return sparse_ ? Mat(*sp_ * x) : Mat(*dn_ * x); }

Vec Affinity::diagonal() const { return sparse_ ? Vec(sp_->diagonal()) : Vec(dn_->diagonal()); }

Vec Affinity::degrees() const {
    if (!sparse_) return dn_->rowwise().sum();
    Vec d = Vec::Zero(sp_->rows());
    for (int p = 0; p < sp_->outerSize(); ++p)
        for (SpMat::InnerIterator it(*sp_, p); it; ++it) d[p] += it.value();
    return d;
}

double Affinity::max_abs() const {
    if (!sparse_) return dn_->size() ? dn_->cwiseAbs().maxCoeff() : 0.0;
    double m = 0.0;
    for (int p = 0; p < sp_->outerSize(); ++p)
        for (SpMat::InnerIterator it(*sp_, p); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

double Affinity::frobenius() const { return sparse_ ? sp_->norm() : dn_->norm(); }

Affinity Affinity::plus_diagonal(const Vec& v) const {
    if (v.size() != n()) throw DimensionError("diagonal length does not match affinity size");
    if (!sparse_) {
        Mat m = *dn_;
        m.diagonal() += v;
        return dense(std::move(m));
    }
    SpMat d(n(), n());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(n());
    for (int p = 0; p < n(); ++p)
        if (v[p] != 0.0) t.emplace_back(p, p, v[p]);
    d.setFromTriplets(t.begin(), t.end());
    return sparse(SpMat(*sp_ + d));
}

Affinity Affinity::scaled(const Vec& l, const Vec& r) const {
    if (!sparse_) return dense(l.asDiagonal() * (*dn_) * r.asDiagonal());
    SpMat m = *sp_;
    for (int p = 0; p < m.outerSize(); ++p)
        for (SpMat::InnerIterator it(m, p); it; ++it) it.valueRef() *= l[p] * r[it.col()];
    return sparse(std::move(m));
}

Mat Affinity::to_dense() const { return sparse_ ? Mat(*sp_) : *dn_; }

void Affinity::for_each(const std::function<void(int, int, double)>& f) const {
    if (sparse_) {
        for (int p = 0; p < sp_->outerSize(); ++p)
            for (SpMat::InnerIterator it(*sp_, p); it; ++it) f(p, static_cast<int>(it.col()), it.value());
    } else {
        const Mat& m = *dn_;
        for (int q = 0; q < m.cols(); ++q)
            for (int p = 0; p < m.rows(); ++p) f(p, q, m(p, q));
    }
}

Mat gaussian_kernel(const Dataset& data, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("gaussian kernel width must be positive");
    const int n = data.n();
    const Mat& X = data.features;
    Vec sq = X.rowwise().squaredNorm();
    Mat G = X * X.transpose();
    Mat K(n, n);
    const double c = -0.5 / (sigma * sigma);
    for (int q = 0; q < n; ++q)
        for (int p = q; p < n; ++p) {
            double d2 = p == q ? 0.0 : std::max(0.0, sq[p] + sq[q] - 2.0 * G(p, q));
            double v = std::exp(c * d2);
            K(p, q) = v;
            K(q, p) = v;
        }
    return K;
}

SpMat knn_affinity(const Dataset& data, int K, std::optional<int> sample_size, std::uint64_t seed) {
    const int n = data.n();
    if (K < 1 || K >= n) throw ParameterError("KNN size must satisfy 1 <= K < n (K=" + std::to_string(K) +
                                              ", n=" + std::to_string(n) + ")");
    if (sample_size && (*sample_size < 1 || *sample_size > K))
        throw ParameterError("KNN sample size must lie in 1..K");

    KdTree tree(data.features);
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(n) * 2 * (sample_size ? *sample_size : K));
    for (int p = 0; p < n; ++p) {
        std::vector<int> nb = tree.neighbors_of(p, K);
        if (sample_size && *sample_size < static_cast<int>(nb.size())) {
            // partial Fisher-Yates keeps the draw reproducible for a fixed seed
            for (int i = 0; i < *sample_size; ++i) {
                std::uniform_int_distribution<int> pick(i, static_cast<int>(nb.size()) - 1);
                std::swap(nb[i], nb[pick(rng)]);
            }
            nb.resize(*sample_size);
        }
        for (int q : nb) {
            t.emplace_back(p, q, 1.0);
            t.emplace_back(q, p, 1.0);
        }
    }
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());  // duplicates sum: mutual pairs reach 2
    A.makeCompressed();
    return A;
}

Vec parzen_density(const Dataset& data, double delta) {
    if (!(delta > 0.0)) throw ParameterError("density estimator width must be positive");
    const int n = data.n();
    const double norm = std::pow(delta, -static_cast<double>(data.dim()));
    const double c = -0.5 / (delta * delta);
    Vec d = Vec::Zero(n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) d[p] += norm * std::exp(c * (data.features.row(p) - data.features.row(q)).squaredNorm());
    return d;
}

double DensityTransform::operator()(double d) const {
    if (kind == Kind::Constant) return value;
    return std::log1p(alpha * d) / alpha;
}

Vec adaptive_bandwidths(const Vec& densities, const DensityTransform& transform, int dim, double median_sigma) {
    if (dim < 1) throw ParameterError("dimension must be positive");
    if (!(median_sigma > 0.0)) throw ParameterError("median bandwidth must be positive");
    const int n = static_cast<int>(densities.size());
    Vec s(n);
    for (int p = 0; p < n; ++p) {
        if (!(densities[p] > 0.0)) throw DegenerateError("zero density at point " + std::to_string(p));
        s[p] = std::pow(transform(densities[p]) / densities[p], 1.0 / dim);
    }
    std::vector<double> sorted(s.data(), s.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    double med = sorted[n / 2];
    if (n % 2 == 0) {
        double lo = *std::max_element(sorted.begin(), sorted.begin() + n / 2);
        med = 0.5 * (med + lo);
    }
    if (!(med > 0.0)) throw DegenerateError("density transform produced non-positive bandwidths");
    return s * (median_sigma / med);
}

Mat adaptive_gaussian_kernel(const Dataset& data, const Vec& sigmas) {
    const int n = data.n();
    if (sigmas.size() != n) throw DimensionError("bandwidth count does not match n");
    Mat K(n, n);
    for (int q = 0; q < n; ++q)
        for (int p = q; p < n; ++p) {
            double d2 = (data.features.row(p) - data.features.row(q)).squaredNorm();
            double v = 0.5 * (std::exp(-0.5 * d2 / (sigmas[p] * sigmas[p])) +
                              std::exp(-0.5 * d2 / (sigmas[q] * sigmas[q])));
            K(p, q) = v;
            K(q, p) = v;
        }
    return K;
}

Vec nash_density(const Dataset& data, const Vec& sigmas) {
    const int n = data.n();
    Vec d = Vec::Zero(n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            d[p] += std::exp(-0.5 * (data.features.row(p) - data.features.row(q)).squaredNorm() /
                             (sigmas[q] * sigmas[q]));
    return d;
}

Vec degrees(const Affinity& A) { return A.degrees(); }

Mat symmetrize(const Mat& A) {
    if (A.rows() != A.cols()) throw ParameterError("symmetrize needs a square matrix");
    return 0.5 * (A + A.transpose());
}

ShiftReport psd_shift(const Affinity& M, const std::optional<Vec>& weights) {
    const int n = M.n();
    Vec scale = Vec::Ones(n);
    if (weights) {
        if (weights->size() != n) throw DimensionError("weight length does not match matrix size");
        if ((weights->array() <= 0.0).any()) throw ParameterError("weights must be positive");
        scale = weights->cwiseSqrt().cwiseInverse();
    }
    ShiftReport r;
    if (n <= 2000) {
        Mat S = scale.asDiagonal() * M.to_dense() * scale.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed in psd_shift");
        r.lambda_min = es.eigenvalues()[0];
        r.iterations = 1;
    } else {
        Affinity S = M.scaled(scale, scale);
        EigenPairs e = lanczos_smallest([&](const Vec& x) { return S.apply(x); }, n, 1);
        r.lambda_min = e.values[0];
        r.iterations = e.iterations;
        r.iterative = true;
    }
    r.delta = std::max(0.0, -r.lambda_min) + 1e-6 * (1.0 + std::abs(r.lambda_min));
    return r;
}

double psd_shift_value(const Mat& M, const std::optional<Vec>& weights) {
    return psd_shift(Affinity::dense(M), weights).delta;
}

}  // namespace kcut
