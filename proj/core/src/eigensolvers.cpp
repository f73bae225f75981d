#include "kcut/eigensolvers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace kcut {

void fix_signs(Mat& vectors) {
    for (int j = 0; j < vectors.cols(); ++j) {
        Eigen::Index i = 0;
        vectors.col(j).cwiseAbs().maxCoeff(&i);
        if (vectors(i, j) < 0) vectors.col(j) = -vectors.col(j);
    }
}

EigenPairs dense_eigen(const Mat& M) {
    if (M.rows() != M.cols()) throw ParameterError("eigendecomposition needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver did not converge");
    const int n = static_cast<int>(M.rows());
    EigenPairs out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    fix_signs(out.vectors);
    out.iterations = 1;
    (void)n;
    return out;
}

namespace {

Mat materialize(const LinearOp& op, int n) {
    Mat M(n, n);
    Vec e = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        M.col(j) = op(e);
        e[j] = 0.0;
    }
    return 0.5 * (M + M.transpose());
}

// Orthogonalize w against the first m columns of V twice; returns coefficients.
Vec orthogonalize(const Mat& V, int m, Vec& w) {
    Vec h = V.leftCols(m).transpose() * w;
    w.noalias() -= V.leftCols(m) * h;
    Vec h2 = V.leftCols(m).transpose() * w;
    w.noalias() -= V.leftCols(m) * h2;
    return h + h2;
}

}  // namespace

EigenPairs lanczos_largest(const LinearOp& op, int n, int k, const LanczosOptions& opt) {
    if (k < 1 || k > n) throw ParameterError("requested eigenpair count outside 1..n");
    const int p = std::min(n, std::max(k + opt.extra, 2 * k + 1));
    if (n <= std::max(p + 1, 64)) {
        EigenPairs all = dense_eigen(materialize(op, n));
        EigenPairs out;
        out.values = all.values.head(k);
        out.vectors = all.vectors.leftCols(k);
        out.iterations = 1;
        return out;
    }

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss;
    auto random_unit = [&](const Mat& V, int m) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Vec v(n);
            for (int i = 0; i < n; ++i) v[i] = gauss(rng);
            if (m > 0) orthogonalize(V, m, v);
            double nv = v.norm();
            if (nv > 1e-8) return Vec(v / nv);
        }
        throw NumericalError("Lanczos could not generate an independent start vector");
    };

    Mat V(n, p + 1);
    Mat H = Mat::Zero(p, p);
    V.col(0) = random_unit(V, 0);
    int start = 0;
    double radius = 0.0;

    for (int restart = 0; restart < opt.max_restarts; ++restart) {
        double beta = 0.0;
        for (int j = start; j < p; ++j) {
            Vec w = op(V.col(j));
            Vec h = orthogonalize(V, j + 1, w);
            H.block(0, j, j + 1, 1) = h;
            H.block(j, 0, 1, j + 1) = h.transpose();
            beta = w.norm();
            radius = std::max(radius, std::abs(h[j]) + beta);
            if (beta < 1e-12 * std::max(1.0, radius)) {
                beta = 0.0;
                V.col(j + 1) = random_unit(V, j + 1);
            } else {
                V.col(j + 1) = w / beta;
            }
        }

        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
        if (es.info() != Eigen::Success) throw NumericalError("Lanczos projected eigenproblem failed");
        Vec theta = es.eigenvalues().reverse();
        Mat U = es.eigenvectors().rowwise().reverse();
        radius = std::max(radius, theta.cwiseAbs().maxCoeff());

        bool converged = true;
        for (int i = 0; i < k; ++i) {
            double res = std::abs(beta * U(p - 1, i));
            if (res > opt.tol * std::max(radius, 1e-300)) {
                converged = false;
                break;
            }
        }
        if (converged || restart + 1 == opt.max_restarts) {
            if (!converged)
                throw NumericalError("Lanczos did not converge after " + std::to_string(opt.max_restarts) +
                                     " restarts (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
            EigenPairs out;
            out.values = theta.head(k);
            out.vectors = V.leftCols(p) * U.leftCols(k);
            fix_signs(out.vectors);
            out.iterations = restart + 1;
            return out;
        }

        int keep = std::min(p - 1, k + (p - k) / 2);
        Mat kept = V.leftCols(p) * U.leftCols(keep);
        Vec last = V.col(p);
        V.leftCols(keep) = kept;
        V.col(keep) = last;
        H.setZero();
        for (int i = 0; i < keep; ++i) H(i, i) = theta[i];
        start = keep;
    }
    throw NumericalError("Lanczos iteration exhausted");
}

EigenPairs lanczos_smallest(const LinearOp& op, int n, int k, const LanczosOptions& opt) {
    EigenPairs r = lanczos_largest([&](const Vec& x) { return Vec(-op(x)); }, n, k, opt);
    r.values = -r.values;  // ascending: smallest first
    return r;
}

}  // namespace kcut
