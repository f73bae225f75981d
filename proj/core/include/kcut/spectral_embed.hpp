#pragma once

#include "kcut/kernel_bound.hpp"

namespace kcut {

// M = V diag(values) V' with eigenvalues descending; eigenvectors are the
// columns of V (row p of V is the spectral coordinate of point p).
struct EigenDecomposition {
    Vec values;
    Mat vectors;
};

EigenDecomposition eig_sym(const Mat& M);

struct Embedding {
    Objective tag = Objective::AA;
    Mat points;  // n x m, row p is phi_p
    int m = 0;
    double delta = 0.0;
    Vec kept;    // unshifted kept eigenvalues, descending
    Vec discarded;  // unshifted discarded eigenvalues when the full spectrum is known
    double discarded_sum = 0.0;     // sum over discarded eigenvalues
    double discarded_sq_sum = 0.0;  // sum of their squares
    std::optional<Vec> weights;     // w_p = d_p for NC

    int n() const { return static_cast<int>(points.rows()); }
    Vec point_weights() const { return weights ? *weights : Vec::Ones(points.rows()); }
    Mat gram() const { return points * points.transpose(); }
    // sqrt(sum_{i>m} (lambda_i + delta)^2), in the W-weighted metric when weighted
    double frobenius_error() const;
    double relative_frobenius_error() const;
};

// phi_p = sqrt(Lambda) V_p for a p.s.d. kernel; tiny negative eigenvalues clamp to 0.
Embedding exact_embedding(const Mat& K);

struct RankOptions {
    std::optional<double> delta;  // default: optimal_shift of the discarded spectrum
    std::optional<Vec> weights;   // WKKM weights
    bool force_iterative = false;
};

// Rank-m embedding of the objective's kernel (AA: eig A, AC: eig A - D,
// NC: eig D^-1/2 A D^-1/2 with rows scaled by 1/sqrt(d_p)). m = 0 selects the
// smallest m with relative Frobenius error <= 0.1, capped at 64.
Embedding rank_m_embedding(Objective objective, const Affinity& A, int m, const RankOptions& opt = {});

double frobenius_error(const EigenDecomposition& e, int m, double delta);
double optimal_shift(const Vec& discarded);
int default_rank(const Vec& eigenvalues_desc, double rel_tol = 0.1, int cap = 64);

// costs[p,k] = w_p |phi_p - mu_k|^2 with weighted means of S_t; empty segments
// use mu = 0 so the row stays an upper bound.
UnaryBound spectral_unary_bound(const Embedding& emb, const Labeling& St);
// F~^w(S) = sum_k sum_{p in S^k} w_p |phi_p - mu_k|^2
double spectral_energy(const Embedding& emb, const Labeling& S);

// Rows of W^-1/2 V^K, the eigenvector embedding used by the common
// discretization heuristic (comparison only).
Mat eigenvector_embedding(Objective objective, const Affinity& A, int K);

}  // namespace kcut
