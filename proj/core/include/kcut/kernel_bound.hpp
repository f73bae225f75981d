#pragma once

#include "kcut/objectives.hpp"

namespace kcut {

// e_hat(X) = -X' Kd X / w'X with Kd = M + delta W. The base matrix M and the
// shift are kept apart so the dense kernel is never copied.
struct ConcaveSurrogate {
    Objective tag = Objective::AA;
    Affinity base;  // M: A for AA/NC, A - D for AC, W K W for WKKM
    Vec w;
    double delta = 0.0;
    double lambda_min = 0.0;

    int n() const { return base.n(); }
    Vec apply(const Vec& x) const { return base.apply(x) + delta * w.cwiseProduct(x); }
    Mat apply(const Mat& x) const { return base.apply(x) + delta * (w.asDiagonal() * x); }
    Mat kernel_matrix() const;
};

// Kernel of Table-2 type: AA dI + A (w = 1), AC dI + A - D (w = 1), NC dD + A (w = d).
// When delta is omitted it comes from psd_shift of W^-1/2 M W^-1/2.
ConcaveSurrogate build_surrogate(Objective objective, const Affinity& A, std::optional<double> delta = std::nullopt,
                                 const std::optional<Vec>& weights = std::nullopt);

double relaxation_value(const ConcaveSurrogate& s, const Vec& X);
Vec relaxation_gradient(const ConcaveSurrogate& s, const Vec& Xt);

struct UnaryBound {
    Mat costs;  // n x K
    double constant = 0.0;

    double value(const Labeling& S) const;
};

// costs[p,k] = grad e_hat(X^k_t)[p]; rows of empty segments are zero.
UnaryBound taylor_unary_bound(const ConcaveSurrogate& s, const Labeling& St);

// sum over nonempty segments of e_hat(X^k); equals E_A - delta * K_nonempty on Booleans.
double shifted_clustering_energy(const ConcaveSurrogate& s, const Labeling& S);

// Full auxiliary function of the joint energy at S_t:
//   a_t(S) = unary(S) + sum_k surcharge_k [S^k nonempty] + gamma * MRF(S)
// surcharge_k = max(delta, 0) for labels empty at S_t, which accounts for the
// delta * K_nonempty term when a move repopulates a label.
struct JointBound {
    UnaryBound unary;
    Vec surcharge;
    const JointEnergySpec* spec = nullptr;

    double value(const Labeling& S) const;
    double clustering_value(const Labeling& S) const;
};

JointBound joint_bound(const JointEnergySpec& spec, const ConcaveSurrogate& s, const Labeling& St);

// Pseudo-bound family B_t(S, delta) = sum_k (g_k + delta h_k)' S^k where g is the
// gradient of the unshifted e and h_pk = w_p (1 - 2 X^k_t[p]) / w'X^k_t.
struct PseudoBoundParts {
    Mat g;
    Mat h;

    UnaryBound at(double delta) const;
};
PseudoBoundParts pseudo_bound_parts(const PairwiseForm& form, const Labeling& St);

}  // namespace kcut
