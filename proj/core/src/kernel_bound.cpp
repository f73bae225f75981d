#include "kcut/kernel_bound.hpp"

#include <cmath>

namespace kcut {

Mat ConcaveSurrogate::kernel_matrix() const {
    Mat k = base.to_dense();
    k.diagonal() += delta * w;
    return k;
}

ConcaveSurrogate build_surrogate(Objective objective, const Affinity& A, std::optional<double> delta,
                                 const std::optional<Vec>& weights) {
    PairwiseForm f = pairwise_form(objective, A, weights);
    ConcaveSurrogate s;
    s.tag = objective;
    s.base = f.M;
    s.w = f.w;
    if (delta) {
        s.delta = *delta;
    } else {
        bool unit = (f.w.array() == 1.0).all();
        ShiftReport r = psd_shift(f.M, unit ? std::nullopt : std::optional<Vec>(f.w));
        s.delta = r.delta;
        s.lambda_min = r.lambda_min;
    }
    return s;
}

double relaxation_value(const ConcaveSurrogate& s, const Vec& X) {
    double mass = s.w.dot(X);
    if (!(mass > 0.0)) throw DegenerateError("relaxation undefined for w'X <= 0");
    return -X.dot(s.apply(X)) / mass;
}

Vec relaxation_gradient(const ConcaveSurrogate& s, const Vec& Xt) {
    double mass = s.w.dot(Xt);
    if (!(mass > 0.0)) throw DegenerateError("gradient undefined for w'X <= 0");
    Vec kx = s.apply(Xt);
    double quad = Xt.dot(kx);
    return s.w * (quad / (mass * mass)) - kx * (2.0 / mass);
}

double UnaryBound::value(const Labeling& S) const {
    double v = constant;
    for (int p = 0; p < S.n(); ++p) v += costs(p, S[p]);
    return v;
}

namespace {

Mat indicator_matrix(const Labeling& S) {
    Mat X = Mat::Zero(S.n(), S.K);
    for (int p = 0; p < S.n(); ++p) X(p, S[p]) = 1.0;
    return X;
}

}  // namespace

UnaryBound taylor_unary_bound(const ConcaveSurrogate& s, const Labeling& St) {
    if (St.n() != s.n()) throw DimensionError("labeling size does not match surrogate");
    const int n = St.n();
    Mat X = indicator_matrix(St);
    Mat KX = s.apply(X);
    UnaryBound b;
    b.costs = Mat::Zero(n, St.K);
    double touch = 0.0;
    for (int k = 0; k < St.K; ++k) {
        double mass = s.w.dot(X.col(k));
        if (!(mass > 0.0)) continue;
        double quad = X.col(k).dot(KX.col(k));
        b.costs.col(k) = s.w * (quad / (mass * mass)) - KX.col(k) * (2.0 / mass);
        touch += -quad / mass;
    }
    // first-order Taylor expansion of a degree-1 homogeneous function: the
    // constant is zero up to rounding; keep it explicit for exact touching
    b.constant = touch - b.value(St);
    return b;
}

double shifted_clustering_energy(const ConcaveSurrogate& s, const Labeling& S) {
    Mat X = indicator_matrix(S);
    Mat KX = s.apply(X);
    double e = 0.0;
    for (int k = 0; k < S.K; ++k) {
        double mass = s.w.dot(X.col(k));
        if (mass > 0.0) e -= X.col(k).dot(KX.col(k)) / mass;
    }
    return e;
}

double JointBound::clustering_value(const Labeling& S) const {
    double v = unary.value(S);
    auto sz = S.sizes();
    for (int k = 0; k < S.K; ++k)
        if (sz[k] > 0) v += surcharge[k];
    return v;
}

double JointBound::value(const Labeling& S) const {
    double v = clustering_value(S);
    if (spec && spec->gamma != 0.0) v += spec->gamma * eval_mrf(spec->mrf, S);
    return v;
}

JointBound joint_bound(const JointEnergySpec& spec, const ConcaveSurrogate& s, const Labeling& St) {
    JointBound j;
    j.unary = taylor_unary_bound(s, St);
    j.surcharge = Vec::Zero(St.K);
    auto sz = St.sizes();
    for (int k = 0; k < St.K; ++k)
        if (sz[k] == 0) j.surcharge[k] = std::max(s.delta, 0.0);
    j.spec = &spec;
    return j;
}

UnaryBound PseudoBoundParts::at(double delta) const {
    UnaryBound b;
    b.costs = g + delta * h;
    return b;
}

PseudoBoundParts pseudo_bound_parts(const PairwiseForm& form, const Labeling& St) {
    const int n = St.n();
    Mat X = indicator_matrix(St);
    Mat MX = form.M.apply(X);
    PseudoBoundParts parts;
    parts.g = Mat::Zero(n, St.K);
    parts.h = Mat::Zero(n, St.K);
    for (int k = 0; k < St.K; ++k) {
        double mass = form.w.dot(X.col(k));
        if (!(mass > 0.0)) continue;
        double quad = X.col(k).dot(MX.col(k));
        parts.g.col(k) = form.w * (quad / (mass * mass)) - MX.col(k) * (2.0 / mass);
        parts.h.col(k) = form.w.cwiseProduct((Vec::Ones(n) - 2.0 * X.col(k))) / mass;
    }
    return parts;
}

}  // namespace kcut
