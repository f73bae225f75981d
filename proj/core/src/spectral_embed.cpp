#include "kcut/spectral_embed.hpp"

#include "kcut/eigensolvers.hpp"

#include <algorithm>
#include <cmath>

namespace kcut {

EigenDecomposition eig_sym(const Mat& M) {
    EigenPairs e = dense_eigen(M);
    return {e.values, e.vectors};
}

double Embedding::frobenius_error() const {
    const double r = static_cast<double>(n() - m);
    double s = discarded_sq_sum + 2.0 * delta * discarded_sum + r * delta * delta;
    return std::sqrt(std::max(0.0, s));
}

double Embedding::relative_frobenius_error() const {
    double err = frobenius_error();
    double kept_sq = (kept.array() + delta).square().sum();
    double total = std::sqrt(kept_sq + err * err);
    return total > 0.0 ? err / total : 0.0;
}

Embedding exact_embedding(const Mat& K) {
    EigenDecomposition e = eig_sym(K);
    const int n = static_cast<int>(K.rows());
    double top = std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
    if (e.values.minCoeff() < -1e-6 * top)
        throw DegenerateError("kernel is not positive semi-definite (lambda_min=" + std::to_string(e.values.minCoeff()) + ")");
    Embedding out;
    out.m = n;
    out.kept = e.values;
    out.discarded = Vec(0);
    Vec root = e.values.cwiseMax(0.0).cwiseSqrt();
    out.points = e.vectors * root.asDiagonal();
    return out;
}

double frobenius_error(const EigenDecomposition& e, int m, double delta) {
    const int n = static_cast<int>(e.values.size());
    if (m < 0 || m > n) throw ParameterError("rank outside 0..n");
    double s = 0.0;
    for (int i = m; i < n; ++i) s += (e.values[i] + delta) * (e.values[i] + delta);
    return std::sqrt(s);
}

double optimal_shift(const Vec& discarded) {
    if (discarded.size() == 0) throw ParameterError("optimal shift undefined without discarded eigenvalues (m = n)");
    return -discarded.mean();
}

namespace {

// smallest m whose optimally shifted error is within rel_tol of the shifted
// kernel norm, from the kept spectrum and the totals tr(N), |N|_F^2
int rank_from_moments(const Vec& top, int n, double trace, double fro2, double rel_tol, int cap) {
    const int limit = std::min<int>({cap, n, static_cast<int>(top.size())});
    double s1 = 0.0, s2 = 0.0;
    for (int m = 1; m <= limit; ++m) {
        s1 += top[m - 1];
        s2 += top[m - 1] * top[m - 1];
        if (m == n) return m;
        const double r = n - m;
        const double d1 = trace - s1, d2 = std::max(0.0, fro2 - s2);
        const double delta = -d1 / r;
        const double err2 = std::max(0.0, d2 - d1 * d1 / r);
        const double total2 = fro2 + 2.0 * delta * trace + n * delta * delta;
        if (err2 <= rel_tol * rel_tol * total2) return m;
    }
    return limit;
}

}  // namespace

int default_rank(const Vec& ev, double rel_tol, int cap) {
    return rank_from_moments(ev, static_cast<int>(ev.size()), ev.sum(), ev.squaredNorm(), rel_tol, cap);
}

Embedding rank_m_embedding(Objective objective, const Affinity& A, int m, const RankOptions& opt) {
    PairwiseForm f = pairwise_form(objective, A, opt.weights);
    const int n = f.M.n();
    if (m < 0 || m > n) throw ParameterError("embedding rank must satisfy 1 <= m <= n");
    const bool unit = (f.w.array() == 1.0).all();
    Vec s = f.w.cwiseSqrt().cwiseInverse();
    Affinity N = unit ? f.M : f.M.scaled(s, s);

    Embedding out;
    out.tag = objective;
    if (!unit) out.weights = f.w;
    Vec values;
    Mat vectors;
    double trace = N.diagonal().sum();
    double fro2 = N.frobenius();
    fro2 *= fro2;

    if (n <= 2000 && !opt.force_iterative) {
        EigenDecomposition e = eig_sym(N.to_dense());
        if (m == 0) m = default_rank(e.values);
        values = e.values.head(m);
        vectors = e.vectors.leftCols(m);
        out.discarded = e.values.tail(n - m);
        out.discarded_sum = out.discarded.sum();
        out.discarded_sq_sum = out.discarded.squaredNorm();
    } else {
        int want = m == 0 ? std::min(64, n) : m;
        EigenPairs e = lanczos_largest([&](const Vec& x) { return N.apply(x); }, n, want);
        if (m == 0) m = rank_from_moments(e.values, n, trace, fro2, 0.1, 64);
        values = e.values.head(m);
        vectors = e.vectors.leftCols(m);
        out.discarded_sum = trace - values.sum();
        out.discarded_sq_sum = std::max(0.0, fro2 - values.squaredNorm());
    }
    out.m = m;
    out.kept = values;

    if (opt.delta) {
        out.delta = *opt.delta;
    } else if (m < n) {
        out.delta = -out.discarded_sum / static_cast<double>(n - m);
    } else {
        out.delta = psd_shift(N).delta;
    }

    Vec shifted = values.array() + out.delta;
    double top = std::max(shifted.cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < m; ++i) {
        if (shifted[i] < -1e-10 * top)
            throw ParameterError("diagonal shift too small: kept eigenvalue " + std::to_string(values[i]) +
                                 " becomes negative with delta=" + std::to_string(out.delta));
        shifted[i] = std::max(0.0, shifted[i]);
    }
    out.points = vectors * shifted.cwiseSqrt().asDiagonal();
    if (!unit) out.points = s.asDiagonal() * out.points;
    return out;
}

namespace {

Mat weighted_means(const Embedding& emb, const Labeling& S, const Vec& w, std::vector<double>& mass) {
    Mat mu = Mat::Zero(S.K, emb.points.cols());
    mass.assign(S.K, 0.0);
    for (int p = 0; p < S.n(); ++p) {
        mu.row(S[p]) += w[p] * emb.points.row(p);
        mass[S[p]] += w[p];
    }
    for (int k = 0; k < S.K; ++k)
        if (mass[k] > 0) mu.row(k) /= mass[k];
    return mu;
}

}  // namespace

UnaryBound spectral_unary_bound(const Embedding& emb, const Labeling& St) {
    if (St.n() != emb.n()) throw DimensionError("labeling size does not match embedding");
    Vec w = emb.point_weights();
    std::vector<double> mass;
    Mat mu = weighted_means(emb, St, w, mass);
    UnaryBound b;
    b.costs.resize(St.n(), St.K);
    for (int k = 0; k < St.K; ++k)
        for (int p = 0; p < St.n(); ++p) b.costs(p, k) = w[p] * (emb.points.row(p) - mu.row(k)).squaredNorm();
    return b;
}

double spectral_energy(const Embedding& emb, const Labeling& S) {
    Vec w = emb.point_weights();
    std::vector<double> mass;
    Mat mu = weighted_means(emb, S, w, mass);
    double e = 0.0;
    for (int p = 0; p < S.n(); ++p) e += w[p] * (emb.points.row(p) - mu.row(S[p])).squaredNorm();
    return e;
}

Mat eigenvector_embedding(Objective objective, const Affinity& A, int K) {
    PairwiseForm f = pairwise_form(objective, A);
    Vec s = f.w.cwiseSqrt().cwiseInverse();
    Affinity N = f.M.scaled(s, s);
    const int n = N.n();
    Mat V;
    if (n <= 2000) {
        V = eig_sym(N.to_dense()).vectors.leftCols(K);
    } else {
        V = lanczos_largest([&](const Vec& x) { return N.apply(x); }, n, K).vectors;
    }
    return s.asDiagonal() * V;
}

}  // namespace kcut
