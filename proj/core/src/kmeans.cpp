#include "kcut/kmeans.hpp"

#include "kcut/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kcut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec weights_or_ones(const std::optional<Vec>& w, int n) { return w ? *w : Vec::Ones(n); }

Labeling assign_masked(const Mat& points, const Mat& means, const std::vector<int>& sizes) {
    const int n = static_cast<int>(points.rows());
    const int K = static_cast<int>(means.rows());
    Labeling S(std::vector<int>(n, 0), K);
    for (int p = 0; p < n; ++p) {
        double best = kInf;
        int arg = 0;
        for (int k = 0; k < K; ++k) {
            if (!sizes.empty() && sizes[k] == 0) continue;
            double d = (points.row(p) - means.row(k)).squaredNorm();
            if (d < best) {
                best = d;
                arg = k;
            }
        }
        S[p] = arg;
    }
    return S;
}

bool converged_step(double before, double after, double tol) {
    return std::abs(before - after) <= tol * std::max(1.0, std::abs(before));
}

}  // namespace

Labeling km_assign(const Mat& points, const Mat& means) { return assign_masked(points, means, {}); }

Mat km_means(const Mat& points, const std::optional<Vec>& weights, const Labeling& S) {
    Vec w = weights_or_ones(weights, S.n());
    Mat mu = Mat::Zero(S.K, points.cols());
    Vec mass = Vec::Zero(S.K);
    for (int p = 0; p < S.n(); ++p) {
        mu.row(S[p]) += w[p] * points.row(p);
        mass[S[p]] += w[p];
    }
    for (int k = 0; k < S.K; ++k)
        if (mass[k] > 0) mu.row(k) /= mass[k];
    return mu;
}

double km_energy(const Mat& points, const std::optional<Vec>& weights, const Labeling& S) {
    Vec w = weights_or_ones(weights, S.n());
    Mat mu = km_means(points, weights, S);
    double e = 0.0;
    for (int p = 0; p < S.n(); ++p) e += w[p] * (points.row(p) - mu.row(S[p])).squaredNorm();
    return e;
}

namespace {

// n x K implicit kernel K-means costs; columns of empty segments are +inf
Mat kkm_costs(const Affinity& K, const Vec& w, const Labeling& S) {
    const int n = S.n();
    Mat WX = Mat::Zero(n, S.K);
    Vec mass = Vec::Zero(S.K);
    for (int p = 0; p < n; ++p) {
        WX(p, S[p]) = w[p];
        mass[S[p]] += w[p];
    }
    Mat KWX = K.apply(WX);
    Vec diag = K.diagonal();
    Mat c(n, S.K);
    for (int k = 0; k < S.K; ++k) {
        if (!(mass[k] > 0)) {
            c.col(k).setConstant(kInf);
            continue;
        }
        double quad = WX.col(k).dot(KWX.col(k)) / (mass[k] * mass[k]);
        c.col(k) = diag - KWX.col(k) * (2.0 / mass[k]);
        c.col(k).array() += quad;
    }
    return c;
}

Labeling argmin_rows(const Mat& c, int K) {
    Labeling S(std::vector<int>(c.rows(), 0), K);
    for (int p = 0; p < c.rows(); ++p) {
        int arg = 0;
        double best = kInf;
        for (int k = 0; k < c.cols(); ++k)
            if (c(p, k) < best) {
                best = c(p, k);
                arg = k;
            }
        S[p] = arg;
    }
    return S;
}

}  // namespace

Labeling kkm_assign_implicit(const Affinity& K, const std::optional<Vec>& weights, const Labeling& St) {
    return argmin_rows(kkm_costs(K, weights_or_ones(weights, St.n()), St), St.K);
}

double kkm_energy(const Affinity& K, const std::optional<Vec>& weights, const Labeling& S) {
    Vec w = weights_or_ones(weights, S.n());
    double e = w.dot(K.diagonal());
    Vec assoc = segment_association(K.scaled(w, w), S);
    Vec mass = segment_volume(w, S);
    for (int k = 0; k < S.K; ++k)
        if (mass[k] > 0) e -= assoc[k] / mass[k];
    return e;
}

Labeling initial_labeling(int n, const KMOptions& opt, const Mat* points, std::uint64_t seed) {
    const int K = opt.K;
    switch (opt.init) {
        case InitKind::User: {
            if (!opt.user_init) throw ParameterError("user initialization requested but no labeling supplied");
            if (opt.user_init->n() != n) throw DimensionError("user initialization has wrong length");
            return *opt.user_init;
        }
        case InitKind::GridPatches: {
            if (!opt.grid) throw ParameterError("grid-patch initialization needs a pixel grid");
            const Grid& g = *opt.grid;
            Labeling S(std::vector<int>(n, 0), K);
            for (int y = 0; y < g.height; ++y)
                for (int x = 0; x < g.width; ++x) {
                    int py = y * opt.patches / g.height, px = x * opt.patches / g.width;
                    S[g.index(y, x)] = (py * opt.patches + px) % K;
                }
            return S;
        }
        case InitKind::FarthestPoint: {
            if (!points) throw ParameterError("farthest-point seeding needs explicit points");
            std::mt19937_64 rng(seed);
            std::vector<int> centers{std::uniform_int_distribution<int>(0, n - 1)(rng)};
            Vec dist = (points->rowwise() - points->row(centers[0])).rowwise().squaredNorm();
            while (static_cast<int>(centers.size()) < K) {
                Eigen::Index far = 0;
                dist.maxCoeff(&far);
                centers.push_back(static_cast<int>(far));
                dist = dist.cwiseMin((points->rowwise() - points->row(far)).rowwise().squaredNorm());
            }
            Mat mu(K, points->cols());
            for (int k = 0; k < K; ++k) mu.row(k) = points->row(centers[k]);
            Labeling S = km_assign(*points, mu);
            S.K = K;
            return S;
        }
        case InitKind::Random:
        default: {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> pick(0, K - 1);
            Labeling S(std::vector<int>(n, 0), K);
            for (int p = 0; p < n; ++p) S[p] = pick(rng);
            return S;
        }
    }
}

namespace {

// Move the worst-fit point of a cluster with >= 2 members into each empty
// cluster. cost(p) is the point's current contribution. Never raises energy.
template <class CostFn>
void reseed_empty(Labeling& S, CostFn cost) {
    for (int k = 0; k < S.K; ++k) {
        auto sz = S.sizes();
        if (sz[k] > 0) continue;
        Vec c = cost(S);
        int arg = -1;
        double best = -1.0;
        for (int p = 0; p < S.n(); ++p)
            if (sz[S[p]] >= 2 && c[p] > best) {
                best = c[p];
                arg = p;
            }
        if (arg < 0) return;
        S[arg] = k;
    }
}

KMState best_of(std::vector<KMState> runs) {
    size_t best = 0;
    for (size_t i = 1; i < runs.size(); ++i)
        if (runs[i].energy() < runs[best].energy()) best = i;
    return std::move(runs[best]);
}

}  // namespace

KMState run_kmeans(const Mat& points, const std::optional<Vec>& weights, const KMOptions& opt) {
    const int n = static_cast<int>(points.rows());
    if (opt.K < 1 || opt.K > n) throw ParameterError("K-means needs 1 <= K <= n");
    Vec w = weights_or_ones(weights, n);
    const int runs = opt.init == InitKind::Random ? std::max(1, opt.restarts) : 1;
    std::vector<KMState> results;
    for (int r = 0; r < runs; ++r) {
        KMState st;
        st.labeling = initial_labeling(n, opt, &points, opt.seed + static_cast<std::uint64_t>(r));
        auto point_cost = [&](const Labeling& S) {
            Mat mu = km_means(points, weights, S);
            Vec c(n);
            for (int p = 0; p < n; ++p) c[p] = w[p] * (points.row(p) - mu.row(S[p])).squaredNorm();
            return c;
        };
        if (opt.reseed_empty) reseed_empty(st.labeling, point_cost);
        st.means = km_means(points, weights, st.labeling);
        st.trace.push_back(km_energy(points, weights, st.labeling));
        for (int it = 0; it < opt.max_iters; ++it) {
            Labeling next = assign_masked(points, st.means, st.labeling.sizes());
            next.K = opt.K;
            if (opt.reseed_empty) reseed_empty(next, point_cost);
            bool same = next == st.labeling;
            st.labeling = std::move(next);
            st.means = km_means(points, weights, st.labeling);
            double e = km_energy(points, weights, st.labeling);
            double prev = st.trace.back();
            st.trace.push_back(e);
            st.iterations = it + 1;
            if (same || converged_step(prev, e, opt.tol)) {
                st.converged = true;
                break;
            }
        }
        results.push_back(std::move(st));
    }
    return best_of(std::move(results));
}

KMState run_kernel_kmeans(const Affinity& K, const std::optional<Vec>& weights, const KMOptions& opt) {
    const int n = K.n();
    if (opt.K < 1 || opt.K > n) throw ParameterError("kernel K-means needs 1 <= K <= n");
    Vec w = weights_or_ones(weights, n);
    const int runs = opt.init == InitKind::Random ? std::max(1, opt.restarts) : 1;
    std::vector<KMState> results;
    auto point_cost = [&](const Labeling& S) {
        Mat c = kkm_costs(K, w, S);
        Vec out(n);
        for (int p = 0; p < n; ++p) out[p] = w[p] * c(p, S[p]);
        return out;
    };
    for (int r = 0; r < runs; ++r) {
        KMState st;
        st.labeling = initial_labeling(n, opt, nullptr, opt.seed + static_cast<std::uint64_t>(r));
        if (opt.reseed_empty) reseed_empty(st.labeling, point_cost);
        st.trace.push_back(kkm_energy(K, weights, st.labeling));
        for (int it = 0; it < opt.max_iters; ++it) {
            Labeling next = kkm_assign_implicit(K, weights, st.labeling);
            if (opt.reseed_empty) reseed_empty(next, point_cost);
            bool same = next == st.labeling;
            st.labeling = std::move(next);
            double e = kkm_energy(K, weights, st.labeling);
            double prev = st.trace.back();
            st.trace.push_back(e);
            st.iterations = it + 1;
            if (same || converged_step(prev, e, opt.tol)) {
                st.converged = true;
                break;
            }
        }
        results.push_back(std::move(st));
    }
    return best_of(std::move(results));
}

double weak_kkm_energy(const Mat& points, double sigma, const Labeling& S, const Mat& modes) {
    const double c = -0.5 / (sigma * sigma);
    double e = 0.0;
    for (int p = 0; p < S.n(); ++p) e += 2.0 - 2.0 * std::exp(c * (points.row(p) - modes.row(S[p])).squaredNorm());
    return e;
}

double pairwise_kkm_energy(const Mat& points, double sigma, const Labeling& S) {
    const double c = -0.5 / (sigma * sigma);
    auto sz = S.sizes();
    Vec assoc = Vec::Zero(S.K);
    for (int p = 0; p < S.n(); ++p)
        for (int q = 0; q < S.n(); ++q)
            if (S[p] == S[q]) assoc[S[p]] += std::exp(c * (points.row(p) - points.row(q)).squaredNorm());
    double e = 0.0;
    for (int k = 0; k < S.K; ++k)
        if (sz[k] > 0) e += sz[k] - assoc[k] / sz[k];
    return e;
}

namespace {

double mode_score(const Mat& points, const std::vector<int>& members, const Eigen::RowVectorXd& m, double c) {
    double s = 0.0;
    for (int p : members) s += std::exp(c * (points.row(p) - m).squaredNorm());
    return s;
}

// Best observed point (or the previous mode if it scores higher), then
// mean-shift steps that are kept only while they improve the score.
Eigen::RowVectorXd find_mode(const Mat& points, const std::vector<int>& members, double sigma,
                             const Eigen::RowVectorXd* previous) {
    const double c = -0.5 / (sigma * sigma);
    int best_p = members.front();
    double best = -1.0;
    for (int q : members) {
        double s = mode_score(points, members, points.row(q), c);
        if (s > best) {
            best = s;
            best_p = q;
        }
    }
    Eigen::RowVectorXd m = points.row(best_p);
    if (previous) {
        double s = mode_score(points, members, *previous, c);
        if (s > best) {
            best = s;
            m = *previous;
        }
    }
    for (int step = 0; step < 20; ++step) {
        Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(points.cols());
        double den = 0.0;
        for (int p : members) {
            double k = std::exp(c * (points.row(p) - m).squaredNorm());
            num += k * points.row(p);
            den += k;
        }
        if (!(den > 0)) break;
        Eigen::RowVectorXd next = num / den;
        double s = mode_score(points, members, next, c);
        if (!(s > best)) break;
        best = s;
        m = next;
    }
    return m;
}

}  // namespace

KModesState kmodes_weak_kkm(const Mat& points, double sigma, const KMOptions& opt) {
    if (!(sigma > 0)) throw ParameterError("kernel width must be positive");
    const int n = static_cast<int>(points.rows());
    if (opt.K < 1 || opt.K > n) throw ParameterError("K-modes needs 1 <= K <= n");
    const double c = -0.5 / (sigma * sigma);
    const int runs = opt.init == InitKind::Random ? std::max(1, opt.restarts) : 1;

    KModesState best;
    bool have = false;
    for (int r = 0; r < runs; ++r) {
        KModesState st;
        st.labeling = initial_labeling(n, opt, &points, opt.seed + static_cast<std::uint64_t>(r));
        auto recompute = [&](KModesState& s) {
            std::vector<std::vector<int>> members(opt.K);
            for (int p = 0; p < n; ++p) members[s.labeling[p]].push_back(p);
            const bool warm = s.modes.rows() == opt.K;
            Mat modes = Mat::Zero(opt.K, points.cols());
            for (int k = 0; k < opt.K; ++k) {
                if (members[k].empty()) continue;
                Eigen::RowVectorXd prev;
                if (warm) prev = s.modes.row(k);
                modes.row(k) = find_mode(points, members[k], sigma, warm ? &prev : nullptr);
            }
            s.modes = modes;
        };
        auto point_cost = [&](const Labeling& S) {
            KModesState tmp;
            tmp.labeling = S;
            recompute(tmp);
            Vec out(n);
            for (int p = 0; p < n; ++p) out[p] = 2.0 - 2.0 * std::exp(c * (points.row(p) - tmp.modes.row(S[p])).squaredNorm());
            return out;
        };
        if (opt.reseed_empty) reseed_empty(st.labeling, point_cost);
        recompute(st);
        st.trace.push_back(weak_kkm_energy(points, sigma, st.labeling, st.modes));
        for (int it = 0; it < opt.max_iters; ++it) {
            Labeling next = assign_masked(points, st.modes, st.labeling.sizes());
            next.K = opt.K;
            if (opt.reseed_empty) reseed_empty(next, point_cost);
            bool same = next == st.labeling;
            st.labeling = std::move(next);
            recompute(st);
            double e = weak_kkm_energy(points, sigma, st.labeling, st.modes);
            double prev = st.trace.back();
            st.trace.push_back(e);
            st.iterations = it + 1;
            if (same || converged_step(prev, e, opt.tol)) {
                st.converged = true;
                break;
            }
        }
        st.means = st.modes;
        if (!have || st.energy() < best.energy()) {
            best = std::move(st);
            have = true;
        }
    }
    return best;
}

}  // namespace kcut
