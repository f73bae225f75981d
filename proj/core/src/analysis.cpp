#include "kcut/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace kcut {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gauss_pdf(const Eigen::Vector2d& x, const Eigen::Vector2d& c, double s) {
    return std::exp(-(x - c).squaredNorm() / (2 * s * s)) / (2 * kPi * s * s);
}

}  // namespace

Synthetic two_rings(const RingsParams& prm, std::uint64_t seed) {
    if (prm.n_inner < 1 || prm.n_outer < 1) throw ParameterError("ring sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    std::normal_distribution<double> jitter(0.0, prm.noise);
    const int n = prm.n_inner + prm.n_outer;
    Synthetic s;
    s.data.features.resize(n, 2);
    s.truth.resize(n);
    for (int p = 0; p < n; ++p) {
        const bool inner = p < prm.n_inner;
        double r = (inner ? prm.r_inner : prm.r_outer) + jitter(rng);
        double a = angle(rng);
        s.data.features(p, 0) = r * std::cos(a);
        s.data.features(p, 1) = r * std::sin(a);
        s.truth[p] = inner ? 0 : 1;
    }
    return s;
}

Synthetic gaussian_blobs(const BlobsParams& prm, std::uint64_t seed) {
    const size_t K = prm.counts.size();
    if (K == 0 || prm.centers.size() != K || prm.covariances.size() != K)
        throw ParameterError("blob counts, centers and covariances must have equal length");
    const int dim = static_cast<int>(prm.centers[0].size());
    int n = 0;
    for (int c : prm.counts) n += c;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Synthetic s;
    s.data.features.resize(n, dim);
    s.truth.resize(n);
    int p = 0;
    for (size_t k = 0; k < K; ++k) {
        Eigen::LLT<Mat> llt(prm.covariances[k]);
        if (llt.info() != Eigen::Success) throw ParameterError("blob covariance must be positive definite");
        Mat L = llt.matrixL();
        for (int i = 0; i < prm.counts[k]; ++i, ++p) {
            Vec e(dim);
            for (int d = 0; d < dim; ++d) e[d] = z(rng);
            s.data.features.row(p) = (prm.centers[k] + L * e).transpose();
            s.truth[p] = static_cast<int>(k);
        }
    }
    return s;
}

Synthetic dense_blob_plus_background(const DenseBlobParams& prm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const int n = prm.n_left + prm.n_right;
    const int n_core = static_cast<int>(std::lround(prm.core_fraction * prm.n_left));
    const Eigen::Vector2d cl(-prm.separation / 2, 0.0), cr(prm.separation / 2, 0.0);
    Synthetic s;
    s.data.features.resize(n, 2);
    s.truth.resize(n);
    s.density.resize(n);
    for (int p = 0; p < n; ++p) {
        Eigen::Vector2d c = p < prm.n_left ? cl : cr;
        double sd = p < n_core ? prm.core_sigma : (p < prm.n_left ? prm.halo_sigma : prm.right_sigma);
        Eigen::Vector2d x = c + sd * Eigen::Vector2d(z(rng), z(rng));
        s.data.features.row(p) = x.transpose();
        s.truth[p] = p < prm.n_left ? 0 : 1;
    }
    const double wc = static_cast<double>(n_core) / n, wh = static_cast<double>(prm.n_left - n_core) / n,
                 wr = static_cast<double>(prm.n_right) / n;
    for (int p = 0; p < n; ++p) {
        Eigen::Vector2d x = s.data.features.row(p).transpose();
        s.density[p] = wc * gauss_pdf(x, cl, prm.core_sigma) + wh * gauss_pdf(x, cl, prm.halo_sigma) +
                       wr * gauss_pdf(x, cr, prm.right_sigma);
    }
    return s;
}

SyntheticImage camouflage_image(const CamouflageParams& prm, std::uint64_t seed) {
    if (prm.height < 8 || prm.width < 8) throw ParameterError("camouflage image must be at least 8x8");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, prm.noise);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double g = prm.color_gap;
    const Eigen::Vector3d mean(0.5, 0.5, 0.45);
    // both textures alternate two colours symmetric around the same mean
    const Eigen::Vector3d bg_dir(g, 0.4 * g, 0.2 * g), fg_dir(-0.3 * g, g, -0.5 * g);
    // elliptical object at a seeded position
    const double cy = prm.height * (0.4 + 0.2 * u(rng)), cx = prm.width * (0.4 + 0.2 * u(rng));
    const double ry = prm.height * (0.2 + 0.05 * u(rng)), rx = prm.width * (0.2 + 0.05 * u(rng));
    const int n = prm.height * prm.width;
    SyntheticImage img;
    img.image.features.resize(n, 3);
    img.image.grid = Grid{prm.height, prm.width, 8};
    img.truth.resize(n);
    for (int y = 0; y < prm.height; ++y)
        for (int x = 0; x < prm.width; ++x) {
            const int p = y * prm.width + x;
            const double dy = (y - cy) / ry, dx = (x - cx) / rx;
            const bool obj = dy * dy + dx * dx <= 1.0;
            Eigen::Vector3d c = mean + (coin(rng) ? 1.0 : -1.0) * (obj ? fg_dir : bg_dir);
            for (int d = 0; d < 3; ++d) img.image.features(p, d) = std::clamp(c[d] + z(rng), 0.0, 1.0);
            img.truth[p] = obj ? 1 : 0;
        }
    return img;
}

double error_rate(const std::vector<int>& labels, const std::vector<int>& truth, const std::vector<char>& region) {
    if (labels.size() != truth.size()) throw DimensionError("labeling and ground truth differ in size");
    if (!region.empty() && region.size() != labels.size()) throw DimensionError("evaluation region size mismatch");
    long wrong = 0, total = 0;
    for (size_t p = 0; p < labels.size(); ++p) {
        if (!region.empty() && !region[p]) continue;
        ++total;
        wrong += labels[p] != truth[p];
    }
    if (total == 0) throw DegenerateError("empty evaluation region");
    return 100.0 * wrong / total;
}

namespace {

std::map<std::pair<int, int>, long> contingency(const std::vector<int>& a, const std::vector<int>& b,
                                                std::map<int, long>& ca, std::map<int, long>& cb) {
    if (a.size() != b.size()) throw DimensionError("partitions differ in size");
    std::map<std::pair<int, int>, long> t;
    for (size_t i = 0; i < a.size(); ++i) {
        t[{a[i], b[i]}]++;
        ca[a[i]]++;
        cb[b[i]]++;
    }
    return t;
}

double entropy(const std::map<int, long>& c, double n) {
    double h = 0.0;
    for (auto& [k, v] : c) {
        double p = v / n;
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const std::map<std::pair<int, int>, long>& t, const std::map<int, long>& ca,
                          const std::map<int, long>& cb, double n) {
    double mi = 0.0;
    for (auto& [key, v] : t) {
        double pij = v / n;
        mi += pij * std::log(pij * n * n / (static_cast<double>(ca.at(key.first)) * cb.at(key.second)));
    }
    return mi;
}

}  // namespace

double best_permutation_error(const std::vector<int>& labels, const std::vector<int>& truth) {
    if (labels.size() != truth.size()) throw DimensionError("labeling and ground truth differ in size");
    if (labels.empty()) throw DegenerateError("empty labeling");
    int K = 0;
    for (size_t i = 0; i < labels.size(); ++i) K = std::max({K, labels[i] + 1, truth[i] + 1});
    if (K > 9) throw ParameterError("best-permutation error supports at most 9 labels");
    std::vector<std::vector<long>> t(K, std::vector<long>(K, 0));
    for (size_t i = 0; i < labels.size(); ++i) t[labels[i]][truth[i]]++;
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hit = 0;
        for (int k = 0; k < K; ++k) hit += t[k][perm[k]];
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return 100.0 * (static_cast<double>(labels.size()) - best) / labels.size();
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<int, long> ca, cb;
    auto t = contingency(a, b, ca, cb);
    const double n = static_cast<double>(a.size());
    if (n == 0) throw DegenerateError("empty partitions");
    double ha = entropy(ca, n), hb = entropy(cb, n);
    if (ha + hb <= 0.0) return 1.0;  // both partitions trivial and identical
    double v = 2.0 * mutual_information(t, ca, cb, n) / (ha + hb);
    return std::clamp(v, 0.0, 1.0);
}

double variation_of_information(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<int, long> ca, cb;
    auto t = contingency(a, b, ca, cb);
    const double n = static_cast<double>(a.size());
    if (n == 0) throw DegenerateError("empty partitions");
    return std::max(0.0, entropy(ca, n) + entropy(cb, n) - 2.0 * mutual_information(t, ca, cb, n));
}

double covering(const std::vector<int>& segmentation, const std::vector<int>& truth) {
    std::map<int, long> cs, ct;
    auto t = contingency(segmentation, truth, cs, ct);
    const double n = static_cast<double>(truth.size());
    double total = 0.0;
    for (auto& [g, size] : ct) {
        double best = 0.0;
        for (auto& [key, inter] : t) {
            if (key.second != g) continue;
            double uni = static_cast<double>(cs[key.first] + size - inter);
            best = std::max(best, inter / uni);
        }
        total += size * best;
    }
    return total / n;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
        size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw DimensionError("spearman needs two equal-length samples");
    auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0 || sbb == 0) throw DegenerateError("spearman undefined for constant samples");
    return sab / std::sqrt(saa * sbb);
}

double normalized_gaussian(double r2, double sigma, int dim) {
    return std::pow(2 * kPi * sigma * sigma, -0.5 * dim) * std::exp(-r2 / (2 * sigma * sigma));
}

double parzen_energy(const Mat& points, double sigma, const Labeling& S) {
    if (!(sigma > 0)) throw ParameterError("Parzen bandwidth must be positive");
    if (points.rows() != S.n()) throw DimensionError("points and labeling differ in size");
    const int n = S.n(), dim = static_cast<int>(points.cols());
    auto sz = S.sizes();
    double e = 0.0;
    for (int p = 0; p < n; ++p) {
        double dens = 0.0;
        for (int q = 0; q < n; ++q)
            if (S[q] == S[p]) dens += normalized_gaussian((points.row(p) - points.row(q)).squaredNorm(), sigma, dim);
        e -= dens / sz[S[p]];
    }
    return e;
}

double gini_impurity(const std::vector<double>& probabilities) {
    double s = 0.0, total = 0.0;
    for (double v : probabilities) {
        if (v < 0) throw ParameterError("probabilities must be nonnegative");
        s += v * v;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ParameterError("probabilities must sum to one");
    return 1.0 - s;
}

double gini_energy(const Mat& points, double delta, const Labeling& S) {
    // |S^k| (1 - mean_p d_S(I_p)) summed over k equals n + Parzen energy at delta
    return S.n() + parzen_energy(points, delta, S);
}

double gini_energy(const Labeling& S, const Vec& segment_densities) {
    if (segment_densities.size() != S.n()) throw DimensionError("density vector size mismatch");
    auto sz = S.sizes();
    Vec sum = Vec::Zero(S.K);
    for (int p = 0; p < S.n(); ++p) sum[S[p]] += segment_densities[p];
    double e = 0.0;
    for (int k = 0; k < S.K; ++k)
        if (sz[k] > 0) e += sz[k] * (1.0 - sum[k] / sz[k]);
    return e;
}

std::vector<Labeling> all_two_partitions(int n) {
    if (n < 2 || n > 24) throw ParameterError("partition enumeration supports 2..24 points");
    std::vector<Labeling> out;
    for (long mask = 1; mask < (1L << (n - 1)); ++mask) {
        Labeling S(std::vector<int>(n, 0), 2);
        for (int i = 1; i < n; ++i) S[i] = (mask >> (i - 1)) & 1;
        out.push_back(S);
    }
    return out;
}

}  // namespace kcut
