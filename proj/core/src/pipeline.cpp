#include "kcut/pipeline.hpp"

#include "kcut/kmeans.hpp"
#include "kcut/knn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace kcut {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("invalid number '" + s + "' in " + what);
    }
}

int to_int(const std::string& s, const std::string& what) {
    double v = to_double(s, what);
    if (v != std::floor(v)) throw ParameterError("expected an integer, got '" + s + "' in " + what);
    return static_cast<int>(v);
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

KernelPolicy KernelPolicy::parse(const std::string& s) {
    KernelPolicy k;
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    std::vector<std::string> args = colon == std::string::npos ? std::vector<std::string>{} : split(s.substr(colon + 1), ',');
    const std::string what = "kernel '" + s + "'";
    if (kind == "gaussian") {
        k.kind = Kind::Gaussian;
        if (!args.empty()) k.sigma = to_double(args[0], what);
        if (k.sigma < 0) throw ParameterError("Gaussian width must be positive in " + what);
    } else if (kind == "knn") {
        k.kind = Kind::Knn;
        if (!args.empty()) k.knn = to_int(args[0], what);
        if (args.size() > 1) k.sample = to_int(args[1], what);
        if (k.knn < 1) throw ParameterError("KNN count must be at least 1 in " + what);
        if (k.sample && (*k.sample < 1 || *k.sample > k.knn))
            throw ParameterError("KNN sample size must be in 1..K in " + what);
    } else if (kind == "adaptive") {
        k.kind = Kind::Adaptive;
        if (!args.empty()) {
            if (args[0] == "log") {
                k.transform.kind = DensityTransform::Kind::Log;
                if (args.size() > 1) k.transform.alpha = to_double(args[1], what);
            } else if (args[0] == "const") {
                k.transform.kind = DensityTransform::Kind::Constant;
                if (args.size() > 1) k.transform.value = to_double(args[1], what);
            } else {
                throw ParameterError("unknown density transform '" + args[0] + "' in " + what);
            }
        }
        if (args.size() > 2) k.sigma = to_double(args[2], what);
    } else {
        throw ParameterError("unknown kernel '" + s + "' (expected gaussian, knn or adaptive)");
    }
    return k;
}

std::string KernelPolicy::to_string() const {
    switch (kind) {
    case Kind::Gaussian: return sigma > 0 ? "gaussian:" + num(sigma) : "gaussian";
    case Kind::Knn: return "knn:" + std::to_string(knn) + (sample ? "," + std::to_string(*sample) : "");
    case Kind::Adaptive:
        if (transform.kind == DensityTransform::Kind::Log)
            return "adaptive:log," + num(transform.alpha) + (sigma > 0 ? "," + num(sigma) : "");
        return "adaptive:const," + num(transform.value) + (sigma > 0 ? "," + num(sigma) : "");
    }
    return "?";
}

bool KernelPolicy::operator==(const KernelPolicy& o) const { return to_string() == o.to_string(); }

double median_pairwise_distance(const Mat& points, std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) return 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<double> d;
    const long pairs = static_cast<long>(n) * (n - 1) / 2;
    if (pairs <= 20000) {
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) d.push_back((points.row(p) - points.row(q)).norm());
    } else {
        for (int i = 0; i < 20000; ++i) {
            int p = pick(rng), q = pick(rng);
            if (p != q) d.push_back((points.row(p) - points.row(q)).norm());
        }
    }
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    double m = d[d.size() / 2];
    return m > 0 ? m : 1.0;
}

Affinity build_affinity(const Dataset& data, const KernelPolicy& policy, std::uint64_t seed) {
    data.check();
    switch (policy.kind) {
    case KernelPolicy::Kind::Gaussian: {
        double s = policy.sigma > 0 ? policy.sigma : median_pairwise_distance(data.features, seed);
        return Affinity::dense(gaussian_kernel(data, s));
    }
    case KernelPolicy::Kind::Knn: return Affinity::sparse(knn_affinity(data, policy.knn, policy.sample, seed));
    case KernelPolicy::Kind::Adaptive: {
        double width = policy.parzen_width;
        if (!(width > 0)) {
            // median distance to the 10th neighbour
            const int k = std::min(10, data.n() - 1);
            auto lists = knn_lists(data.features, k);
            std::vector<double> r;
            for (int p = 0; p < data.n(); ++p)
                if (!lists[p].empty()) r.push_back((data.features.row(p) - data.features.row(lists[p].back())).norm());
            std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
            width = r.empty() || r[r.size() / 2] <= 0 ? 1.0 : r[r.size() / 2];
        }
        Vec dens = parzen_density(data, width);
        double med = policy.sigma > 0 ? policy.sigma : 0.25 * median_pairwise_distance(data.features, seed);
        Vec sig = adaptive_bandwidths(dens, policy.transform, data.dim(), med);
        return Affinity::dense(adaptive_gaussian_kernel(data, sig));
    }
    }
    throw ParameterError("unknown kernel policy");
}

BoundChoice BoundChoice::parse(const std::string& s) {
    BoundChoice b;
    if (s == "kernel") {
        b.kind = BoundKind::Kernel;
    } else if (s == "pseudo") {
        b.kind = BoundKind::Pseudo;
    } else if (s.rfind("spectral", 0) == 0) {
        b.kind = BoundKind::Spectral;
        if (s.size() > 8) {
            if (s[8] != ':') throw ParameterError("unknown bound '" + s + "'");
            b.m = to_int(s.substr(9), "bound '" + s + "'");
            if (b.m < 0) throw ParameterError("spectral rank must be nonnegative");
        }
    } else {
        throw ParameterError("unknown bound '" + s + "' (expected kernel, spectral[:m] or pseudo)");
    }
    return b;
}

std::string BoundChoice::to_string() const {
    switch (kind) {
    case BoundKind::Kernel: return "kernel";
    case BoundKind::Pseudo: return "pseudo";
    case BoundKind::Spectral: return m > 0 ? "spectral:" + std::to_string(m) : "spectral";
    }
    return "?";
}

MoveKind move_kind_from_string(const std::string& s) {
    if (s == "expansion") return MoveKind::Expansion;
    if (s == "swap") return MoveKind::Swap;
    throw ParameterError("unknown move kind '" + s + "' (expected expansion or swap)");
}

const char* to_string(MoveKind k) { return k == MoveKind::Expansion ? "expansion" : "swap"; }

CutResult solve(const JointEnergySpec& spec, const Labeling& init, const BoundChoice& bound, const CutOptions& opt) {
    switch (bound.kind) {
    case BoundKind::Kernel: return kernel_cut(spec, init, opt);
    case BoundKind::Spectral: {
        SpectralOptions so;
        static_cast<CutOptions&>(so) = opt;
        so.m = bound.m;
        return spectral_cut(spec, init, so);
    }
    case BoundKind::Pseudo: {
        PseudoOptions po;
        static_cast<CutOptions&>(po) = opt;
        return pseudo_bound_cut(spec, init, po);
    }
    }
    throw ParameterError("unknown bound kind");
}

std::vector<int> seeds_from_mask(const Image& gray, int K) {
    if (gray.channels != 1) throw ParameterError("seed mask must be a single-channel image");
    std::vector<int> hard(gray.size(), -1);
    for (int p = 0; p < gray.size(); ++p) {
        int v = gray.pixels[p];
        if (v == 0) continue;
        if (v > K) throw ParameterError("seed label " + std::to_string(v) + " exceeds K=" + std::to_string(K));
        hard[p] = v - 1;
    }
    return hard;
}

std::vector<int> box_hard_labels(const Grid& grid, int x, int y, int w, int h, int background) {
    if (w <= 0 || h <= 0 || x < 0 || y < 0 || x + w > grid.width || y + h > grid.height)
        throw ParameterError("box must lie inside the image");
    std::vector<int> hard(static_cast<size_t>(grid.height) * grid.width, background);
    for (int yy = y; yy < y + h; ++yy)
        for (int xx = x; xx < x + w; ++xx) hard[grid.index(yy, xx)] = -1;
    return hard;
}

void rasterize_stroke(std::vector<int>& hard, const Grid& grid, const std::vector<std::pair<double, double>>& points,
                      double radius, int label) {
    if (points.empty()) return;
    const double r = std::max(radius, 0.5);
    auto disc = [&](double cx, double cy) {
        for (int y = std::max(0, static_cast<int>(std::floor(cy - r))); y <= std::min(grid.height - 1, static_cast<int>(std::ceil(cy + r))); ++y)
            for (int x = std::max(0, static_cast<int>(std::floor(cx - r))); x <= std::min(grid.width - 1, static_cast<int>(std::ceil(cx + r))); ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) hard[grid.index(y, x)] = label;
    };
    disc(points[0].first, points[0].second);
    for (size_t i = 1; i < points.size(); ++i) {
        auto [x0, y0] = points[i - 1];
        auto [x1, y1] = points[i];
        const int steps = std::max(1, static_cast<int>(std::ceil(std::hypot(x1 - x0, y1 - y0) / (0.5 * r))));
        for (int s = 1; s <= steps; ++s) {
            double t = static_cast<double>(s) / steps;
            disc(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        }
    }
}

SegmentationProblem build_segmentation(const Dataset& features, const SegmentParams& prm, std::vector<int> hard) {
    if (!features.grid) throw ParameterError("segmentation needs an image grid");
    if (prm.K < 2) throw ParameterError("segmentation needs K >= 2");
    for (int v : hard)
        if (v >= prm.K) throw ParameterError("seed label exceeds K");
    SegmentationProblem sp;
    sp.features = features;
    sp.spec.objective = prm.objective;
    sp.spec.K = prm.K;
    sp.spec.gamma = prm.gamma;
    sp.spec.hard = std::move(hard);
    sp.spec.affinity = build_affinity(features, prm.kernel, prm.seed);
    if (prm.gamma != 0.0) {
        Dataset color;
        color.features = features.features.leftCols(std::min<Eigen::Index>(3, features.features.cols()));
        color.grid = features.grid;
        sp.spec.mrf.push_back(contrast_weights(color, prm.connectivity, prm.potts));
    }
    return sp;
}

Labeling seeded_init(const Dataset& features, const std::vector<int>& hard, int K, std::uint64_t seed) {
    const int n = features.n();
    std::vector<int> count(K, 0);
    Mat sums = Mat::Zero(K, features.dim());
    for (int p = 0; p < n && !hard.empty(); ++p)
        if (hard[p] >= 0) {
            count[hard[p]]++;
            sums.row(hard[p]) += features.features.row(p);
        }
    bool all = true;
    for (int c : count) all = all && c > 0;
    Labeling S;
    if (all) {
        for (int k = 0; k < K; ++k) sums.row(k) /= count[k];
        S = km_assign(features.features, sums);
    } else if (!hard.empty() && count[0] > 0 && K == 2) {
        // box protocol: free pixels start as foreground
        S = Labeling(std::vector<int>(n, 0), K);
        for (int p = 0; p < n; ++p)
            if (hard[p] < 0) S[p] = 1;
    } else {
        KMOptions ko;
        ko.K = K;
        ko.seed = seed;
        S = run_kmeans(features.features, std::nullopt, ko).labeling;
    }
    return apply_hard(S, hard);
}

}  // namespace kcut
