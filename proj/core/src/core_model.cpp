#include "kcut/core_model.hpp"

#include <cmath>

namespace kcut {

void Dataset::check() const {
    if (features.rows() < 1) throw ParameterError("dataset must contain at least one point");
    if (!features.allFinite()) throw ParameterError("dataset features contain non-finite values");
    if (weights) {
        if (weights->size() != features.rows())
            throw DimensionError("weights length " + std::to_string(weights->size()) +
                                 " does not match n=" + std::to_string(features.rows()));
        if ((weights->array() <= 0.0).any()) throw ParameterError("point weights must be positive");
    }
    if (grid) {
        if (static_cast<long>(grid->height) * grid->width != features.rows())
            throw DimensionError("grid " + std::to_string(grid->height) + "x" +
                                 std::to_string(grid->width) + " does not match n=" +
                                 std::to_string(features.rows()));
        if (grid->connectivity != 4 && grid->connectivity != 8)
            throw ParameterError("grid connectivity must be 4 or 8");
    }
}

Dataset Dataset::from_features(Mat f) {
    Dataset d;
    d.features = std::move(f);
    d.check();
    return d;
}

Labeling Labeling::constant(int n, int K, int label) {
    return Labeling(std::vector<int>(n, label), K);
}

void Labeling::check() const {
    if (K < 1) throw ParameterError("labeling needs K >= 1");
    for (int p = 0; p < n(); ++p)
        if (labels[p] < 0 || labels[p] >= K)
            throw ParameterError("label " + std::to_string(labels[p] + 1) + " at point " +
                                 std::to_string(p) + " outside 1.." + std::to_string(K));
}

std::vector<int> Labeling::sizes() const {
    std::vector<int> s(K, 0);
    for (int l : labels) ++s[l];
    return s;
}

int Labeling::nonempty_count() const {
    int c = 0;
    for (int s : sizes()) c += s > 0;
    return c;
}

std::uint64_t Labeling::hash() const {
    // FNV-1a over the label sequence
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 4; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(K));
    for (int l : labels) mix(static_cast<std::uint64_t>(l));
    return h;
}

std::vector<int> Labeling::to_external() const {
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] + 1;
    return out;
}

Labeling Labeling::from_external(const std::vector<int>& one_based, int K) {
    Labeling l;
    l.K = K;
    l.labels.resize(one_based.size());
    for (size_t i = 0; i < one_based.size(); ++i) l.labels[i] = one_based[i] - 1;
    l.check();
    return l;
}

std::vector<Vec> indicators(const Labeling& labeling) {
    std::vector<Vec> x(labeling.K, Vec::Zero(labeling.n()));
    for (int p = 0; p < labeling.n(); ++p) x[labeling[p]][p] = 1.0;
    return x;
}

}  // namespace kcut
