#pragma once

#include <kcut/core_model.hpp>
#include <kcut/affinity.hpp>

#include <doctest.h>

#include <random>

namespace testing {

using Rng = std::mt19937_64;

inline double unif(Rng& r, double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(r); }
inline int pick(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }

inline kcut::Mat random_points(Rng& r, int n, int dim, double lo = -1.0, double hi = 1.0) {
    kcut::Mat X(n, dim);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(r, lo, hi);
    return X;
}

// symmetric, non-negative, positive degrees; indefinite in general
inline kcut::Mat random_symmetric(Rng& r, int n, double lo = 0.01, double hi = 1.0) {
    kcut::Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = unif(r, lo, hi);
    return A;
}

inline kcut::Mat random_gaussian_kernel(Rng& r, int n, int dim = 2) {
    return kcut::gaussian_kernel(kcut::Dataset::from_features(random_points(r, n, dim)), unif(r, 0.3, 1.2));
}

inline kcut::Labeling random_labeling(Rng& r, int n, int K, bool all_nonempty = false) {
    kcut::Labeling S(std::vector<int>(n), K);
    for (int p = 0; p < n; ++p) S[p] = pick(r, 0, K - 1);
    if (all_nonempty)
        for (int k = 0; k < K && k < n; ++k) S[k] = k;
    return S;
}

inline double rel(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// all K^n labelings, for brute-force oracles on tiny instances
template <class F>
void for_each_labeling(int n, int K, F&& f) {
    kcut::Labeling S(std::vector<int>(n, 0), K);
    while (true) {
        f(static_cast<const kcut::Labeling&>(S));
        int p = 0;
        while (p < n && ++S[p] == K) S[p++] = 0;
        if (p == n) return;
    }
}

}  // namespace testing
