#pragma once

#include "kcut/core_model.hpp"

#include <functional>

namespace kcut {

// Eigenpairs with values sorted descending; vectors are the matching columns.
struct EigenPairs {
    Vec values;
    Mat vectors;
    int iterations = 0;
};

using LinearOp = std::function<Vec(const Vec&)>;

struct LanczosOptions {
    int max_restarts = 300;
    double tol = 1e-10;  // residual relative to the spectral radius estimate
    int extra = 24;      // basis vectors beyond the wanted count
    std::uint64_t seed = 7;
};

EigenPairs dense_eigen(const Mat& M);

// k algebraically largest eigenpairs of a symmetric operator. Lanczos
// expansion with full reorthogonalization and thick restarts.
EigenPairs lanczos_largest(const LinearOp& op, int n, int k, const LanczosOptions& opt = {});
EigenPairs lanczos_smallest(const LinearOp& op, int n, int k, const LanczosOptions& opt = {});

// Make the largest-magnitude entry of every column positive.
void fix_signs(Mat& vectors);

}  // namespace kcut
