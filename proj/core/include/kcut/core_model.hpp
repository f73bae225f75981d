#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcut {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameter (negative width, K out of range, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input that is valid in form but makes the requested quantity undefined.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

struct Grid {
    int height = 0;
    int width = 0;
    int connectivity = 8;  // 4 or 8

    int index(int y, int x) const { return y * width + x; }
};

struct Dataset {
    Mat features;  // n x dim, row p is I_p
    std::optional<Grid> grid;
    std::optional<Vec> weights;

    int n() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }

    // Throws ParameterError on violated invariants.
    void check() const;
    static Dataset from_features(Mat features);
};

// Labels are 0-based in memory. External formats use 1..K and convert
// through to_external/from_external only.
struct Labeling {
    std::vector<int> labels;
    int K = 1;

    Labeling() = default;
    Labeling(std::vector<int> l, int k) : labels(std::move(l)), K(k) {}
    static Labeling constant(int n, int K, int label = 0);

    int n() const { return static_cast<int>(labels.size()); }
    int operator[](int p) const { return labels[p]; }
    int& operator[](int p) { return labels[p]; }

    void check() const;
    std::vector<int> sizes() const;
    int nonempty_count() const;
    std::uint64_t hash() const;

    std::vector<int> to_external() const;
    static Labeling from_external(const std::vector<int>& one_based, int K);

    bool operator==(const Labeling& o) const { return K == o.K && labels == o.labels; }
};

// Indicator vectors X^k stored as 0/1 doubles so they multiply directly.
std::vector<Vec> indicators(const Labeling& labeling);

}  // namespace kcut
