#pragma once

#include "kcut/core_model.hpp"

namespace kcut {

// Exact k-d tree over the rows of a point matrix. Neighbors are ordered by
// (squared distance, index) so results are reproducible with duplicates.
class KdTree {
public:
    explicit KdTree(const Mat& points, int leaf_size = 16);

    // k nearest rows to row p, excluding p itself.
    std::vector<int> neighbors_of(int p, int k) const;
    std::vector<int> query(const Eigen::Ref<const Eigen::RowVectorXd>& q, int k,
                           int exclude = -1) const;

private:
    struct Node {
        int begin, end;   // range in order_
        int dim = -1;     // split dimension, -1 for leaf
        double split = 0;
        int left = -1, right = -1;
    };
    int build(int begin, int end);

    const Mat& pts_;
    int leaf_size_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

std::vector<std::vector<int>> knn_lists(const Mat& points, int k);
std::vector<std::vector<int>> knn_brute_force(const Mat& points, int k);

}  // namespace kcut
