#include "kcut/knn.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace kcut {

namespace {

using Entry = std::pair<double, int>;  // (squared distance, index); max-heap on this order

}  // namespace

KdTree::KdTree(const Mat& points, int leaf_size) : pts_(points), leaf_size_(std::max(1, leaf_size)) {
    order_.resize(points.rows());
    std::iota(order_.begin(), order_.end(), 0);
    if (points.rows() > 0) {
        nodes_.reserve(2 * points.rows() / leaf_size_ + 2);
        build(0, static_cast<int>(points.rows()));
    }
}

int KdTree::build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    int dim = 0;
    double best = -1.0;
    for (int d = 0; d < pts_.cols(); ++d) {
        double lo = pts_(order_[begin], d), hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            double v = pts_(order_[i], d);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best) {
            best = hi - lo;
            dim = d;
        }
    }
    if (best <= 0.0) return id;  // all points coincide

    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return pts_(a, dim) < pts_(b, dim); });
    double split = pts_(order_[mid], dim);
    nodes_[id].dim = dim;
    nodes_[id].split = split;
    int l = build(begin, mid);
    int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

std::vector<int> KdTree::query(const Eigen::Ref<const Eigen::RowVectorXd>& q, int k,
                               int exclude) const {
    std::priority_queue<Entry> heap;
    auto worst = [&]() { return heap.size() < static_cast<size_t>(k) ? Entry{1e300, 1 << 30} : heap.top(); };

    std::vector<std::pair<int, double>> stack;  // node, lower bound on squared distance
    stack.push_back({0, 0.0});
    while (!stack.empty()) {
        auto [id, bound] = stack.back();
        stack.pop_back();
        if (bound > worst().first) continue;
        const Node& nd = nodes_[id];
        if (nd.dim < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                int p = order_[i];
                if (p == exclude) continue;
                Entry e{(pts_.row(p) - q).squaredNorm(), p};
                if (heap.size() < static_cast<size_t>(k)) {
                    heap.push(e);
                } else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            continue;
        }
        double diff = q[nd.dim] - nd.split;
        int near = diff < 0 ? nd.left : nd.right;
        int far = diff < 0 ? nd.right : nd.left;
        stack.push_back({far, std::max(bound, diff * diff)});
        stack.push_back({near, bound});
    }
    std::vector<int> out(heap.size());
    for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
        out[i] = heap.top().second;
        heap.pop();
    }
    return out;
}

std::vector<int> KdTree::neighbors_of(int p, int k) const { return query(pts_.row(p), k, p); }

std::vector<std::vector<int>> knn_lists(const Mat& points, int k) {
    KdTree tree(points);
    std::vector<std::vector<int>> out(points.rows());
    for (int p = 0; p < points.rows(); ++p) out[p] = tree.neighbors_of(p, k);
    return out;
}

std::vector<std::vector<int>> knn_brute_force(const Mat& points, int k) {
    const int n = static_cast<int>(points.rows());
    std::vector<std::vector<int>> out(n);
    for (int p = 0; p < n; ++p) {
        std::vector<Entry> all;
        for (int q = 0; q < n; ++q)
            if (q != p) all.push_back({(points.row(p) - points.row(q)).squaredNorm(), q});
        std::sort(all.begin(), all.end());
        for (int i = 0; i < std::min<int>(k, all.size()); ++i) out[p].push_back(all[i].second);
    }
    return out;
}

}  // namespace kcut
