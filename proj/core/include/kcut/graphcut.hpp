#pragma once

#include "kcut/core_model.hpp"

namespace kcut {

// s-t graph with real capacities solved by Dinic's algorithm. After
// maxflow(), a node is on the source side iff it is reachable from the
// source in the residual graph (the minimal source set of all min cuts).
class FlowGraph {
public:
    explicit FlowGraph(int nodes = 0);

    int add_node();
    int node_count() const { return static_cast<int>(source_cap_.size()); }

    // capacity from p to q and from q to p
    void add_edge(int p, int q, double cap, double rev_cap = 0.0);
    void add_terminal(int p, double from_source, double to_sink);

    double maxflow();
    bool source_side(int p) const { return reachable_[p] != 0; }
    double flow() const { return flow_; }

private:
    struct Arc {
        int to;
        int rev;
        double cap;
    };
    bool bfs();
    double dfs(int v, double pushed);

    std::vector<double> source_cap_, sink_cap_;
    std::vector<std::vector<Arc>> adj_;
    std::vector<int> level_, it_;
    std::vector<char> reachable_;
    double flow_ = 0.0;
    int s_ = -1, t_ = -1;
};

// Pseudo-Boolean energy in variables x_i in {0,1}: unary, submodular pairwise,
// and concave functions of the sum of a variable subset. Minimized exactly by
// one min cut; x_i = 1 on the source side, so ties favor fewer ones.
class BinaryEnergy {
public:
    explicit BinaryEnergy(int vars);

    int var_count() const { return vars_; }
    void add_constant(double c) { constant_ += c; }
    void add_unary(int i, double e0, double e1);
    // requires e01 + e10 >= e00 + e11
    void add_pairwise(int i, int j, double e00, double e01, double e10, double e11);
    // g[s] for s = sum of x over vars; g must be concave in s
    void add_concave_cardinality(const std::vector<int>& vars, const std::vector<double>& g);

    std::vector<char> minimize(double* value = nullptr);
    double evaluate(const std::vector<char>& x) const;

private:
    struct Pair {
        int i, j;
        double e00, e01, e10, e11;
    };
    struct Card {
        std::vector<int> vars;
        std::vector<double> g;
    };
    int vars_;
    double constant_ = 0.0;
    std::vector<double> lin_;  // coefficient of x_i
    std::vector<Pair> pairs_;
    std::vector<Card> cards_;
};

}  // namespace kcut
