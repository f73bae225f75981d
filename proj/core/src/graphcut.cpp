#include "kcut/graphcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace kcut {

FlowGraph::FlowGraph(int nodes) : source_cap_(nodes, 0.0), sink_cap_(nodes, 0.0), adj_(nodes) {}

int FlowGraph::add_node() {
    source_cap_.push_back(0.0);
    sink_cap_.push_back(0.0);
    adj_.emplace_back();
    return node_count() - 1;
}

void FlowGraph::add_edge(int p, int q, double cap, double rev_cap) {
    if (cap < 0 || rev_cap < 0 || !std::isfinite(cap) || !std::isfinite(rev_cap))
        throw ParameterError("flow capacities must be finite and nonnegative");
    if (p == q) return;
    adj_[p].push_back({q, static_cast<int>(adj_[q].size()), cap});
    adj_[q].push_back({p, static_cast<int>(adj_[p].size()) - 1, rev_cap});
}

void FlowGraph::add_terminal(int p, double from_source, double to_sink) {
    if (from_source < 0 || to_sink < 0 || !std::isfinite(from_source) || !std::isfinite(to_sink))
        throw ParameterError("terminal capacities must be finite and nonnegative");
    source_cap_[p] += from_source;
    sink_cap_[p] += to_sink;
}

bool FlowGraph::bfs() {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s_] = 0;
    q.push(s_);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const Arc& a : adj_[v])
            if (level_[a.to] < 0 && a.cap > 0.0) {
                level_[a.to] = level_[v] + 1;
                q.push(a.to);
            }
    }
    return level_[t_] >= 0;
}

double FlowGraph::dfs(int, double) {
    // iterative blocking-flow search; recursion would overflow on long grid paths
    double total = 0.0;
    std::vector<int> nodes;  // tail of each arc in the current path
    std::vector<int> arcs;
    int v = s_;
    while (true) {
        if (v == t_) {
            double f = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < arcs.size(); ++i) f = std::min(f, adj_[nodes[i]][arcs[i]].cap);
            size_t cut = arcs.size();
            for (size_t i = 0; i < arcs.size(); ++i) {
                Arc& a = adj_[nodes[i]][arcs[i]];
                a.cap -= f;
                adj_[a.to][a.rev].cap += f;
                if (a.cap <= 0.0 && cut == arcs.size()) cut = i;
            }
            total += f;
            if (cut == arcs.size()) cut = 0;
            v = nodes[cut];
            nodes.resize(cut);
            arcs.resize(cut);
            continue;
        }
        bool advanced = false;
        for (; it_[v] < static_cast<int>(adj_[v].size()); ++it_[v]) {
            const Arc& a = adj_[v][it_[v]];
            if (a.cap > 0.0 && level_[a.to] == level_[v] + 1) {
                nodes.push_back(v);
                arcs.push_back(it_[v]);
                v = a.to;
                advanced = true;
                break;
            }
        }
        if (advanced) continue;
        level_[v] = -1;
        if (nodes.empty()) break;
        v = nodes.back();
        nodes.pop_back();
        arcs.pop_back();
        ++it_[v];
    }
    return total;
}

double FlowGraph::maxflow() {
    const int n = node_count();
    double scale = 0.0;
    for (int p = 0; p < n; ++p) scale = std::max({scale, source_cap_[p], sink_cap_[p]});
    for (const auto& list : adj_)
        for (const Arc& a : list) scale = std::max(scale, a.cap);
    const double eps = 1e-12 * std::max(scale, 1e-300);

    s_ = n;
    t_ = n + 1;
    adj_.resize(n + 2);
    flow_ = 0.0;
    for (int p = 0; p < n; ++p) {
        double common = std::min(source_cap_[p], sink_cap_[p]);
        flow_ += common;
        double a = source_cap_[p] - common, b = sink_cap_[p] - common;
        if (a > eps) add_edge(s_, p, a);
        if (b > eps) add_edge(p, t_, b);
    }
    // residual capacities below eps are treated as saturated
    for (auto& list : adj_)
        for (Arc& a : list)
            if (a.cap <= eps) a.cap = 0.0;

    level_.assign(n + 2, -1);
    it_.assign(n + 2, 0);
    while (bfs()) {
        std::fill(it_.begin(), it_.end(), 0);
        flow_ += dfs(s_, 0.0);
        for (auto& list : adj_)
            for (Arc& a : list)
                if (a.cap <= eps) a.cap = 0.0;
    }
    reachable_.assign(n + 2, 0);
    std::queue<int> q;
    reachable_[s_] = 1;
    q.push(s_);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const Arc& a : adj_[v])
            if (!reachable_[a.to] && a.cap > 0.0) {
                reachable_[a.to] = 1;
                q.push(a.to);
            }
    }
    return flow_;
}

BinaryEnergy::BinaryEnergy(int vars) : vars_(vars), lin_(vars, 0.0) {}

void BinaryEnergy::add_unary(int i, double e0, double e1) {
    constant_ += e0;
    lin_[i] += e1 - e0;
}

void BinaryEnergy::add_pairwise(int i, int j, double e00, double e01, double e10, double e11) {
    double excess = e01 + e10 - e00 - e11;
    double scale = std::abs(e00) + std::abs(e01) + std::abs(e10) + std::abs(e11);
    if (excess < -1e-9 * std::max(1.0, scale)) throw ParameterError("non-submodular pairwise term in move");
    pairs_.push_back({i, j, e00, e01, e10, e11});
}

void BinaryEnergy::add_concave_cardinality(const std::vector<int>& vars, const std::vector<double>& g) {
    if (g.size() != vars.size() + 1) throw ParameterError("cardinality table must have |vars|+1 entries");
    for (size_t s = 2; s < g.size(); ++s) {
        double bend = (g[s] - g[s - 1]) - (g[s - 1] - g[s - 2]);
        double scale = std::abs(g[s]) + std::abs(g[s - 1]) + std::abs(g[s - 2]);
        if (bend > 1e-9 * std::max(1.0, scale)) throw ParameterError("cardinality term is not concave");
    }
    cards_.push_back({vars, g});
}

double BinaryEnergy::evaluate(const std::vector<char>& x) const {
    double e = constant_;
    for (int i = 0; i < vars_; ++i)
        if (x[i]) e += lin_[i];
    for (const Pair& p : pairs_) {
        const bool a = x[p.i], b = x[p.j];
        e += a ? (b ? p.e11 : p.e10) : (b ? p.e01 : p.e00);
    }
    for (const Card& c : cards_) {
        int s = 0;
        for (int v : c.vars) s += x[v] != 0;
        e += c.g[s];
    }
    return e;
}

std::vector<char> BinaryEnergy::minimize(double* value) {
    std::vector<double> lin = lin_;
    FlowGraph g(vars_);
    auto add_lin = [&](int node, double a) {
        if (a > 0) g.add_terminal(node, 0.0, a);
        else if (a < 0) g.add_terminal(node, -a, 0.0);
    };
    for (const Pair& p : pairs_) {
        // E = e00 + (e10 - e00) x_i + (e11 - e10) x_j + c (1 - x_i) x_j
        lin[p.i] += p.e10 - p.e00;
        lin[p.j] += p.e11 - p.e10;
        double c = std::max(0.0, p.e01 + p.e10 - p.e00 - p.e11);
        if (c > 0) g.add_edge(p.j, p.i, c);  // cut when j on source side, i on sink side
    }
    for (const Card& c : cards_) {
        const int m = static_cast<int>(c.vars.size());
        if (m == 0) continue;
        double slope = c.g[1] - c.g[0];
        for (int v : c.vars) lin[v] += slope;
        for (int t = 1; t < m; ++t) {
            double next = c.g[t + 1] - c.g[t];
            double beta = slope - next;
            slope = next;
            if (!(beta > 1e-14 * (1.0 + std::abs(c.g[t])))) continue;
            // -beta max(0, s - t) = min_z beta t z - beta z s
            int z = g.add_node();
            add_lin(z, beta * t);
            for (int v : c.vars) {
                lin[v] -= beta;
                g.add_edge(v, z, beta);
            }
        }
    }
    for (int i = 0; i < vars_; ++i) add_lin(i, lin[i]);
    g.maxflow();
    std::vector<char> x(vars_);
    for (int i = 0; i < vars_; ++i) x[i] = g.source_side(i) ? 1 : 0;
    if (value) *value = evaluate(x);
    return x;
}

}  // namespace kcut
