#include "kcut/moves.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace kcut {

namespace {

Vec total_label_charge(const MoveContext& ctx, int K) {
    Vec c = Vec::Zero(K);
    if (ctx.label_charge.size() == K) c += ctx.label_charge;
    if (ctx.mrf)
        for (const auto& t : *ctx.mrf)
            if (auto* lc = std::get_if<LabelCost>(&t))
                for (int k = 0; k < K && k < lc->h.size(); ++k) c[k] += ctx.gamma * lc->h[k];
    return c;
}

bool accept(double before, double after) {
    return after < before - 1e-12 * std::max(1.0, std::abs(before));
}

// Shared construction: each point is either a variable choosing between
// (low, high) labels, or a constant.
struct Layout {
    std::vector<int> var;  // -1 for constants
    std::vector<int> low, high;
    std::vector<int> points;
};

void add_potts(BinaryEnergy& be, const MoveContext& ctx, const Layout& L, const Labeling& cur) {
    if (!ctx.mrf || ctx.gamma == 0.0) return;
    for (const auto& t : *ctx.mrf) {
        auto* e = std::get_if<PottsEdges>(&t);
        if (!e) continue;
        for (const auto& ed : e->edges) {
            const double w = ctx.gamma * ed.w;
            if (w == 0.0) continue;
            const int vp = L.var[ed.p], vq = L.var[ed.q];
            auto lab = [&](int p, bool one) { return L.var[p] < 0 ? cur[p] : (one ? L.high[p] : L.low[p]); };
            auto cost = [&](bool a, bool b) { return lab(ed.p, a) != lab(ed.q, b) ? w : 0.0; };
            if (vp >= 0 && vq >= 0) {
                be.add_pairwise(vp, vq, cost(false, false), cost(false, true), cost(true, false), cost(true, true));
            } else if (vp >= 0) {
                be.add_unary(vp, cost(false, false), cost(true, false));
            } else if (vq >= 0) {
                be.add_unary(vq, cost(false, false), cost(false, true));
            }
        }
    }
}

void add_unary_costs(BinaryEnergy& be, const MoveContext& ctx, const Layout& L) {
    for (int p : L.points) be.add_unary(L.var[p], (*ctx.unary)(p, L.low[p]), (*ctx.unary)(p, L.high[p]));
}

std::vector<double> table(int m, const std::function<double(int)>& f) {
    std::vector<double> g(m + 1);
    for (int s = 0; s <= m; ++s) g[s] = f(s);
    return g;
}

bool nonconstant(const std::vector<double>& g) {
    for (double v : g)
        if (v != g.front()) return true;
    return false;
}

void add_card(BinaryEnergy& be, const std::vector<int>& vars, const std::vector<double>& g) {
    if (!vars.empty() && nonconstant(g)) be.add_concave_cardinality(vars, g);
}

MoveResult finish(const MoveContext& ctx, const Labeling& current, const Layout& L, BinaryEnergy& be) {
    MoveResult r;
    r.before = ctx.energy(current);
    r.proposal = current;
    if (!L.points.empty()) {
        std::vector<char> x = be.minimize();
        for (int p : L.points) r.proposal[p] = x[L.var[p]] ? L.high[p] : L.low[p];
    }
    double prop = L.points.empty() ? r.before : ctx.energy(r.proposal);
    if (accept(r.before, prop)) {
        r.labeling = r.proposal;
        r.after = prop;
        r.changed = true;
    } else {
        r.labeling = current;
        r.after = r.before;
    }
    return r;
}

}  // namespace

double MoveContext::energy(const Labeling& S) const {
    double e = 0.0;
    for (int p = 0; p < S.n(); ++p) e += (*unary)(p, S[p]);
    Vec c = total_label_charge(*this, S.K);
    auto sz = S.sizes();
    for (int k = 0; k < S.K; ++k)
        if (sz[k] > 0) e += c[k];
    if (mrf && gamma != 0.0) {
        for (const auto& t : *mrf) {
            if (auto* pe = std::get_if<PottsEdges>(&t)) e += gamma * eval_potts(*pe, S);
            else if (auto* r = std::get_if<RobustPnPotts>(&t)) e += gamma * eval_robust_pn(S, *r);
        }
    }
    return e;
}

MoveResult expansion_move(const MoveContext& ctx, const Labeling& current, int alpha) {
    const int n = current.n(), K = current.K;
    Layout L;
    L.var.assign(n, -1);
    L.low = current.labels;
    L.high.assign(n, alpha);
    for (int p = 0; p < n; ++p)
        if (current[p] != alpha && !ctx.is_fixed(p)) {
            L.var[p] = static_cast<int>(L.points.size());
            L.points.push_back(p);
        }
    BinaryEnergy be(static_cast<int>(L.points.size()));
    add_unary_costs(be, ctx, L);
    add_potts(be, ctx, L, current);

    // label presence: alpha appears if any variable switches, d vanishes iff all its points switch
    Vec charge = total_label_charge(ctx, K);
    auto sz = current.sizes();
    std::vector<std::vector<int>> vars_of(K);
    std::vector<int> fixed_of(K, 0);
    for (int p = 0; p < n; ++p) {
        if (L.var[p] >= 0) vars_of[current[p]].push_back(L.var[p]);
        else fixed_of[current[p]]++;
    }
    std::vector<int> all(L.points.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    if (charge[alpha] != 0.0 && sz[alpha] == 0) {
        const double c = charge[alpha];
        add_card(be, all, table(static_cast<int>(all.size()), [&](int s) { return s > 0 ? c : 0.0; }));
    }
    for (int d = 0; d < K; ++d) {
        if (d == alpha || charge[d] == 0.0 || sz[d] == 0 || fixed_of[d] > 0) continue;
        const int m = static_cast<int>(vars_of[d].size());
        const double c = charge[d];
        add_card(be, vars_of[d], table(m, [&](int s) { return s < m ? c : 0.0; }));
    }

    if (ctx.mrf && ctx.gamma != 0.0) {
        std::vector<int> count(K);
        std::vector<std::vector<int>> fv(K);
        for (const auto& t : *ctx.mrf) {
            auto* r = std::get_if<RobustPnPotts>(&t);
            if (!r) continue;
            for (size_t f = 0; f < r->factors.size(); ++f) {
                const auto& c = r->factors[f];
                const int size = static_cast<int>(c.size());
                const double Teff = std::min(r->T[f], static_cast<double>(size - (size + K - 1) / K));
                if (!(Teff > 0)) continue;
                std::fill(count.begin(), count.end(), 0);
                for (auto& v : fv) v.clear();
                std::vector<int> fvars;
                for (int p : c) {
                    count[current[p]]++;
                    if (L.var[p] >= 0) {
                        fv[current[p]].push_back(L.var[p]);
                        fvars.push_back(L.var[p]);
                    }
                }
                const double gm = ctx.gamma;
                const int na = count[alpha];
                auto alpha_part = [&](int s) { return gm * std::min(Teff, static_cast<double>(size - na - s)); };
                if (2.0 * Teff <= size) {
                    add_card(be, fvars, table(static_cast<int>(fvars.size()), alpha_part));
                    for (int d = 0; d < K; ++d) {
                        if (d == alpha || count[d] == 0 || size - count[d] >= Teff) continue;
                        const int nd = count[d];
                        add_card(be, fv[d], table(static_cast<int>(fv[d].size()), [&](int s) {
                                     return gm * (std::min(Teff, static_cast<double>(size - nd + s)) - Teff);
                                 }));
                    }
                } else {
                    // upper bound tight at the current labeling: keep only the
                    // currently dominant label's term
                    int top = 0;
                    for (int k = 1; k < K; ++k)
                        if (count[k] > count[top]) top = k;
                    if (top == alpha) {
                        add_card(be, fvars, table(static_cast<int>(fvars.size()), alpha_part));
                    } else {
                        const int nd = count[top];
                        add_card(be, fv[top], table(static_cast<int>(fv[top].size()), [&](int s) {
                                     return gm * std::min(Teff, static_cast<double>(size - nd + s));
                                 }));
                    }
                }
            }
        }
    }
    return finish(ctx, current, L, be);
}

MoveResult swap_move(const MoveContext& ctx, const Labeling& current, int alpha, int beta) {
    const int n = current.n(), K = current.K;
    Layout L;
    L.var.assign(n, -1);
    L.low.assign(n, alpha);
    L.high.assign(n, beta);
    int fixed_a = 0, fixed_b = 0;
    for (int p = 0; p < n; ++p) {
        const int l = current[p];
        if (l != alpha && l != beta) continue;
        if (ctx.is_fixed(p)) {
            (l == alpha ? fixed_a : fixed_b)++;
            continue;
        }
        L.var[p] = static_cast<int>(L.points.size());
        L.points.push_back(p);
    }
    if (alpha == beta || L.points.empty()) {
        MoveResult r;
        r.labeling = current;
        r.proposal = current;
        r.before = r.after = ctx.energy(current);
        return r;
    }
    const int m = static_cast<int>(L.points.size());
    BinaryEnergy be(m);
    add_unary_costs(be, ctx, L);
    add_potts(be, ctx, L, current);

    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i;
    Vec charge = total_label_charge(ctx, K);
    if (charge[alpha] != 0.0 && fixed_a == 0) {
        const double c = charge[alpha];
        add_card(be, all, table(m, [&](int s) { return s < m ? c : 0.0; }));
    }
    if (charge[beta] != 0.0 && fixed_b == 0) {
        const double c = charge[beta];
        add_card(be, all, table(m, [&](int s) { return s > 0 ? c : 0.0; }));
    }

    if (ctx.mrf && ctx.gamma != 0.0) {
        std::vector<int> count(K);
        for (const auto& t : *ctx.mrf) {
            auto* r = std::get_if<RobustPnPotts>(&t);
            if (!r) continue;
            for (size_t f = 0; f < r->factors.size(); ++f) {
                const auto& c = r->factors[f];
                const int size = static_cast<int>(c.size());
                std::fill(count.begin(), count.end(), 0);
                std::vector<int> fvars;
                int fa = 0, fb = 0;
                for (int p : c) {
                    count[current[p]]++;
                    if (L.var[p] >= 0) fvars.push_back(L.var[p]);
                    else if (current[p] == alpha) ++fa;
                    else if (current[p] == beta) ++fb;
                }
                if (fvars.empty()) continue;
                int other = 0;
                for (int k = 0; k < K; ++k)
                    if (k != alpha && k != beta) other = std::max(other, count[k]);
                const double To = std::min(r->T[f], static_cast<double>(size - other));
                const int mc = static_cast<int>(fvars.size());
                const double gm = ctx.gamma;
                add_card(be, fvars, table(mc, [&](int s) {
                             double a = size - (fa + mc - s), b = size - (fb + s);
                             return gm * std::min({To, a, b});
                         }));
            }
        }
    }
    return finish(ctx, current, L, be);
}

double brute_force_move_min(const MoveContext& ctx, const Labeling& current, MoveKind kind, int alpha, int beta,
                            Labeling* argmin) {
    std::vector<int> pts;
    for (int p = 0; p < current.n(); ++p) {
        if (ctx.is_fixed(p)) continue;
        if (kind == MoveKind::Expansion ? current[p] != alpha : (current[p] == alpha || current[p] == beta))
            pts.push_back(p);
    }
    if (pts.size() > 24) throw ParameterError("brute-force move search limited to 24 variables");
    double best = ctx.energy(current);
    if (argmin) *argmin = current;
    Labeling S = current;
    for (long mask = 0; mask < (1L << pts.size()); ++mask) {
        for (size_t i = 0; i < pts.size(); ++i) {
            const bool one = (mask >> i) & 1;
            S[pts[i]] = kind == MoveKind::Expansion ? (one ? alpha : current[pts[i]]) : (one ? beta : alpha);
        }
        double e = ctx.energy(S);
        if (e < best) {
            best = e;
            if (argmin) *argmin = S;
        }
    }
    return best;
}

}  // namespace kcut
