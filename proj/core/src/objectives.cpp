#include "kcut/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace kcut {

const char* to_string(Objective o) {
    switch (o) {
        case Objective::AA: return "aa";
        case Objective::AC: return "ac";
        case Objective::NC: return "nc";
        case Objective::WKKM: return "wkkm";
    }
    return "?";
}

Objective objective_from_string(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), ::tolower);
    if (l == "aa") return Objective::AA;
    if (l == "ac") return Objective::AC;
    if (l == "nc") return Objective::NC;
    if (l == "wkkm" || l == "kkm") return Objective::WKKM;
    throw ParameterError("unknown objective '" + s + "' (expected aa, ac, nc, wkkm)");
}

RobustPnPotts RobustPnPotts::uniform(std::vector<std::vector<int>> factors, double T) {
    RobustPnPotts r;
    r.T.assign(factors.size(), T);
    r.factors = std::move(factors);
    return r;
}

RobustPnPotts RobustPnPotts::fractional(std::vector<std::vector<int>> factors, double fraction) {
    RobustPnPotts r;
    for (const auto& c : factors) r.T.push_back(fraction * static_cast<double>(c.size()));
    r.factors = std::move(factors);
    return r;
}

Diagnostics validate(const JointEnergySpec& spec, int n) {
    Diagnostics d;
    auto bad = [&](std::string s) { d.violations.push_back(std::move(s)); };
    if (spec.affinity.n() != n)
        bad("affinity is " + std::to_string(spec.affinity.n()) + "x" + std::to_string(spec.affinity.n()) +
            " but dataset has n=" + std::to_string(n));
    if (!(spec.gamma >= 0.0)) bad("gamma must be nonnegative");
    if (spec.K < 1) bad("K must be at least 1");
    if (spec.weights) {
        if (spec.weights->size() != n) bad("weights length " + std::to_string(spec.weights->size()) + " != n");
        else if ((spec.weights->array() <= 0).any()) bad("weights must be positive");
    }
    if (!spec.hard.empty()) {
        if (static_cast<int>(spec.hard.size()) != n) bad("hard-constraint length != n");
        for (size_t p = 0; p < spec.hard.size(); ++p)
            if (spec.hard[p] >= spec.K || spec.hard[p] < -1) {
                bad("hard label " + std::to_string(spec.hard[p] + 1) + " at point " + std::to_string(p) +
                    " exceeds K=" + std::to_string(spec.K));
                break;
            }
    }
    for (size_t t = 0; t < spec.mrf.size(); ++t) {
        const std::string tag = "mrf term " + std::to_string(t) + ": ";
        if (auto* e = std::get_if<PottsEdges>(&spec.mrf[t])) {
            for (size_t i = 0; i < e->edges.size(); ++i) {
                const auto& ed = e->edges[i];
                if (ed.p < 0 || ed.q < 0 || ed.p >= n || ed.q >= n) {
                    bad(tag + "edge " + std::to_string(i) + " endpoint outside 0.." + std::to_string(n - 1));
                    break;
                }
                if (ed.p == ed.q) { bad(tag + "edge " + std::to_string(i) + " is a self-loop"); break; }
                if (!(ed.w >= 0.0)) { bad(tag + "edge " + std::to_string(i) + " has negative weight"); break; }
            }
        } else if (auto* c = std::get_if<LabelCost>(&spec.mrf[t])) {
            if (c->h.size() != spec.K) bad(tag + "label cost length " + std::to_string(c->h.size()) + " != K");
            if ((c->h.array() < 0).any()) bad(tag + "label costs must be nonnegative");
        } else if (auto* r = std::get_if<RobustPnPotts>(&spec.mrf[t])) {
            if (r->T.size() != r->factors.size()) bad(tag + "threshold count != factor count");
            for (size_t f = 0; f < r->factors.size(); ++f) {
                if (r->factors[f].empty()) { bad(tag + "factor " + std::to_string(f) + " is empty"); continue; }
                for (int p : r->factors[f])
                    if (p < 0 || p >= n) {
                        bad(tag + "factor " + std::to_string(f) + " contains index " + std::to_string(p) +
                            " outside 0.." + std::to_string(n - 1));
                        break;
                    }
                if (f < r->T.size() && !(r->T[f] >= 0)) bad(tag + "negative threshold");
            }
        }
    }
    return d;
}

Diagnostics validate(const JointEnergySpec& spec, const Dataset& data) {
    Diagnostics d = validate(spec, data.n());
    try {
        data.check();
    } catch (const Error& e) {
        d.violations.push_back(e.what());
    }
    return d;
}

Vec segment_association(const Affinity& A, const Labeling& S) {
    Vec a = Vec::Zero(S.K);
    if (A.is_sparse()) {
        const SpMat& m = A.sparse_matrix();
        for (int p = 0; p < m.outerSize(); ++p) {
            const int lp = S[p];
            for (SpMat::InnerIterator it(m, p); it; ++it)
                if (S[static_cast<int>(it.col())] == lp) a[lp] += it.value();
        }
        return a;
    }
    const Mat& m = A.dense_matrix();
    const int n = S.n();
    for (int q = 0; q < n; ++q) {
        const int lq = S[q];
        const double* col = m.col(q).data();
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            if (S[p] == lq) s += col[p];
        a[lq] += s;
    }
    return a;
}

Vec segment_volume(const Vec& w, const Labeling& S) {
    Vec v = Vec::Zero(S.K);
    for (int p = 0; p < S.n(); ++p) v[S[p]] += w[p];
    return v;
}

namespace {

double ratio_sum(const Vec& num, const Vec& den, const std::vector<int>& sizes) {
    double e = 0.0;
    for (int k = 0; k < num.size(); ++k)
        if (sizes[k] > 0) e -= num[k] / den[k];
    return e;
}

void check_size(const Affinity& A, const Labeling& S) {
    if (A.n() != S.n())
        throw DimensionError("affinity size " + std::to_string(A.n()) + " != labeling size " + std::to_string(S.n()));
}

}  // namespace

double eval_aa(const Affinity& A, const Labeling& S) {
    check_size(A, S);
    auto sz = S.sizes();
    Vec vol(S.K);
    for (int k = 0; k < S.K; ++k) vol[k] = sz[k];
    return ratio_sum(segment_association(A, S), vol, sz);
}

double eval_ac(const Affinity& A, const Labeling& S) {
    check_size(A, S);
    auto sz = S.sizes();
    Vec d = A.degrees();
    Vec cut = segment_volume(d, S) - segment_association(A, S);
    double e = 0.0;
    for (int k = 0; k < S.K; ++k)
        if (sz[k] > 0) e += cut[k] / sz[k];
    return e;
}

double eval_nc(const Affinity& A, const Labeling& S) {
    check_size(A, S);
    Vec d = A.degrees();
    for (int p = 0; p < S.n(); ++p)
        if (!(d[p] > 0.0)) throw DegenerateError("zero degree at point " + std::to_string(p) + " in normalized cut");
    return ratio_sum(segment_association(A, S), segment_volume(d, S), S.sizes());
}

double eval_wkkm(const Affinity& Kmat, const Vec& w, const Labeling& S) {
    check_size(Kmat, S);
    if (w.size() != S.n()) throw DimensionError("weight length != n");
    if ((w.array() <= 0).any()) throw DegenerateError("weighted kernel K-means needs positive weights");
    return ratio_sum(segment_association(Kmat.scaled(w, w), S), segment_volume(w, S), S.sizes());
}

PairwiseForm pairwise_form(Objective o, const Affinity& A, const std::optional<Vec>& weights) {
    const int n = A.n();
    switch (o) {
        case Objective::AA: return {A, Vec::Ones(n)};
        case Objective::AC: return {A.plus_diagonal(-A.degrees()), Vec::Ones(n)};
        case Objective::NC: {
            Vec d = A.degrees();
            for (int p = 0; p < n; ++p)
                if (!(d[p] > 0.0)) throw DegenerateError("zero degree at point " + std::to_string(p) + " in normalized cut");
            return {A, d};
        }
        case Objective::WKKM: {
            Vec w = weights ? *weights : Vec::Ones(n);
            if ((w.array() <= 0).any()) throw DegenerateError("weighted kernel K-means needs positive weights");
            return {A.scaled(w, w), w};
        }
    }
    throw ParameterError("unknown objective");
}

double eval_pairwise(const PairwiseForm& f, const Labeling& S) {
    check_size(f.M, S);
    return ratio_sum(segment_association(f.M, S), segment_volume(f.w, S), S.sizes());
}

double eval_potts(const PottsEdges& e, const Labeling& S) {
    double s = 0.0;
    for (const auto& ed : e.edges)
        if (S[ed.p] != S[ed.q]) s += ed.w;
    return s;
}

double eval_label_cost(const Labeling& S, const Vec& h) {
    auto sz = S.sizes();
    double s = 0.0;
    for (int k = 0; k < S.K && k < h.size(); ++k)
        if (sz[k] > 0) s += h[k];
    return s;
}

double eval_label_cost(const Labeling& S, const LabelCost& c) { return eval_label_cost(S, c.h); }

double eval_robust_pn(const Labeling& S, const RobustPnPotts& r) {
    double s = 0.0;
    std::vector<int> count(S.K, 0);
    for (size_t f = 0; f < r.factors.size(); ++f) {
        std::fill(count.begin(), count.end(), 0);
        int best = 0;
        for (int p : r.factors[f]) best = std::max(best, ++count[S[p]]);
        s += std::min(r.T[f], static_cast<double>(r.factors[f].size() - best));
    }
    return s;
}

double eval_robust_pn(const Labeling& S, const std::vector<std::vector<int>>& factors, double T) {
    return eval_robust_pn(S, RobustPnPotts::uniform(factors, T));
}

double eval_mrf(const std::vector<MrfTerm>& terms, const Labeling& S, EnergyBreakdown* into) {
    double total = 0.0;
    for (const auto& t : terms) {
        if (auto* e = std::get_if<PottsEdges>(&t)) {
            double v = eval_potts(*e, S);
            total += v;
            if (into) into->potts += v;
        } else if (auto* c = std::get_if<LabelCost>(&t)) {
            double v = eval_label_cost(S, *c);
            total += v;
            if (into) into->label_cost += v;
        } else if (auto* r = std::get_if<RobustPnPotts>(&t)) {
            double v = eval_robust_pn(S, *r);
            total += v;
            if (into) into->robust_pn += v;
        }
    }
    return total;
}

double eval_clustering(const JointEnergySpec& spec, const Labeling& S) {
    switch (spec.objective) {
        case Objective::AA: return eval_aa(spec.affinity, S);
        case Objective::AC: return eval_ac(spec.affinity, S);
        case Objective::NC: return eval_nc(spec.affinity, S);
        case Objective::WKKM:
            return eval_wkkm(spec.affinity, spec.weights ? *spec.weights : Vec::Ones(S.n()), S);
    }
    return 0.0;
}

EnergyBreakdown eval_joint(const JointEnergySpec& spec, const Labeling& S) {
    EnergyBreakdown b;
    b.gamma = spec.gamma;
    b.clustering = eval_clustering(spec, S);
    double mrf = eval_mrf(spec.mrf, S, &b);
    b.total = b.clustering + spec.gamma * mrf;
    return b;
}

PottsEdges contrast_weights(const Dataset& image, int connectivity, PottsMode mode) {
    if (!image.grid) throw ParameterError("contrast weights need a pixel grid");
    if (connectivity != 4 && connectivity != 8) throw ParameterError("connectivity must be 4 or 8");
    const Grid& g = *image.grid;
    const Mat& I = image.features;
    // forward half of the 8-neighborhood: right, down, down-right, down-left
    const int dy[4] = {0, 1, 1, 1};
    const int dx[4] = {1, 0, 1, -1};

    double eta = 0.0;
    long count = 0;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            for (int k = 0; k < 4; ++k) {
                int yy = y + dy[k], xx = x + dx[k];
                if (yy >= g.height || xx < 0 || xx >= g.width) continue;
                eta += (I.row(g.index(y, x)) - I.row(g.index(yy, xx))).squaredNorm();
                ++count;
            }
    if (count > 0) eta /= static_cast<double>(count);

    PottsEdges out;
    const int nk = connectivity == 8 ? 4 : 2;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            for (int k = 0; k < nk; ++k) {
                int yy = y + dy[k], xx = x + dx[k];
                if (yy >= g.height || xx < 0 || xx >= g.width) continue;
                int p = g.index(y, x), q = g.index(yy, xx);
                double dist = (dx[k] != 0 && dy[k] != 0) ? std::sqrt(2.0) : 1.0;
                double w = 1.0 / dist;
                if (mode == PottsMode::Contrast && eta > 0.0)
                    w *= std::exp(-0.5 * (I.row(p) - I.row(q)).squaredNorm() / eta);
                out.edges.push_back({p, q, w});
            }
    return out;
}

}  // namespace kcut
