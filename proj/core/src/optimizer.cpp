#include "kcut/optimizer.hpp"

#include "kcut/kmeans.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace kcut {

const char* to_string(BoundPolicy p) {
    switch (p) {
    case BoundPolicy::AfterLoop: return "after_expansion_loop";
    case BoundPolicy::AfterEachMove: return "after_each_move";
    case BoundPolicy::AtConvergence: return "at_convergence";
    }
    return "?";
}

BoundPolicy bound_policy_from_string(const std::string& s) {
    if (s == "loop" || s == "after_expansion_loop") return BoundPolicy::AfterLoop;
    if (s == "move" || s == "after_each_move") return BoundPolicy::AfterEachMove;
    if (s == "converge" || s == "at_convergence") return BoundPolicy::AtConvergence;
    throw ParameterError("unknown schedule '" + s + "' (expected loop, move or converge)");
}

namespace {

bool nonincreasing(const std::vector<TraceRecord>& r, double rel, bool true_e) {
    for (size_t i = 1; i < r.size(); ++i) {
        double a = true_e ? r[i - 1].true_energy : r[i - 1].energy;
        double b = true_e ? r[i].true_energy : r[i].energy;
        if (b > a + rel * std::max(1.0, std::abs(a))) return false;
    }
    return true;
}

std::string num(double v) {
    if (!std::isfinite(v)) return "null";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

bool RunTrace::monotone(double rel) const { return nonincreasing(records, rel, false); }
bool RunTrace::true_energy_monotone(double rel) const { return nonincreasing(records, rel, true); }

std::string RunTrace::to_jsonl() const {
    std::ostringstream os;
    for (const auto& r : records) {
        os << "{\"method\":\"" << method << "\",\"iteration\":" << r.iteration << ",\"energy\":" << num(r.energy)
           << ",\"true_energy\":" << num(r.true_energy) << ",\"bound\":" << num(r.bound)
           << ",\"delta\":" << num(r.delta) << ",\"hash\":\"" << std::hex << r.hash << std::dec
           << "\",\"seconds\":" << num(r.seconds) << ",\"moves_accepted\":" << r.moves_accepted << "}\n";
    }
    return os.str();
}

std::string RunTrace::to_csv() const {
    std::ostringstream os;
    os << "method,iteration,energy,true_energy,bound,delta,hash,seconds,moves_accepted\n";
    for (const auto& r : records)
        os << method << ',' << r.iteration << ',' << num(r.energy) << ',' << num(r.true_energy) << ','
           << num(r.bound) << ',' << num(r.delta) << ',' << std::hex << r.hash << std::dec << ','
           << num(r.seconds) << ',' << r.moves_accepted << '\n';
    return os.str();
}

Labeling apply_hard(const Labeling& S, const std::vector<int>& hard) {
    if (hard.empty()) return S;
    if (static_cast<int>(hard.size()) != S.n()) throw DimensionError("hard label vector size does not match labeling");
    Labeling out = S;
    for (int p = 0; p < S.n(); ++p)
        if (hard[p] >= 0) {
            if (hard[p] >= S.K) throw ParameterError("hard label out of range");
            out[p] = hard[p];
        }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BoundStep {
    Mat costs;
    Vec charge;
};

using MakeBound = std::function<BoundStep(const Labeling&)>;
using Target = std::function<double(const Labeling&)>;

MoveContext context_for(const JointEnergySpec& spec, const BoundStep& b) {
    MoveContext ctx;
    ctx.unary = &b.costs;
    ctx.label_charge = b.charge;
    ctx.gamma = spec.gamma;
    ctx.mrf = &spec.mrf;
    ctx.hard = &spec.hard;
    return ctx;
}

// One pass over all labels (expansion) or label pairs (swap). With a rebuild
// function the bound is re-centered before every move.
int move_loop(const JointEnergySpec& spec, const CutOptions& opt, int outer, Labeling& S, BoundStep& b,
              const MakeBound* rebuild) {
    int accepted = 0;
    auto one = [&](int alpha, int beta) {
        if (rebuild) b = (*rebuild)(S);
        MoveContext ctx = context_for(spec, b);
        MoveResult r = opt.moves == MoveKind::Expansion ? expansion_move(ctx, S, alpha) : swap_move(ctx, S, alpha, beta);
        if (opt.observer) {
            MoveEvent ev{outer, alpha, beta, &ctx, &S, &r};
            opt.observer(ev);
        }
        if (r.changed) {
            S = r.labeling;
            ++accepted;
        }
    };
    if (opt.moves == MoveKind::Expansion) {
        for (int a = 0; a < S.K; ++a) one(a, -1);
    } else {
        for (int a = 0; a < S.K; ++a)
            for (int c = a + 1; c < S.K; ++c) one(a, c);
    }
    return accepted;
}

CutResult descend(const JointEnergySpec& spec, const Labeling& init, const CutOptions& opt, const std::string& method,
                  double delta, const MakeBound& make, const Target& target) {
    if (!(opt.schedule.tol > 0)) throw ParameterError("schedule tolerance must be positive");
    auto t0 = Clock::now();
    CutResult res;
    res.delta = delta;
    res.trace.method = method;
    Labeling S = apply_hard(init, spec.hard);
    double E = target(S);
    const bool approx = method == "spectral_cut";
    auto true_e = [&](const Labeling& L, double e) { return approx ? eval_joint(spec, L).total : e; };
    res.trace.records.push_back({0, E, true_e(S, E), E, delta, S.hash(), seconds_since(t0), 0});

    for (int t = 1; t <= opt.schedule.max_outer; ++t) {
        BoundStep b = make(S);
        Labeling next = S;
        int accepted = 0;
        switch (opt.schedule.policy) {
        case BoundPolicy::AfterLoop: accepted = move_loop(spec, opt, t, next, b, nullptr); break;
        case BoundPolicy::AfterEachMove: accepted = move_loop(spec, opt, t, next, b, &make); break;
        case BoundPolicy::AtConvergence:
            for (int i = 0; i < opt.schedule.max_inner_loops; ++i) {
                int a = move_loop(spec, opt, t, next, b, nullptr);
                accepted += a;
                if (a == 0) break;
            }
            break;
        }
        double E_new = target(next);
        double bound = E_new;
        if (opt.schedule.policy != BoundPolicy::AfterEachMove) {
            // additive constant fixed by touching the energy at S_t
            MoveContext ctx = context_for(spec, b);
            bound = ctx.energy(next) + (E - ctx.energy(S));
        }
        if (E_new > E + 1e-9 * std::max(1.0, std::abs(E))) {
            // only reachable with an improper (user-chosen) shift
            res.trace.records.push_back({t, E, true_e(S, E), bound, delta, S.hash(), seconds_since(t0), 0});
            break;
        }
        const bool changed = !(next == S);
        S = next;
        res.trace.records.push_back({t, E_new, true_e(S, E_new), bound, delta, S.hash(), seconds_since(t0), accepted});
        const bool small = std::abs(E - E_new) <= opt.schedule.tol * std::max(std::abs(E), 1e-300);
        E = E_new;
        if (!changed || small) break;
    }
    res.labeling = S;
    return res;
}

BoundStep kernel_step(const JointEnergySpec& spec, const ConcaveSurrogate& s, const Labeling& St) {
    JointBound jb = joint_bound(spec, s, St);
    return {std::move(jb.unary.costs), std::move(jb.surcharge)};
}

void check_spec(const JointEnergySpec& spec, const Labeling& init) {
    Diagnostics d = validate(spec, init.n());
    if (!d.ok()) {
        std::string msg = "invalid energy specification:";
        for (const auto& v : d.violations) msg += " " + v + ";";
        throw ParameterError(msg);
    }
    if (init.K != spec.K) throw ParameterError("initial labeling has a different number of labels");
    init.check();
}

}  // namespace

CutResult kernel_cut(const JointEnergySpec& spec, const Labeling& init, const CutOptions& opt) {
    check_spec(spec, init);
    ConcaveSurrogate s = build_surrogate(spec.objective, spec.affinity, opt.delta, spec.weights);
    MakeBound make = [&](const Labeling& St) { return kernel_step(spec, s, St); };
    Target target = [&](const Labeling& S) { return eval_joint(spec, S).total; };
    return descend(spec, init, opt, "kernel_cut", s.delta, make, target);
}

CutResult spectral_cut(const JointEnergySpec& spec, const Embedding& emb, const Labeling& init, const CutOptions& opt) {
    check_spec(spec, init);
    if (emb.n() != init.n()) throw DimensionError("embedding size does not match labeling");
    MakeBound make = [&](const Labeling& St) {
        return BoundStep{spectral_unary_bound(emb, St).costs, Vec::Zero(St.K)};
    };
    Target target = [&](const Labeling& S) {
        double e = spectral_energy(emb, S);
        if (spec.gamma != 0.0) e += spec.gamma * eval_mrf(spec.mrf, S);
        return e;
    };
    return descend(spec, init, opt, "spectral_cut", emb.delta, make, target);
}

CutResult spectral_cut(const JointEnergySpec& spec, const Labeling& init, const SpectralOptions& opt) {
    RankOptions ro;
    ro.delta = opt.delta;
    ro.weights = spec.weights;
    ro.force_iterative = opt.force_iterative;
    Embedding emb = rank_m_embedding(spec.objective, spec.affinity, opt.m, ro);
    return spectral_cut(spec, emb, init, static_cast<const CutOptions&>(opt));
}

namespace {

struct SweepEvent {
    double delta;
    int p;
    int label;
};

// Lower envelope of the K lines g_pk + delta h_pk for every free point.
std::vector<SweepEvent> sweep_events(const PseudoBoundParts& parts, const Labeling& St, const std::vector<int>& hard,
                                     Labeling& start) {
    const int n = St.n(), K = St.K;
    start = St;
    std::vector<SweepEvent> ev;
    for (int p = 0; p < n; ++p) {
        if (!hard.empty() && hard[p] >= 0) continue;
        auto g = [&](int k) { return parts.g(p, k); };
        auto h = [&](int k) { return parts.h(p, k); };
        // delta -> -inf: largest slope wins
        int cur = 0;
        for (int k = 1; k < K; ++k)
            if (h(k) > h(cur) || (h(k) == h(cur) && g(k) < g(cur))) cur = k;
        start[p] = cur;
        double at = -std::numeric_limits<double>::infinity();
        while (true) {
            int nxt = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                if (!(h(k) < h(cur))) continue;
                double d = (g(k) - g(cur)) / (h(cur) - h(k));
                if (d < at) d = at;
                if (d < best || (d == best && nxt >= 0 && h(k) < h(nxt))) {
                    best = d;
                    nxt = k;
                }
            }
            if (nxt < 0) break;
            ev.push_back({best, p, nxt});
            cur = nxt;
            at = best;
        }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const SweepEvent& a, const SweepEvent& b) { return a.delta < b.delta; });
    return ev;
}

// groups of events sharing (numerically) one critical value
std::vector<size_t> group_ends(const std::vector<SweepEvent>& ev) {
    std::vector<size_t> ends;
    for (size_t i = 0; i < ev.size(); ++i) {
        bool last = i + 1 == ev.size() ||
                    ev[i + 1].delta > ev[i].delta + 1e-12 * (1.0 + std::abs(ev[i].delta));
        if (last) ends.push_back(i + 1);
    }
    return ends;
}

bool has_pairwise_mrf(const JointEnergySpec& spec) {
    if (spec.gamma == 0.0) return false;
    for (const auto& t : spec.mrf)
        if (!std::holds_alternative<LabelCost>(t)) return true;
    return false;
}

Vec label_costs(const JointEnergySpec& spec) {
    Vec h = Vec::Zero(spec.K);
    if (spec.gamma == 0.0) return h;
    for (const auto& t : spec.mrf)
        if (auto* lc = std::get_if<LabelCost>(&t))
            for (int k = 0; k < spec.K && k < lc->h.size(); ++k) h[k] += spec.gamma * lc->h[k];
    return h;
}

// Incremental joint energy for single-point relabelings (no pairwise MRF).
class IncrementalEnergy {
public:
    IncrementalEnergy(const PairwiseForm& form, const Vec& charges, const Labeling& S)
        : form_(form), charge_(charges), S_(S), diag_(form.M.diagonal()) {
        Mat X = Mat::Zero(S.n(), S.K);
        for (int p = 0; p < S.n(); ++p) X(p, S[p]) = 1.0;
        MX_ = form.M.apply(X);
        assoc_ = Vec::Zero(S.K);
        vol_ = Vec::Zero(S.K);
        size_.assign(S.K, 0);
        for (int p = 0; p < S.n(); ++p) {
            assoc_[S[p]] += MX_(p, S[p]);
            vol_[S[p]] += form.w[p];
            size_[S[p]]++;
        }
    }

    void move(int p, int b) {
        const int a = S_[p];
        if (a == b) return;
        assoc_[a] += -2.0 * MX_(p, a) + diag_[p];
        assoc_[b] += 2.0 * MX_(p, b) + diag_[p];
        vol_[a] -= form_.w[p];
        vol_[b] += form_.w[p];
        size_[a]--;
        size_[b]++;
        if (form_.M.is_sparse()) {
            for (SpMat::InnerIterator it(form_.M.sparse_matrix(), p); it; ++it) {
                MX_(it.col(), a) -= it.value();
                MX_(it.col(), b) += it.value();
            }
        } else {
            const auto col = form_.M.dense_matrix().col(p);
            MX_.col(a) -= col;
            MX_.col(b) += col;
        }
        S_[p] = b;
    }

    double value() const {
        double e = 0.0;
        for (int k = 0; k < S_.K; ++k)
            if (size_[k] > 0) {
                if (vol_[k] > 0) e -= assoc_[k] / vol_[k];
                e += charge_[k];
            }
        return e;
    }

private:
    const PairwiseForm& form_;
    Vec charge_;
    Labeling S_;
    Vec diag_;
    Mat MX_;
    Vec assoc_, vol_;
    std::vector<int> size_;
};

}  // namespace

DeltaSweep enumerate_delta_sweep(const PseudoBoundParts& parts, const Labeling& St, const std::vector<int>& hard) {
    Labeling L;
    auto ev = sweep_events(parts, St, hard, L);
    DeltaSweep out;
    out.labelings.push_back(L);
    size_t i = 0;
    for (size_t end : group_ends(ev)) {
        for (; i < end; ++i) L[ev[i].p] = ev[i].label;
        if (L == out.labelings.back()) continue;
        out.breakpoints.push_back(ev[end - 1].delta);
        out.labelings.push_back(L);
    }
    return out;
}

CutResult pseudo_bound_cut(const JointEnergySpec& spec, const Labeling& init, const PseudoOptions& opt) {
    check_spec(spec, init);
    if (spec.K < 2) throw ParameterError("pseudo-bound optimization needs K >= 2");
    if (!(opt.schedule.tol > 0)) throw ParameterError("schedule tolerance must be positive");
    auto t0 = Clock::now();
    const PairwiseForm form = pairwise_form(spec.objective, spec.affinity, spec.weights);
    const ConcaveSurrogate sur = build_surrogate(spec.objective, spec.affinity, opt.delta, spec.weights);
    const bool pairwise = has_pairwise_mrf(spec);
    const Vec charges = label_costs(spec);

    CutResult res;
    res.trace.method = "pseudo_bound_cut";
    res.delta = sur.delta;
    Labeling S = apply_hard(init, spec.hard);
    double E = eval_joint(spec, S).total;
    res.trace.records.push_back({0, E, E, E, sur.delta, S.hash(), seconds_since(t0), 0});

    CutOptions loop_opt = opt;
    loop_opt.moves = MoveKind::Expansion;

    for (int t = 1; t <= opt.schedule.max_outer; ++t) {
        Labeling best = S;
        double bestE = E, bestDelta = std::numeric_limits<double>::quiet_NaN();
        auto offer = [&](const Labeling& L, double d) {
            double e = eval_joint(spec, L).total;
            if (e < bestE - 1e-12 * std::max(1.0, std::abs(bestE))) {
                bestE = e;
                best = L;
                bestDelta = d;
            }
        };

        // the proper member of the family: one kernel-bound expansion loop
        {
            BoundStep b = kernel_step(spec, sur, S);
            Labeling L = S;
            move_loop(spec, loop_opt, t, L, b, nullptr);
            offer(L, sur.delta);
        }

        PseudoBoundParts parts = pseudo_bound_parts(form, S);
        Labeling start;
        auto ev = sweep_events(parts, S, spec.hard, start);
        auto ends = group_ends(ev);

        if (!pairwise) {
            IncrementalEnergy inc(form, charges, start);
            double e0 = inc.value();
            long best_end = -1;
            double run_best = e0;
            double run_delta = ev.empty() ? 0.0 : ev.front().delta - 1.0;
            size_t i = 0;
            for (size_t end : ends) {
                for (; i < end; ++i) inc.move(ev[i].p, ev[i].label);
                double e = inc.value();
                if (e < run_best) {
                    run_best = e;
                    best_end = static_cast<long>(end);
                    run_delta = ev[end - 1].delta;
                }
            }
            Labeling L = start;
            for (long j = 0; j < best_end; ++j) L[ev[j].p] = ev[j].label;
            offer(L, run_delta);
        } else {
            // representative delta per envelope interval, subsampled
            std::vector<double> crit;
            for (size_t end : ends) crit.push_back(ev[end - 1].delta);
            std::vector<double> reps;
            if (crit.empty()) {
                reps.push_back(sur.delta);
            } else {
                reps.push_back(crit.front() - 1.0);
                for (size_t j = 1; j < crit.size(); ++j) reps.push_back(0.5 * (crit[j - 1] + crit[j]));
                reps.push_back(crit.back() + 1.0);
            }
            const size_t cap = static_cast<size_t>(std::max(2, opt.max_mrf_deltas - 1));
            std::vector<double> deltas;
            if (reps.size() <= cap) {
                deltas = reps;
            } else {
                for (size_t j = 0; j < cap; ++j) deltas.push_back(reps[j * (reps.size() - 1) / (cap - 1)]);
            }
            deltas.push_back(sur.delta);
            for (double d : deltas) {
                BoundStep b{parts.at(d).costs, Vec::Zero(spec.K)};
                Labeling L = S;
                move_loop(spec, loop_opt, t, L, b, nullptr);
                offer(L, d);
            }
        }

        const bool changed = !(best == S);
        const double prev = E;
        S = best;
        E = bestE;
        res.trace.records.push_back(
            {t, E, E, E, changed ? bestDelta : sur.delta, S.hash(), seconds_since(t0), changed ? 1 : 0});
        if (!changed || std::abs(prev - E) <= opt.schedule.tol * std::max(std::abs(prev), 1e-300)) break;
    }
    res.labeling = S;
    return res;
}

Labeling spectral_initialization(const JointEnergySpec& spec, std::uint64_t seed, int restarts) {
    RankOptions ro;
    ro.weights = spec.weights;
    Embedding emb = rank_m_embedding(spec.objective, spec.affinity, spec.K, ro);
    KMOptions ko;
    ko.K = spec.K;
    ko.seed = seed;
    ko.restarts = restarts;
    std::optional<Vec> w;
    if (emb.weights) w = emb.weights;
    KMState st = run_kmeans(emb.points, w, ko);
    return apply_hard(st.labeling, spec.hard);
}

}  // namespace kcut
