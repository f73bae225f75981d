#pragma once

#include "kcut/moves.hpp"
#include "kcut/spectral_embed.hpp"

#include <functional>

namespace kcut {

enum class BoundPolicy { AfterLoop, AfterEachMove, AtConvergence };

const char* to_string(BoundPolicy p);
BoundPolicy bound_policy_from_string(const std::string& s);

struct Schedule {
    BoundPolicy policy = BoundPolicy::AfterLoop;
    int max_outer = 100;
    double tol = 1e-7;
    int max_inner_loops = 50;  // AtConvergence: move loops per fixed bound
};

struct TraceRecord {
    int iteration = 0;
    double energy = 0.0;       // objective being descended (E, or E~ for spectral_cut)
    double true_energy = 0.0;  // joint energy E
    double bound = 0.0;        // bound at the new labeling, offset so it equals energy at S_t
    double delta = 0.0;
    std::uint64_t hash = 0;
    double seconds = 0.0;
    int moves_accepted = 0;
};

struct RunTrace {
    std::string method;
    std::vector<TraceRecord> records;

    bool monotone(double rel = 1e-9) const;
    bool true_energy_monotone(double rel = 1e-9) const;
    std::string to_jsonl() const;
    std::string to_csv() const;
};

struct MoveEvent {
    int outer = 0;
    int alpha = 0;
    int beta = -1;
    const MoveContext* context = nullptr;
    const Labeling* before = nullptr;
    const MoveResult* result = nullptr;
};
using MoveObserver = std::function<void(const MoveEvent&)>;

struct CutOptions {
    Schedule schedule;
    MoveKind moves = MoveKind::Expansion;
    std::optional<double> delta;  // kernel shift; psd_shift when omitted
    MoveObserver observer;
};

struct SpectralOptions : CutOptions {
    int m = 0;  // 0: automatic rank
    bool force_iterative = false;
};

struct PseudoOptions : CutOptions {
    int max_mrf_deltas = 32;
};

struct CutResult {
    Labeling labeling;
    RunTrace trace;
    double delta = 0.0;
};

CutResult kernel_cut(const JointEnergySpec& spec, const Labeling& init, const CutOptions& opt = {});
CutResult spectral_cut(const JointEnergySpec& spec, const Labeling& init, const SpectralOptions& opt = {});
// With a precomputed embedding (shared by repeated calls).
CutResult spectral_cut(const JointEnergySpec& spec, const Embedding& emb, const Labeling& init,
                       const CutOptions& opt = {});
CutResult pseudo_bound_cut(const JointEnergySpec& spec, const Labeling& init, const PseudoOptions& opt = {});

// Every labeling on the lower envelope of p -> argmin_k g_pk + delta h_pk as
// delta sweeps the real line, in sweep order. Distinct consecutive entries.
struct DeltaSweep {
    std::vector<double> breakpoints;  // delta where the labeling changes
    std::vector<Labeling> labelings;  // labelings.size() == breakpoints.size() + 1
};
DeltaSweep enumerate_delta_sweep(const PseudoBoundParts& parts, const Labeling& St,
                                 const std::vector<int>& hard = {});

// KM on the rank-K embedding, weighted for NC, then seeds applied.
Labeling spectral_initialization(const JointEnergySpec& spec, std::uint64_t seed, int restarts = 5);

// Overrides seeded entries with their hard labels.
Labeling apply_hard(const Labeling& S, const std::vector<int>& hard);

}  // namespace kcut
