#pragma once

#include "kcut/affinity.hpp"

#include <variant>

namespace kcut {

enum class Objective { AA, AC, NC, WKKM };

const char* to_string(Objective o);
Objective objective_from_string(const std::string& s);

struct PottsEdge {
    int p, q;
    double w;
};

struct PottsEdges {
    std::vector<PottsEdge> edges;
};

struct LabelCost {
    Vec h;  // one cost per label
};

struct RobustPnPotts {
    std::vector<std::vector<int>> factors;
    std::vector<double> T;  // absolute threshold per factor

    static RobustPnPotts uniform(std::vector<std::vector<int>> factors, double T);
    static RobustPnPotts fractional(std::vector<std::vector<int>> factors, double fraction);
};

using MrfTerm = std::variant<PottsEdges, LabelCost, RobustPnPotts>;

struct JointEnergySpec {
    Objective objective = Objective::NC;
    Affinity affinity;          // A, or the kernel for WKKM
    std::optional<Vec> weights; // WKKM point weights, ones when absent
    double gamma = 0.0;
    std::vector<MrfTerm> mrf;
    int K = 2;
    // per-point hard label (-1 = free); empty means unconstrained
    std::vector<int> hard;
};

struct EnergyBreakdown {
    double clustering = 0.0;
    double potts = 0.0;
    double label_cost = 0.0;
    double robust_pn = 0.0;
    double gamma = 0.0;
    double total = 0.0;
};

struct Diagnostics {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

Diagnostics validate(const JointEnergySpec& spec, const Dataset& data);
Diagnostics validate(const JointEnergySpec& spec, int n);

// Per-segment X'AX for every label, by a single pass over stored entries.
Vec segment_association(const Affinity& A, const Labeling& S);
// Per-segment sum of weights.
Vec segment_volume(const Vec& w, const Labeling& S);

double eval_aa(const Affinity& A, const Labeling& S);
double eval_ac(const Affinity& A, const Labeling& S);
double eval_nc(const Affinity& A, const Labeling& S);
double eval_wkkm(const Affinity& Kmat, const Vec& w, const Labeling& S);

// All four objectives are -sum_k X'MX / w'X for a base matrix M and weights w:
// AA (A, 1), AC (A - D, 1), NC (A, d), WKKM (W K W, w).
struct PairwiseForm {
    Affinity M;
    Vec w;
};
PairwiseForm pairwise_form(Objective o, const Affinity& A, const std::optional<Vec>& weights = std::nullopt);
double eval_pairwise(const PairwiseForm& f, const Labeling& S);

double eval_potts(const PottsEdges& e, const Labeling& S);
double eval_label_cost(const Labeling& S, const Vec& h);
double eval_label_cost(const Labeling& S, const LabelCost& c);
double eval_robust_pn(const Labeling& S, const RobustPnPotts& r);
double eval_robust_pn(const Labeling& S, const std::vector<std::vector<int>>& factors, double T);

double eval_mrf(const std::vector<MrfTerm>& terms, const Labeling& S, EnergyBreakdown* into = nullptr);
EnergyBreakdown eval_joint(const JointEnergySpec& spec, const Labeling& S);
double eval_clustering(const JointEnergySpec& spec, const Labeling& S);

enum class PottsMode { Contrast, Length };
PottsEdges contrast_weights(const Dataset& image, int connectivity = 8, PottsMode mode = PottsMode::Contrast);

}  // namespace kcut
