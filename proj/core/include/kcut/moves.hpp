#pragma once

#include "kcut/graphcut.hpp"
#include "kcut/objectives.hpp"

namespace kcut {

// Energy minimized inside one move:
//   sum_p unary(p, S_p) + sum_k label_charge_k [S^k nonempty] + gamma * MRF(S)
// label_charge adds to gamma * h_k from LabelCost terms.
struct MoveContext {
    const Mat* unary = nullptr;
    Vec label_charge;  // size K or empty
    double gamma = 0.0;
    const std::vector<MrfTerm>* mrf = nullptr;
    const std::vector<int>* hard = nullptr;  // -1 = free

    double energy(const Labeling& S) const;
    bool is_fixed(int p) const { return hard && !hard->empty() && (*hard)[p] >= 0; }
};

enum class MoveKind { Expansion, Swap };

struct MoveResult {
    Labeling labeling;  // accepted labeling (current one unless strictly better)
    Labeling proposal;  // min-cut solution of the move
    double before = 0.0;
    double after = 0.0;  // energy of the accepted labeling
    bool changed = false;
};

MoveResult expansion_move(const MoveContext& ctx, const Labeling& current, int alpha);
MoveResult swap_move(const MoveContext& ctx, const Labeling& current, int alpha, int beta);

// Brute-force minimum over the move space, for tests (2^vars assignments).
double brute_force_move_min(const MoveContext& ctx, const Labeling& current, MoveKind kind, int alpha,
                            int beta = -1, Labeling* argmin = nullptr);

}  // namespace kcut
