#pragma once

#include <vector>

#include "polyfine/counts.hpp"
#include "polyfine/mdp.hpp"

namespace polyfine {

struct OfflineParams {
    double c = 1.0;             // bonus scale
    double delta = 0.1;         // failure probability
    double iota_override = -1;  // > 0 replaces log(H*S*A/delta)

    void validate() const;
};

struct SolveDiagnostics {
    std::vector<double> max_bonus;       // per step, largest bonus applied
    std::vector<long long> unvisited;    // per step, (s,a) pairs with zero count
    long long q_above_h = 0;             // Q estimates exceeding the horizon bound
};

// Pessimistic solver output. values.v rows run 0..steps with the final row
// holding the continuation values the pass was pinned to (all zero for the
// full-horizon solvers).
struct OfflineResult {
    Policy policy;  // deterministic, greedy in the pessimistic Q
    ValueTable values;
    SolveDiagnostics diag;
};

// Value iteration with a Hoeffding-style lower confidence bonus:
// splits the data into H per-step folds, then runs a backward pass with
// Q = r_hat + P_hat V - c sqrt(H^2 iota / (N v 1)), V = (max_a Q) v 0.
OfflineResult vi_lcb(const EpisodeDataset& data, int S, int A, int H, const OfflineParams& params, Rng& rng);

// Reference-advantage variant: a VI-LCB reference value from one third of the
// data, then a backward pass with Bernstein-style bonuses on the reference
// term and the advantage term, each with independently estimated models.
OfflineResult pevi_adv(const EpisodeDataset& data, int S, int A, int H, const OfflineParams& params, Rng& rng);

// pevi_adv restricted to steps 1..h_star with the continuation pinned to
// v_init (never updated). h_star = H and v_init = 0 reproduces pevi_adv
// exactly, including the seeded splits. H is the ambient horizon of the data
// and is the H appearing in every bonus. Entries of v_init must lie in [0,H].
OfflineResult truncated_pevi_adv(const EpisodeDataset& data, int S, int A, int H, int h_star,
                                 const std::vector<double>& v_init, const OfflineParams& params, Rng& rng);

}  // namespace polyfine
