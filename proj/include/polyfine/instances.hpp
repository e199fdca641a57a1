#pragma once

#include <cstdint>
#include <vector>

#include "polyfine/mdp.hpp"
#include "polyfine/rng.hpp"

namespace polyfine {

// Bandit-state family with one absorbing good state and one absorbing bad
// state. States 0..S_bandit-1 are bandit states, then s_g, then s_b; the full
// horizon is 2*H_bandit+1. a_star[h*S_bandit + i] is the special arm at
// (step h, bandit state i), an action index below K.
struct HardInstanceSpec {
    int S_bandit = 1;
    int H_bandit = 1;
    int A = 2;
    int K = 2;
    double tau = 0.25;
    std::vector<int> a_star;  // [h][i], length H_bandit*S_bandit

    int total_states() const { return S_bandit + 2; }
    int total_horizon() const { return 2 * H_bandit + 1; }
    int good_state() const { return S_bandit; }
    int bad_state() const { return S_bandit + 1; }
};

void validate_spec(const HardInstanceSpec& spec);

// Draws each special arm uniformly from {0..K-1}.
HardInstanceSpec draw_a_star(HardInstanceSpec spec, Rng& rng);

// K = min(floor(cstar), A); rejects results below 2.
int k_from_cstar(double cstar, int A);

struct GeneratedInstance {
    TabularMDP mdp;
    Policy mu;
    Policy pi_star;
};

// The hard family: bandit states hold with probability 1-1/H and leak to the
// good/bad states with a tau-sized edge on the special arm; every bandit
// state splits half/half at step H+1; reward 1 only in the good state from
// step H+2 on. mu is uniform over the first K arms at bandit states (action 0
// elsewhere), pi_star plays the special arms.
GeneratedInstance build_hard_instance(const HardInstanceSpec& spec);

// Same construction with every action behaving like a non-special arm.
TabularMDP null_instance(int S_bandit, int H_bandit, int A);

// Exact suboptimality of a policy that is deterministic on bandit states:
// sum over (h, i) of (1/S)(1-1/H)^(h-1) tau [policy mismatches a_star].
double subopt_formula(const HardInstanceSpec& spec, const Policy& policy);

// Number of (step, bandit state) pairs where the policy misses the special arm.
long long bandit_loss(const HardInstanceSpec& spec, const Policy& policy);

// Coverage-splitting family: a corridor state that every policy occupies for
// steps 1..h_star (all actions identical there), then a branch point where
// action 0 leads to an absorbing good branch and all other actions to an
// absorbing bad branch worth gap less per step. mu walks the corridor
// uniformly but commits to action 1 at the branch point, so concentrability
// is A up to h_star and +infinity beyond. States beyond the first three are
// unreachable padding.
GeneratedInstance build_partial_coverage_instance(int S, int A, int H, int h_star, double gap);

// Dense random MDP whose transition rows and initial distribution have full
// support, paired with the uniform behavior policy; every (h,s,a) is reachable
// so concentrability is finite.
GeneratedInstance random_covered_instance(int S, int A, int H, std::uint64_t seed);

}  // namespace polyfine
