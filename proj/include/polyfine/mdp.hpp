#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "polyfine/errors.hpp"

namespace polyfine {

// Tolerance for probability-row normalization checks throughout the library.
inline constexpr double kProbTol = 1e-9;

// Finite episodic MDP with time-indexed transitions and deterministic rewards.
// All step indices are 0-based: h ranges over [0, H).
struct TabularMDP {
    int S = 0;
    int A = 0;
    int H = 0;
    std::vector<double> transitions;  // [h][s][a][s'], length H*S*A*S
    std::vector<double> rewards;      // [h][s][a], length H*S*A
    std::vector<double> initial;      // [s], length S

    static TabularMDP zeros(int S, int A, int H);

    double p(int h, int s, int a, int s2) const {
        return transitions[((std::size_t(h) * S + s) * A + a) * S + s2];
    }
    double& p(int h, int s, int a, int s2) {
        return transitions[((std::size_t(h) * S + s) * A + a) * S + s2];
    }
    double r(int h, int s, int a) const { return rewards[(std::size_t(h) * S + s) * A + a]; }
    double& r(int h, int s, int a) { return rewards[(std::size_t(h) * S + s) * A + a]; }
};

// Per-step state-conditional action distributions. steps may be smaller than
// the ambient horizon for prefix/suffix policies.
struct Policy {
    int steps = 0;
    int S = 0;
    int A = 0;
    std::vector<double> probs;  // [h][s][a], length steps*S*A

    double pi(int h, int s, int a) const { return probs[(std::size_t(h) * S + s) * A + a]; }
    double& pi(int h, int s, int a) { return probs[(std::size_t(h) * S + s) * A + a]; }
};

// V and Q over steps 0..H, with row H identically zero.
struct ValueTable {
    int H = 0;
    int S = 0;
    int A = 0;
    std::vector<double> v;  // [(H+1)][s]
    std::vector<double> q;  // [(H+1)][s][a]

    static ValueTable zeros(int H, int S, int A);

    double value(int h, int s) const { return v[std::size_t(h) * S + s]; }
    double& value(int h, int s) { return v[std::size_t(h) * S + s]; }
    double qvalue(int h, int s, int a) const { return q[(std::size_t(h) * S + s) * A + a]; }
    double& qvalue(int h, int s, int a) { return q[(std::size_t(h) * S + s) * A + a]; }
};

struct VisitationTable {
    int H = 0;
    int S = 0;
    int A = 0;
    std::vector<double> d_state;         // [h][s]
    std::vector<double> d_state_action;  // [h][s][a]

    double state(int h, int s) const { return d_state[std::size_t(h) * S + s]; }
    double state_action(int h, int s, int a) const {
        return d_state_action[(std::size_t(h) * S + s) * A + a];
    }
};

// Mixture over suffix policies, indexed by the state seen at the anchor step.
// h_anchor is a 1-based step in 1..H+1; each component covers the remaining
// H - h_anchor + 1 steps. Anchor states without components carry the uniform
// policy by convention.
struct MixtureComponent {
    double weight = 0.0;
    Policy suffix;
};

struct MixturePolicy {
    int h_anchor = 1;
    int S = 0;
    int A = 0;
    int H = 0;
    std::vector<std::vector<MixtureComponent>> comps;  // [anchor state]
};

// Throws InvalidModel naming the first offending index if any invariant fails.
void validate_mdp(const TabularMDP& mdp);

// Checks dimensions and that every row is a probability vector.
void validate_policy(const Policy& policy, int S, int A, const std::string& what = "policy");

void validate_mixture(const MixturePolicy& mix);

Policy uniform_policy(int steps, int S, int A);

// Point-mass policy from an action table actions[h*S + s].
Policy policy_from_actions(int steps, int S, int A, const std::vector<int>& actions);

bool is_deterministic(const Policy& policy);

// Index of the (near-)unit-mass action of a deterministic row, -1 otherwise.
int det_action(const Policy& policy, int h, int s);

}  // namespace polyfine
