#pragma once

#include <utility>
#include <vector>

#include "polyfine/mdp.hpp"

namespace polyfine {

// Exact dynamic-programming oracles. All results are deterministic functions
// of their inputs; argmax ties always resolve to the smallest action index.

// Q_h(s,a) = r_h(s,a) + sum_s' P_h(s'|s,a) V_{h+1}(s'), V_h(s) = E_pi Q_h(s,.),
// backward from V_H = 0 (0-based step indices).
ValueTable dp_policy_eval(const TabularMDP& mdp, const Policy& policy);

// Optimal values plus a deterministic optimal policy.
std::pair<ValueTable, Policy> dp_optimal(const TabularMDP& mdp);

VisitationTable visitation(const TabularMDP& mdp, const Policy& policy);

// max over steps 1..h_max (1-based) and all (s,a) of d^pi*(s,a)/d^mu(s,a),
// with 0/0 = 0; +infinity when some ratio has positive numerator over zero.
// pi_star must be deterministic.
double concentrability(const TabularMDP& mdp, const Policy& mu, const Policy& pi_star, int h_max);

// Expected value of row V (length S) under the initial distribution.
double expected_initial(const TabularMDP& mdp, const std::vector<double>& v_row);

// Value at the 1-based anchor step of a suffix policy covering steps
// h_anchor..H, via backward recursion over the suffix alone.
std::vector<double> eval_suffix(const TabularMDP& mdp, const Policy& suffix, int h_anchor);

// Per-state value of a mixture at its anchor step: the weight-averaged value
// of its components, each evaluated exactly. Uncovered anchor states use the
// uniform policy.
std::vector<double> eval_mixture(const TabularMDP& mdp, const MixturePolicy& mix);

// Signature-compatible variant that also checks the prefix covers steps
// 1..h_anchor-1; the anchor-step values do not depend on the prefix.
std::vector<double> eval_mixture(const TabularMDP& mdp, const Policy& prefix, const MixturePolicy& mix);

// Exact expected return of (prefix for steps 1..h_anchor-1, then the mixture):
// prefix reward accumulation plus sum_s d_{h_anchor}(s) V^mix(s).
double eval_concatenated(const TabularMDP& mdp, const Policy& prefix, const MixturePolicy& mix);

}  // namespace polyfine
