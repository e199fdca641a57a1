#pragma once

#include <vector>

#include "polyfine/episodes.hpp"
#include "polyfine/offline.hpp"

namespace polyfine {

struct OnlineParams {
    double c = 1.0;            // bonus scale
    double gamma_scale = 1.0;  // scale of the correction term gamma
    double delta = 0.1;        // failure probability
    long long n_ucb = 0;       // episode count

    void validate() const;
};

// Output of the optimistic/pessimistic suffix learner. v_up and v_low are
// per-state averages of the per-episode estimates at the anchor step
// h_star+1, pi_out the per-anchor-state uniform mixture of episode policies.
// Anchor states never visited report (H - h_star, 0, uniform).
struct UpLowResult {
    std::vector<double> v_up;
    std::vector<double> v_low;
    MixturePolicy pi_out;
    std::vector<long long> visit_counts;  // anchor-state visits
};

// Optimistic exploration of the suffix steps h_star+1..H with certified lower
// bounds. Each episode replays a full backward sweep over the visited pairs,
// rolls in with roll_in to the anchor step, then executes the greedy policy,
// updating counts online. Invariant maintained throughout: Q_low <= Q_up and
// 0 <= V_low <= V_up <= H - h_star.
UpLowResult ucbvi_uplow(EpisodeSampler& env, const Policy& roll_in, int h_star, const OnlineParams& params,
                        Rng& rng);

UpLowResult ucbvi_uplow(const TabularMDP& mdp, const Policy& roll_in, int h_star, const OnlineParams& params,
                        Rng& rng);

struct HooviResult {
    Policy prefix;         // steps 1..h_star
    MixturePolicy suffix;  // steps h_star+1..H
    UpLowResult stage1;
    OfflineResult stage2;  // truncated pessimistic pass (empty for h_star = 0)
};

// Two-stage hybrid: spend floor(n/2) episodes exploring the suffix with
// ucbvi_uplow (rolling in with mu), then collect the remaining episodes with
// mu and run the truncated pessimistic solver seeded with the certified lower
// values. h_star = 0 spends the whole budget online; h_star = H reduces to
// pevi_adv on n collected episodes.
HooviResult hoovi(EpisodeSampler& env, const Policy& mu, int h_star, long long n,
                  const OfflineParams& offline_params, const OnlineParams& online_params, Rng& rng);

HooviResult hoovi(const TabularMDP& mdp, const Policy& mu, int h_star, long long n,
                  const OfflineParams& offline_params, const OnlineParams& online_params, Rng& rng);

}  // namespace polyfine
