#include "polyfine/online.hpp"

#include <cmath>
#include <map>

#include "polyfine/dp.hpp"

namespace polyfine {

namespace {

// Composite of roll_in on steps 0..h_star-1 and a greedy suffix on the rest.
Policy compose(const Policy& roll_in, const std::vector<int>& suffix_actions, int h_star, int H, int S, int A) {
    Policy p;
    p.steps = H;
    p.S = S;
    p.A = A;
    p.probs.assign(std::size_t(H) * S * A, 0.0);
    for (int h = 0; h < h_star; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) p.pi(h, s, a) = roll_in.pi(h, s, a);
    for (int h = h_star; h < H; ++h)
        for (int s = 0; s < S; ++s) p.pi(h, s, suffix_actions[std::size_t(h - h_star) * S + s]) = 1.0;
    return p;
}

}  // namespace

void OnlineParams::validate() const {
    if (!(c >= 0.0)) throw InvalidParams("bonus scale must be nonnegative");
    if (!(gamma_scale >= 0.0)) throw InvalidParams("gamma scale must be nonnegative");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParams("failure probability must lie in (0,1)");
    if (n_ucb < 0) throw InvalidParams("episode count must be nonnegative");
}

UpLowResult ucbvi_uplow(EpisodeSampler& env, const Policy& roll_in, int h_star, const OnlineParams& params,
                        Rng& rng) {
    params.validate();
    const TabularMDP& mdp = env.mdp();
    const int S = mdp.S, A = mdp.A, H = mdp.H;
    if (h_star < 0 || h_star > H - 1)
        throw InvalidParams("h_star " + std::to_string(h_star) + " outside 0.." + std::to_string(H - 1));
    if (h_star > 0) {
        validate_policy(roll_in, S, A, "roll-in policy");
        if (roll_in.steps < h_star) throw ShapeMismatch("roll-in policy does not cover the first h_star steps");
    }

    const int L = H - h_star;  // suffix length
    const double horizon_cap = double(L);
    const double iota = std::log(double(H) * S * A * double(params.n_ucb > 0 ? params.n_ucb : 1) / params.delta);

    // Suffix-local arrays, step index hh in [0, L), ambient step h = h_star + hh.
    std::vector<double> q_up(std::size_t(L) * S * A, horizon_cap);
    std::vector<double> q_low(std::size_t(L) * S * A, 0.0);
    std::vector<double> v_up(std::size_t(L + 1) * S, 0.0);
    std::vector<double> v_low(std::size_t(L + 1) * S, 0.0);
    std::vector<int> greedy(std::size_t(L) * S, 0);
    std::vector<long long> n_sa(std::size_t(L) * S * A, 0);
    std::vector<long long> n_sas(std::size_t(L) * S * A * S, 0);
    std::vector<double> r_obs(std::size_t(L) * S * A, 0.0);

    std::vector<long long> anchor_visits(std::size_t(S), 0);
    std::vector<double> sum_v_up(std::size_t(S), 0.0), sum_v_low(std::size_t(S), 0.0);
    // Episode policies per anchor state, deduplicated by their action table.
    std::vector<std::map<std::vector<int>, long long>> mix_counts;
    mix_counts.resize(std::size_t(S));

    std::vector<double> mid(S);
    for (long long k = 0; k < params.n_ucb; ++k) {
        // Backward sweep refreshing every visited pair with current data.
        for (int hh = L - 1; hh >= 0; --hh) {
            const double* vu_next = &v_up[std::size_t(hh + 1) * S];
            const double* vl_next = &v_low[std::size_t(hh + 1) * S];
            for (int s2 = 0; s2 < S; ++s2) mid[s2] = 0.5 * (vu_next[s2] + vl_next[s2]);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const std::size_t sa = (std::size_t(hh) * S + s) * A + a;
                    const long long t = n_sa[sa];
                    if (t <= 0) continue;
                    const long long* row = &n_sas[sa * S];
                    double p_mid = 0.0, p_mid_sq = 0.0, p_vu = 0.0, p_vl = 0.0, p_gap = 0.0;
                    for (int s2 = 0; s2 < S; ++s2) {
                        if (row[s2] == 0) continue;
                        const double p = double(row[s2]) / double(t);
                        p_mid += p * mid[s2];
                        p_mid_sq += p * mid[s2] * mid[s2];
                        p_vu += p * vu_next[s2];
                        p_vl += p * vl_next[s2];
                        p_gap += p * (vu_next[s2] - vl_next[s2]);
                    }
                    double sigma_sq = p_mid_sq - p_mid * p_mid;
                    if (sigma_sq < 0.0) sigma_sq = 0.0;
                    const double beta =
                        params.c * (std::sqrt(sigma_sq * iota / double(t)) + horizon_cap * horizon_cap * S * iota / double(t));
                    const double gamma = params.gamma_scale / horizon_cap * p_gap;
                    const double up = r_obs[sa] + p_vu + gamma + beta;
                    const double low = r_obs[sa] + p_vl - gamma - beta;
                    q_up[sa] = up < horizon_cap ? up : horizon_cap;
                    q_low[sa] = low > 0.0 ? low : 0.0;
                }
            for (int s = 0; s < S; ++s) {
                int best = 0;
                double best_q = q_up[(std::size_t(hh) * S + s) * A];
                for (int a = 1; a < A; ++a) {
                    const double q = q_up[(std::size_t(hh) * S + s) * A + a];
                    if (q > best_q) {
                        best_q = q;
                        best = a;
                    }
                }
                greedy[std::size_t(hh) * S + s] = best;
                v_up[std::size_t(hh) * S + s] = best_q;
                v_low[std::size_t(hh) * S + s] = q_low[(std::size_t(hh) * S + s) * A + best];
            }
        }

        // The clips make these exact; a violation would be a programming error.
        for (std::size_t i = 0; i < q_up.size(); ++i)
            if (!(q_low[i] <= q_up[i])) throw std::logic_error("upper/lower Q estimates crossed");

        const std::vector<int> suffix_actions(greedy.begin(), greedy.end());
        const Episode ep = env.sample(compose(roll_in, suffix_actions, h_star, H, S, A), rng);

        const int anchor = ep.states[h_star];
        anchor_visits[anchor] += 1;
        sum_v_up[anchor] += v_up[std::size_t(0) * S + anchor];
        sum_v_low[anchor] += v_low[std::size_t(0) * S + anchor];
        mix_counts[anchor][suffix_actions] += 1;

        for (int h = h_star; h < H; ++h) {
            const std::size_t sa = (std::size_t(h - h_star) * S + ep.states[h]) * A + ep.actions[h];
            n_sa[sa] += 1;
            r_obs[sa] = ep.rewards[h];
            if (h + 1 < H) n_sas[sa * S + ep.states[h + 1]] += 1;
        }
    }

    UpLowResult res;
    res.v_up.assign(std::size_t(S), horizon_cap);
    res.v_low.assign(std::size_t(S), 0.0);
    res.visit_counts = anchor_visits;
    res.pi_out.h_anchor = h_star + 1;
    res.pi_out.S = S;
    res.pi_out.A = A;
    res.pi_out.H = H;
    res.pi_out.comps.resize(std::size_t(S));
    for (int s = 0; s < S; ++s) {
        if (anchor_visits[s] == 0) continue;  // keeps (L, 0, uniform) convention
        res.v_up[s] = sum_v_up[s] / double(anchor_visits[s]);
        res.v_low[s] = sum_v_low[s] / double(anchor_visits[s]);
        for (const auto& [actions, count] : mix_counts[s]) {
            MixtureComponent comp;
            comp.weight = double(count) / double(anchor_visits[s]);
            comp.suffix = policy_from_actions(L, S, A, actions);
            res.pi_out.comps[s].push_back(std::move(comp));
        }
    }
    return res;
}

UpLowResult ucbvi_uplow(const TabularMDP& mdp, const Policy& roll_in, int h_star, const OnlineParams& params,
                        Rng& rng) {
    EpisodeSampler env(mdp);
    return ucbvi_uplow(env, roll_in, h_star, params, rng);
}

HooviResult hoovi(EpisodeSampler& env, const Policy& mu, int h_star, long long n,
                  const OfflineParams& offline_params, const OnlineParams& online_params, Rng& rng) {
    offline_params.validate();
    const TabularMDP& mdp = env.mdp();
    const int S = mdp.S, A = mdp.A, H = mdp.H;
    if (h_star < 0 || h_star > H) throw InvalidParams("h_star outside 0..H");
    if (n < 2) throw InvalidParams("hoovi needs an episode budget of at least 2");
    validate_policy(mu, S, A, "mu");
    if (mu.steps < H) throw ShapeMismatch("mu must cover the full horizon");

    HooviResult res;

    if (h_star == H) {  // fully offline path
        EpisodeDataset data = collect(env, mu, n, rng, "mu");
        res.stage2 = pevi_adv(data, S, A, H, offline_params, rng);
        res.prefix = res.stage2.policy;
        res.suffix.h_anchor = H + 1;
        res.suffix.S = S;
        res.suffix.A = A;
        res.suffix.H = H;
        res.suffix.comps.resize(std::size_t(S));
        return res;
    }

    OnlineParams stage1_params = online_params;
    stage1_params.n_ucb = (h_star == 0) ? n : n / 2;  // stage 2 skipped entirely at h_star = 0
    res.stage1 = ucbvi_uplow(env, mu, h_star, stage1_params, rng);
    res.suffix = res.stage1.pi_out;

    if (h_star == 0) {
        res.prefix.steps = 0;
        res.prefix.S = S;
        res.prefix.A = A;
        return res;
    }

    const long long n_offline = n - stage1_params.n_ucb;
    EpisodeDataset data = collect(env, mu, n_offline, rng, "mu");
    res.stage2 = truncated_pevi_adv(data, S, A, H, h_star, res.stage1.v_low, offline_params, rng);
    res.prefix = res.stage2.policy;
    return res;
}

HooviResult hoovi(const TabularMDP& mdp, const Policy& mu, int h_star, long long n,
                  const OfflineParams& offline_params, const OnlineParams& online_params, Rng& rng) {
    EpisodeSampler env(mdp);
    return hoovi(env, mu, h_star, n, offline_params, online_params, rng);
}

}  // namespace polyfine
