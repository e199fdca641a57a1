#include "polyfine/offline.hpp"

#include <cmath>

namespace polyfine {

namespace {

void check_dims(const EpisodeDataset& data, int S, int A, int H) {
    if (S <= 0 || A <= 0 || H <= 0) throw InvalidParams("dimensions must be positive");
    for (const Episode& ep : data.episodes) {
        if (int(ep.states.size()) != H || int(ep.actions.size()) != H || int(ep.rewards.size()) != H)
            throw ShapeMismatch("episode horizon does not match H");
        for (int h = 0; h < H; ++h)
            if (ep.states[h] < 0 || ep.states[h] >= S || ep.actions[h] < 0 || ep.actions[h] >= A)
                throw ShapeMismatch("episode indices out of range for (S,A)");
    }
}

double iota_offline(const OfflineParams& p, int S, int A, int H) {
    if (p.iota_override > 0.0) return p.iota_override;
    return std::log(double(H) * S * A / p.delta);
}

// Greedy extraction shared by both passes: pi = argmax_a Q (smallest index on
// ties), V = (max_a Q) v 0.
void greedy_row(const std::vector<double>& q_row, int A, double& v_out, int& a_out) {
    int best = 0;
    double best_q = q_row[0];
    for (int a = 1; a < A; ++a)
        if (q_row[a] > best_q) {
            best_q = q_row[a];
            best = a;
        }
    v_out = best_q > 0.0 ? best_q : 0.0;
    a_out = best;
}

struct PassOutput {
    std::vector<double> v;       // [(h_eff+1)][s], last row pinned
    std::vector<double> q;       // [h_eff][s][a]
    std::vector<int> actions;    // [h_eff][s]
};

// Backward pass of VI-LCB over steps 0..h_eff-1 with pinned continuation.
PassOutput vilcb_pass(const std::vector<CountsModel>& models, int S, int A, int H, int h_eff,
                      const std::vector<double>& v_pin, const OfflineParams& params, SolveDiagnostics& diag) {
    const double iota = iota_offline(params, S, A, H);
    PassOutput out;
    out.v.assign(std::size_t(h_eff + 1) * S, 0.0);
    out.q.assign(std::size_t(h_eff) * S * A, 0.0);
    out.actions.assign(std::size_t(h_eff) * S, 0);
    for (int s = 0; s < S; ++s) out.v[std::size_t(h_eff) * S + s] = v_pin[s];

    std::vector<double> q_row(A);
    for (int h = h_eff - 1; h >= 0; --h) {
        const CountsModel& m = models[h];
        const std::vector<double> v_next(out.v.begin() + std::size_t(h + 1) * S,
                                         out.v.begin() + std::size_t(h + 2) * S);
        const std::vector<double> pv = apply_phat(m, v_next);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const std::size_t sa = std::size_t(s) * A + a;
                const long long n = m.n_sa[sa];
                if (n <= 0) diag.unvisited[h] += 1;
                const double denom = double(n > 0 ? n : 1);
                const double bonus = params.c * double(H) * std::sqrt(iota / denom);
                if (bonus > diag.max_bonus[h]) diag.max_bonus[h] = bonus;
                const double q = m.r_hat[sa] + pv[sa] - bonus;
                if (q > double(H)) diag.q_above_h += 1;
                q_row[a] = q;
                out.q[(std::size_t(h) * S + s) * A + a] = q;
            }
            greedy_row(q_row, A, out.v[std::size_t(h) * S + s], out.actions[std::size_t(h) * S + s]);
        }
    }
    return out;
}

OfflineResult package(PassOutput&& pass, int S, int A, int h_eff, SolveDiagnostics&& diag) {
    OfflineResult res;
    res.policy = policy_from_actions(h_eff, S, A, pass.actions);
    res.values.H = h_eff;
    res.values.S = S;
    res.values.A = A;
    res.values.v = std::move(pass.v);
    res.values.q = std::move(pass.q);
    res.values.q.resize(std::size_t(h_eff + 1) * S * A, 0.0);  // terminal Q row, zero
    res.diag = std::move(diag);
    return res;
}

OfflineResult vilcb_core(const EpisodeDataset& data, int S, int A, int H, int h_eff,
                         const std::vector<double>& v_pin, const OfflineParams& params, Rng& rng) {
    const std::vector<EpisodeDataset> folds = split_vilcb(data, h_eff, rng);
    std::vector<CountsModel> models;
    models.reserve(std::size_t(h_eff));
    for (int h = 0; h < h_eff; ++h) models.push_back(estimate_step(folds[h], h, S, A));

    SolveDiagnostics diag;
    diag.max_bonus.assign(std::size_t(h_eff), 0.0);
    diag.unvisited.assign(std::size_t(h_eff), 0);
    PassOutput pass = vilcb_pass(models, S, A, H, h_eff, v_pin, params, diag);
    return package(std::move(pass), S, A, h_eff, std::move(diag));
}

OfflineResult pevi_core(const EpisodeDataset& data, int S, int A, int H, int h_eff,
                        const std::vector<double>& v_pin, const OfflineParams& params, Rng& rng) {
    const double iota = iota_offline(params, S, A, H);
    PeviSplit split = split_pevi(data, h_eff, rng);

    // Reference values from the first third, same (c, delta).
    const OfflineResult ref = vilcb_core(split.ref, S, A, H, h_eff, v_pin, params, rng);

    std::vector<CountsModel> model0, model1;
    model0.reserve(std::size_t(h_eff));
    model1.reserve(std::size_t(h_eff));
    for (int h = 0; h < h_eff; ++h) {
        model0.push_back(estimate_step(split.d0, h, S, A));
        model1.push_back(estimate_step(split.d1[h], h, S, A));
    }

    SolveDiagnostics diag;
    diag.max_bonus.assign(std::size_t(h_eff), 0.0);
    diag.unvisited.assign(std::size_t(h_eff), 0);

    PassOutput out;
    out.v.assign(std::size_t(h_eff + 1) * S, 0.0);
    out.q.assign(std::size_t(h_eff) * S * A, 0.0);
    out.actions.assign(std::size_t(h_eff) * S, 0);
    for (int s = 0; s < S; ++s) out.v[std::size_t(h_eff) * S + s] = v_pin[s];

    std::vector<double> q_row(A), adv(S);
    for (int h = h_eff - 1; h >= 0; --h) {
        const std::vector<double> v_ref_next(ref.values.v.begin() + std::size_t(h + 1) * S,
                                             ref.values.v.begin() + std::size_t(h + 2) * S);
        const std::vector<double> v_next(out.v.begin() + std::size_t(h + 1) * S,
                                         out.v.begin() + std::size_t(h + 2) * S);
        for (int s = 0; s < S; ++s) adv[s] = v_next[s] - v_ref_next[s];

        const std::vector<double> p0_ref = apply_phat(model0[h], v_ref_next);
        const std::vector<double> var0 = empirical_variance(model0[h], v_ref_next);
        const std::vector<double> p1_adv = apply_phat(model1[h], adv);
        const std::vector<double> var1 = empirical_variance(model1[h], adv);

        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const std::size_t sa = std::size_t(s) * A + a;
                const long long n0 = model0[h].n_sa[sa];
                const long long n1 = model1[h].n_sa[sa];
                if (n0 <= 0) diag.unvisited[h] += 1;
                const double d0 = double(n0 > 0 ? n0 : 1);
                const double d1 = double(n1 > 0 ? n1 : 1);
                const double b0 = params.c * (std::sqrt(var0[sa] * iota / d0) + double(H) * iota / d0);
                const double b1 = params.c * (std::sqrt(var1[sa] * iota / d1) + double(H) * iota / d1);
                if (b0 + b1 > diag.max_bonus[h]) diag.max_bonus[h] = b0 + b1;
                const double q = model0[h].r_hat[sa] + p0_ref[sa] - b0 + p1_adv[sa] - b1;
                if (q > double(H)) diag.q_above_h += 1;
                q_row[a] = q;
                out.q[(std::size_t(h) * S + s) * A + a] = q;
            }
            greedy_row(q_row, A, out.v[std::size_t(h) * S + s], out.actions[std::size_t(h) * S + s]);
        }
    }
    return package(std::move(out), S, A, h_eff, std::move(diag));
}

}  // namespace

void OfflineParams::validate() const {
    if (!(c >= 0.0)) throw InvalidParams("bonus scale must be nonnegative");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParams("failure probability must lie in (0,1)");
}

OfflineResult vi_lcb(const EpisodeDataset& data, int S, int A, int H, const OfflineParams& params, Rng& rng) {
    params.validate();
    check_dims(data, S, A, H);
    return vilcb_core(data, S, A, H, H, std::vector<double>(std::size_t(S), 0.0), params, rng);
}

OfflineResult pevi_adv(const EpisodeDataset& data, int S, int A, int H, const OfflineParams& params, Rng& rng) {
    params.validate();
    check_dims(data, S, A, H);
    return pevi_core(data, S, A, H, H, std::vector<double>(std::size_t(S), 0.0), params, rng);
}

OfflineResult truncated_pevi_adv(const EpisodeDataset& data, int S, int A, int H, int h_star,
                                 const std::vector<double>& v_init, const OfflineParams& params, Rng& rng) {
    params.validate();
    check_dims(data, S, A, H);
    if (h_star < 1 || h_star > H)
        throw InvalidParams("h_star " + std::to_string(h_star) + " outside 1.." + std::to_string(H));
    if (v_init.size() != std::size_t(S)) throw ShapeMismatch("v_init length does not match S");
    for (double v : v_init)
        if (!(v >= 0.0 && v <= double(H))) throw InvalidParams("v_init entries must lie in [0,H]");
    return pevi_core(data, S, A, H, h_star, v_init, params, rng);
}

}  // namespace polyfine
