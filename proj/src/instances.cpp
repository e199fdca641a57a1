#include "polyfine/instances.hpp"

#include <cmath>

#include "polyfine/dp.hpp"

namespace polyfine {

namespace {

// Shared skeleton of the hard family. special[h*S+i] < 0 builds the null
// variant where every arm behaves identically.
TabularMDP hard_family_mdp(int S_bandit, int H_bandit, int A, double tau, const std::vector<int>& special) {
    const int S = S_bandit + 2;
    const int H = 2 * H_bandit + 1;
    const int s_g = S_bandit, s_b = S_bandit + 1;
    TabularMDP m = TabularMDP::zeros(S, A, H);

    const double stay = 1.0 - 1.0 / H_bandit;
    const double leak = 1.0 / (2.0 * H_bandit);
    const double leak_good = (0.5 + tau) / H_bandit;
    const double leak_bad = (0.5 - tau) / H_bandit;

    for (int h = 0; h < H; ++h) {
        for (int i = 0; i < S_bandit; ++i)
            for (int a = 0; a < A; ++a) {
                if (h < H_bandit) {
                    const bool is_special = !special.empty() && special[std::size_t(h) * S_bandit + i] == a;
                    m.p(h, i, a, i) = stay;
                    m.p(h, i, a, s_g) = is_special ? leak_good : leak;
                    m.p(h, i, a, s_b) = is_special ? leak_bad : leak;
                } else if (h == H_bandit) {
                    m.p(h, i, a, s_g) = 0.5;
                    m.p(h, i, a, s_b) = 0.5;
                } else {
                    m.p(h, i, a, i) = 1.0;  // unreachable past the split
                }
            }
        for (int a = 0; a < A; ++a) {
            m.p(h, s_g, a, s_g) = 1.0;
            m.p(h, s_b, a, s_b) = 1.0;
            if (h >= H_bandit + 1) m.r(h, s_g, a) = 1.0;
        }
    }
    for (int i = 0; i < S_bandit; ++i) m.initial[i] = 1.0 / S_bandit;
    return m;
}

}  // namespace

void validate_spec(const HardInstanceSpec& spec) {
    if (spec.S_bandit < 1) throw InvalidParams("need at least one bandit state");
    if (spec.H_bandit < 1) throw InvalidParams("H_bandit must be at least 1");
    if (spec.K < 2 || spec.K > spec.A)
        throw InvalidParams("K must satisfy 2 <= K <= A, got K=" + std::to_string(spec.K) +
                            " A=" + std::to_string(spec.A));
    if (!(spec.tau >= 0.0 && spec.tau <= 1.0 / 3.0))
        throw InvalidParams("tau must lie in [0, 1/3]");
    if (spec.a_star.size() != std::size_t(spec.H_bandit) * spec.S_bandit)
        throw InvalidParams("a_star table has wrong length");
    for (int a : spec.a_star)
        if (a < 0 || a >= spec.K) throw InvalidParams("a_star entries must be actions below K");
}

HardInstanceSpec draw_a_star(HardInstanceSpec spec, Rng& rng) {
    spec.a_star.assign(std::size_t(spec.H_bandit) * spec.S_bandit, 0);
    for (int& a : spec.a_star) a = rng.uniform_int(spec.K);
    return spec;
}

int k_from_cstar(double cstar, int A) {
    if (!(cstar >= 2.0)) throw InvalidParams("target concentrability must be at least 2");
    const double k = std::floor(cstar);
    const int out = k < double(A) ? int(k) : A;
    if (out < 2) throw InvalidParams("derived K fell below 2");
    return out;
}

GeneratedInstance build_hard_instance(const HardInstanceSpec& spec) {
    validate_spec(spec);
    GeneratedInstance inst;
    inst.mdp = hard_family_mdp(spec.S_bandit, spec.H_bandit, spec.A, spec.tau, spec.a_star);

    const int S = spec.total_states(), A = spec.A, H = spec.total_horizon();
    inst.mu = Policy{H, S, A, std::vector<double>(std::size_t(H) * S * A, 0.0)};
    inst.pi_star = Policy{H, S, A, std::vector<double>(std::size_t(H) * S * A, 0.0)};
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) {
            if (s < spec.S_bandit && h < spec.H_bandit) {
                for (int a = 0; a < spec.K; ++a) inst.mu.pi(h, s, a) = 1.0 / spec.K;
                inst.pi_star.pi(h, s, spec.a_star[std::size_t(h) * spec.S_bandit + s]) = 1.0;
            } else {
                inst.mu.pi(h, s, 0) = 1.0;
                inst.pi_star.pi(h, s, 0) = 1.0;
            }
        }
    return inst;
}

TabularMDP null_instance(int S_bandit, int H_bandit, int A) {
    if (S_bandit < 1 || H_bandit < 1 || A < 1) throw InvalidParams("null instance dimensions must be positive");
    return hard_family_mdp(S_bandit, H_bandit, A, 0.0, {});
}

double subopt_formula(const HardInstanceSpec& spec, const Policy& policy) {
    validate_spec(spec);
    validate_policy(policy, spec.total_states(), spec.A, "policy");
    if (policy.steps < spec.H_bandit) throw ShapeMismatch("policy does not cover the bandit steps");
    double total = 0.0;
    const double decay = 1.0 - 1.0 / spec.H_bandit;
    double weight = 1.0 / spec.S_bandit;  // (1/S)(1-1/H)^(h-1)
    for (int h = 0; h < spec.H_bandit; ++h) {
        for (int i = 0; i < spec.S_bandit; ++i) {
            const int played = det_action(policy, h, i);
            if (played < 0) throw NotDeterministic("policy is stochastic at a bandit state");
            if (played != spec.a_star[std::size_t(h) * spec.S_bandit + i]) total += weight * spec.tau;
        }
        weight *= decay;
    }
    return total;
}

long long bandit_loss(const HardInstanceSpec& spec, const Policy& policy) {
    validate_spec(spec);
    validate_policy(policy, spec.total_states(), spec.A, "policy");
    if (policy.steps < spec.H_bandit) throw ShapeMismatch("policy does not cover the bandit steps");
    long long losses = 0;
    for (int h = 0; h < spec.H_bandit; ++h)
        for (int i = 0; i < spec.S_bandit; ++i) {
            const int played = det_action(policy, h, i);
            if (played < 0) throw NotDeterministic("policy is stochastic at a bandit state");
            if (played != spec.a_star[std::size_t(h) * spec.S_bandit + i]) ++losses;
        }
    return losses;
}

GeneratedInstance build_partial_coverage_instance(int S, int A, int H, int h_star, double gap) {
    if (S < 3) throw InvalidParams("need at least 3 states (corridor, good branch, bad branch)");
    if (A < 2) throw InvalidParams("need at least 2 actions");
    if (h_star < 1 || h_star > H - 1) throw InvalidParams("h_star must lie in 1..H-1");
    if (!(gap > 0.0 && gap <= 1.0)) throw InvalidParams("gap must lie in (0,1]");

    const int corridor = 0, good = 1, bad = 2;
    TabularMDP m = TabularMDP::zeros(S, A, H);
    for (int h = 0; h < H; ++h)
        for (int a = 0; a < A; ++a) {
            if (h < h_star) {
                m.p(h, corridor, a, corridor) = 1.0;
                m.r(h, corridor, a) = 0.5;
            } else if (h == h_star) {
                m.p(h, corridor, a, a == 0 ? good : bad) = 1.0;
                m.r(h, corridor, a) = a == 0 ? 1.0 : 1.0 - gap;
            } else {
                m.p(h, corridor, a, corridor) = 1.0;  // unreachable
            }
            m.p(h, good, a, good) = 1.0;
            m.p(h, bad, a, bad) = 1.0;
            if (h > h_star) {
                m.r(h, good, a) = 1.0;
                m.r(h, bad, a) = 1.0 - gap;
            }
            for (int s = 3; s < S; ++s) m.p(h, s, a, s) = 1.0;  // padding
        }
    m.initial[corridor] = 1.0;

    GeneratedInstance inst;
    inst.mdp = std::move(m);
    inst.mu = uniform_policy(H, S, A);
    for (int a = 0; a < A; ++a) inst.mu.pi(h_star, corridor, a) = a == 1 ? 1.0 : 0.0;

    std::vector<int> star_actions(std::size_t(H) * S, 0);
    inst.pi_star = policy_from_actions(H, S, A, star_actions);
    return inst;
}

GeneratedInstance random_covered_instance(int S, int A, int H, std::uint64_t seed) {
    if (S < 1 || A < 1 || H < 1) throw InvalidParams("dimensions must be positive");
    Rng rng(mix_seed({seed, fnv1a64("random_covered_instance")}));
    TabularMDP m = TabularMDP::zeros(S, A, H);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                // Full-support rows: floor keeps every next state reachable.
                double sum = 0.0;
                std::vector<double> row(S);
                for (int s2 = 0; s2 < S; ++s2) {
                    row[s2] = 0.3 + rng.uniform01();
                    sum += row[s2];
                }
                for (int s2 = 0; s2 < S; ++s2) m.p(h, s, a, s2) = row[s2] / sum;
                m.r(h, s, a) = rng.uniform01();
            }
    for (int s = 0; s < S; ++s) m.initial[s] = 1.0 / S;

    GeneratedInstance inst;
    inst.mdp = std::move(m);
    inst.mu = uniform_policy(H, S, A);
    inst.pi_star = dp_optimal(inst.mdp).second;
    return inst;
}

}  // namespace polyfine
