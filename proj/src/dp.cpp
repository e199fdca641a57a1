#include "polyfine/dp.hpp"

#include <cmath>
#include <limits>

namespace polyfine {

namespace {

void check_policy_covers(const TabularMDP& mdp, const Policy& policy, int steps, const char* what) {
    validate_policy(policy, mdp.S, mdp.A, what);
    if (policy.steps < steps)
        throw ShapeMismatch(std::string(what) + " covers " + std::to_string(policy.steps) + " steps, need " +
                            std::to_string(steps));
}

}  // namespace

ValueTable dp_policy_eval(const TabularMDP& mdp, const Policy& policy) {
    check_policy_covers(mdp, policy, mdp.H, "policy");
    ValueTable t = ValueTable::zeros(mdp.H, mdp.S, mdp.A);
    for (int h = mdp.H - 1; h >= 0; --h)
        for (int s = 0; s < mdp.S; ++s) {
            double v = 0.0;
            for (int a = 0; a < mdp.A; ++a) {
                double q = mdp.r(h, s, a);
                for (int s2 = 0; s2 < mdp.S; ++s2) q += mdp.p(h, s, a, s2) * t.value(h + 1, s2);
                t.qvalue(h, s, a) = q;
                v += policy.pi(h, s, a) * q;
            }
            t.value(h, s) = v;
        }
    return t;
}

std::pair<ValueTable, Policy> dp_optimal(const TabularMDP& mdp) {
    validate_mdp(mdp);
    ValueTable t = ValueTable::zeros(mdp.H, mdp.S, mdp.A);
    std::vector<int> actions(std::size_t(mdp.H) * mdp.S, 0);
    for (int h = mdp.H - 1; h >= 0; --h)
        for (int s = 0; s < mdp.S; ++s) {
            int best = 0;
            double best_q = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.A; ++a) {
                double q = mdp.r(h, s, a);
                for (int s2 = 0; s2 < mdp.S; ++s2) q += mdp.p(h, s, a, s2) * t.value(h + 1, s2);
                t.qvalue(h, s, a) = q;
                if (q > best_q) {  // strict, keeps the smallest index on ties
                    best_q = q;
                    best = a;
                }
            }
            t.value(h, s) = best_q;
            actions[std::size_t(h) * mdp.S + s] = best;
        }
    return {std::move(t), policy_from_actions(mdp.H, mdp.S, mdp.A, actions)};
}

VisitationTable visitation(const TabularMDP& mdp, const Policy& policy) {
    check_policy_covers(mdp, policy, mdp.H, "policy");
    VisitationTable vt;
    vt.H = mdp.H;
    vt.S = mdp.S;
    vt.A = mdp.A;
    vt.d_state.assign(std::size_t(mdp.H) * mdp.S, 0.0);
    vt.d_state_action.assign(std::size_t(mdp.H) * mdp.S * mdp.A, 0.0);

    for (int s = 0; s < mdp.S; ++s) vt.d_state[s] = mdp.initial[s];
    for (int h = 0; h < mdp.H; ++h) {
        for (int s = 0; s < mdp.S; ++s) {
            const double ds = vt.d_state[std::size_t(h) * mdp.S + s];
            for (int a = 0; a < mdp.A; ++a)
                vt.d_state_action[(std::size_t(h) * mdp.S + s) * mdp.A + a] = ds * policy.pi(h, s, a);
        }
        if (h + 1 >= mdp.H) break;
        double* next = &vt.d_state[std::size_t(h + 1) * mdp.S];
        for (int s = 0; s < mdp.S; ++s) {
            const double ds = vt.d_state[std::size_t(h) * mdp.S + s];
            if (ds == 0.0) continue;
            for (int a = 0; a < mdp.A; ++a) {
                const double dsa = ds * policy.pi(h, s, a);
                if (dsa == 0.0) continue;
                for (int s2 = 0; s2 < mdp.S; ++s2) next[s2] += dsa * mdp.p(h, s, a, s2);
            }
        }
    }
    return vt;
}

double concentrability(const TabularMDP& mdp, const Policy& mu, const Policy& pi_star, int h_max) {
    if (h_max < 1 || h_max > mdp.H)
        throw InvalidParams("h_max " + std::to_string(h_max) + " outside 1.." + std::to_string(mdp.H));
    check_policy_covers(mdp, pi_star, mdp.H, "pi_star");
    if (!is_deterministic(pi_star)) throw NotDeterministic("pi_star must be deterministic");
    const VisitationTable d_star = visitation(mdp, pi_star);
    const VisitationTable d_mu = visitation(mdp, mu);

    double worst = 0.0;
    for (int h = 0; h < h_max; ++h)
        for (int s = 0; s < mdp.S; ++s)
            for (int a = 0; a < mdp.A; ++a) {
                const double num = d_star.state_action(h, s, a);
                if (num == 0.0) continue;  // 0/0 contributes 0
                const double den = d_mu.state_action(h, s, a);
                if (den == 0.0) return std::numeric_limits<double>::infinity();
                const double ratio = num / den;
                if (ratio > worst) worst = ratio;
            }
    return worst;
}

double expected_initial(const TabularMDP& mdp, const std::vector<double>& v_row) {
    if (v_row.size() != std::size_t(mdp.S)) throw ShapeMismatch("value row length does not match S");
    double out = 0.0;
    for (int s = 0; s < mdp.S; ++s) out += mdp.initial[s] * v_row[s];
    return out;
}

std::vector<double> eval_suffix(const TabularMDP& mdp, const Policy& suffix, int h_anchor) {
    if (h_anchor < 1 || h_anchor > mdp.H + 1)
        throw ShapeMismatch("anchor step " + std::to_string(h_anchor) + " outside 1.." + std::to_string(mdp.H + 1));
    const int steps = mdp.H - h_anchor + 1;
    if (steps == 0) return std::vector<double>(mdp.S, 0.0);
    check_policy_covers(mdp, suffix, steps, "suffix policy");

    std::vector<double> v(mdp.S, 0.0), next(mdp.S, 0.0);
    for (int h = mdp.H - 1; h >= h_anchor - 1; --h) {
        const int hs = h - (h_anchor - 1);  // suffix-local step
        for (int s = 0; s < mdp.S; ++s) {
            double vs = 0.0;
            for (int a = 0; a < mdp.A; ++a) {
                const double w = suffix.pi(hs, s, a);
                if (w == 0.0) continue;
                double q = mdp.r(h, s, a);
                for (int s2 = 0; s2 < mdp.S; ++s2) q += mdp.p(h, s, a, s2) * next[s2];
                vs += w * q;
            }
            v[s] = vs;
        }
        next = v;
    }
    return v;
}

std::vector<double> eval_mixture(const TabularMDP& mdp, const MixturePolicy& mix) {
    if (mix.S != mdp.S || mix.A != mdp.A || mix.H != mdp.H)
        throw ShapeMismatch("mixture dimensions do not match the MDP");
    validate_mixture(mix);

    std::vector<double> out(mdp.S, 0.0);
    std::vector<double> uniform_vals;
    for (int s = 0; s < mdp.S; ++s) {
        if (mix.comps[s].empty()) {
            if (uniform_vals.empty()) {
                const int steps = mdp.H - mix.h_anchor + 1;
                uniform_vals = eval_suffix(mdp, uniform_policy(steps, mdp.S, mdp.A), mix.h_anchor);
            }
            out[s] = uniform_vals[s];
            continue;
        }
        double acc = 0.0;
        for (const MixtureComponent& c : mix.comps[s]) {
            if (c.weight == 0.0) continue;
            acc += c.weight * eval_suffix(mdp, c.suffix, mix.h_anchor)[s];
        }
        out[s] = acc;
    }
    return out;
}

std::vector<double> eval_mixture(const TabularMDP& mdp, const Policy& prefix, const MixturePolicy& mix) {
    check_policy_covers(mdp, prefix, mix.h_anchor - 1, "prefix policy");
    return eval_mixture(mdp, mix);
}

double eval_concatenated(const TabularMDP& mdp, const Policy& prefix, const MixturePolicy& mix) {
    if (mix.S != mdp.S || mix.A != mdp.A || mix.H != mdp.H)
        throw ShapeMismatch("mixture dimensions do not match the MDP");
    const int prefix_steps = mix.h_anchor - 1;
    check_policy_covers(mdp, prefix, prefix_steps, "prefix policy");

    // Forward pass under the prefix, accumulating expected reward.
    std::vector<double> d(mdp.initial);
    double prefix_reward = 0.0;
    for (int h = 0; h < prefix_steps; ++h) {
        std::vector<double> next(mdp.S, 0.0);
        for (int s = 0; s < mdp.S; ++s) {
            if (d[s] == 0.0) continue;
            for (int a = 0; a < mdp.A; ++a) {
                const double dsa = d[s] * prefix.pi(h, s, a);
                if (dsa == 0.0) continue;
                prefix_reward += dsa * mdp.r(h, s, a);
                for (int s2 = 0; s2 < mdp.S; ++s2) next[s2] += dsa * mdp.p(h, s, a, s2);
            }
        }
        d.swap(next);
    }

    const std::vector<double> tail = eval_mixture(mdp, mix);
    double out = prefix_reward;
    for (int s = 0; s < mdp.S; ++s) out += d[s] * tail[s];
    return out;
}

}  // namespace polyfine
