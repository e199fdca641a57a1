#include "polyfine/mdp.hpp"

#include <cmath>
#include <cstdio>

namespace polyfine {

namespace {

std::string idx3(int h, int s, int a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(h=%d,s=%d,a=%d)", h, s, a);
    return buf;
}

// Returns false unless row is a probability vector of length n.
bool probability_row(const double* row, int n, double& sum_out) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(row[i] >= 0.0)) return false;  // catches negatives and NaN
        sum += row[i];
    }
    sum_out = sum;
    return std::fabs(sum - 1.0) <= kProbTol;
}

}  // namespace

TabularMDP TabularMDP::zeros(int S, int A, int H) {
    TabularMDP m;
    m.S = S;
    m.A = A;
    m.H = H;
    m.transitions.assign(std::size_t(H) * S * A * S, 0.0);
    m.rewards.assign(std::size_t(H) * S * A, 0.0);
    m.initial.assign(std::size_t(S), 0.0);
    return m;
}

ValueTable ValueTable::zeros(int H, int S, int A) {
    ValueTable t;
    t.H = H;
    t.S = S;
    t.A = A;
    t.v.assign(std::size_t(H + 1) * S, 0.0);
    t.q.assign(std::size_t(H + 1) * S * A, 0.0);
    return t;
}

void validate_mdp(const TabularMDP& mdp) {
    if (mdp.S <= 0 || mdp.A <= 0 || mdp.H <= 0)
        throw InvalidModel("dimensions must be positive, got S=" + std::to_string(mdp.S) +
                           " A=" + std::to_string(mdp.A) + " H=" + std::to_string(mdp.H));
    if (mdp.transitions.size() != std::size_t(mdp.H) * mdp.S * mdp.A * mdp.S)
        throw InvalidModel("transitions array has wrong length");
    if (mdp.rewards.size() != std::size_t(mdp.H) * mdp.S * mdp.A)
        throw InvalidModel("rewards array has wrong length");
    if (mdp.initial.size() != std::size_t(mdp.S))
        throw InvalidModel("initial distribution has wrong length");

    for (int h = 0; h < mdp.H; ++h)
        for (int s = 0; s < mdp.S; ++s)
            for (int a = 0; a < mdp.A; ++a) {
                double sum = 0.0;
                const double* row = &mdp.transitions[((std::size_t(h) * mdp.S + s) * mdp.A + a) * mdp.S];
                if (!probability_row(row, mdp.S, sum))
                    throw InvalidModel("transition row at " + idx3(h, s, a) + " is not a probability vector (sum=" +
                                       std::to_string(sum) + ")");
                const double rew = mdp.r(h, s, a);
                if (!(rew >= 0.0 && rew <= 1.0))
                    throw InvalidModel("reward at " + idx3(h, s, a) + " outside [0,1]: " + std::to_string(rew));
            }

    double isum = 0.0;
    if (!probability_row(mdp.initial.data(), mdp.S, isum))
        throw InvalidModel("initial distribution is not a probability vector (sum=" + std::to_string(isum) + ")");
}

void validate_policy(const Policy& policy, int S, int A, const std::string& what) {
    if (policy.S != S || policy.A != A)
        throw ShapeMismatch(what + " has shape (S=" + std::to_string(policy.S) + ",A=" + std::to_string(policy.A) +
                            "), expected (S=" + std::to_string(S) + ",A=" + std::to_string(A) + ")");
    if (policy.probs.size() != std::size_t(policy.steps) * S * A)
        throw ShapeMismatch(what + " probs array has wrong length");
    for (int h = 0; h < policy.steps; ++h)
        for (int s = 0; s < S; ++s) {
            double sum = 0.0;
            const double* row = &policy.probs[(std::size_t(h) * S + s) * A];
            if (!probability_row(row, A, sum))
                throw InvalidModel(what + " row at (h=" + std::to_string(h) + ",s=" + std::to_string(s) +
                                   ") is not a probability vector (sum=" + std::to_string(sum) + ")");
        }
}

void validate_mixture(const MixturePolicy& mix) {
    if (mix.h_anchor < 1 || mix.h_anchor > mix.H + 1)
        throw ShapeMismatch("mixture anchor step " + std::to_string(mix.h_anchor) + " outside 1.." +
                            std::to_string(mix.H + 1));
    if (int(mix.comps.size()) != mix.S) throw ShapeMismatch("mixture must list components per anchor state");
    const int suffix_steps = mix.H - mix.h_anchor + 1;
    for (int s = 0; s < mix.S; ++s) {
        if (mix.comps[s].empty()) continue;  // uncovered anchor state, implies uniform
        double wsum = 0.0;
        for (const MixtureComponent& c : mix.comps[s]) {
            if (!(c.weight >= 0.0)) throw InvalidModel("mixture weight negative at anchor state " + std::to_string(s));
            wsum += c.weight;
            if (c.suffix.steps != suffix_steps)
                throw ShapeMismatch("mixture component at anchor state " + std::to_string(s) + " covers " +
                                    std::to_string(c.suffix.steps) + " steps, expected " +
                                    std::to_string(suffix_steps));
            validate_policy(c.suffix, mix.S, mix.A, "mixture component");
        }
        if (std::fabs(wsum - 1.0) > kProbTol)
            throw InvalidModel("mixture weights at anchor state " + std::to_string(s) + " sum to " +
                               std::to_string(wsum));
    }
}

Policy uniform_policy(int steps, int S, int A) {
    Policy p;
    p.steps = steps;
    p.S = S;
    p.A = A;
    p.probs.assign(std::size_t(steps) * S * A, 1.0 / A);
    return p;
}

Policy policy_from_actions(int steps, int S, int A, const std::vector<int>& actions) {
    if (actions.size() != std::size_t(steps) * S) throw ShapeMismatch("action table has wrong length");
    Policy p;
    p.steps = steps;
    p.S = S;
    p.A = A;
    p.probs.assign(std::size_t(steps) * S * A, 0.0);
    for (int h = 0; h < steps; ++h)
        for (int s = 0; s < S; ++s) {
            const int a = actions[std::size_t(h) * S + s];
            if (a < 0 || a >= A) throw InvalidParams("action index out of range in action table");
            p.pi(h, s, a) = 1.0;
        }
    return p;
}

int det_action(const Policy& policy, int h, int s) {
    for (int a = 0; a < policy.A; ++a)
        if (policy.pi(h, s, a) >= 1.0 - kProbTol) return a;
    return -1;
}

bool is_deterministic(const Policy& policy) {
    for (int h = 0; h < policy.steps; ++h)
        for (int s = 0; s < policy.S; ++s)
            if (det_action(policy, h, s) < 0) return false;
    return true;
}

}  // namespace polyfine
