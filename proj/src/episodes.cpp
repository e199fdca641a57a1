#include "polyfine/episodes.hpp"

namespace polyfine {

Episode sample_episode(const TabularMDP& mdp, const Policy& policy, Rng& rng) {
    validate_policy(policy, mdp.S, mdp.A, "policy");
    if (policy.steps < mdp.H)
        throw ShapeMismatch("policy covers " + std::to_string(policy.steps) + " steps, horizon is " +
                            std::to_string(mdp.H));
    Episode ep;
    ep.states.reserve(mdp.H);
    ep.actions.reserve(mdp.H);
    ep.rewards.reserve(mdp.H);

    int s = rng.categorical(mdp.initial);
    for (int h = 0; h < mdp.H; ++h) {
        const int a = rng.categorical(&policy.probs[(std::size_t(h) * mdp.S + s) * mdp.A], mdp.A);
        ep.states.push_back(s);
        ep.actions.push_back(a);
        ep.rewards.push_back(mdp.r(h, s, a));
        if (h + 1 < mdp.H)
            s = rng.categorical(&mdp.transitions[((std::size_t(h) * mdp.S + s) * mdp.A + a) * mdp.S], mdp.S);
    }
    return ep;
}

EpisodeDataset collect(EpisodeSampler& env, const Policy& policy, long long n, Rng& rng,
                       const std::string& behavior_tag, std::uint64_t seed_tag) {
    if (n < 0) throw InvalidParams("episode count must be nonnegative");
    EpisodeDataset data;
    data.behavior_tag = behavior_tag;
    data.seed = seed_tag;
    data.episodes.reserve(std::size_t(n));
    for (long long i = 0; i < n; ++i) data.episodes.push_back(env.sample(policy, rng));
    return data;
}

EpisodeDataset collect(const TabularMDP& mdp, const Policy& policy, long long n, Rng& rng,
                       const std::string& behavior_tag, std::uint64_t seed_tag) {
    EpisodeSampler env(mdp);
    return collect(env, policy, n, rng, behavior_tag, seed_tag);
}

}  // namespace polyfine
