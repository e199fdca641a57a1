#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyfine/mdp.hpp"
#include "polyfine/rng.hpp"

namespace polyfine {

// One full-horizon trajectory. All three arrays have length H; the successor
// of the final step is not recorded (nothing consumes it, the value beyond
// the horizon is identically zero).
struct Episode {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
};

struct EpisodeDataset {
    std::vector<Episode> episodes;
    std::string behavior_tag;
    std::uint64_t seed = 0;

    std::size_t size() const { return episodes.size(); }
};

Episode sample_episode(const TabularMDP& mdp, const Policy& policy, Rng& rng);

// Counting wrapper around episode generation. Every environment interaction
// in the harness goes through one of these so episode budgets are
// machine-checked; cap < 0 means unlimited.
class EpisodeSampler {
  public:
    explicit EpisodeSampler(const TabularMDP& mdp, long long cap = -1) : mdp_(mdp), cap_(cap) {}

    Episode sample(const Policy& policy, Rng& rng) {
        if (cap_ >= 0 && used_ >= cap_)
            throw BudgetExceeded("episode budget exhausted (cap " + std::to_string(cap_) + ")");
        ++used_;
        return sample_episode(mdp_, policy, rng);
    }

    const TabularMDP& mdp() const { return mdp_; }
    long long used() const { return used_; }
    long long cap() const { return cap_; }

  private:
    const TabularMDP& mdp_;
    long long cap_;
    long long used_ = 0;
};

EpisodeDataset collect(EpisodeSampler& env, const Policy& policy, long long n, Rng& rng,
                       const std::string& behavior_tag = "", std::uint64_t seed_tag = 0);

EpisodeDataset collect(const TabularMDP& mdp, const Policy& policy, long long n, Rng& rng,
                       const std::string& behavior_tag = "", std::uint64_t seed_tag = 0);

}  // namespace polyfine
