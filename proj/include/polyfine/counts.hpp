#pragma once

#include <vector>

#include "polyfine/episodes.hpp"

namespace polyfine {

// Visitation counts and empirical model for a single time step.
// P_hat rows are N(s,a,s')/N(s,a) where visited and all-zero otherwise;
// r_hat is the observed (deterministic) reward, zero where unvisited.
// At the final step successors are not recorded, so N_sas and P_hat stay
// zero there; no consumer reads them (the continuation value is zero).
struct CountsModel {
    int h = 0;
    int S = 0;
    int A = 0;
    std::vector<long long> n_sa;   // [s][a]
    std::vector<long long> n_sas;  // [s][a][s']
    std::vector<double> p_hat;     // [s][a][s']
    std::vector<double> r_hat;     // [s][a]

    long long visits(int s, int a) const { return n_sa[std::size_t(s) * A + a]; }
};

// Seeded-permutation split into num_folds disjoint folds whose sizes differ
// by at most one, remainder going to the earliest folds.
std::vector<EpisodeDataset> split_vilcb(const EpisodeDataset& data, int num_folds, Rng& rng);

struct PeviSplit {
    EpisodeDataset ref;               // floor(n/3) episodes plus the remainder
    EpisodeDataset d0;                // floor(n/3) episodes
    std::vector<EpisodeDataset> d1;   // the last third, split into num_folds folds
};

PeviSplit split_pevi(const EpisodeDataset& data, int num_folds, Rng& rng);

CountsModel estimate_step(const EpisodeDataset& data, int h, int S, int A);

// [P_hat V](s,a); zero where unvisited.
std::vector<double> apply_phat(const CountsModel& model, const std::vector<double>& v_next);

// Plug-in conditional variance [P_hat V^2](s,a) - ([P_hat V](s,a))^2,
// clamped below at zero; zero where unvisited.
std::vector<double> empirical_variance(const CountsModel& model, const std::vector<double>& v_next);

}  // namespace polyfine
