#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyfine/dp.hpp"
#include "polyfine/episodes.hpp"
#include "polyfine/instances.hpp"
#include "polyfine/offline.hpp"

#include "test_util.hpp"

using namespace polyfine;
using testutil::random_mdp;
using testutil::value_row;

namespace {

// Deterministic-transition MDP: s' = (s + a) mod 2, dyadic rewards. Any
// positive visit count pins the empirical model to the true one, so at c = 0
// the pessimistic solvers must reproduce exact dynamic programming.
TabularMDP cyclic_mdp() {
    TabularMDP m = TabularMDP::zeros(2, 2, 2);
    for (int h = 0; h < m.H; ++h)
        for (int s = 0; s < m.S; ++s)
            for (int a = 0; a < m.A; ++a) m.p(h, s, a, (s + a) % 2) = 1.0;
    m.r(0, 0, 0) = 0.25;
    m.r(0, 0, 1) = 0.5;
    m.r(0, 1, 0) = 0.75;
    m.r(0, 1, 1) = 0.125;
    m.r(1, 0, 0) = 1.0;
    m.r(1, 0, 1) = 0.375;
    m.r(1, 1, 0) = 0.0;
    m.r(1, 1, 1) = 0.875;
    m.initial = {0.5, 0.5};
    validate_mdp(m);
    return m;
}

// Every (s0, a0, a1) pattern replicated so each split fold still covers all
// (h, s, a) cells with overwhelming probability at the fixed seeds below.
EpisodeDataset cyclic_dataset(const TabularMDP& m, int replicas) {
    EpisodeDataset data;
    for (int rep = 0; rep < replicas; ++rep)
        for (int s0 = 0; s0 < 2; ++s0)
            for (int a0 = 0; a0 < 2; ++a0)
                for (int a1 = 0; a1 < 2; ++a1) {
                    int s1 = (s0 + a0) % 2;
                    Episode ep;
                    ep.states = {s0, s1};
                    ep.actions = {a0, a1};
                    ep.rewards = {m.r(0, s0, a0), m.r(1, s1, a1)};
                    data.episodes.push_back(ep);
                }
    return data;
}

double initial_value(const TabularMDP& m, const ValueTable& v) {
    double out = 0.0;
    for (int s = 0; s < m.S; ++s) out += m.initial[std::size_t(s)] * v.value(0, s);
    return out;
}

bool same_offline_result(const OfflineResult& a, const OfflineResult& b) {
    return a.policy.probs == b.policy.probs && a.values.v == b.values.v &&
           a.diag.max_bonus == b.diag.max_bonus && a.diag.unvisited == b.diag.unvisited &&
           a.diag.q_above_h == b.diag.q_above_h;
}

OfflineResult solve(const std::string& name, const EpisodeDataset& data, const TabularMDP& m,
                    const OfflineParams& params, std::uint64_t seed) {
    Rng rng(seed);
    return name == "vi-lcb" ? vi_lcb(data, m.S, m.A, m.H, params, rng)
                            : pevi_adv(data, m.S, m.A, m.H, params, rng);
}

}  // namespace

TEST_CASE("offline solvers on an empty dataset return the zero value and action 0 everywhere") {
    EpisodeDataset empty;
    for (double c : {0.0, 0.5, 1.0, 10.0}) {
        OfflineParams params;
        params.c = c;
        for (const char* name : {"vi-lcb", "pevi-adv"}) {
            Rng rng(7);
            OfflineResult res = name == std::string("vi-lcb") ? vi_lcb(empty, 3, 2, 4, params, rng)
                                                              : pevi_adv(empty, 3, 2, 4, params, rng);
            for (double v : res.values.v) CHECK(v == 0.0);
            REQUIRE(res.policy.steps == 4);
            for (int h = 0; h < 4; ++h)
                for (int s = 0; s < 3; ++s) CHECK(det_action(res.policy, h, s) == 0);
        }
    }
}

TEST_CASE("empty-data diagnostics count every pair as unvisited") {
    EpisodeDataset empty;
    OfflineParams params;
    Rng rng(9);
    OfflineResult res = vi_lcb(empty, 3, 2, 4, params, rng);
    REQUIRE(res.diag.unvisited.size() == 4);
    for (long long u : res.diag.unvisited) CHECK(u == 3 * 2);
    CHECK(res.diag.q_above_h == 0);
}

TEST_CASE("with zero bonus and exact empirical models both solvers match dynamic programming") {
    TabularMDP m = cyclic_mdp();
    EpisodeDataset data = cyclic_dataset(m, 64);
    auto [vstar, pistar] = dp_optimal(m);
    OfflineParams params;
    params.c = 0.0;
    for (const char* name : {"vi-lcb", "pevi-adv"}) {
        OfflineResult res = solve(name, data, m, params, 11);
        for (int h = 0; h < m.H; ++h) {
            REQUIRE(res.diag.unvisited[std::size_t(h)] == 0);
            for (int s = 0; s < m.S; ++s) {
                // Dyadic rewards and point-mass empirical transitions: exact.
                CHECK(res.values.value(h, s) == vstar.value(h, s));
                CHECK(det_action(res.policy, h, s) == det_action(pistar, h, s));
            }
        }
    }
}

TEST_CASE("the truncated solver at c = 0 recovers the optimal prefix against pinned optimal tails") {
    TabularMDP m = cyclic_mdp();
    EpisodeDataset data = cyclic_dataset(m, 64);
    auto [vstar, pistar] = dp_optimal(m);
    OfflineParams params;
    params.c = 0.0;
    int h_star = 1;
    Rng rng(13);
    OfflineResult res = truncated_pevi_adv(data, m.S, m.A, m.H, h_star, value_row(vstar, h_star), params, rng);
    REQUIRE(res.policy.steps == h_star);
    for (int s = 0; s < m.S; ++s) {
        CHECK(res.values.value(0, s) == vstar.value(0, s));
        CHECK(res.values.value(h_star, s) == vstar.value(h_star, s));
        CHECK(det_action(res.policy, 0, s) == det_action(pistar, 0, s));
    }
}

TEST_CASE("large samples at zero bonus bring the estimate close to the optimal value") {
    GeneratedInstance gen = random_covered_instance(3, 2, 3, 41);
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    double v1 = initial_value(gen.mdp, vstar);
    Rng rng(17);
    EpisodeDataset data = collect(gen.mdp, gen.mu, 100000, rng);
    OfflineParams params;
    params.c = 0.0;
    for (const char* name : {"vi-lcb", "pevi-adv"}) {
        OfflineResult res = solve(name, data, gen.mdp, params, 19);
        double vhat1 = initial_value(gen.mdp, res.values);
        CHECK(std::fabs(vhat1 - v1) <= 0.05);
    }
}

TEST_CASE("at default bonuses the estimated value lower-bounds the learned policy's true value") {
    GeneratedInstance gen = random_covered_instance(4, 2, 4, 43);
    OfflineParams params;  // c = 1, delta = 0.1
    for (const char* name : {"vi-lcb", "pevi-adv"}) {
        int held = 0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            Rng rng(1000 + std::uint64_t(t));
            EpisodeDataset data = collect(gen.mdp, gen.mu, 512, rng);
            OfflineResult res = solve(name, data, gen.mdp, params, 2000 + std::uint64_t(t));
            ValueTable truth = dp_policy_eval(gen.mdp, res.policy);
            bool ok = true;
            for (int s = 0; s < gen.mdp.S && ok; ++s)
                ok = res.values.value(0, s) <= truth.value(0, s) + 1e-9;
            held += ok;
        }
        CHECK(held >= 90);
    }
}

TEST_CASE("estimated values stay within the horizon range") {
    Rng mrng(23);
    for (int trial = 0; trial < 10; ++trial) {
        TabularMDP m = random_mdp(3, 2, 4, mrng);
        Policy mu = uniform_policy(m.H, m.S, m.A);
        Rng rng(100 + std::uint64_t(trial));
        EpisodeDataset data = collect(m, mu, 64, rng);
        OfflineParams params;
        params.c = trial % 2 == 0 ? 0.05 : 1.0;
        for (const char* name : {"vi-lcb", "pevi-adv"}) {
            OfflineResult res = solve(name, data, m, params, 300 + std::uint64_t(trial));
            for (double v : res.values.v) {
                CHECK(v >= 0.0);
                CHECK(v <= m.H + 1e-9);
            }
        }
    }
}

TEST_CASE("suboptimality medians do not get worse as the dataset grows") {
    GeneratedInstance gen = random_covered_instance(3, 2, 3, 47);
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    double v1 = initial_value(gen.mdp, vstar);
    OfflineParams params;
    params.c = 0.1;
    std::vector<double> medians;
    for (long long n : {1024LL, 4096LL, 16384LL, 65536LL}) {
        std::vector<double> subopts;
        for (int t = 0; t < 15; ++t) {
            Rng rng(5000 + std::uint64_t(t));
            EpisodeDataset data = collect(gen.mdp, gen.mu, n, rng);
            Rng srng(6000 + std::uint64_t(t));
            OfflineResult res = pevi_adv(data, gen.mdp.S, gen.mdp.A, gen.mdp.H, params, srng);
            ValueTable truth = dp_policy_eval(gen.mdp, res.policy);
            subopts.push_back(v1 - initial_value(gen.mdp, truth));
        }
        std::sort(subopts.begin(), subopts.end());
        medians.push_back(subopts[subopts.size() / 2]);
    }
    const double slack = 0.1 * std::max(medians[0], 0.02);
    for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] <= medians[i - 1] + slack);
}

TEST_CASE("solvers are deterministic given the dataset and the seed") {
    GeneratedInstance gen = random_covered_instance(3, 2, 3, 53);
    Rng rng(59);
    EpisodeDataset data = collect(gen.mdp, gen.mu, 200, rng);
    OfflineParams params;
    for (const char* name : {"vi-lcb", "pevi-adv"}) {
        OfflineResult a = solve(name, data, gen.mdp, params, 61);
        OfflineResult b = solve(name, data, gen.mdp, params, 61);
        CHECK(same_offline_result(a, b));
    }
}

TEST_CASE("the truncated solver with full horizon and zero tail is identical to the base solver") {
    GeneratedInstance gen = random_covered_instance(3, 2, 4, 67);
    Rng rng(71);
    EpisodeDataset data = collect(gen.mdp, gen.mu, 300, rng);
    OfflineParams params;
    Rng r1(73), r2(73);
    OfflineResult base = pevi_adv(data, gen.mdp.S, gen.mdp.A, gen.mdp.H, params, r1);
    std::vector<double> zero_tail(std::size_t(gen.mdp.S), 0.0);
    OfflineResult trunc =
        truncated_pevi_adv(data, gen.mdp.S, gen.mdp.A, gen.mdp.H, gen.mdp.H, zero_tail, params, r2);
    CHECK(same_offline_result(base, trunc));
}

TEST_CASE("a zero-reward prefix pins the truncated estimates at zero") {
    TabularMDP m = cyclic_mdp();
    std::fill(m.rewards.begin(), m.rewards.end(), 0.0);
    EpisodeDataset data = cyclic_dataset(m, 8);
    std::vector<double> zero_tail(std::size_t(m.S), 0.0);
    for (double c : {0.0, 1.0}) {
        OfflineParams params;
        params.c = c;
        Rng rng(79);
        OfflineResult res = truncated_pevi_adv(data, m.S, m.A, m.H, 1, zero_tail, params, rng);
        for (double v : res.values.v) CHECK(v == 0.0);
        // Ties only at zero bonus; with c > 0 the argmax follows the smaller
        // penalty, which depends on the fold split.
        if (c == 0.0)
            for (int s = 0; s < m.S; ++s) CHECK(det_action(res.policy, 0, s) == 0);
    }
}

TEST_CASE("parameter validation rejects out-of-range inputs") {
    EpisodeDataset empty;
    Rng rng(83);
    OfflineParams bad_c;
    bad_c.c = -0.5;
    CHECK_THROWS_AS(vi_lcb(empty, 2, 2, 2, bad_c, rng), InvalidParams);
    OfflineParams bad_delta;
    bad_delta.delta = 0.0;
    CHECK_THROWS_AS(vi_lcb(empty, 2, 2, 2, bad_delta, rng), InvalidParams);
    bad_delta.delta = 1.0;
    CHECK_THROWS_AS(pevi_adv(empty, 2, 2, 2, bad_delta, rng), InvalidParams);

    OfflineParams params;
    std::vector<double> tail(2, 0.0);
    CHECK_THROWS_AS(truncated_pevi_adv(empty, 2, 2, 2, 0, tail, params, rng), InvalidParams);
    CHECK_THROWS_AS(truncated_pevi_adv(empty, 2, 2, 2, 3, tail, params, rng), InvalidParams);
    std::vector<double> short_tail(1, 0.0);
    CHECK_THROWS_AS(truncated_pevi_adv(empty, 2, 2, 2, 1, short_tail, params, rng), ShapeMismatch);
    std::vector<double> high_tail(2, 3.5);
    CHECK_THROWS_AS(truncated_pevi_adv(empty, 2, 2, 2, 1, high_tail, params, rng), InvalidParams);
    std::vector<double> negative_tail(2, -0.1);
    CHECK_THROWS_AS(truncated_pevi_adv(empty, 2, 2, 2, 1, negative_tail, params, rng), InvalidParams);
}
