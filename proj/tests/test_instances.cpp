#include <doctest.h>

#include <cmath>
#include <vector>

#include "polyfine/dp.hpp"
#include "polyfine/instances.hpp"

#include "test_util.hpp"

using namespace polyfine;

namespace {

double initial_value(const TabularMDP& m, const ValueTable& v) {
    double out = 0.0;
    for (int s = 0; s < m.S; ++s) out += m.initial[std::size_t(s)] * v.value(0, s);
    return out;
}

// Grow-or-leak recursion for the bandit family: H steps of holding with
// probability 1-1/H, the special arm tilting the leak by tau, then a half
// split and H absorbing reward steps.
double bandit_optimal_value(int H_bandit, double tau) {
    double rho = std::pow(1.0 - 1.0 / H_bandit, H_bandit);
    return H_bandit * ((0.5 + tau) * (1.0 - rho) + 0.5 * rho);
}

HardInstanceSpec demo_spec() {
    HardInstanceSpec spec;
    spec.S_bandit = 2;
    spec.H_bandit = 3;
    spec.A = 4;
    spec.K = 3;
    spec.tau = 0.2;
    spec.a_star = {2, 0, 1, 2, 0, 1};
    return spec;
}

}  // namespace

TEST_CASE("the bandit family has the advertised shape and behavior policy") {
    HardInstanceSpec spec = demo_spec();
    GeneratedInstance gen = build_hard_instance(spec);
    CHECK(gen.mdp.S == spec.S_bandit + 2);
    CHECK(gen.mdp.A == spec.A);
    CHECK(gen.mdp.H == 2 * spec.H_bandit + 1);
    validate_mdp(gen.mdp);
    REQUIRE(gen.mu.steps == gen.mdp.H);
    for (int h = 0; h < gen.mdp.H; ++h)
        for (int s = 0; s < gen.mdp.S; ++s) {
            bool bandit_cell = h < spec.H_bandit && s < spec.S_bandit;
            for (int a = 0; a < spec.A; ++a) {
                double expect = bandit_cell ? (a < spec.K ? 1.0 / spec.K : 0.0) : (a == 0 ? 1.0 : 0.0);
                CHECK(gen.mu.pi(h, s, a) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    // The planted policy plays the special arms on bandit cells.
    for (int h = 0; h < spec.H_bandit; ++h)
        for (int i = 0; i < spec.S_bandit; ++i)
            CHECK(det_action(gen.pi_star, h, i) == spec.a_star[std::size_t(h) * spec.S_bandit + i]);
}

TEST_CASE("the optimal bandit-family value matches the grow-or-leak closed form") {
    HardInstanceSpec spec = demo_spec();
    GeneratedInstance gen = build_hard_instance(spec);
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    CHECK(initial_value(gen.mdp, vstar) == doctest::Approx(bandit_optimal_value(3, 0.2)).epsilon(1e-9));
    // The planted policy attains it.
    ValueTable planted = dp_policy_eval(gen.mdp, gen.pi_star);
    CHECK(initial_value(gen.mdp, planted) == doctest::Approx(initial_value(gen.mdp, vstar)).epsilon(1e-12));
}

TEST_CASE("the suboptimality formula agrees with exact evaluation on deterministic policies") {
    HardInstanceSpec spec = demo_spec();
    GeneratedInstance gen = build_hard_instance(spec);
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    double v1 = initial_value(gen.mdp, vstar);
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<int> actions(std::size_t(gen.mdp.H) * gen.mdp.S, 0);
        for (int h = 0; h < gen.mdp.H; ++h)
            for (int s = 0; s < gen.mdp.S; ++s)
                actions[std::size_t(h) * gen.mdp.S + s] = rng.uniform_int(spec.K);
        Policy pol = policy_from_actions(gen.mdp.H, gen.mdp.S, gen.mdp.A, actions);
        double via_dp = v1 - initial_value(gen.mdp, dp_policy_eval(gen.mdp, pol));
        CHECK(subopt_formula(spec, pol) == doctest::Approx(via_dp).epsilon(1e-12));
    }
}

TEST_CASE("missing every special arm costs the frozen reference amount") {
    HardInstanceSpec spec;
    spec.S_bandit = 1;
    spec.H_bandit = 2;
    spec.A = 2;
    spec.K = 2;
    spec.tau = 0.25;
    spec.a_star = {1, 0};
    GeneratedInstance gen = build_hard_instance(spec);
    std::vector<int> wrong(std::size_t(gen.mdp.H) * gen.mdp.S, 0);
    for (int h = 0; h < spec.H_bandit; ++h) wrong[std::size_t(h) * gen.mdp.S] = 1 - spec.a_star[std::size_t(h)];
    Policy pol = policy_from_actions(gen.mdp.H, gen.mdp.S, gen.mdp.A, wrong);
    CHECK(subopt_formula(spec, pol) == doctest::Approx(0.375).epsilon(1e-12));
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    double via_dp = initial_value(gen.mdp, vstar) - initial_value(gen.mdp, dp_policy_eval(gen.mdp, pol));
    CHECK(via_dp == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(bandit_loss(spec, pol) == 2);
    CHECK(bandit_loss(spec, gen.pi_star) == 0);
}

TEST_CASE("the null instance is worth exactly half the bandit horizon") {
    TabularMDP m = null_instance(2, 3, 2);
    validate_mdp(m);
    auto [vstar, pistar] = dp_optimal(m);
    (void)pistar;
    CHECK(initial_value(m, vstar) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("arm counts derived from a concentrability target") {
    CHECK(k_from_cstar(3.7, 10) == 3);
    CHECK(k_from_cstar(7.0, 4) == 4);
    CHECK(k_from_cstar(2.0, 5) == 2);
    CHECK(k_from_cstar(10.0, 3) == 3);
    CHECK_THROWS_AS(k_from_cstar(1.5, 5), InvalidParams);
}

TEST_CASE("special arms drawn from a seed are reproducible and in range") {
    HardInstanceSpec spec = demo_spec();
    spec.a_star.clear();
    Rng r1(17), r2(17);
    HardInstanceSpec a = draw_a_star(spec, r1);
    HardInstanceSpec b = draw_a_star(spec, r2);
    REQUIRE(a.a_star.size() == 6);
    CHECK(a.a_star == b.a_star);
    for (int arm : a.a_star) {
        CHECK(arm >= 0);
        CHECK(arm < spec.K);
    }
    validate_spec(a);
}

TEST_CASE("bandit-family specs are validated") {
    auto broken = [](auto mutate) {
        HardInstanceSpec spec;
        spec.S_bandit = 2;
        spec.H_bandit = 2;
        spec.A = 3;
        spec.K = 2;
        spec.tau = 0.1;
        spec.a_star = {0, 1, 1, 0};
        mutate(spec);
        return spec;
    };
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.K = 4; })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.K = 1; })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.tau = 0.34; })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.tau = -0.01; })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.a_star.pop_back(); })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.a_star[0] = 2; })), InvalidParams);
    CHECK_THROWS_AS(validate_spec(broken([](HardInstanceSpec& s) { s.S_bandit = 0; })), InvalidParams);
    validate_spec(broken([](HardInstanceSpec&) {}));
}

TEST_CASE("the coverage-splitting family has its designed values and concentrability") {
    const int S = 5, A = 3, H = 6, h_star = 2;
    const double gap = 0.25;
    GeneratedInstance gen = build_partial_coverage_instance(S, A, H, h_star, gap);
    validate_mdp(gen.mdp);
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    double v1 = initial_value(gen.mdp, vstar);
    CHECK(v1 == doctest::Approx(0.5 * h_star + (H - h_star)).epsilon(1e-12));
    double vmu = initial_value(gen.mdp, dp_policy_eval(gen.mdp, gen.mu));
    CHECK(v1 - vmu == doctest::Approx(gap * (H - h_star)).epsilon(1e-12));
    CHECK(concentrability(gen.mdp, gen.mu, gen.pi_star, h_star) == doctest::Approx(double(A)).epsilon(1e-12));
    CHECK(std::isinf(concentrability(gen.mdp, gen.mu, gen.pi_star, h_star + 1)));
    // Padding states beyond corridor/good/bad are never reached.
    VisitationTable d = visitation(gen.mdp, gen.mu);
    for (int h = 0; h < H; ++h)
        for (int s = 3; s < S; ++s) CHECK(d.state(h, s) == 0.0);
}

TEST_CASE("coverage-splitting parameters are validated") {
    CHECK_THROWS_AS(build_partial_coverage_instance(2, 2, 4, 1, 0.5), InvalidParams);
    CHECK_THROWS_AS(build_partial_coverage_instance(3, 1, 4, 1, 0.5), InvalidParams);
    CHECK_THROWS_AS(build_partial_coverage_instance(3, 2, 4, 0, 0.5), InvalidParams);
    CHECK_THROWS_AS(build_partial_coverage_instance(3, 2, 4, 4, 0.5), InvalidParams);
    CHECK_THROWS_AS(build_partial_coverage_instance(3, 2, 4, 1, 0.0), InvalidParams);
    CHECK_THROWS_AS(build_partial_coverage_instance(3, 2, 4, 1, 1.5), InvalidParams);
}

TEST_CASE("the dense random family is fully covered and comes with its optimal policy") {
    GeneratedInstance gen = random_covered_instance(4, 3, 5, 99);
    validate_mdp(gen.mdp);
    for (double p : gen.mdp.transitions) CHECK(p > 0.0);
    for (double p : gen.mdp.initial) CHECK(p > 0.0);
    for (double p : gen.mu.probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    REQUIRE(is_deterministic(gen.pi_star));
    auto [vstar, pistar] = dp_optimal(gen.mdp);
    (void)pistar;
    ValueTable planted = dp_policy_eval(gen.mdp, gen.pi_star);
    for (int s = 0; s < gen.mdp.S; ++s)
        CHECK(planted.value(0, s) == doctest::Approx(vstar.value(0, s)).epsilon(1e-12));
    double c = concentrability(gen.mdp, gen.mu, gen.pi_star, gen.mdp.H);
    CHECK(std::isfinite(c));
    CHECK(c >= 1.0 - 1e-12);
    // Distinct seeds give distinct models.
    GeneratedInstance other = random_covered_instance(4, 3, 5, 100);
    CHECK(gen.mdp.transitions != other.mdp.transitions);
}
