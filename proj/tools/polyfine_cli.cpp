// Command-line front end. Everything goes through the C API in polyfine.h;
// exit codes: 0 success, 2 bad configuration/usage, 3 IO or parse failure,
// 4 solver failure.

#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "polyfine.h"

namespace {

struct MdpDel {
    void operator()(pf_mdp* p) const { pf_mdp_free(p); }
};
struct PolicyDel {
    void operator()(pf_policy* p) const { pf_policy_free(p); }
};
struct ValuesDel {
    void operator()(pf_values* p) const { pf_values_free(p); }
};
using MdpPtr = std::unique_ptr<pf_mdp, MdpDel>;
using PolicyPtr = std::unique_ptr<pf_policy, PolicyDel>;
using ValuesPtr = std::unique_ptr<pf_values, ValuesDel>;

int exit_code(pf_status status) {
    switch (status) {
        case PF_OK:
            return 0;
        case PF_ERR_CONFIG:
        case PF_ERR_INVALID_PARAMS:
        case PF_ERR_INVALID_ARG:
            return 2;
        case PF_ERR_IO:
        case PF_ERR_PARSE:
        case PF_ERR_INVALID_MODEL:
        case PF_ERR_SHAPE_MISMATCH:
            return 3;
        default:
            return 4;
    }
}

int report(pf_status status) {
    if (status == PF_OK) return 0;
    std::fprintf(stderr, "error: %s (%s)\n", pf_last_error(), pf_status_name(status));
    return exit_code(status);
}

int usage_error(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 2;
}

struct GenArgs {
    std::string family;
    std::string out, mu_out, pistar_out;
    int s_bandit = 0, h_bandit = 0, actions = 0, k = 0;
    double cstar = 0.0, tau = 0.0, gap = 0.0;
    int states = 0, horizon = 0, h_star = 0;
    std::uint64_t seed = 0;
    bool has_k = false, has_cstar = false;
};

int run_gen_instance(const GenArgs& a) {
    MdpPtr mdp;
    PolicyPtr mu, pistar;
    pf_mdp* mdp_raw = nullptr;
    pf_policy* mu_raw = nullptr;
    pf_policy* pistar_raw = nullptr;
    const bool want_mu = !a.mu_out.empty();
    const bool want_pistar = !a.pistar_out.empty();

    if (a.family == "hard") {
        int k = a.k;
        if (a.has_k == a.has_cstar) return usage_error("family hard needs exactly one of --k and --cstar");
        if (a.has_cstar) {
            const pf_status st = pf_k_from_cstar(a.cstar, a.actions, &k);
            if (st != PF_OK) return report(st);
        }
        const pf_status st =
            pf_hard_instance(a.s_bandit, a.h_bandit, a.actions, k, a.tau, nullptr, a.seed, &mdp_raw,
                             want_mu ? &mu_raw : nullptr, want_pistar ? &pistar_raw : nullptr);
        if (st != PF_OK) return report(st);
    } else if (a.family == "partial") {
        const pf_status st = pf_partial_coverage_instance(
            a.states, a.actions, a.horizon, a.h_star, a.gap, &mdp_raw,
            want_mu ? &mu_raw : nullptr, want_pistar ? &pistar_raw : nullptr);
        if (st != PF_OK) return report(st);
    } else if (a.family == "random") {
        const pf_status st =
            pf_random_instance(a.states, a.actions, a.horizon, a.seed, &mdp_raw,
                               want_mu ? &mu_raw : nullptr, want_pistar ? &pistar_raw : nullptr);
        if (st != PF_OK) return report(st);
    } else {
        return usage_error("unknown family \"" + a.family + "\" (expected hard, partial, or random)");
    }
    mdp.reset(mdp_raw);
    mu.reset(mu_raw);
    pistar.reset(pistar_raw);

    pf_status st = pf_mdp_save(mdp.get(), a.out.c_str());
    if (st != PF_OK) return report(st);
    std::printf("wrote %s\n", a.out.c_str());
    if (want_mu) {
        st = pf_policy_save(mu.get(), a.mu_out.c_str());
        if (st != PF_OK) return report(st);
        std::printf("wrote %s\n", a.mu_out.c_str());
    }
    if (want_pistar) {
        st = pf_policy_save(pistar.get(), a.pistar_out.c_str());
        if (st != PF_OK) return report(st);
        std::printf("wrote %s\n", a.pistar_out.c_str());
    }
    return 0;
}

int run_experiment(const std::string& config, const std::string& out, bool single) {
    long long rows = 0;
    const char* override_path = out.empty() ? nullptr : out.c_str();
    const pf_status st = single ? pf_run(config.c_str(), override_path, &rows)
                                : pf_sweep(config.c_str(), override_path, &rows);
    if (st != PF_OK) return report(st);
    std::printf("wrote %lld result row%s\n", rows, rows == 1 ? "" : "s");
    return 0;
}

int run_eval(const std::string& mdp_path, const std::string& policy_path) {
    pf_mdp* mdp_raw = nullptr;
    pf_status st = pf_mdp_load(mdp_path.c_str(), &mdp_raw);
    if (st != PF_OK) return report(st);
    MdpPtr mdp(mdp_raw);

    pf_policy* policy_raw = nullptr;
    st = pf_policy_load(policy_path.c_str(), &policy_raw);
    if (st != PF_OK) return report(st);
    PolicyPtr policy(policy_raw);

    pf_values* ev_raw = nullptr;
    st = pf_dp_policy_eval(mdp.get(), policy.get(), &ev_raw);
    if (st != PF_OK) return report(st);
    ValuesPtr ev(ev_raw);

    pf_values* opt_raw = nullptr;
    st = pf_dp_optimal(mdp.get(), &opt_raw, nullptr);
    if (st != PF_OK) return report(st);
    ValuesPtr opt(opt_raw);

    double v1 = 0.0, vstar1 = 0.0;
    st = pf_values_initial(mdp.get(), ev.get(), &v1);
    if (st != PF_OK) return report(st);
    st = pf_values_initial(mdp.get(), opt.get(), &vstar1);
    if (st != PF_OK) return report(st);

    std::printf("V1 = %.10g\n", v1);
    std::printf("suboptimality = %.10g\n", vstar1 - v1);
    return 0;
}

int run_slope(const std::string& csv_path) {
    double slope = 0.0;
    const pf_status st = pf_slope_csv(csv_path.c_str(), &slope);
    if (st != PF_OK) return report(st);
    std::printf("slope = %.10g\n", slope);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyfine: tabular-MDP policy finetuning harness"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen-instance", "Generate an MDP instance and its policies");
    cmd_gen->add_option("--family", gen.family, "hard | partial | random")->required();
    cmd_gen->add_option("--out", gen.out, "MDP output file")->required();
    cmd_gen->add_option("--mu-out", gen.mu_out, "behavior policy output file");
    cmd_gen->add_option("--pistar-out", gen.pistar_out, "optimal policy output file");
    cmd_gen->add_option("--s-bandit", gen.s_bandit, "bandit state count (hard)");
    cmd_gen->add_option("--h-bandit", gen.h_bandit, "bandit stage count (hard)");
    cmd_gen->add_option("--actions", gen.actions, "action count");
    CLI::Option* opt_k = cmd_gen->add_option("--k", gen.k, "arm count (hard)");
    CLI::Option* opt_cstar =
        cmd_gen->add_option("--cstar", gen.cstar, "target concentrability, sets K (hard)");
    cmd_gen->add_option("--tau", gen.tau, "arm separation in [0, 1/3] (hard)");
    cmd_gen->add_option("--states", gen.states, "state count (partial, random)");
    cmd_gen->add_option("--horizon", gen.horizon, "horizon (partial, random)");
    cmd_gen->add_option("--h-star", gen.h_star, "corridor length (partial)");
    cmd_gen->add_option("--gap", gen.gap, "branch reward separation (partial)");
    cmd_gen->add_option("--seed", gen.seed, "generator seed (hard, random)");

    std::string config_path, out_path;
    CLI::App* cmd_run = app.add_subcommand("run", "Execute a single-cell experiment config");
    cmd_run->add_option("--config", config_path, "experiment config JSON")->required();
    cmd_run->add_option("--out", out_path, "result CSV path (overrides config)");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Execute a full (n x seed) experiment grid");
    cmd_sweep->add_option("--config", config_path, "experiment config JSON")->required();
    cmd_sweep->add_option("--out", out_path, "result CSV path (overrides config)");

    std::string mdp_path, policy_path;
    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate a policy file on an MDP file");
    cmd_eval->add_option("--mdp", mdp_path, "MDP JSON file")->required();
    cmd_eval->add_option("--policy", policy_path, "policy JSON file")->required();

    std::string csv_path;
    CLI::App* cmd_slope = app.add_subcommand("slope", "Fit the log-log scaling slope of a result CSV");
    cmd_slope->add_option("--csv", csv_path, "result CSV from run/sweep")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    gen.has_k = opt_k->count() > 0;
    gen.has_cstar = opt_cstar->count() > 0;

    if (cmd_gen->parsed()) return run_gen_instance(gen);
    if (cmd_run->parsed()) return run_experiment(config_path, out_path, true);
    if (cmd_sweep->parsed()) return run_experiment(config_path, out_path, false);
    if (cmd_eval->parsed()) return run_eval(mdp_path, policy_path);
    if (cmd_slope->parsed()) return run_slope(csv_path);
    return 2;
}
