#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyfine/dp.hpp"
#include "polyfine/instances.hpp"
#include "polyfine/offline.hpp"
#include "polyfine/online.hpp"

namespace polyfine {

// Instance source for experiments: a generator family with parameters, or a
// pair of files. Exactly the fields for the chosen family are read.
struct InstanceSpec {
    std::string family;  // "hard" | "partial" | "random" | "file"

    // file
    std::string path;
    std::string mu_path;  // optional; uniform behavior policy when empty

    // hard (K taken from cstar_target when has_cstar)
    HardInstanceSpec hard;
    bool has_cstar = false;
    double cstar_target = 0.0;

    // partial + random share the plain dimensions
    int S = 0, A = 0, H = 0;
    int h_star = 0;
    double gap = 0.0;

    std::uint64_t instance_seed = 0;  // a_star draw / random generator seed
};

struct ExperimentConfig {
    InstanceSpec instance;
    std::string algorithm;  // vi-lcb | pevi-adv | ucbvi-uplow | hoovi | uniform-baseline
    std::vector<long long> n_values;
    std::vector<std::uint64_t> seeds;
    OfflineParams offline_params;
    OnlineParams online_params;
    int h_star = 0;
    bool has_h_star = false;
    std::string out;
};

struct ResultRow {
    std::string algo;
    long long n = 0;
    std::uint64_t seed = 0;
    double suboptimality = 0.0;
    double cstar = 0.0;  // +infinity when coverage fails
    bool pessimism_held = false;
    double runtime_ms = 0.0;
};

// Everything run_single needs that depends only on the instance, computed
// once per sweep: exact optimal values, an optimal deterministic policy, its
// visitation measure, and the behavior policy's concentrability.
struct PreparedInstance {
    TabularMDP mdp;
    Policy mu;
    Policy pi_star;
    ValueTable opt_values;
    VisitationTable d_star;
    double cstar = 0.0;
};

struct RunOutcome {
    ResultRow row;
    long long episodes_used = 0;
    long long episode_cap = 0;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

GeneratedInstance build_instance(const InstanceSpec& spec);
PreparedInstance prepare_instance(const InstanceSpec& spec);

// One sweep cell. The derived task seed is hash(seed, algorithm, n, index of
// seed in the config list); suboptimality comes from exact DP only, and every
// environment interaction is counted against an n-episode cap.
RunOutcome run_single(const PreparedInstance& inst, const ExperimentConfig& cfg, long long n,
                      std::size_t seed_index);

// Cartesian product of cfg.n_values x cfg.seeds in declaration order.
// Cells execute in parallel (POLYFINE_THREADS caps the worker count) but rows
// keep deterministic order. The CSV goes to out_override, or cfg.out when
// empty; pass write_file = false to skip emission.
std::vector<RunOutcome> sweep(const ExperimentConfig& cfg, const std::string& out_override = "",
                              bool write_file = true);

// sweep restricted to a single (n, seed) cell; rejects wider configs.
RunOutcome run(const ExperimentConfig& cfg, const std::string& out_override = "");

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
void save_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> load_csv(const std::string& path);

double median_of(std::vector<double> values);

// Per-n medians of suboptimality, ordered by n ascending.
std::vector<std::pair<long long, double>> medians_by_n(const std::vector<ResultRow>& rows);

// Least-squares slope of log(median suboptimality) against log(n). Needs at
// least 3 distinct n values, all with positive medians.
double fit_loglog_slope(const std::vector<ResultRow>& rows);

}  // namespace polyfine
