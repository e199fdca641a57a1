#include "polyfine/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "polyfine/serialize.hpp"

namespace polyfine {

using nlohmann::json;

namespace {

const json& cfield(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ConfigError(std::string("missing config field \"") + name + "\"");
    return *it;
}

int cint(const json& j, const char* name) {
    const json& v = cfield(j, name);
    if (!v.is_number_integer()) throw ConfigError(std::string("\"") + name + "\" must be an integer");
    return v.get<int>();
}

double cnum(const json& j, const char* name) {
    const json& v = cfield(j, name);
    if (!v.is_number()) throw ConfigError(std::string("\"") + name + "\" must be a number");
    return v.get<double>();
}

std::string cstr(const json& j, const char* name) {
    const json& v = cfield(j, name);
    if (!v.is_string()) throw ConfigError(std::string("\"") + name + "\" must be a string");
    return v.get<std::string>();
}

std::uint64_t useed(const json& v, const char* what) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return std::uint64_t(v.get<long long>());
    throw ConfigError(std::string(what) + " must be a nonnegative integer");
}

InstanceSpec parse_instance_spec(const json& j) {
    if (!j.is_object()) throw ConfigError("\"instance\" must be an object");
    InstanceSpec spec;
    spec.family = j.contains("family") ? cstr(j, "family") : (j.contains("path") ? "file" : "");
    if (j.contains("seed")) spec.instance_seed = useed(j.at("seed"), "instance seed");

    if (spec.family == "file") {
        spec.path = cstr(j, "path");
        if (j.contains("mu_path")) spec.mu_path = cstr(j, "mu_path");
    } else if (spec.family == "hard") {
        spec.hard.S_bandit = cint(j, "S_bandit");
        spec.hard.H_bandit = cint(j, "H_bandit");
        spec.hard.A = cint(j, "A");
        spec.hard.tau = cnum(j, "tau");
        const bool has_k = j.contains("K"), has_c = j.contains("cstar");
        if (has_k == has_c) throw ConfigError("hard instance needs exactly one of \"K\" and \"cstar\"");
        if (has_k) {
            spec.hard.K = cint(j, "K");
        } else {
            spec.has_cstar = true;
            spec.cstar_target = cnum(j, "cstar");
        }
        if (j.contains("a_star")) {
            const json& a = j.at("a_star");
            if (!a.is_array()) throw ConfigError("\"a_star\" must be an array of action indices");
            for (const json& e : a) {
                if (!e.is_number_integer()) throw ConfigError("\"a_star\" entries must be integers");
                spec.hard.a_star.push_back(e.get<int>());
            }
        }
    } else if (spec.family == "partial") {
        spec.S = cint(j, "S");
        spec.A = cint(j, "A");
        spec.H = cint(j, "H");
        spec.h_star = cint(j, "h_star");
        spec.gap = cnum(j, "gap");
    } else if (spec.family == "random") {
        spec.S = cint(j, "S");
        spec.A = cint(j, "A");
        spec.H = cint(j, "H");
    } else {
        throw ConfigError("unknown instance family \"" + spec.family + "\"");
    }
    return spec;
}

bool offline_algorithm(const std::string& algo) { return algo == "vi-lcb" || algo == "pevi-adv"; }
bool online_algorithm(const std::string& algo) { return algo == "ucbvi-uplow" || algo == "hoovi"; }

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_ms(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

double value_at_initial(const TabularMDP& mdp, const ValueTable& vt) {
    std::vector<double> row(vt.v.begin(), vt.v.begin() + mdp.S);
    return expected_initial(mdp, row);
}

Policy prefix_of(const Policy& full, int steps) {
    Policy p{steps, full.S, full.A, std::vector<double>(std::size_t(steps) * full.S * full.A)};
    std::copy_n(full.probs.begin(), p.probs.size(), p.probs.begin());
    return p;
}

unsigned thread_cap(std::size_t tasks) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("POLYFINE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && (unsigned long)v < hw) hw = unsigned(v);
    }
    return unsigned(std::min<std::size_t>(hw, std::max<std::size_t>(tasks, 1)));
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_values.empty()) throw ConfigError("\"n\" must list at least one episode count");
    if (cfg.seeds.empty()) throw ConfigError("\"seeds\" must list at least one seed");
    for (long long n : cfg.n_values)
        if (n <= 0) throw ConfigError("entries of \"n\" must be positive");
    const bool known = offline_algorithm(cfg.algorithm) || online_algorithm(cfg.algorithm) ||
                       cfg.algorithm == "uniform-baseline";
    if (!known) throw ConfigError("unknown algorithm \"" + cfg.algorithm + "\"");
    if (online_algorithm(cfg.algorithm) && !cfg.has_h_star)
        throw ConfigError("\"h_star\" is required for " + cfg.algorithm);
    if (!online_algorithm(cfg.algorithm) && cfg.has_h_star)
        throw ConfigError("\"h_star\" does not apply to " + cfg.algorithm);
    try {
        cfg.offline_params.validate();
        cfg.online_params.validate();
    } catch (const InvalidParams& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig cfg;
    cfg.instance = parse_instance_spec(cfield(j, "instance"));
    cfg.algorithm = cstr(j, "algorithm");

    const json& n = cfield(j, "n");
    if (!n.is_array()) throw ConfigError("\"n\" must be an array");
    for (const json& e : n) {
        if (!e.is_number_integer()) throw ConfigError("\"n\" entries must be integers");
        cfg.n_values.push_back(e.get<long long>());
    }
    const json& seeds = cfield(j, "seeds");
    if (!seeds.is_array()) throw ConfigError("\"seeds\" must be an array");
    for (const json& e : seeds) cfg.seeds.push_back(useed(e, "\"seeds\" entries"));

    if (j.contains("offline_params")) {
        const json& p = j.at("offline_params");
        if (!p.is_object()) throw ConfigError("\"offline_params\" must be an object");
        if (p.contains("c")) cfg.offline_params.c = cnum(p, "c");
        if (p.contains("delta")) cfg.offline_params.delta = cnum(p, "delta");
        if (p.contains("iota_override")) cfg.offline_params.iota_override = cnum(p, "iota_override");
    }
    if (j.contains("online_params")) {
        const json& p = j.at("online_params");
        if (!p.is_object()) throw ConfigError("\"online_params\" must be an object");
        if (p.contains("c")) cfg.online_params.c = cnum(p, "c");
        if (p.contains("gamma_scale")) cfg.online_params.gamma_scale = cnum(p, "gamma_scale");
        if (p.contains("delta")) cfg.online_params.delta = cnum(p, "delta");
    }
    if (j.contains("h_star")) {
        cfg.h_star = cint(j, "h_star");
        cfg.has_h_star = true;
    }
    if (j.contains("out")) cfg.out = cstr(j, "out");

    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

GeneratedInstance build_instance(const InstanceSpec& spec) {
    if (spec.family == "file") {
        GeneratedInstance inst;
        inst.mdp = load_mdp(spec.path);
        if (spec.mu_path.empty()) {
            inst.mu = uniform_policy(inst.mdp.H, inst.mdp.S, inst.mdp.A);
        } else {
            inst.mu = load_policy(spec.mu_path);
            if (inst.mu.S != inst.mdp.S || inst.mu.A != inst.mdp.A || inst.mu.steps != inst.mdp.H)
                throw ConfigError("behavior policy dimensions do not match the MDP");
        }
        inst.pi_star = dp_optimal(inst.mdp).second;
        return inst;
    }
    if (spec.family == "hard") {
        HardInstanceSpec hs = spec.hard;
        if (spec.has_cstar) hs.K = k_from_cstar(spec.cstar_target, hs.A);
        if (hs.a_star.empty()) {
            if (hs.K < 2 || hs.H_bandit < 1 || hs.S_bandit < 1)
                throw ConfigError("hard instance dimensions must be positive with K >= 2");
            Rng rng(mix_seed({spec.instance_seed, fnv1a64("a_star")}));
            hs = draw_a_star(hs, rng);
        }
        return build_hard_instance(hs);
    }
    if (spec.family == "partial")
        return build_partial_coverage_instance(spec.S, spec.A, spec.H, spec.h_star, spec.gap);
    if (spec.family == "random") return random_covered_instance(spec.S, spec.A, spec.H, spec.instance_seed);
    throw ConfigError("unknown instance family \"" + spec.family + "\"");
}

PreparedInstance prepare_instance(const InstanceSpec& spec) {
    GeneratedInstance gen = build_instance(spec);
    PreparedInstance out;
    out.mdp = std::move(gen.mdp);
    out.mu = std::move(gen.mu);
    auto opt = dp_optimal(out.mdp);
    out.opt_values = std::move(opt.first);
    out.pi_star = gen.pi_star.probs.empty() ? std::move(opt.second) : std::move(gen.pi_star);
    out.d_star = visitation(out.mdp, out.pi_star);
    out.cstar = concentrability(out.mdp, out.mu, out.pi_star, out.mdp.H);
    return out;
}

RunOutcome run_single(const PreparedInstance& inst, const ExperimentConfig& cfg, long long n,
                      std::size_t seed_index) {
    if (seed_index >= cfg.seeds.size()) throw ConfigError("seed index out of range");
    if (n <= 0) throw ConfigError("n must be positive");
    const TabularMDP& m = inst.mdp;
    const std::uint64_t seed = cfg.seeds[seed_index];
    const std::uint64_t task_seed =
        mix_seed({seed, fnv1a64(cfg.algorithm), std::uint64_t(n), std::uint64_t(seed_index)});
    Rng rng(task_seed);
    const double vstar1 = value_at_initial(m, inst.opt_values);

    // Pessimism certificate at pi*-reachable states: estimated values must
    // lower-bound the learned policy's true values.
    auto offline_pessimism = [&](const OfflineResult& res, const ValueTable& truth) {
        for (int h = 0; h < m.H; ++h)
            for (int s = 0; s < m.S; ++s) {
                if (!(inst.d_star.state(h, s) > 0.0)) continue;
                if (res.values.value(h, s) > truth.value(h, s) + 1e-9) return false;
            }
        return true;
    };
    // Lower estimates at the anchor step must not exceed V* at visited states.
    auto online_pessimism = [&](const UpLowResult& res, int h_star) {
        for (int s = 0; s < m.S; ++s) {
            if (res.visit_counts[std::size_t(s)] <= 0) continue;
            if (res.v_low[std::size_t(s)] > inst.opt_values.value(h_star, s) + 1e-9) return false;
        }
        return true;
    };

    ResultRow row;
    row.algo = cfg.algorithm;
    row.n = n;
    row.seed = seed;
    row.cstar = inst.cstar;
    long long used = 0;

    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.algorithm == "uniform-baseline") {
        const ValueTable truth = dp_policy_eval(m, uniform_policy(m.H, m.S, m.A));
        row.suboptimality = vstar1 - value_at_initial(m, truth);
        row.pessimism_held = true;
    } else if (offline_algorithm(cfg.algorithm)) {
        EpisodeSampler env(m, n);
        const EpisodeDataset data = collect(env, inst.mu, n, rng, "mu", task_seed);
        const OfflineResult res = cfg.algorithm == "vi-lcb"
                                      ? vi_lcb(data, m.S, m.A, m.H, cfg.offline_params, rng)
                                      : pevi_adv(data, m.S, m.A, m.H, cfg.offline_params, rng);
        const ValueTable truth = dp_policy_eval(m, res.policy);
        row.suboptimality = vstar1 - value_at_initial(m, truth);
        row.pessimism_held = offline_pessimism(res, truth);
        used = env.used();
    } else if (cfg.algorithm == "ucbvi-uplow") {
        if (cfg.h_star < 0 || cfg.h_star >= m.H)
            throw ConfigError("ucbvi-uplow needs 0 <= h_star <= H-1 (H = " + std::to_string(m.H) + ")");
        OnlineParams op = cfg.online_params;
        op.n_ucb = n;
        EpisodeSampler env(m, n);
        const UpLowResult res = ucbvi_uplow(env, inst.mu, cfg.h_star, op, rng);
        row.suboptimality = vstar1 - eval_concatenated(m, prefix_of(inst.mu, cfg.h_star), res.pi_out);
        row.pessimism_held = online_pessimism(res, cfg.h_star);
        used = env.used();
    } else if (cfg.algorithm == "hoovi") {
        if (cfg.h_star < 0 || cfg.h_star > m.H)
            throw ConfigError("hoovi needs 0 <= h_star <= H (H = " + std::to_string(m.H) + ")");
        EpisodeSampler env(m, n);
        const HooviResult res =
            hoovi(env, inst.mu, cfg.h_star, n, cfg.offline_params, cfg.online_params, rng);
        row.suboptimality = vstar1 - eval_concatenated(m, res.prefix, res.suffix);
        if (cfg.h_star == m.H) {
            row.pessimism_held = offline_pessimism(res.stage2, dp_policy_eval(m, res.stage2.policy));
        } else {
            row.pessimism_held = online_pessimism(res.stage1, cfg.h_star);
        }
        used = env.used();
    } else {
        throw ConfigError("unknown algorithm \"" + cfg.algorithm + "\"");
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    RunOutcome out;
    out.row = std::move(row);
    out.episodes_used = used;
    out.episode_cap = n;
    return out;
}

std::vector<RunOutcome> sweep(const ExperimentConfig& cfg, const std::string& out_override,
                              bool write_file) {
    validate_config(cfg);
    const std::string out_path = out_override.empty() ? cfg.out : out_override;
    if (write_file && out_path.empty())
        throw ConfigError("no output path: set \"out\" in the config or pass --out");

    const PreparedInstance inst = prepare_instance(cfg.instance);

    struct Task {
        long long n;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (long long n : cfg.n_values)
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i) tasks.push_back({n, i});

    std::vector<RunOutcome> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = run_single(inst, cfg, tasks[i].n, tasks[i].seed_index);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const unsigned workers = thread_cap(tasks.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    if (write_file) {
        std::vector<ResultRow> rows;
        rows.reserve(results.size());
        for (const RunOutcome& r : results) rows.push_back(r.row);
        save_csv(rows, out_path);
    }
    return results;
}

RunOutcome run(const ExperimentConfig& cfg, const std::string& out_override) {
    if (cfg.n_values.size() != 1 || cfg.seeds.size() != 1)
        throw ConfigError("run expects exactly one n and one seed; use sweep for grids");
    return sweep(cfg, out_override)[0];
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = "algo,n,seed,suboptimality,cstar,pessimism_held,runtime_ms\n";
    for (const ResultRow& r : rows) {
        out += r.algo;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += fmt17(r.suboptimality);
        out += ',';
        out += fmt17(r.cstar);
        out += ',';
        out += r.pessimism_held ? "true" : "false";
        out += ',';
        out += fmt_ms(r.runtime_ms);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::vector<ResultRow> rows;
    std::size_t pos = 0;
    int lineno = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "algo,n,seed,suboptimality,cstar,pessimism_held,runtime_ms")
                throw ParseError("unexpected CSV header \"" + line + "\"", lineno);
            saw_header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 7) throw ParseError("expected 7 comma-separated fields", lineno);
        ResultRow r;
        r.algo = fields[0];
        try {
            r.n = std::stoll(fields[1]);
            r.seed = std::stoull(fields[2]);
            r.suboptimality = std::stod(fields[3]);
            r.cstar = std::stod(fields[4]);
            r.runtime_ms = std::stod(fields[6]);
        } catch (const std::exception&) {
            throw ParseError("malformed numeric field", lineno);
        }
        if (fields[5] == "true")
            r.pessimism_held = true;
        else if (fields[5] == "false")
            r.pessimism_held = false;
        else
            throw ParseError("pessimism_held must be \"true\" or \"false\"", lineno);
        rows.push_back(std::move(r));
    }
    if (!saw_header) throw ParseError("missing CSV header", 1);
    return rows;
}

void save_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    write_text_file(path, rows_to_csv(rows));
}

std::vector<ResultRow> load_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

double median_of(std::vector<double> values) {
    if (values.empty()) throw InsufficientData("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::pair<long long, double>> medians_by_n(const std::vector<ResultRow>& rows) {
    std::map<long long, std::vector<double>> groups;
    for (const ResultRow& r : rows) groups[r.n].push_back(r.suboptimality);
    std::vector<std::pair<long long, double>> out;
    out.reserve(groups.size());
    for (auto& [n, values] : groups) out.emplace_back(n, median_of(std::move(values)));
    return out;
}

double fit_loglog_slope(const std::vector<ResultRow>& rows) {
    const auto med = medians_by_n(rows);
    if (med.size() < 3)
        throw InsufficientData("slope fit needs at least 3 distinct n values, got " +
                               std::to_string(med.size()));
    double mx = 0, my = 0;
    std::vector<double> xs, ys;
    for (const auto& [n, m] : med) {
        if (!(m > 0.0))
            throw NonPositiveValue("median suboptimality at n = " + std::to_string(n) +
                                   " is not positive; log-log fit undefined");
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(m));
        mx += xs.back();
        my += ys.back();
    }
    mx /= double(xs.size());
    my /= double(ys.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("all n values coincide after grouping");
    return sxy / sxx;
}

}  // namespace polyfine
