#include "polyfine.h"

#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "polyfine/dp.hpp"
#include "polyfine/episodes.hpp"
#include "polyfine/errors.hpp"
#include "polyfine/harness.hpp"
#include "polyfine/instances.hpp"
#include "polyfine/offline.hpp"
#include "polyfine/online.hpp"
#include "polyfine/rng.hpp"
#include "polyfine/serialize.hpp"

struct pf_mdp {
    polyfine::TabularMDP m;
};
struct pf_policy {
    polyfine::Policy p;
};
struct pf_values {
    polyfine::ValueTable v;
};
struct pf_dataset {
    polyfine::EpisodeDataset d;
};
struct pf_mixture {
    polyfine::MixturePolicy x;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* msg) { g_last_error = msg ? msg : ""; }

pf_status fail(pf_status code, const char* msg) {
    set_error(msg);
    return code;
}

template <typename F>
pf_status pf_wrap(F&& body) noexcept {
    try {
        body();
        g_last_error.clear();
        return PF_OK;
    } catch (const polyfine::InvalidModel& e) {
        return fail(PF_ERR_INVALID_MODEL, e.what());
    } catch (const polyfine::ShapeMismatch& e) {
        return fail(PF_ERR_SHAPE_MISMATCH, e.what());
    } catch (const polyfine::NotDeterministic& e) {
        return fail(PF_ERR_NOT_DETERMINISTIC, e.what());
    } catch (const polyfine::InvalidParams& e) {
        return fail(PF_ERR_INVALID_PARAMS, e.what());
    } catch (const polyfine::ParseError& e) {
        return fail(PF_ERR_PARSE, e.what());
    } catch (const polyfine::IoError& e) {
        return fail(PF_ERR_IO, e.what());
    } catch (const polyfine::ConfigError& e) {
        return fail(PF_ERR_CONFIG, e.what());
    } catch (const polyfine::InsufficientData& e) {
        return fail(PF_ERR_INSUFFICIENT_DATA, e.what());
    } catch (const polyfine::NonPositiveValue& e) {
        return fail(PF_ERR_NONPOSITIVE_VALUE, e.what());
    } catch (const polyfine::BudgetExceeded& e) {
        return fail(PF_ERR_BUDGET, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PF_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PF_ERR_INTERNAL, "unknown error");
    }
}

bool bad_arg(bool condition, const char* msg) {
    if (condition) set_error(msg);
    return condition;
}

polyfine::OfflineParams offline_params(double c, double delta, double iota_override) {
    polyfine::OfflineParams p;
    p.c = c;
    p.delta = delta;
    p.iota_override = iota_override;
    return p;
}

polyfine::HardInstanceSpec hard_spec(int S_bandit, int H_bandit, int A, int K, double tau,
                                     const int* a_star, uint64_t seed) {
    polyfine::HardInstanceSpec spec;
    spec.S_bandit = S_bandit;
    spec.H_bandit = H_bandit;
    spec.A = A;
    spec.K = K;
    spec.tau = tau;
    if (a_star != nullptr) {
        if (S_bandit > 0 && H_bandit > 0)
            spec.a_star.assign(a_star, a_star + std::size_t(H_bandit) * std::size_t(S_bandit));
    } else if (K >= 1 && S_bandit > 0 && H_bandit > 0) {
        polyfine::Rng rng(polyfine::mix_seed({seed, polyfine::fnv1a64("a_star")}));
        spec = polyfine::draw_a_star(spec, rng);
    }
    return spec;
}

void emit_offline(polyfine::OfflineResult&& res, pf_policy** out_policy, pf_values** out_values) {
    if (out_policy != nullptr) *out_policy = new pf_policy{std::move(res.policy)};
    if (out_values != nullptr) *out_values = new pf_values{std::move(res.values)};
}

}  // namespace

extern "C" {

const char* pf_status_name(pf_status status) {
    switch (status) {
        case PF_OK: return "PF_OK";
        case PF_ERR_INVALID_ARG: return "PF_ERR_INVALID_ARG";
        case PF_ERR_INVALID_MODEL: return "PF_ERR_INVALID_MODEL";
        case PF_ERR_SHAPE_MISMATCH: return "PF_ERR_SHAPE_MISMATCH";
        case PF_ERR_NOT_DETERMINISTIC: return "PF_ERR_NOT_DETERMINISTIC";
        case PF_ERR_INVALID_PARAMS: return "PF_ERR_INVALID_PARAMS";
        case PF_ERR_PARSE: return "PF_ERR_PARSE";
        case PF_ERR_IO: return "PF_ERR_IO";
        case PF_ERR_CONFIG: return "PF_ERR_CONFIG";
        case PF_ERR_INSUFFICIENT_DATA: return "PF_ERR_INSUFFICIENT_DATA";
        case PF_ERR_NONPOSITIVE_VALUE: return "PF_ERR_NONPOSITIVE_VALUE";
        case PF_ERR_BUDGET: return "PF_ERR_BUDGET";
        case PF_ERR_INTERNAL: return "PF_ERR_INTERNAL";
    }
    return "PF_STATUS_UNKNOWN";
}

const char* pf_last_error(void) { return g_last_error.c_str(); }

/* models */

pf_status pf_mdp_create(int S, int A, int H, const double* transitions, const double* rewards,
                        const double* initial, pf_mdp** out) {
    if (bad_arg(out == nullptr, "out is NULL")) return PF_ERR_INVALID_ARG;
    if (bad_arg(transitions == nullptr || rewards == nullptr || initial == nullptr,
                "transitions/rewards/initial must not be NULL"))
        return PF_ERR_INVALID_ARG;
    if (bad_arg(S <= 0 || A <= 0 || H <= 0, "dimensions must be positive")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::TabularMDP m;
        m.S = S;
        m.A = A;
        m.H = H;
        const std::size_t sa = std::size_t(H) * S * A;
        m.transitions.assign(transitions, transitions + sa * S);
        m.rewards.assign(rewards, rewards + sa);
        m.initial.assign(initial, initial + S);
        polyfine::validate_mdp(m);
        *out = new pf_mdp{std::move(m)};
    });
}

void pf_mdp_free(pf_mdp* mdp) { delete mdp; }

pf_status pf_mdp_dims(const pf_mdp* mdp, int* S, int* A, int* H) {
    if (bad_arg(mdp == nullptr, "mdp is NULL")) return PF_ERR_INVALID_ARG;
    if (S != nullptr) *S = mdp->m.S;
    if (A != nullptr) *A = mdp->m.A;
    if (H != nullptr) *H = mdp->m.H;
    set_error("");
    return PF_OK;
}

pf_status pf_mdp_save(const pf_mdp* mdp, const char* path) {
    if (bad_arg(mdp == nullptr || path == nullptr, "mdp/path is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { polyfine::save_mdp(mdp->m, path); });
}

pf_status pf_mdp_load(const char* path, pf_mdp** out) {
    if (bad_arg(path == nullptr || out == nullptr, "path/out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_mdp{polyfine::load_mdp(path)}; });
}

pf_status pf_policy_create(int steps, int S, int A, const double* probs, pf_policy** out) {
    if (bad_arg(out == nullptr || probs == nullptr, "probs/out is NULL")) return PF_ERR_INVALID_ARG;
    if (bad_arg(steps <= 0 || S <= 0 || A <= 0, "dimensions must be positive"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::Policy p{steps, S, A,
                           std::vector<double>(probs, probs + std::size_t(steps) * S * A)};
        polyfine::validate_policy(p, S, A);
        *out = new pf_policy{std::move(p)};
    });
}

pf_status pf_policy_uniform(int steps, int S, int A, pf_policy** out) {
    if (bad_arg(out == nullptr, "out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_policy{polyfine::uniform_policy(steps, S, A)}; });
}

void pf_policy_free(pf_policy* policy) { delete policy; }

pf_status pf_policy_dims(const pf_policy* policy, int* steps, int* S, int* A) {
    if (bad_arg(policy == nullptr, "policy is NULL")) return PF_ERR_INVALID_ARG;
    if (steps != nullptr) *steps = policy->p.steps;
    if (S != nullptr) *S = policy->p.S;
    if (A != nullptr) *A = policy->p.A;
    set_error("");
    return PF_OK;
}

pf_status pf_policy_probs(const pf_policy* policy, double* buf, size_t buf_len) {
    if (bad_arg(policy == nullptr || buf == nullptr, "policy/buf is NULL")) return PF_ERR_INVALID_ARG;
    if (bad_arg(buf_len < policy->p.probs.size(), "buffer too small")) return PF_ERR_INVALID_ARG;
    std::memcpy(buf, policy->p.probs.data(), policy->p.probs.size() * sizeof(double));
    set_error("");
    return PF_OK;
}

pf_status pf_policy_save(const pf_policy* policy, const char* path) {
    if (bad_arg(policy == nullptr || path == nullptr, "policy/path is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { polyfine::save_policy(policy->p, path); });
}

pf_status pf_policy_load(const char* path, pf_policy** out) {
    if (bad_arg(path == nullptr || out == nullptr, "path/out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_policy{polyfine::load_policy(path)}; });
}

/* oracles */

pf_status pf_dp_policy_eval(const pf_mdp* mdp, const pf_policy* policy, pf_values** out) {
    if (bad_arg(mdp == nullptr || policy == nullptr || out == nullptr, "mdp/policy/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_values{polyfine::dp_policy_eval(mdp->m, policy->p)}; });
}

pf_status pf_dp_optimal(const pf_mdp* mdp, pf_values** out_values, pf_policy** out_policy) {
    if (bad_arg(mdp == nullptr, "mdp is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        auto [values, policy] = polyfine::dp_optimal(mdp->m);
        if (out_values != nullptr) *out_values = new pf_values{std::move(values)};
        if (out_policy != nullptr) *out_policy = new pf_policy{std::move(policy)};
    });
}

void pf_values_free(pf_values* values) { delete values; }

pf_status pf_values_get(const pf_values* values, int h, int s, double* out) {
    if (bad_arg(values == nullptr || out == nullptr, "values/out is NULL")) return PF_ERR_INVALID_ARG;
    const polyfine::ValueTable& v = values->v;
    if (bad_arg(h < 0 || h > v.H || s < 0 || s >= v.S, "index out of range"))
        return PF_ERR_INVALID_ARG;
    *out = v.value(h, s);
    set_error("");
    return PF_OK;
}

pf_status pf_values_q_get(const pf_values* values, int h, int s, int a, double* out) {
    if (bad_arg(values == nullptr || out == nullptr, "values/out is NULL")) return PF_ERR_INVALID_ARG;
    const polyfine::ValueTable& v = values->v;
    if (bad_arg(h < 0 || h > v.H || s < 0 || s >= v.S || a < 0 || a >= v.A, "index out of range"))
        return PF_ERR_INVALID_ARG;
    *out = v.qvalue(h, s, a);
    set_error("");
    return PF_OK;
}

pf_status pf_values_initial(const pf_mdp* mdp, const pf_values* values, double* out) {
    if (bad_arg(mdp == nullptr || values == nullptr || out == nullptr, "mdp/values/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        const polyfine::ValueTable& v = values->v;
        if (v.S != mdp->m.S) throw polyfine::ShapeMismatch("value table does not match the MDP");
        std::vector<double> row(v.v.begin(), v.v.begin() + v.S);
        *out = polyfine::expected_initial(mdp->m, row);
    });
}

pf_status pf_concentrability(const pf_mdp* mdp, const pf_policy* mu, const pf_policy* pi_star,
                             int h_max, double* out) {
    if (bad_arg(mdp == nullptr || mu == nullptr || pi_star == nullptr || out == nullptr,
                "mdp/mu/pi_star/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = polyfine::concentrability(mdp->m, mu->p, pi_star->p, h_max); });
}

/* instances */

pf_status pf_hard_instance(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                           uint64_t seed, pf_mdp** out_mdp, pf_policy** out_mu,
                           pf_policy** out_pi_star) {
    return pf_wrap([&] {
        polyfine::GeneratedInstance inst =
            polyfine::build_hard_instance(hard_spec(S_bandit, H_bandit, A, K, tau, a_star, seed));
        if (out_mdp != nullptr) *out_mdp = new pf_mdp{std::move(inst.mdp)};
        if (out_mu != nullptr) *out_mu = new pf_policy{std::move(inst.mu)};
        if (out_pi_star != nullptr) *out_pi_star = new pf_policy{std::move(inst.pi_star)};
    });
}

pf_status pf_null_instance(int S_bandit, int H_bandit, int A, pf_mdp** out) {
    if (bad_arg(out == nullptr, "out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_mdp{polyfine::null_instance(S_bandit, H_bandit, A)}; });
}

pf_status pf_partial_coverage_instance(int S, int A, int H, int h_star, double gap, pf_mdp** out_mdp,
                                       pf_policy** out_mu, pf_policy** out_pi_star) {
    return pf_wrap([&] {
        polyfine::GeneratedInstance inst =
            polyfine::build_partial_coverage_instance(S, A, H, h_star, gap);
        if (out_mdp != nullptr) *out_mdp = new pf_mdp{std::move(inst.mdp)};
        if (out_mu != nullptr) *out_mu = new pf_policy{std::move(inst.mu)};
        if (out_pi_star != nullptr) *out_pi_star = new pf_policy{std::move(inst.pi_star)};
    });
}

pf_status pf_random_instance(int S, int A, int H, uint64_t seed, pf_mdp** out_mdp,
                             pf_policy** out_mu, pf_policy** out_pi_star) {
    return pf_wrap([&] {
        polyfine::GeneratedInstance inst = polyfine::random_covered_instance(S, A, H, seed);
        if (out_mdp != nullptr) *out_mdp = new pf_mdp{std::move(inst.mdp)};
        if (out_mu != nullptr) *out_mu = new pf_policy{std::move(inst.mu)};
        if (out_pi_star != nullptr) *out_pi_star = new pf_policy{std::move(inst.pi_star)};
    });
}

pf_status pf_k_from_cstar(double cstar, int A, int* out) {
    if (bad_arg(out == nullptr, "out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = polyfine::k_from_cstar(cstar, A); });
}

pf_status pf_subopt_formula(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                            const pf_policy* policy, double* out) {
    if (bad_arg(a_star == nullptr || policy == nullptr || out == nullptr,
                "a_star/policy/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        *out = polyfine::subopt_formula(hard_spec(S_bandit, H_bandit, A, K, tau, a_star, 0),
                                        policy->p);
    });
}

pf_status pf_bandit_loss(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                         const pf_policy* policy, long long* out) {
    if (bad_arg(a_star == nullptr || policy == nullptr || out == nullptr,
                "a_star/policy/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        *out = polyfine::bandit_loss(hard_spec(S_bandit, H_bandit, A, K, tau, a_star, 0), policy->p);
    });
}

/* datasets */

pf_status pf_collect(const pf_mdp* mdp, const pf_policy* policy, long long n, uint64_t seed,
                     pf_dataset** out) {
    if (bad_arg(mdp == nullptr || policy == nullptr || out == nullptr, "mdp/policy/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::Rng rng(seed);
        *out = new pf_dataset{polyfine::collect(mdp->m, policy->p, n, rng, "mu", seed)};
    });
}

void pf_dataset_free(pf_dataset* dataset) { delete dataset; }

pf_status pf_dataset_size(const pf_dataset* dataset, long long* out) {
    if (bad_arg(dataset == nullptr || out == nullptr, "dataset/out is NULL"))
        return PF_ERR_INVALID_ARG;
    *out = (long long)dataset->d.size();
    set_error("");
    return PF_OK;
}

pf_status pf_dataset_save(const pf_dataset* dataset, const char* path) {
    if (bad_arg(dataset == nullptr || path == nullptr, "dataset/path is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { polyfine::save_dataset(dataset->d, path); });
}

pf_status pf_dataset_load(const char* path, pf_dataset** out) {
    if (bad_arg(path == nullptr || out == nullptr, "path/out is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = new pf_dataset{polyfine::load_dataset(path)}; });
}

/* solvers */

pf_status pf_vi_lcb(const pf_dataset* data, int S, int A, int H, double c, double delta,
                    double iota_override, uint64_t seed, pf_policy** out_policy,
                    pf_values** out_values) {
    if (bad_arg(data == nullptr, "data is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::Rng rng(seed);
        emit_offline(polyfine::vi_lcb(data->d, S, A, H, offline_params(c, delta, iota_override), rng),
                     out_policy, out_values);
    });
}

pf_status pf_pevi_adv(const pf_dataset* data, int S, int A, int H, double c, double delta,
                      double iota_override, uint64_t seed, pf_policy** out_policy,
                      pf_values** out_values) {
    if (bad_arg(data == nullptr, "data is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::Rng rng(seed);
        emit_offline(
            polyfine::pevi_adv(data->d, S, A, H, offline_params(c, delta, iota_override), rng),
            out_policy, out_values);
    });
}

pf_status pf_truncated_pevi_adv(const pf_dataset* data, int S, int A, int H, int h_star,
                                const double* v_init, double c, double delta, double iota_override,
                                uint64_t seed, pf_policy** out_policy, pf_values** out_values) {
    if (bad_arg(data == nullptr || v_init == nullptr, "data/v_init is NULL"))
        return PF_ERR_INVALID_ARG;
    if (bad_arg(S <= 0, "S must be positive")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::Rng rng(seed);
        std::vector<double> v(v_init, v_init + S);
        emit_offline(polyfine::truncated_pevi_adv(data->d, S, A, H, h_star, v,
                                                  offline_params(c, delta, iota_override), rng),
                     out_policy, out_values);
    });
}

pf_status pf_ucbvi_uplow(const pf_mdp* mdp, const pf_policy* roll_in, int h_star, long long n,
                         double c, double gamma_scale, double delta, uint64_t seed, double* v_up,
                         double* v_low, long long* visits, pf_mixture** out_mixture) {
    if (bad_arg(mdp == nullptr || roll_in == nullptr, "mdp/roll_in is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::OnlineParams params;
        params.c = c;
        params.gamma_scale = gamma_scale;
        params.delta = delta;
        params.n_ucb = n;
        polyfine::Rng rng(seed);
        polyfine::EpisodeSampler env(mdp->m, n);
        polyfine::UpLowResult res = polyfine::ucbvi_uplow(env, roll_in->p, h_star, params, rng);
        const int S = mdp->m.S;
        for (int s = 0; s < S; ++s) {
            if (v_up != nullptr) v_up[s] = res.v_up[std::size_t(s)];
            if (v_low != nullptr) v_low[s] = res.v_low[std::size_t(s)];
            if (visits != nullptr) visits[s] = res.visit_counts[std::size_t(s)];
        }
        if (out_mixture != nullptr) *out_mixture = new pf_mixture{std::move(res.pi_out)};
    });
}

pf_status pf_hoovi(const pf_mdp* mdp, const pf_policy* mu, int h_star, long long n, double off_c,
                   double off_delta, double off_iota_override, double on_c, double on_gamma_scale,
                   double on_delta, uint64_t seed, pf_policy** out_prefix, pf_mixture** out_suffix) {
    if (bad_arg(mdp == nullptr || mu == nullptr, "mdp/mu is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::OnlineParams on;
        on.c = on_c;
        on.gamma_scale = on_gamma_scale;
        on.delta = on_delta;
        polyfine::Rng rng(seed);
        polyfine::EpisodeSampler env(mdp->m, n);
        polyfine::HooviResult res =
            polyfine::hoovi(env, mu->p, h_star, n,
                            offline_params(off_c, off_delta, off_iota_override), on, rng);
        if (out_prefix != nullptr) *out_prefix = new pf_policy{std::move(res.prefix)};
        if (out_suffix != nullptr) *out_suffix = new pf_mixture{std::move(res.suffix)};
    });
}

void pf_mixture_free(pf_mixture* mixture) { delete mixture; }

pf_status pf_eval_mixture(const pf_mdp* mdp, const pf_mixture* mixture, double* buf,
                          size_t buf_len) {
    if (bad_arg(mdp == nullptr || mixture == nullptr || buf == nullptr, "mdp/mixture/buf is NULL"))
        return PF_ERR_INVALID_ARG;
    if (bad_arg(buf_len < std::size_t(mdp->m.S), "buffer too small")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        std::vector<double> v = polyfine::eval_mixture(mdp->m, mixture->x);
        std::memcpy(buf, v.data(), v.size() * sizeof(double));
    });
}

pf_status pf_eval_concatenated(const pf_mdp* mdp, const pf_policy* prefix, const pf_mixture* mixture,
                               double* out) {
    if (bad_arg(mdp == nullptr || prefix == nullptr || mixture == nullptr || out == nullptr,
                "mdp/prefix/mixture/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = polyfine::eval_concatenated(mdp->m, prefix->p, mixture->x); });
}

/* harness */

pf_status pf_run(const char* config_path, const char* out_override, long long* rows_written) {
    if (bad_arg(config_path == nullptr, "config_path is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::ExperimentConfig cfg = polyfine::load_config(config_path);
        polyfine::run(cfg, out_override ? out_override : "");
        if (rows_written != nullptr) *rows_written = 1;
    });
}

pf_status pf_sweep(const char* config_path, const char* out_override, long long* rows_written) {
    if (bad_arg(config_path == nullptr, "config_path is NULL")) return PF_ERR_INVALID_ARG;
    return pf_wrap([&] {
        polyfine::ExperimentConfig cfg = polyfine::load_config(config_path);
        const auto results = polyfine::sweep(cfg, out_override ? out_override : "");
        if (rows_written != nullptr) *rows_written = (long long)results.size();
    });
}

pf_status pf_slope_csv(const char* csv_path, double* out) {
    if (bad_arg(csv_path == nullptr || out == nullptr, "csv_path/out is NULL"))
        return PF_ERR_INVALID_ARG;
    return pf_wrap([&] { *out = polyfine::fit_loglog_slope(polyfine::load_csv(csv_path)); });
}

} /* extern "C" */
