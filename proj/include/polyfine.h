/* C interface to the polyfine library.
 *
 * Conventions:
 *   - Every function returns a pf_status; results come back through out
 *     parameters. PF_OK means success, anything else leaves outputs untouched.
 *   - pf_last_error() describes the most recent failure on the calling thread.
 *   - Objects returned through pf_*** out parameters are owned by the caller
 *     and released with the matching pf_*_free. Freeing NULL is a no-op.
 *   - Array arguments are row-major: transitions [h][s][a][s'], rewards and
 *     policy tables [h][s][a]. Step indices are 0-based.
 *   - Infinite concentrability is reported as the IEEE +infinity double.
 */

#ifndef POLYFINE_H
#define POLYFINE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pf_mdp pf_mdp;
typedef struct pf_policy pf_policy;
typedef struct pf_values pf_values;
typedef struct pf_dataset pf_dataset;
typedef struct pf_mixture pf_mixture;

typedef enum pf_status {
    PF_OK = 0,
    PF_ERR_INVALID_ARG = 1,        /* NULL handle or malformed argument */
    PF_ERR_INVALID_MODEL = 2,      /* MDP/policy fails validation */
    PF_ERR_SHAPE_MISMATCH = 3,     /* dimensions disagree */
    PF_ERR_NOT_DETERMINISTIC = 4,  /* deterministic policy required */
    PF_ERR_INVALID_PARAMS = 5,     /* solver/generator parameter out of range */
    PF_ERR_PARSE = 6,              /* malformed file content */
    PF_ERR_IO = 7,                 /* file open/read/write failure */
    PF_ERR_CONFIG = 8,             /* experiment configuration rejected */
    PF_ERR_INSUFFICIENT_DATA = 9,  /* not enough data for the request */
    PF_ERR_NONPOSITIVE_VALUE = 10, /* log-scale fit over nonpositive values */
    PF_ERR_BUDGET = 11,            /* episode budget exceeded */
    PF_ERR_INTERNAL = 12           /* unexpected failure */
} pf_status;

/* Human-readable name of a status code ("PF_ERR_IO", ...). */
const char* pf_status_name(pf_status status);

/* Message for the most recent failure on this thread; empty string if none. */
const char* pf_last_error(void);

/* ------------------------------------------------------------------ models */

pf_status pf_mdp_create(int S, int A, int H, const double* transitions, const double* rewards,
                        const double* initial, pf_mdp** out);
void pf_mdp_free(pf_mdp* mdp);
pf_status pf_mdp_dims(const pf_mdp* mdp, int* S, int* A, int* H);
pf_status pf_mdp_save(const pf_mdp* mdp, const char* path);
pf_status pf_mdp_load(const char* path, pf_mdp** out);

pf_status pf_policy_create(int steps, int S, int A, const double* probs, pf_policy** out);
pf_status pf_policy_uniform(int steps, int S, int A, pf_policy** out);
void pf_policy_free(pf_policy* policy);
pf_status pf_policy_dims(const pf_policy* policy, int* steps, int* S, int* A);
/* Copies steps*S*A probabilities into buf. */
pf_status pf_policy_probs(const pf_policy* policy, double* buf, size_t buf_len);
pf_status pf_policy_save(const pf_policy* policy, const char* path);
pf_status pf_policy_load(const char* path, pf_policy** out);

/* ----------------------------------------------------------------- oracles */

pf_status pf_dp_policy_eval(const pf_mdp* mdp, const pf_policy* policy, pf_values** out);
pf_status pf_dp_optimal(const pf_mdp* mdp, pf_values** out_values, pf_policy** out_policy);
void pf_values_free(pf_values* values);
/* V_h(s) for 0-based h in [0, H]; row H is identically zero. */
pf_status pf_values_get(const pf_values* values, int h, int s, double* out);
pf_status pf_values_q_get(const pf_values* values, int h, int s, int a, double* out);
/* Expectation of V_0 under the MDP's initial distribution. */
pf_status pf_values_initial(const pf_mdp* mdp, const pf_values* values, double* out);

/* Max over steps 1..h_max (1-based) of d^pi_star / d^mu over state-actions. */
pf_status pf_concentrability(const pf_mdp* mdp, const pf_policy* mu, const pf_policy* pi_star,
                             int h_max, double* out);

/* --------------------------------------------------------------- instances */

/* Bandit-style lower-bound family. a_star lists H_bandit*S_bandit actions, or
 * pass NULL to draw them uniformly below K from seed. Any of the three output
 * handles may be NULL if not wanted. */
pf_status pf_hard_instance(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                           uint64_t seed, pf_mdp** out_mdp, pf_policy** out_mu,
                           pf_policy** out_pi_star);
pf_status pf_null_instance(int S_bandit, int H_bandit, int A, pf_mdp** out);
pf_status pf_partial_coverage_instance(int S, int A, int H, int h_star, double gap, pf_mdp** out_mdp,
                                       pf_policy** out_mu, pf_policy** out_pi_star);
pf_status pf_random_instance(int S, int A, int H, uint64_t seed, pf_mdp** out_mdp,
                             pf_policy** out_mu, pf_policy** out_pi_star);
pf_status pf_k_from_cstar(double cstar, int A, int* out);
pf_status pf_subopt_formula(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                            const pf_policy* policy, double* out);
pf_status pf_bandit_loss(int S_bandit, int H_bandit, int A, int K, double tau, const int* a_star,
                         const pf_policy* policy, long long* out);

/* ---------------------------------------------------------------- datasets */

pf_status pf_collect(const pf_mdp* mdp, const pf_policy* policy, long long n, uint64_t seed,
                     pf_dataset** out);
void pf_dataset_free(pf_dataset* dataset);
pf_status pf_dataset_size(const pf_dataset* dataset, long long* out);
pf_status pf_dataset_save(const pf_dataset* dataset, const char* path);
pf_status pf_dataset_load(const char* path, pf_dataset** out);

/* ----------------------------------------------------------------- solvers */

/* Offline solvers; out_values (optional) holds the pessimistic estimates. */
pf_status pf_vi_lcb(const pf_dataset* data, int S, int A, int H, double c, double delta,
                    double iota_override, uint64_t seed, pf_policy** out_policy,
                    pf_values** out_values);
pf_status pf_pevi_adv(const pf_dataset* data, int S, int A, int H, double c, double delta,
                      double iota_override, uint64_t seed, pf_policy** out_policy,
                      pf_values** out_values);
/* Steps above h_star are pinned to v_init (length S, entries in [0,H]). */
pf_status pf_truncated_pevi_adv(const pf_dataset* data, int S, int A, int H, int h_star,
                                const double* v_init, double c, double delta, double iota_override,
                                uint64_t seed, pf_policy** out_policy, pf_values** out_values);

/* Optimistic suffix learner over steps h_star+1..H, spending n episodes with
 * roll_in to the anchor. v_up/v_low/visits are caller buffers of length S (any
 * may be NULL). */
pf_status pf_ucbvi_uplow(const pf_mdp* mdp, const pf_policy* roll_in, int h_star, long long n,
                         double c, double gamma_scale, double delta, uint64_t seed, double* v_up,
                         double* v_low, long long* visits, pf_mixture** out_mixture);

/* Hybrid solver: optimistic suffix stage, then a pessimistic prefix solve on
 * fresh behavior-policy data seeded with the certified lower values. */
pf_status pf_hoovi(const pf_mdp* mdp, const pf_policy* mu, int h_star, long long n, double off_c,
                   double off_delta, double off_iota_override, double on_c, double on_gamma_scale,
                   double on_delta, uint64_t seed, pf_policy** out_prefix, pf_mixture** out_suffix);

void pf_mixture_free(pf_mixture* mixture);
/* Value of the mixture at its anchor step, one entry per state. */
pf_status pf_eval_mixture(const pf_mdp* mdp, const pf_mixture* mixture, double* buf, size_t buf_len);
/* Expected return of (prefix up to the anchor, mixture after). */
pf_status pf_eval_concatenated(const pf_mdp* mdp, const pf_policy* prefix, const pf_mixture* mixture,
                               double* out);

/* ----------------------------------------------------------------- harness */

/* Execute the experiment described by the JSON config file. out_override
 * replaces the config's "out" path when non-NULL. rows_written (optional)
 * receives the number of result rows. pf_run requires a 1x1 (n, seed) grid. */
pf_status pf_run(const char* config_path, const char* out_override, long long* rows_written);
pf_status pf_sweep(const char* config_path, const char* out_override, long long* rows_written);

/* Least-squares slope of log(median suboptimality) vs log(n) from a result
 * CSV produced by pf_run/pf_sweep. */
pf_status pf_slope_csv(const char* csv_path, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* POLYFINE_H */
