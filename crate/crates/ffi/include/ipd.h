/* Generated by cbindgen. Do not edit. */

#ifndef IPD_H
#define IPD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define IPD_STRATEGY_FR 0

#define IPD_STRATEGY_FMC 1

#define IPD_STRATEGY_FMD 2

#define IPD_STRATEGY_FMU 3

#define IPD_STRATEGY_FLP 4

#define IPD_STRATEGY_FMP 5

typedef enum IpdStatus {
  IPD_STATUS_OK = 0,
  IPD_STATUS_NULL_POINTER = 1,
  IPD_STATUS_INVALID_ARGUMENT = 2,
  IPD_STATUS_INVALID_PAYOFFS = 3,
  /**
   * The requested payoff ratio has a zero or missing denominator.
   */
  IPD_STATUS_DEGENERATE_RATIO = 4,
  IPD_STATUS_PANIC = 5,
} IpdStatus;

/**
 * A validated simulation environment.
 */
typedef struct IpdEnvironment IpdEnvironment;

/**
 * The outcome of one realization.
 */
typedef struct IpdRealization IpdRealization;

typedef struct IpdPayoffs {
  double temptation;
  double reward;
  double punishment;
  double sucker;
} IpdPayoffs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ipd_version(void);

/**
 * Static description of a status code. Takes a plain integer so any value
 * coming from C is safe to pass.
 */
const char *ipd_status_message(int32_t status);

/**
 * `(c + 1) / (c + d + 2)`.
 */
double ipd_perceived_ratio(uint32_t coop_count, uint32_t defect_count);

/**
 * T = 5, R = 3, P = 1, S = 0.
 */
struct IpdPayoffs ipd_payoffs_default(void);

/**
 * # Safety
 * `payoffs` must be null or point to a valid `IpdPayoffs`.
 */
enum IpdStatus ipd_payoffs_validate(const struct IpdPayoffs *payoffs);

/**
 * Homogeneous population: every agent uses `strategy` (one of the
 * `IPD_STRATEGY_*` values), `agents_per_rho` agents per cooperation level.
 * A null `payoffs` selects the defaults.
 *
 * # Safety
 * `payoffs` must be null or valid; `out` must be a valid pointer.
 */
enum IpdStatus ipd_environment_new_homogeneous(uint32_t strategy,
                                               uintptr_t agents_per_rho,
                                               double mu,
                                               uint32_t tau,
                                               const struct IpdPayoffs *payoffs,
                                               uint64_t seed,
                                               struct IpdEnvironment **out);

/**
 * The 126-agent mixed population, 21 agents per strategy.
 *
 * # Safety
 * `payoffs` must be null or valid; `out` must be a valid pointer.
 */
enum IpdStatus ipd_environment_new_heterogeneous(double mu,
                                                 uint32_t tau,
                                                 const struct IpdPayoffs *payoffs,
                                                 uint64_t seed,
                                                 struct IpdEnvironment **out);

/**
 * # Safety
 * `env` must be null or a handle not yet freed.
 */
void ipd_environment_free(struct IpdEnvironment *env);

/**
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum IpdStatus ipd_environment_agent_count(const struct IpdEnvironment *env, uintptr_t *out);

/**
 * Runs one realization seeded from the environment.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum IpdStatus ipd_run_realization(const struct IpdEnvironment *env, struct IpdRealization **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void ipd_realization_free(struct IpdRealization *r);

/**
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum IpdStatus ipd_realization_agent_count(const struct IpdRealization *r, uintptr_t *out);

/**
 * Copies total payoffs, indexed by agent id, into `buf`. `len` must be at
 * least the agent count.
 *
 * # Safety
 * `r` must be a live handle and `buf` valid for `len` writes.
 */
enum IpdStatus ipd_realization_payoffs(const struct IpdRealization *r, double *buf, uintptr_t len);

/**
 * Total, played and refused round counts. Any out-pointer may be null.
 *
 * # Safety
 * `r` must be a live handle; non-null out-pointers must be valid.
 */
enum IpdStatus ipd_realization_rounds(const struct IpdRealization *r,
                                      uint64_t *total,
                                      uint64_t *played,
                                      uint64_t *refused);

/**
 * Mean payoff of cooperators (`rho > 0.5`) over the population mean.
 *
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum IpdStatus ipd_payoff_ratio_cooperators(const struct IpdRealization *r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPD_H */
