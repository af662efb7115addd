#ifndef CRNSIM_H
#define CRNSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CrnStatus {
  CRN_STATUS_OK = 0,
  CRN_STATUS_INVALID = 1,
  CRN_STATUS_IO = 2,
  CRN_STATUS_PARSE = 3,
  CRN_STATUS_NULL_POINTER = 4,
  CRN_STATUS_PANIC = 5,
} CrnStatus;

typedef enum CrnModel {
  CRN_MODEL_MARKOV = 0,
  CRN_MODEL_POISSON = 1,
} CrnModel;

// Opaque packet-count PMF handle.
typedef struct CrnPmf CrnPmf;

// Opaque scenario handle.
typedef struct CrnScenario CrnScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `len > 0`). Returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t crn_last_error(char *buf, size_t len);

// The bundled baseline scenario. Never null.
struct CrnScenario *crn_scenario_baseline(void);

// Loads a scenario JSON file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum CrnStatus crn_scenario_load(const char *path, struct CrnScenario **out);

// # Safety
// `scenario` must be null or a handle from this library, freed at most once.
void crn_scenario_free(struct CrnScenario *scenario);

// Default link size of the scenario, 0 for a null handle.
//
// # Safety
// `scenario` must be null or a live handle.
size_t crn_scenario_subchannels(const struct CrnScenario *scenario);

// Packet-count PMF of the link built from the first `s` pool entries.
// `lambdas` (length `n_lambdas`) overrides the pool's Poisson rates when
// non-null.
//
// # Safety
// Pointers must be null or valid for the stated lengths; `out` writable.
enum CrnStatus crn_link_pmf(const struct CrnScenario *scenario,
                            enum CrnModel model,
                            const double *lambdas,
                            size_t n_lambdas,
                            size_t s,
                            struct CrnPmf **out);

// # Safety
// `pmf` must be null or a handle from this library, freed at most once.
void crn_pmf_free(struct CrnPmf *pmf);

// Number of bins (`k_max + 1`), 0 for a null handle.
//
// # Safety
// `pmf` must be null or a live handle.
size_t crn_pmf_len(const struct CrnPmf *pmf);

// Copies `min(len, crn_pmf_len)` masses into `out`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum CrnStatus crn_pmf_masses(const struct CrnPmf *pmf, double *out, size_t len);

// `P(packets >= needed)`.
//
// # Safety
// `pmf` must be a live handle; `out` writable.
enum CrnStatus crn_pmf_success(const struct CrnPmf *pmf, uint64_t needed, double *out);

// Encoded packets needed for `k` source packets.
//
// # Safety
// `out` must be writable.
enum CrnStatus crn_required_packets(uint64_t k, uint64_t *out);

// # Safety
// `out` must be writable.
enum CrnStatus crn_collision_probability(double p,
                                         double q,
                                         uint32_t slots,
                                         uint32_t degree,
                                         uint32_t links,
                                         double *out);

// Spectral efficiency of an `s`-subchannel link under the scenario's coding
// and link constants.
//
// # Safety
// `scenario` must be a live handle; `out` writable.
enum CrnStatus crn_spectral_efficiency(const struct CrnScenario *scenario,
                                       size_t s,
                                       double p_success,
                                       double p_collision,
                                       double *out);

// Grid search for the foreign-slot probability under the scenario's access
// parameters.
//
// # Safety
// `scenario` must be a live handle; outputs writable.
enum CrnStatus crn_optimize_p(const struct CrnScenario *scenario,
                              double grid_step,
                              double *out_p,
                              double *out_value);

// Monte-Carlo estimate of `P_success` for the `s`-subchannel link.
//
// # Safety
// As for [`crn_link_pmf`]; outputs writable.
enum CrnStatus crn_estimate_success(const struct CrnScenario *scenario,
                                    enum CrnModel model,
                                    const double *lambdas,
                                    size_t n_lambdas,
                                    size_t s,
                                    uint64_t trials,
                                    uint64_t seed,
                                    double *out_mean,
                                    double *out_std_error);

// Empirical LT decoding error probability.
//
// # Safety
// `out` must be writable.
enum CrnStatus crn_lt_measure_dep(size_t k,
                                  double c,
                                  double delta,
                                  double overhead,
                                  uint64_t trials,
                                  uint64_t seed,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRNSIM_H */
