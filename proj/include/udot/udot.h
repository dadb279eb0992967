#ifndef UDOT_H
#define UDOT_H

/* C interface to the unbalanced dynamical transport solver.
 *
 * Every function returns a udot_status; on failure udot_last_error() holds a
 * one-line message for the calling thread. Handles are opaque and must be
 * released with the matching *_free function. */

#include <stddef.h>

#if defined(_WIN32)
#  ifdef UDOT_BUILDING
#    define UDOT_API __declspec(dllexport)
#  else
#    define UDOT_API __declspec(dllimport)
#  endif
#else
#  define UDOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum udot_status {
  UDOT_OK = 0,
  UDOT_ERR_INVALID_ARGUMENT = 1,
  UDOT_ERR_PARSE = 2,
  UDOT_ERR_IO = 3,
  UDOT_ERR_INFEASIBLE_MASS_BALANCE = 4,
  UDOT_ERR_INFEASIBLE = 5,
  UDOT_ERR_NUMERICAL = 6,
  UDOT_ERR_INTERNAL = 7
} udot_status;

typedef enum udot_termination {
  UDOT_CONVERGED = 0,
  UDOT_MAX_ITERS = 1,
  UDOT_LIKELY_INFEASIBLE = 2,
  UDOT_NUMERICAL_FAILURE = 3
} udot_termination;

typedef enum udot_variant {
  UDOT_WFR = 0,
  UDOT_BALANCED = 1,
  UDOT_BOX = 2
} udot_variant;

typedef enum udot_lp_status {
  UDOT_LP_OPTIMAL = 0,
  UDOT_LP_INFEASIBLE = 1,
  UDOT_LP_UNBOUNDED = 2
} udot_lp_status;

typedef struct udot_instance udot_instance;
typedef struct udot_result udot_result;

typedef struct udot_hamiltonian {
  udot_variant variant;
  double delta; /* WFR, box */
  double v_max; /* box */
  double w_min; /* box */
  double w_max; /* box */
} udot_hamiltonian;

typedef struct udot_iteration {
  int iter;
  double dual_value;
  double feas_residual;
  double primal_cost;
  double gap;
  int cg_iterations;
} udot_iteration;

typedef struct udot_summary {
  udot_termination termination;
  int iterations;
  double dual_value;
  double primal_cost;
  double gap;
  double feas_residual;
  double hjb_residual;
  double continuity_residual;
} udot_summary;

typedef void (*udot_progress_fn)(const udot_iteration* it, void* user);

UDOT_API const char* udot_last_error(void);
UDOT_API const char* udot_version(void);
UDOT_API const char* udot_termination_name(udot_termination t);

/* Instances */
UDOT_API udot_status udot_instance_load(const char* path, udot_instance** out);
UDOT_API udot_status udot_instance_parse(const char* text, udot_instance** out);
UDOT_API void udot_instance_free(udot_instance* inst);
UDOT_API udot_status udot_instance_write(const udot_instance* inst, const char* path);
UDOT_API udot_status udot_instance_set_max_iters(udot_instance* inst, int max_iters);
UDOT_API udot_status udot_instance_set_r(udot_instance* inst, double r);
UDOT_API udot_status udot_instance_set_tol_feas(udot_instance* inst, double tol);
UDOT_API udot_status udot_instance_masses(const udot_instance* inst, double* mass0,
                                          double* mass1);

/* Runs the necessary feasibility checks. A Balanced mass mismatch returns
 * UDOT_ERR_INFEASIBLE_MASS_BALANCE; other failed conditions are warnings,
 * readable with udot_instance_warning until the next check. */
UDOT_API udot_status udot_instance_check(udot_instance* inst, size_t* n_warnings);
UDOT_API const char* udot_instance_warning(const udot_instance* inst, size_t i);

/* Solving. The progress callback (optional) runs once per iteration. */
UDOT_API udot_status udot_solve(const udot_instance* inst, udot_progress_fn progress,
                                void* user, udot_result** out);
UDOT_API void udot_result_free(udot_result* res);
UDOT_API udot_status udot_result_summary(const udot_result* res, udot_summary* out);
UDOT_API const char* udot_result_message(const udot_result* res);
/* Writes report.json, metrics.csv and the eleven mu_t{k}.f64 snapshots. */
UDOT_API udot_status udot_result_write(const udot_result* res, const char* out_dir);

/* Reference solutions */
UDOT_API udot_status udot_oracle_dirac(int dim, const double* x0, double m0,
                                       const double* x1, double m1,
                                       const udot_hamiltonian* ham, int steps,
                                       double* cost);
UDOT_API udot_status udot_oracle_quantile(size_t n0, const double* x0, const double* m0,
                                          size_t n1, const double* x1, const double* m1,
                                          double* cost);
/* Occupation-measure LP on J nodes of [0,1] with T steps and a uniform action
 * grid (n_alpha velocities in [-alpha_max, alpha_max], n_beta growth rates
 * in [beta_min, beta_max]) restricted to the control set. */
UDOT_API udot_status udot_oracle_lp(size_t J, const double* mu0, const double* mu1,
                                    int T, const udot_hamiltonian* ham, int n_alpha,
                                    double alpha_max, int n_beta, double beta_min,
                                    double beta_max, udot_lp_status* status,
                                    double* objective);

#ifdef __cplusplus
}
#endif

#endif /* UDOT_H */
