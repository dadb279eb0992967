#include "udot/udot.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "udot/alm.hpp"
#include "udot/instance.hpp"
#include "udot/oracle.hpp"
#include "udot/report.hpp"

struct udot_instance {
  udot::Instance inst;
  std::vector<std::string> warnings;
};

struct udot_result {
  udot::Instance inst;
  udot::SolveReport report;
  udot::RunSummary summary;
};

namespace {

thread_local std::string last_error;

udot_status status_of(udot::ErrorCode code) {
  using udot::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError: return UDOT_ERR_PARSE;
    case ErrorCode::Io: return UDOT_ERR_IO;
    case ErrorCode::InfeasibleMassBalance: return UDOT_ERR_INFEASIBLE_MASS_BALANCE;
    case ErrorCode::Infeasible: return UDOT_ERR_INFEASIBLE;
    case ErrorCode::ConvergenceFailure: return UDOT_ERR_NUMERICAL;
    case ErrorCode::InvalidField:
    case ErrorCode::InvalidPoint:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ExitsDomain: return UDOT_ERR_INVALID_ARGUMENT;
  }
  return UDOT_ERR_INTERNAL;
}

template <typename F>
udot_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return UDOT_OK;
  } catch (const udot::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return UDOT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return UDOT_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw udot::Error(udot::ErrorCode::InvalidArgument, what);
}

udot::HamiltonianSpec to_spec(const udot_hamiltonian* h) {
  require(h != nullptr, "null hamiltonian");
  udot::HamiltonianSpec spec;
  switch (h->variant) {
    case UDOT_WFR: spec.variant = udot::Wfr{h->delta}; break;
    case UDOT_BALANCED: spec.variant = udot::Balanced{}; break;
    case UDOT_BOX:
      spec.variant = udot::BoxConstrained{h->delta, h->v_max, h->w_min, h->w_max};
      break;
    default: require(false, "unknown hamiltonian variant");
  }
  spec.validate();
  return spec;
}

udot_termination to_c(udot::Termination t) {
  switch (t) {
    case udot::Termination::Converged: return UDOT_CONVERGED;
    case udot::Termination::MaxIters: return UDOT_MAX_ITERS;
    case udot::Termination::LikelyInfeasible: return UDOT_LIKELY_INFEASIBLE;
    case udot::Termination::NumericalFailure: return UDOT_NUMERICAL_FAILURE;
  }
  return UDOT_NUMERICAL_FAILURE;
}

}  // namespace

extern "C" {

const char* udot_last_error(void) { return last_error.c_str(); }

const char* udot_version(void) { return "0.1.0"; }

const char* udot_termination_name(udot_termination t) {
  switch (t) {
    case UDOT_CONVERGED: return "Converged";
    case UDOT_MAX_ITERS: return "MaxIters";
    case UDOT_LIKELY_INFEASIBLE: return "LikelyInfeasible";
    case UDOT_NUMERICAL_FAILURE: return "NumericalFailure";
  }
  return "Unknown";
}

udot_status udot_instance_load(const char* path, udot_instance** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto h = std::make_unique<udot_instance>();
    h->inst = udot::load_instance(path);
    *out = h.release();
  });
}

udot_status udot_instance_parse(const char* text, udot_instance** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = nullptr;
    auto h = std::make_unique<udot_instance>();
    h->inst = udot::parse_instance(text);
    *out = h.release();
  });
}

void udot_instance_free(udot_instance* inst) { delete inst; }

udot_status udot_instance_write(const udot_instance* inst, const char* path) {
  return guarded([&] {
    require(inst && path, "null argument");
    udot::write_file_atomic(path, udot::write_instance(inst->inst));
  });
}

udot_status udot_instance_set_max_iters(udot_instance* inst, int max_iters) {
  return guarded([&] {
    require(inst != nullptr, "null instance");
    require(max_iters >= 1, "max_iters must be at least 1");
    inst->inst.solver.max_iters = max_iters;
  });
}

udot_status udot_instance_set_r(udot_instance* inst, double r) {
  return guarded([&] {
    require(inst != nullptr, "null instance");
    require(r > 0.0 && std::isfinite(r), "r must be positive and finite");
    inst->inst.solver.r = r;
  });
}

udot_status udot_instance_set_tol_feas(udot_instance* inst, double tol) {
  return guarded([&] {
    require(inst != nullptr, "null instance");
    require(tol > 0.0 && std::isfinite(tol), "tol_feas must be positive and finite");
    inst->inst.solver.tol_feas = tol;
  });
}

udot_status udot_instance_masses(const udot_instance* inst, double* mass0, double* mass1) {
  return guarded([&] {
    require(inst && mass0 && mass1, "null argument");
    *mass0 = inst->inst.measures.mass0();
    *mass1 = inst->inst.measures.mass1();
  });
}

udot_status udot_instance_check(udot_instance* inst, size_t* n_warnings) {
  return guarded([&] {
    require(inst != nullptr, "null instance");
    inst->warnings.clear();
    inst->warnings = udot::check_feasibility(inst->inst);
    if (n_warnings) *n_warnings = inst->warnings.size();
  });
}

const char* udot_instance_warning(const udot_instance* inst, size_t i) {
  if (!inst || i >= inst->warnings.size()) return nullptr;
  return inst->warnings[i].c_str();
}

udot_status udot_solve(const udot_instance* inst, udot_progress_fn progress, void* user,
                       udot_result** out) {
  return guarded([&] {
    require(inst && out, "null argument");
    *out = nullptr;
    udot::check_mass_balance(inst->inst.measures, inst->inst.ham);
    udot::ProgressFn fn;
    if (progress) {
      fn = [progress, user](const udot::IterationRecord& r) {
        const udot_iteration it{r.iter, r.dual_value, r.feas_residual,
                                r.primal_cost, r.gap, r.cg_iterations};
        progress(&it, user);
      };
    }
    auto res = std::make_unique<udot_result>();
    res->inst = inst->inst;
    res->report = udot::solve(inst->inst.measures, inst->inst.ham, inst->inst.solver, fn);
    res->summary = udot::summarize(res->inst, res->report);
    *out = res.release();
  });
}

void udot_result_free(udot_result* res) { delete res; }

udot_status udot_result_summary(const udot_result* res, udot_summary* out) {
  return guarded([&] {
    require(res && out, "null argument");
    const udot::RunSummary& s = res->summary;
    *out = udot_summary{to_c(s.termination), s.iterations,   s.dual_value,
                        s.primal_cost,       s.gap,          s.feas_residual,
                        s.hjb_residual,      s.continuity_residual};
  });
}

const char* udot_result_message(const udot_result* res) {
  return res ? res->summary.message.c_str() : "";
}

udot_status udot_result_write(const udot_result* res, const char* out_dir) {
  return guarded([&] {
    require(res && out_dir, "null argument");
    udot::write_outputs(out_dir, res->inst, res->report, res->summary);
  });
}

udot_status udot_oracle_dirac(int dim, const double* x0, double m0, const double* x1,
                              double m1, const udot_hamiltonian* ham, int steps,
                              double* cost) {
  return guarded([&] {
    require(x0 && x1 && cost, "null argument");
    require(dim == 1 || dim == 2, "dim must be 1 or 2");
    udot::oracle::Point a{0.0, 0.0}, b{0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
      a[k] = x0[k];
      b[k] = x1[k];
    }
    udot::oracle::DiracPairOptions opt;
    opt.steps = steps;
    *cost = udot::oracle::dirac_pair_cost(dim, a, m0, b, m1, to_spec(ham), opt).cost;
  });
}

udot_status udot_oracle_quantile(size_t n0, const double* x0, const double* m0, size_t n1,
                                 const double* x1, const double* m1, double* cost) {
  return guarded([&] {
    require(cost != nullptr, "null argument");
    require((n0 == 0 || (x0 && m0)) && (n1 == 0 || (x1 && m1)), "null array");
    *cost = udot::oracle::quantile_ot_1d({x0, n0}, {m0, n0}, {x1, n1}, {m1, n1});
  });
}

udot_status udot_oracle_lp(size_t J, const double* mu0, const double* mu1, int T,
                           const udot_hamiltonian* ham, int n_alpha, double alpha_max,
                           int n_beta, double beta_min, double beta_max,
                           udot_lp_status* status, double* objective) {
  return guarded([&] {
    require(mu0 && mu1 && status && objective, "null argument");
    const udot::HamiltonianSpec spec = to_spec(ham);
    auto actions =
        udot::oracle::action_grid(spec, n_alpha, alpha_max, n_beta, beta_min, beta_max);
    const auto problem = udot::oracle::build_lp({mu0, J}, {mu1, J}, std::move(actions), T,
                                                static_cast<int>(J), spec);
    const auto sol = udot::oracle::solve_lp(problem);
    *status = sol.status == udot::oracle::LPStatus::Optimal      ? UDOT_LP_OPTIMAL
              : sol.status == udot::oracle::LPStatus::Infeasible ? UDOT_LP_INFEASIBLE
                                                                 : UDOT_LP_UNBOUNDED;
    *objective = sol.objective;
  });
}

}  // extern "C"
