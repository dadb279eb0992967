// udot: command-line front end to the solver's C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "udot/udot.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitConfig = 4;
constexpr int kExitNumerical = 5;

int exit_for(udot_status s) {
  switch (s) {
    case UDOT_OK: return kExitOk;
    case UDOT_ERR_PARSE:
    case UDOT_ERR_INVALID_ARGUMENT:
    case UDOT_ERR_INFEASIBLE_MASS_BALANCE:
    case UDOT_ERR_INFEASIBLE: return kExitConfig;
    case UDOT_ERR_NUMERICAL: return kExitNumerical;
    default: return kExitError;
  }
}

int fail(udot_status s) {
  std::fprintf(stderr, "udot: %s\n", udot_last_error());
  return exit_for(s);
}

struct HamOptions {
  std::string variant = "wfr";
  double delta = 1.0;
  double v_max = 1.0;
  double w_min = 0.0;
  double w_max = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--variant", variant, "wfr, balanced or box")
        ->check(CLI::IsMember({"wfr", "balanced", "box"}))
        ->capture_default_str();
    app->add_option("--delta", delta)->capture_default_str();
    app->add_option("--v-max", v_max)->capture_default_str();
    app->add_option("--w-min", w_min)->capture_default_str();
    app->add_option("--w-max", w_max)->capture_default_str();
  }
  udot_hamiltonian get() const {
    const udot_variant v = variant == "balanced" ? UDOT_BALANCED
                           : variant == "box"    ? UDOT_BOX
                                                 : UDOT_WFR;
    return udot_hamiltonian{v, delta, v_max, w_min, w_max};
  }
};

struct SolveOptions {
  std::string instance;
  std::string out_dir;
  int max_iters = 0;
  double r = 0.0;
  double tol_feas = 0.0;
  bool quiet = false;
};

void print_progress(const udot_iteration* it, void*) {
  if (it->iter % 100 == 0)
    std::fprintf(stderr, "iter %6d  dual %.10g  primal %.10g  gap %.3e  feas %.3e\n",
                 it->iter, it->dual_value, it->primal_cost, it->gap, it->feas_residual);
}

int run_solve(const SolveOptions& o) {
  udot_instance* inst = nullptr;
  udot_status s = udot_instance_load(o.instance.c_str(), &inst);
  if (s != UDOT_OK) return fail(s);
  std::unique_ptr<udot_instance, decltype(&udot_instance_free)> guard(inst, udot_instance_free);

  if (o.max_iters > 0 && (s = udot_instance_set_max_iters(inst, o.max_iters)) != UDOT_OK)
    return fail(s);
  if (o.r != 0.0 && (s = udot_instance_set_r(inst, o.r)) != UDOT_OK) return fail(s);
  if (o.tol_feas != 0.0 && (s = udot_instance_set_tol_feas(inst, o.tol_feas)) != UDOT_OK)
    return fail(s);

  std::size_t n_warn = 0;
  if ((s = udot_instance_check(inst, &n_warn)) != UDOT_OK) return fail(s);
  for (std::size_t i = 0; i < n_warn; ++i)
    std::fprintf(stderr, "warning: %s\n", udot_instance_warning(inst, i));

  udot_result* res = nullptr;
  s = udot_solve(inst, o.quiet ? nullptr : print_progress, nullptr, &res);
  if (s != UDOT_OK) return fail(s);
  std::unique_ptr<udot_result, decltype(&udot_result_free)> rguard(res, udot_result_free);

  if ((s = udot_result_write(res, o.out_dir.c_str())) != UDOT_OK) return fail(s);
  udot_summary sum{};
  udot_result_summary(res, &sum);
  std::printf("%s after %d iterations: primal %.10g dual %.10g gap %.3e\n",
              udot_termination_name(sum.termination), sum.iterations, sum.primal_cost,
              sum.dual_value, sum.gap);
  const char* msg = udot_result_message(res);
  if (msg && *msg) std::fprintf(stderr, "udot: %s\n", msg);
  switch (sum.termination) {
    case UDOT_CONVERGED: return kExitOk;
    case UDOT_LIKELY_INFEASIBLE: return kExitInfeasible;
    case UDOT_MAX_ITERS: return kExitMaxIters;
    case UDOT_NUMERICAL_FAILURE: return kExitNumerical;
  }
  return kExitError;
}

int run_check(const std::string& path) {
  udot_instance* inst = nullptr;
  udot_status s = udot_instance_load(path.c_str(), &inst);
  if (s != UDOT_OK) return fail(s);
  std::unique_ptr<udot_instance, decltype(&udot_instance_free)> guard(inst, udot_instance_free);
  std::size_t n_warn = 0;
  if ((s = udot_instance_check(inst, &n_warn)) != UDOT_OK) return fail(s);
  for (std::size_t i = 0; i < n_warn; ++i)
    std::printf("warning: %s\n", udot_instance_warning(inst, i));
  if (n_warn == 0) std::printf("ok\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical unbalanced optimal transport solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(udot_version()));

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Solve an instance and write a report");
  solve->add_option("instance", so.instance)->required()->check(CLI::ExistingFile);
  solve->add_option("--out", so.out_dir, "Output directory")->required();
  solve->add_option("--max-iters", so.max_iters)->check(CLI::PositiveNumber);
  solve->add_option("--r", so.r, "Augmentation parameter")->check(CLI::PositiveNumber);
  solve->add_option("--tol-feas", so.tol_feas)->check(CLI::PositiveNumber);
  solve->add_flag("--quiet", so.quiet, "No per-iteration progress");

  std::string check_path;
  auto* check = app.add_subcommand("check", "Report necessary feasibility conditions");
  check->add_option("instance", check_path)->required()->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "Reference solutions");
  oracle->require_subcommand(1);

  HamOptions dirac_ham;
  int dirac_dim = 1, dirac_steps = 200;
  std::vector<double> dx0, dx1;
  double dm0 = 1.0, dm1 = 1.0;
  auto* dirac = oracle->add_subcommand("dirac", "Single-particle transcription cost");
  dirac->add_option("--dim", dirac_dim)->check(CLI::Range(1, 2))->capture_default_str();
  dirac->add_option("--x0", dx0)->required()->expected(1, 2);
  dirac->add_option("--x1", dx1)->required()->expected(1, 2);
  dirac->add_option("--m0", dm0)->capture_default_str();
  dirac->add_option("--m1", dm1)->capture_default_str();
  dirac->add_option("--steps", dirac_steps)->check(CLI::PositiveNumber)->capture_default_str();
  dirac_ham.add_to(dirac);

  std::vector<double> qx0, qm0, qx1, qm1;
  auto* quantile = oracle->add_subcommand("quantile", "1-D balanced transport cost");
  quantile->add_option("--x0", qx0)->required();
  quantile->add_option("--m0", qm0)->required();
  quantile->add_option("--x1", qx1)->required();
  quantile->add_option("--m1", qm1)->required();

  HamOptions lp_ham;
  std::vector<double> lmu0, lmu1;
  int lp_T = 8, n_alpha = 5, n_beta = 5;
  double alpha_max = 1.0, beta_min = -1.0, beta_max = 1.0;
  auto* lp = oracle->add_subcommand("lp", "Occupation-measure LP on [0,1]");
  lp->add_option("--mu0", lmu0, "Node masses at t = 0")->required();
  lp->add_option("--mu1", lmu1, "Node masses at t = 1")->required();
  lp->add_option("--steps", lp_T)->check(CLI::Range(1, 16))->capture_default_str();
  lp->add_option("--n-alpha", n_alpha)->capture_default_str();
  lp->add_option("--alpha-max", alpha_max)->capture_default_str();
  lp->add_option("--n-beta", n_beta)->capture_default_str();
  lp->add_option("--beta-min", beta_min)->capture_default_str();
  lp->add_option("--beta-max", beta_max)->capture_default_str();
  lp_ham.add_to(lp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*solve) return run_solve(so);
  if (*check) return run_check(check_path);

  if (*dirac) {
    if (static_cast<int>(dx0.size()) != dirac_dim || static_cast<int>(dx1.size()) != dirac_dim) {
      std::fprintf(stderr, "udot: --x0 and --x1 need %d coordinate(s)\n", dirac_dim);
      return kExitConfig;
    }
    const udot_hamiltonian h = dirac_ham.get();
    double cost = 0.0;
    const udot_status s =
        udot_oracle_dirac(dirac_dim, dx0.data(), dm0, dx1.data(), dm1, &h, dirac_steps, &cost);
    if (s != UDOT_OK) return fail(s);
    std::printf("%.17g\n", cost);
    return kExitOk;
  }
  if (*quantile) {
    if (qx0.size() != qm0.size() || qx1.size() != qm1.size()) {
      std::fprintf(stderr, "udot: positions and masses differ in length\n");
      return kExitConfig;
    }
    double cost = 0.0;
    const udot_status s = udot_oracle_quantile(qx0.size(), qx0.data(), qm0.data(), qx1.size(),
                                               qx1.data(), qm1.data(), &cost);
    if (s != UDOT_OK) return fail(s);
    std::printf("%.17g\n", cost);
    return kExitOk;
  }
  if (*lp) {
    if (lmu0.size() != lmu1.size()) {
      std::fprintf(stderr, "udot: --mu0 and --mu1 differ in length\n");
      return kExitConfig;
    }
    const udot_hamiltonian h = lp_ham.get();
    udot_lp_status st = UDOT_LP_INFEASIBLE;
    double obj = 0.0;
    const udot_status s = udot_oracle_lp(lmu0.size(), lmu0.data(), lmu1.data(), lp_T, &h,
                                         n_alpha, alpha_max, n_beta, beta_min, beta_max, &st,
                                         &obj);
    if (s != UDOT_OK) return fail(s);
    if (st != UDOT_LP_OPTIMAL) {
      std::printf("%s\n", st == UDOT_LP_INFEASIBLE ? "Infeasible" : "Unbounded");
      return kExitInfeasible;
    }
    std::printf("%.17g\n", obj);
    return kExitOk;
  }
  return kExitError;
}
