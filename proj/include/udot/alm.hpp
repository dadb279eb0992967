#pragma once

// Augmented Lagrangian iteration on the dual (HJB subsolution) problem:
//   1. phi^k  = argmin_phi L_r(phi, q^{k-1}, lambda^k)     (elliptic solve)
//   2. q^k    = P_{K_H}(lambda^k / r + D phi^k)             (pointwise)
//   3. lambda^{k+1} = lambda^k + r (D phi^k - q^k)

#include <functional>
#include <string>
#include <vector>

#include "udot/elliptic.hpp"
#include "udot/grid.hpp"
#include "udot/hamiltonian.hpp"

namespace udot {

struct SolverConfig {
  double r = 1.0;
  int max_iters = 2000;
  double tol_feas = 1e-5;
  double tol_obj = 1e-7;
  int obj_window = 25;
  double divergence_bound = 1e8;
  double mass_floor_rel = 1e-9;
  CGConfig cg;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

enum class Termination { Converged, MaxIters, LikelyInfeasible, NumericalFailure };

const char* to_string(Termination t) noexcept;

struct IterationRecord {
  int iter = 0;
  double dual_value = 0.0;
  double feas_residual = 0.0;
  double primal_cost = 0.0;
  double gap = 0.0;
  int cg_iterations = 0;
};

struct AlmState {
  Field phi;
  Field q;
  Field lambda;
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  Termination termination = Termination::MaxIters;
  std::string message;
  AlmState state;
};

// Throws Error(InfeasibleMassBalance) for Balanced instances whose masses
// differ by more than 1e-6 relative.
void check_mass_balance(const MeasurePair& measures,
                        const HamiltonianSpec& ham);

AlmState initialize(const MeasurePair& measures, const HamiltonianSpec& ham,
                    const SolverConfig& cfg);

// sum mu1 phi(1,.) - sum mu0 phi(0,.)
double dual_value(const Field& phi, const MeasurePair& measures);

// max over nodes of (d_t phi + H(grad phi, phi))_+
double hjb_residual(const Field& phi, const HamiltonianSpec& ham);

// max over nodes of (a + H(b, c))_+ for a stacked field.
double kh_violation(const Field& q, const HamiltonianSpec& ham);

// Pointwise projection of a stacked field onto K_H.
void project_field(const HamiltonianSpec& ham, const Field& y, Field& out);

double relative_gap(double primal, double dual);

// Stepwise driver; `solve` runs it to termination.
class AlmSolver {
 public:
  AlmSolver(MeasurePair measures, HamiltonianSpec ham, SolverConfig cfg);

  // One pass of steps 1-3. Throws ConvergenceFailure if the inner solve fails.
  IterationRecord step();

  const AlmState& state() const { return state_; }
  // D phi^k and q^k of the last completed step.
  const Field& last_delta_phi() const { return delta_phi_; }
  const MeasurePair& measures() const { return measures_; }
  const HamiltonianSpec& hamiltonian() const { return ham_; }
  const SolverConfig& config() const { return cfg_; }
  int iteration() const { return iter_; }

 private:
  MeasurePair measures_;
  HamiltonianSpec ham_;
  SolverConfig cfg_;
  AlmState state_;
  Field gvec_;
  Field delta_phi_;
  std::vector<double> weights_;
  int iter_ = 0;
};

using ProgressFn = std::function<void(const IterationRecord&)>;

SolveReport solve(const MeasurePair& measures, const HamiltonianSpec& ham,
                  const SolverConfig& cfg, const ProgressFn& progress = {});

}  // namespace udot
