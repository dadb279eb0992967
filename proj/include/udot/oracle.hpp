#pragma once

// Independent reference solutions used to validate the solver: particle
// characteristics, 1-D monotone rearrangement, single-particle direct
// transcription and a small occupation-measure linear program.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "udot/grid.hpp"
#include "udot/hamiltonian.hpp"

namespace udot::oracle {

using Point = std::array<double, 2>;
using VelocityFn = std::function<Point(double t, const Point& x)>;
using ScalarFn = std::function<double(double t, const Point& x)>;

struct Domain {
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  static Domain of(const GridSpec& g) { return {g.dim, g.x_lo, g.x_hi}; }
  bool contains(const Point& x) const;
};

struct ParticleState {
  Point x{0.0, 0.0};
  double logm = 0.0;
  double t = 0.0;
};

// RK4 for x' = v(t,x), (log m)' = w(t,x) from t_start to t_end (either
// direction) in `steps` equal steps. Returns steps + 1 states.
// Throws ExitsDomain when the trajectory leaves the domain.
std::vector<ParticleState> characteristic_solve(const Domain& domain,
                                                const Point& x0, double m0,
                                                const VelocityFn& v,
                                                const ScalarFn& w, int steps,
                                                double t_start = 0.0,
                                                double t_end = 1.0);

// Density of the exact solution of d_t mu + div(mu v) = w mu at every node,
// from the initial density rho0: trace each node back to t = 0 and integrate
// (w - div v) along the way.
Field characteristic_density(const GridSpec& grid,
                             const std::function<double(const Point&)>& rho0,
                             const VelocityFn& v, const ScalarFn& w,
                             const ScalarFn& div_v, int steps_per_unit_time);

// 1/2 int_0^M |F0^-1(s) - F1^-1(s)|^2 ds for two discrete measures on the
// line, M the common total mass. Throws InfeasibleMassBalance when the masses
// differ by more than 1e-9 relative.
double quantile_ot_1d(std::span<const double> x0, std::span<const double> m0,
                      std::span<const double> x1, std::span<const double> m1);

struct DiracPairOptions {
  int steps = 200;
  int restarts = 5;
  std::uint64_t seed = 7;
  double grad_tol = 1e-8;
  int max_iters = 200000;
};

struct DiracPairResult {
  double cost = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
  std::vector<Point> velocity;  // per step
  std::vector<double> growth;   // per step
};

// Cheapest way to move a single Dirac mass m0 at x0 to m1 at x1 under
// piecewise-constant controls on N steps. Each step's cost is the exact
// integral of L(v,w) m(t) over the step. Throws Error(Infeasible) if the
// endpoints cannot be joined within F.
DiracPairResult dirac_pair_cost(int dim, const Point& x0, double m0,
                                const Point& x1, double m1,
                                const HamiltonianSpec& ham,
                                const DiracPairOptions& options = {});

struct Action {
  double alpha = 0.0;  // velocity
  double beta = 0.0;   // growth rate
};

// Uniform action grid: n_alpha velocities in [-alpha_max, alpha_max] and
// n_beta growth rates in [beta_min, beta_max], filtered by membership in F.
std::vector<Action> action_grid(const HamiltonianSpec& ham, int n_alpha,
                                double alpha_max, int n_beta, double beta_min,
                                double beta_max);

// Generalized min-cost flow on a (T+1) x J layered graph of 1-D nodes
// x_j = lo + j (hi - lo) / (J - 1). mass(t, j, a) moves from node j at level t
// to x_j + alpha dt (split linearly between the two neighbouring nodes) and is
// multiplied by exp(beta dt). Cost per unit starting mass is
// L(alpha, beta) dt (e^{beta dt} - 1) / (beta dt).
struct LPProblem {
  int T = 0;
  int J = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Action> actions;
  std::vector<double> mu0;
  std::vector<double> mu1;

  // Dense equality form A x = b, x >= 0, minimize c.x
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;  // row-major
  std::vector<double> b;
  std::vector<double> c;
  struct Var {
    int t;
    int j;
    int a;
  };
  std::vector<Var> vars;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> mass;  // one per LPProblem::vars entry
  double balance_residual = 0.0;
  int pivots = 0;
};

// Desk scale only: T <= 16, J <= 32, |actions| <= 25.
LPProblem build_lp(std::span<const double> mu0, std::span<const double> mu1,
                   std::vector<Action> actions, int T, int J,
                   const HamiltonianSpec& ham, double lo = 0.0,
                   double hi = 1.0);

LPSolution solve_lp(const LPProblem& problem);

// Dense two-phase simplex with Bland's rule on A x = b, x >= 0.
struct SimplexResult {
  LPStatus status = LPStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};
SimplexResult simplex(std::size_t rows, std::size_t cols,
                      std::span<const double> A, std::span<const double> b,
                      std::span<const double> c);

}  // namespace udot::oracle
