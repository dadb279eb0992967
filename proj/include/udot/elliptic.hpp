#pragma once

// Step 1 of the augmented Lagrangian loop: the exact minimizer over phi of the
// discrete augmented Lagrangian, i.e. the normal equations
//     r D^T D phi = D^T (r q - lambda) - g,
// solved matrix-free by conjugate gradients in the weighted inner product.

#include <optional>

#include "udot/grid.hpp"

namespace udot {

// Spectral applies the inverse of r D^T D through per-axis eigenbases of the
// 1-D normal operators (the operator is a Kronecker sum), so CG typically
// needs one or two iterations.
enum class Preconditioner { None, Diagonal, Spectral };

struct CGConfig {
  double tol_rel = 1e-10;
  int max_cg_iters = 0;  // 0 means 10 * node_count
  Preconditioner preconditioner = Preconditioner::Spectral;

  bool operator==(const CGConfig&) const = default;
};

struct EllipticProblem {
  GridSpec grid;
  Field rhs;
  double r = 1.0;
};

struct CGResult {
  Field phi;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Node field g with <g, phi>_w = sum mu0 phi(0,.) - sum mu1 phi(1,.).
Field build_gvec(const MeasurePair& measures);

// Diagonal of D^T D (as an operator on node values), used for preconditioning.
std::vector<double> delta_normal_diagonal(const GridSpec& grid);

// Solves r D^T D phi = rhs. `initial` is an optional warm start.
// Throws ConvergenceFailure when max_cg_iters is exhausted.
CGResult solve_elliptic(const EllipticProblem& problem, const CGConfig& cfg,
                        const Field* initial = nullptr);

Field step1_rhs(const Field& q_prev, const Field& lambda, const Field& gvec,
                double r);

Field solve_step1(const Field& q_prev, const Field& lambda,
                  const MeasurePair& measures, double r, const CGConfig& cfg);

}  // namespace udot
