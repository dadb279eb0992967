#include "udot/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>

namespace udot {

namespace {

// D^T D is the Kronecker sum T_t (+) T_x (+) T_y + I of 1-D operators
// T = W^-1 D_1^T W D_1. Each T is self-adjoint in its weighted inner product,
// so S = W^1/2 T W^-1/2 is symmetric with S = U diag(eig) U^T and the whole
// operator is diagonalized by the per-axis maps P = U^T W^1/2.
class SeparableInverse {
 public:
  SeparableInverse(const GridSpec& g, double r) : grid_(g) {
    axes_.push_back(make_axis(g.nodes_t(), g.h_t(), true));
    for (int k = 0; k < g.dim; ++k) axes_.push_back(make_axis(g.nodes_x(), g.h_x(k), false));

    const int nt = g.nodes_t();
    const int nx = g.nodes_x();
    const int ny = g.dim == 2 ? nx : 1;
    inv_eig_.resize(g.node_count());
    for (int it = 0; it < nt; ++it)
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          double lam = 1.0 + axes_[0].eig[it] + axes_[1].eig[ix];
          if (g.dim == 2) lam += axes_[2].eig[iy];
          inv_eig_[(static_cast<std::size_t>(it) * ny + iy) * nx + ix] = 1.0 / (r * lam);
        }
  }

  void apply(const std::vector<double>& in, std::vector<double>& out) {
    work_.assign(in.begin(), in.end());
    transform(work_, /*forward=*/true);
    for (std::size_t n = 0; n < work_.size(); ++n) work_[n] *= inv_eig_[n];
    transform(work_, /*forward=*/false);
    out.assign(work_.begin(), work_.end());
  }

 private:
  struct Axis {
    Eigen::MatrixXd forward;   // U^T W^1/2
    Eigen::MatrixXd backward;  // W^-1/2 U
    Eigen::VectorXd eig;
  };

  // Mirrors apply_delta and GridSpec::time_weight.
  static Axis make_axis(int n, double h, bool time) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    const double s = 1.0 / (2.0 * h);
    D(0, 0) = -3.0 * s; D(0, 1) = 4.0 * s; D(0, 2) = -s;
    D(n - 1, n - 3) = s; D(n - 1, n - 2) = -4.0 * s; D(n - 1, n - 1) = 3.0 * s;
    for (int i = 1; i < n - 1; ++i) { D(i, i - 1) = -s; D(i, i + 1) = s; }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (time && n > 3) {
      w(1) = w(n - 2) = 1.25;
      w(0) = w(n - 1) = 0.25;
    } else {
      w(0) = w(n - 1) = 0.5;
    }
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd B = sw.asDiagonal() * D * sw.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
    Axis ax;
    ax.eig = es.eigenvalues().cwiseMax(0.0);
    ax.forward = es.eigenvectors().transpose() * sw.asDiagonal();
    ax.backward = sw.cwiseInverse().asDiagonal() * es.eigenvectors();
    return ax;
  }

  // Applies the per-axis map to the node array laid out as [t][y][x].
  void transform(std::vector<double>& v, bool forward) {
    const int nt = grid_.nodes_t();
    const int nx = grid_.nodes_x();
    const int ny = grid_.dim == 2 ? nx : 1;
    const std::size_t S = static_cast<std::size_t>(nx) * ny;
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    auto pick = [&](const Axis& a) -> const Eigen::MatrixXd& {
      return forward ? a.forward : a.backward;
    };
    // Time axis: [nt x S] block, multiply from the left.
    {
      Eigen::Map<RowMat> X(v.data(), nt, static_cast<Eigen::Index>(S));
      tmp_.noalias() = pick(axes_[0]) * X;
      X = tmp_;
    }
    // x axis: [nt*ny x nx], multiply from the right by the transpose.
    {
      Eigen::Map<RowMat> X(v.data(), static_cast<Eigen::Index>(nt) * ny, nx);
      tmp_.noalias() = X * pick(axes_[1]).transpose();
      X = tmp_;
    }
    if (grid_.dim == 2) {
      for (int it = 0; it < nt; ++it) {
        Eigen::Map<RowMat> X(v.data() + it * S, ny, nx);
        tmp_.noalias() = pick(axes_[2]) * X;
        X = tmp_;
      }
    }
  }

  GridSpec grid_;
  std::vector<Axis> axes_;
  std::vector<double> inv_eig_;
  std::vector<double> work_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tmp_;
};

}  // namespace

Field build_gvec(const MeasurePair& measures) {
  measures.validate_shape();
  const GridSpec& g = measures.grid;
  Field out = Field::scalar(g);
  const auto ws = g.spatial_weights();
  const double wt0 = g.time_weight(0);
  const double wt1 = g.time_weight(g.n_t);
  for (std::size_t s = 0; s < ws.size(); ++s) {
    out(0, g.node(0, s)) += measures.mu0[s] / (wt0 * ws[s]);
    out(0, g.node(g.n_t, s)) -= measures.mu1[s] / (wt1 * ws[s]);
  }
  return out;
}

std::vector<double> delta_normal_diagonal(const GridSpec& grid) {
  // Column sums of squared stencil coefficients, weighted as in the adjoint.
  const std::size_t N = grid.node_count();
  std::vector<double> diag(N, 1.0);
  auto axis_diag = [](int n, double h, int m) {
    const double s = 1.0 / (2.0 * h);
    auto w = [n](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
    double acc = 0.0;
    // Rows that reference column m.
    for (int i = std::max(0, m - 2); i <= std::min(n - 1, m + 2); ++i) {
      double coef = 0.0;
      if (i == 0) {
        if (m == 0) coef = -3.0 * s;
        else if (m == 1) coef = 4.0 * s;
        else if (m == 2) coef = -1.0 * s;
      } else if (i == n - 1) {
        if (m == n - 3) coef = 1.0 * s;
        else if (m == n - 2) coef = -4.0 * s;
        else if (m == n - 1) coef = 3.0 * s;
      } else {
        if (m == i - 1) coef = -s;
        else if (m == i + 1) coef = s;
      }
      acc += w(i) * coef * coef;
    }
    return acc / w(m);
  };
  const std::size_t S = grid.spatial_count();
  const int nx1 = grid.nodes_x();
  for (int it = 0; it < grid.nodes_t(); ++it) {
    const double dt = axis_diag(grid.nodes_t(), grid.h_t(), it);
    for (std::size_t s = 0; s < S; ++s) {
      double d = dt + axis_diag(nx1, grid.h_x(0), static_cast<int>(s % nx1));
      if (grid.dim == 2)
        d += axis_diag(nx1, grid.h_x(1), static_cast<int>(s / nx1));
      diag[grid.node(it, s)] += d;
    }
  }
  return diag;
}

CGResult solve_elliptic(const EllipticProblem& problem, const CGConfig& cfg,
                        const Field* initial) {
  const GridSpec& g = problem.grid;
  if (!(problem.r > 0.0))
    throw Error(ErrorCode::InvalidArgument, "augmentation r must be positive");
  if (problem.rhs.components() != 1 || !(problem.rhs.grid() == g))
    throw Error(ErrorCode::InvalidField, "elliptic rhs must be scalar on grid");
  if (!(cfg.tol_rel > 0.0 && cfg.tol_rel < 1.0))
    throw Error(ErrorCode::InvalidArgument, "tol_rel must lie in (0, 1)");

  const std::size_t N = g.node_count();
  const std::size_t NS = N * static_cast<std::size_t>(stacked_components(g));
  const auto w = g.node_weights();
  const int max_iters =
      cfg.max_cg_iters > 0 ? cfg.max_cg_iters : static_cast<int>(10 * N);
  const double r = problem.r;

  std::vector<double> scratch(NS);
  auto apply_op = [&](std::span<const double> x, std::span<double> y) {
    delta_into(g, x, scratch);
    delta_adjoint_into(g, scratch, y);
    for (std::size_t n = 0; n < N; ++n) y[n] *= r;
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return weighted_dot(w, 1, a, b);
  };

  std::vector<double> inv_diag;
  if (cfg.preconditioner == Preconditioner::Diagonal) {
    inv_diag = delta_normal_diagonal(g);
    for (double& d : inv_diag) d = 1.0 / (r * d);
  }
  std::unique_ptr<SeparableInverse> spectral;
  if (cfg.preconditioner == Preconditioner::Spectral)
    spectral = std::make_unique<SeparableInverse>(g, r);
  auto precondition = [&](const std::vector<double>& res, std::vector<double>& z) {
    if (spectral) {
      spectral->apply(res, z);
      return;
    }
    if (inv_diag.empty()) {
      z = res;
      return;
    }
    for (std::size_t n = 0; n < N; ++n) z[n] = inv_diag[n] * res[n];
  };

  CGResult result{Field::scalar(g), 0, 0.0};
  std::vector<double> x(N, 0.0);
  if (initial != nullptr) {
    if (initial->components() != 1 || !(initial->grid() == g))
      throw Error(ErrorCode::InvalidField, "warm start must be scalar on grid");
    std::copy(initial->values().begin(), initial->values().end(), x.begin());
  }

  const auto b = problem.rhs.values();
  std::vector<double> bvec(b.begin(), b.end());
  const double b_norm = std::sqrt(dot(bvec, bvec));
  std::vector<double> res(N), z(N), p(N), Ap(N);
  apply_op(x, Ap);
  for (std::size_t n = 0; n < N; ++n) res[n] = bvec[n] - Ap[n];
  double res_norm = std::sqrt(dot(res, res));
  const double target = cfg.tol_rel * b_norm;

  if (b_norm == 0.0) {
    // The operator is SPD, so a zero right-hand side has the zero solution.
    return result;
  }

  precondition(res, z);
  p = z;
  double rz = dot(res, z);
  int iter = 0;
  while (res_norm > target) {
    if (iter >= max_iters) {
      throw ConvergenceFailure(
          "conjugate gradients stopped after " + std::to_string(iter) +
              " iterations at relative residual " +
              std::to_string(res_norm / b_norm),
          res_norm / b_norm);
    }
    apply_op(p, Ap);
    const double alpha = rz / dot(p, Ap);
    for (std::size_t n = 0; n < N; ++n) {
      x[n] += alpha * p[n];
      res[n] -= alpha * Ap[n];
    }
    res_norm = std::sqrt(dot(res, res));
    ++iter;
    if (!std::isfinite(res_norm)) {
      throw ConvergenceFailure("conjugate gradients produced a non-finite residual",
                               res_norm);
    }
    precondition(res, z);
    const double rz_next = dot(res, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t n = 0; n < N; ++n) p[n] = z[n] + beta * p[n];
  }

  std::copy(x.begin(), x.end(), result.phi.values().begin());
  result.iterations = iter;
  result.relative_residual = res_norm / b_norm;
  return result;
}

Field step1_rhs(const Field& q_prev, const Field& lambda, const Field& gvec,
                double r) {
  const GridSpec& g = gvec.grid();
  if (!(q_prev.grid() == g) || !(lambda.grid() == g) ||
      q_prev.components() != stacked_components(g) ||
      lambda.components() != stacked_components(g) || gvec.components() != 1)
    throw Error(ErrorCode::InvalidField, "step 1 inputs live on different grids");
  Field combo = Field::stacked(g);
  auto c = combo.values();
  auto q = q_prev.values();
  auto l = lambda.values();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = r * q[i] - l[i];
  Field rhs = apply_delta_adjoint(combo);
  auto rv = rhs.values();
  auto gv = gvec.values();
  for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= gv[i];
  return rhs;
}

Field solve_step1(const Field& q_prev, const Field& lambda,
                  const MeasurePair& measures, double r, const CGConfig& cfg) {
  const Field gvec = build_gvec(measures);
  EllipticProblem problem{measures.grid, step1_rhs(q_prev, lambda, gvec, r), r};
  return solve_elliptic(problem, cfg).phi;
}

}  // namespace udot
