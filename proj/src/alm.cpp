#include "udot/alm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "udot/primal.hpp"

namespace udot {

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIters: return "MaxIters";
    case Termination::LikelyInfeasible: return "LikelyInfeasible";
    case Termination::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
  if (max_iters < 1)
    throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  if (!(tol_feas > 0.0) || !(tol_obj > 0.0) || !(divergence_bound > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (obj_window < 1)
    throw Error(ErrorCode::InvalidArgument, "obj_window must be at least 1");
  if (!(cg.tol_rel > 0.0 && cg.tol_rel < 1.0))
    throw Error(ErrorCode::InvalidArgument, "cg tol_rel must lie in (0, 1)");
}

void check_mass_balance(const MeasurePair& measures,
                        const HamiltonianSpec& ham) {
  if (!ham.is_balanced()) return;
  const double m0 = measures.mass0();
  const double m1 = measures.mass1();
  if (std::abs(m0 - m1) > 1e-6 * std::max(m0, m1)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "InfeasibleMassBalance: balanced transport needs equal masses, got "
        << m0 << " and " << m1;
    throw Error(ErrorCode::InfeasibleMassBalance, msg.str());
  }
}

AlmState initialize(const MeasurePair& measures, const HamiltonianSpec& ham,
                    const SolverConfig& /*cfg*/) {
  const GridSpec& g = measures.grid;
  AlmState st{Field::scalar(g), Field::stacked(g), Field::stacked(g)};
  const auto ws = g.spatial_weights();
  const double m0 = measures.mass0();
  const double m1 = measures.mass1();
  const double growth =
      (!ham.is_balanced() && m0 > 0.0 && m1 > 0.0) ? std::log(m1 / m0) : 0.0;
  for (int it = 0; it < g.nodes_t(); ++it) {
    const double t = g.t_at(it);
    for (std::size_t s = 0; s < ws.size(); ++s) {
      const double rho =
          ((1.0 - t) * measures.mu0[s] + t * measures.mu1[s]) / ws[s];
      const std::size_t n = g.node(it, s);
      st.lambda(0, n) = rho;
      st.lambda(g.dim + 1, n) = growth * rho;
    }
  }
  return st;
}

double dual_value(const Field& phi, const MeasurePair& measures) {
  const GridSpec& g = measures.grid;
  double v = 0.0;
  for (std::size_t s = 0; s < g.spatial_count(); ++s) {
    v += measures.mu1[s] * phi(0, g.node(g.n_t, s)) -
         measures.mu0[s] * phi(0, g.node(0, s));
  }
  return v;
}

double kh_violation(const Field& q, const HamiltonianSpec& ham) {
  const GridSpec& g = q.grid();
  double worst = 0.0;
  std::array<double, 2> b{0.0, 0.0};
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    for (int k = 0; k < g.dim; ++k) b[k] = q(1 + k, n);
    const double v =
        q(0, n) + evaluate(ham, std::span<const double>(b.data(), g.dim),
                           q(g.dim + 1, n));
    worst = std::max(worst, v);
  }
  return worst;
}

double hjb_residual(const Field& phi, const HamiltonianSpec& ham) {
  return kh_violation(apply_delta(phi), ham);
}

void project_field(const HamiltonianSpec& ham, const Field& y, Field& out) {
  const GridSpec& g = y.grid();
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    KPoint p;
    p.a = y(0, n);
    for (int k = 0; k < g.dim; ++k) p.b[k] = y(1 + k, n);
    p.c = y(g.dim + 1, n);
    const KPoint z = project_KH(ham, p);
    out(0, n) = z.a;
    for (int k = 0; k < g.dim; ++k) out(1 + k, n) = z.b[k];
    out(g.dim + 1, n) = z.c;
  }
}

double relative_gap(double primal, double dual) {
  return std::abs(primal - dual) / std::max(1.0, std::abs(dual));
}

AlmSolver::AlmSolver(MeasurePair measures, HamiltonianSpec ham,
                     SolverConfig cfg)
    : measures_(std::move(measures)), ham_(std::move(ham)), cfg_(cfg) {
  measures_.validate();
  ham_.validate();
  cfg_.validate();
  check_mass_balance(measures_, ham_);
  state_ = initialize(measures_, ham_, cfg_);
  gvec_ = build_gvec(measures_);
  delta_phi_ = Field::stacked(measures_.grid);
  weights_ = measures_.grid.node_weights();
}

IterationRecord AlmSolver::step() {
  const GridSpec& g = measures_.grid;
  const double r = cfg_.r;

  EllipticProblem problem{g, step1_rhs(state_.q, state_.lambda, gvec_, r), r};
  CGResult cg = solve_elliptic(problem, cfg_.cg, &state_.phi);
  state_.phi = std::move(cg.phi);

  delta_into(g, state_.phi.values(), delta_phi_.values());
  auto dphi = delta_phi_.values();
  auto lam = state_.lambda.values();
  Field y = Field::stacked(g);
  auto yv = y.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = lam[i] / r + dphi[i];
  project_field(ham_, y, state_.q);

  auto q = state_.q.values();
  for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = lam[i] + r * (dphi[i] - q[i]);

  ++iter_;
  IterationRecord rec;
  rec.iter = iter_;
  rec.cg_iterations = cg.iterations;
  rec.dual_value = dual_value(state_.phi, measures_);
  Field diff = Field::stacked(g);
  auto dv = diff.values();
  for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = dphi[i] - q[i];
  const int comps = stacked_components(g);
  const double diff_norm = std::sqrt(weighted_dot(weights_, comps, dv, dv));
  const double q_norm = std::sqrt(weighted_dot(weights_, comps, q, q));
  rec.feas_residual = diff_norm / std::max(1.0, q_norm);
  const auto la = state_.lambda.component(0);
  const double peak = la.empty() ? 0.0 : *std::max_element(la.begin(), la.end());
  const PrimalSolution sol =
      reconstruct(state_.lambda, ham_, cfg_.mass_floor_rel * std::max(peak, 0.0));
  rec.primal_cost = primal_cost(sol, ham_);
  rec.gap = relative_gap(rec.primal_cost, rec.dual_value);
  return rec;
}

SolveReport solve(const MeasurePair& measures, const HamiltonianSpec& ham,
                  const SolverConfig& cfg, const ProgressFn& progress) {
  AlmSolver solver(measures, ham, cfg);
  SolveReport report;
  report.termination = Termination::MaxIters;
  const int window = cfg.obj_window;
  constexpr std::size_t kDivergenceLookback = 50;

  for (int k = 0; k < cfg.max_iters; ++k) {
    IterationRecord rec;
    try {
      rec = solver.step();
    } catch (const ConvergenceFailure& e) {
      report.termination = Termination::NumericalFailure;
      report.message = e.what();
      break;
    }
    report.iterations.push_back(rec);
    if (progress) progress(rec);

    if (!std::isfinite(rec.dual_value) || !std::isfinite(rec.feas_residual) ||
        !std::isfinite(rec.primal_cost) || !solver.state().lambda.all_finite()) {
      report.termination = Termination::NumericalFailure;
      report.message = "non-finite value at iteration " + std::to_string(rec.iter);
      break;
    }

    const auto& hist = report.iterations;
    const std::size_t last = hist.size() - 1;
    if (std::abs(rec.dual_value) > cfg.divergence_bound &&
        hist.size() > kDivergenceLookback &&
        rec.feas_residual >= hist[last - kDivergenceLookback].feas_residual) {
      report.termination = Termination::LikelyInfeasible;
      report.message = "dual value exceeded the divergence bound while the "
                       "feasibility residual stalled";
      break;
    }
    // An unbounded dual drives the ALM iterates along a fixed ray: the dual
    // value then grows by a constant amount per iteration while the
    // reconstructed primal cost stays put.
    if (hist.size() > 2 * kDivergenceLookback && rec.gap > 0.5) {
      const double d0 = hist[last - 2 * kDivergenceLookback].dual_value;
      const double d1 = hist[last - kDivergenceLookback].dual_value;
      const double inc_old = (d1 - d0) / kDivergenceLookback;
      const double inc_new = (rec.dual_value - d1) / kDivergenceLookback;
      if (inc_new > 1e-9 * std::max(1.0, std::abs(rec.dual_value)) &&
          std::abs(inc_new - inc_old) <= 1e-3 * inc_new) {
        report.termination = Termination::LikelyInfeasible;
        report.message = "dual value grows linearly with a persistent duality "
                         "gap; the boundary measures are likely not reachable";
        break;
      }
    }

    if (rec.feas_residual <= cfg.tol_feas && hist.size() > static_cast<std::size_t>(window)) {
      const double before = hist[last - window].dual_value;
      const double change =
          std::abs(rec.dual_value - before) / std::max(1.0, std::abs(rec.dual_value));
      if (change <= cfg.tol_obj) {
        report.termination = Termination::Converged;
        break;
      }
    }
  }
  report.state = solver.state();
  return report;
}

}  // namespace udot
