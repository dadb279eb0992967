#include "udot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace udot::oracle {

namespace {

constexpr double kDomainSlack = 1e-12;

struct Deriv {
  Point dx{0.0, 0.0};
  double dlogm = 0.0;
};

Deriv rhs(const VelocityFn& v, const ScalarFn& w, double t, const Point& x,
          int dim) {
  Deriv d;
  const Point vel = v(t, x);
  for (int k = 0; k < dim; ++k) d.dx[k] = vel[k];
  d.dlogm = w(t, x);
  return d;
}

// One classical RK4 step of size h. `extra` integrates an additional scalar
// rate alongside log m (used for the divergence correction).
ParticleState rk4_step(const ParticleState& s, double h, int dim,
                       const VelocityFn& v, const ScalarFn& rate) {
  auto shift = [&](const Deriv& d, double f) {
    Point y = s.x;
    for (int k = 0; k < dim; ++k) y[k] += f * d.dx[k];
    return y;
  };
  const Deriv k1 = rhs(v, rate, s.t, s.x, dim);
  const Deriv k2 = rhs(v, rate, s.t + 0.5 * h, shift(k1, 0.5 * h), dim);
  const Deriv k3 = rhs(v, rate, s.t + 0.5 * h, shift(k2, 0.5 * h), dim);
  const Deriv k4 = rhs(v, rate, s.t + h, shift(k3, h), dim);
  ParticleState out = s;
  for (int k = 0; k < dim; ++k)
    out.x[k] += h / 6.0 * (k1.dx[k] + 2.0 * k2.dx[k] + 2.0 * k3.dx[k] + k4.dx[k]);
  out.logm += h / 6.0 * (k1.dlogm + 2.0 * k2.dlogm + 2.0 * k3.dlogm + k4.dlogm);
  out.t = s.t + h;
  return out;
}

void check_dim(int dim) {
  if (dim != 1 && dim != 2)
    throw Error(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
}

// (e^u - 1) / u and its derivative, stable near zero.
double expm1_ratio(double u) {
  if (std::abs(u) < 1e-5) return 1.0 + u / 2.0 + u * u / 6.0;
  return std::expm1(u) / u;
}

double expm1_ratio_deriv(double u) {
  if (std::abs(u) < 1e-4) return 0.5 + u / 3.0 + u * u / 8.0;
  return (u * std::exp(u) - std::expm1(u)) / (u * u);
}

}  // namespace

bool Domain::contains(const Point& x) const {
  for (int k = 0; k < dim; ++k) {
    const double slack = kDomainSlack * std::max(1.0, hi[k] - lo[k]);
    if (!(x[k] >= lo[k] - slack && x[k] <= hi[k] + slack)) return false;
  }
  return true;
}

std::vector<ParticleState> characteristic_solve(const Domain& domain,
                                                const Point& x0, double m0,
                                                const VelocityFn& v,
                                                const ScalarFn& w, int steps,
                                                double t_start, double t_end) {
  check_dim(domain.dim);
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(m0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  if (!v || !w) throw Error(ErrorCode::InvalidArgument, "missing control callable");

  std::vector<ParticleState> traj;
  traj.reserve(steps + 1);
  ParticleState s{x0, std::log(m0), t_start};
  auto check = [&](const ParticleState& p) {
    bool finite = std::isfinite(p.logm);
    for (int k = 0; k < domain.dim; ++k) finite = finite && std::isfinite(p.x[k]);
    if (!finite || !domain.contains(p.x)) {
      std::ostringstream msg;
      msg << "trajectory leaves the domain at t = " << p.t << ", x = (" << p.x[0];
      if (domain.dim == 2) msg << ", " << p.x[1];
      msg << ")";
      throw ExitsDomain(msg.str(), p.t, p.x);
    }
  };
  check(s);
  traj.push_back(s);
  const double h = (t_end - t_start) / steps;
  for (int i = 0; i < steps; ++i) {
    s = rk4_step(s, h, domain.dim, v, w);
    if (i + 1 == steps) s.t = t_end;
    check(s);
    traj.push_back(s);
  }
  return traj;
}

Field characteristic_density(const GridSpec& grid,
                             const std::function<double(const Point&)>& rho0,
                             const VelocityFn& v, const ScalarFn& w,
                             const ScalarFn& div_v, int steps_per_unit_time) {
  grid.validate();
  if (steps_per_unit_time < 1)
    throw Error(ErrorCode::InvalidArgument, "steps_per_unit_time must be >= 1");
  const ScalarFn rate = [&](double t, const Point& x) {
    return w(t, x) - div_v(t, x);
  };
  Field rho = Field::scalar(grid);
  for (int it = 0; it < grid.nodes_t(); ++it) {
    const double t = grid.t_at(it);
    const int steps = std::max(1, static_cast<int>(std::ceil(steps_per_unit_time * t)));
    for (std::size_t s = 0; s < grid.spatial_count(); ++s) {
      ParticleState p{grid.position(s), 0.0, t};
      if (t > 0.0) {
        const double h = -t / steps;
        for (int i = 0; i < steps; ++i) p = rk4_step(p, h, grid.dim, v, rate);
      }
      // Integrating backwards accumulated -int_0^t rate.
      rho(0, grid.node(it, s)) = rho0(p.x) * std::exp(-p.logm);
    }
  }
  return rho;
}

double quantile_ot_1d(std::span<const double> x0, std::span<const double> m0,
                      std::span<const double> x1, std::span<const double> m1) {
  if (x0.size() != m0.size() || x1.size() != m1.size())
    throw Error(ErrorCode::InvalidArgument, "positions and masses differ in length");
  auto atoms = [](std::span<const double> x, std::span<const double> m) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(m[i]) || m[i] < 0.0)
        throw Error(ErrorCode::InvalidArgument,
                    "masses must be finite and non-negative");
      if (m[i] > 0.0) out.emplace_back(x[i], m[i]);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  };
  auto a = atoms(x0, m0);
  auto b = atoms(x1, m1);
  double M0 = 0.0, M1 = 0.0;
  for (const auto& p : a) M0 += p.second;
  for (const auto& p : b) M1 += p.second;
  if (std::abs(M0 - M1) > 1e-9 * std::max(M0, M1)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "InfeasibleMassBalance: total masses " << M0 << " and " << M1;
    throw Error(ErrorCode::InfeasibleMassBalance, msg.str());
  }
  if (M0 == 0.0) return 0.0;
  // Absorb the admissible mismatch so the two quantile walks end together.
  for (auto& p : b) p.second *= M0 / M1;

  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].second;
  double rb = b.empty() ? 0.0 : b[0].second;
  while (i < a.size() && j < b.size()) {
    const double dm = std::min(ra, rb);
    const double dx = a[i].first - b[j].first;
    cost += 0.5 * dx * dx * dm;
    ra -= dm;
    rb -= dm;
    if (ra <= 0.0 && ++i < a.size()) ra = a[i].second;
    if (rb <= 0.0 && ++j < b.size()) rb = b[j].second;
  }
  return cost;
}

namespace {

struct Bounds {
  double lo;
  double hi;
};

// Euclidean projection of y onto {lo <= u <= hi, sum(u) = target}.
void project_box_sum(std::span<double> y, Bounds bd, double target) {
  const std::size_t n = y.size();
  auto sum_at = [&](double tau) {
    double s = 0.0;
    for (double v : y) s += std::clamp(v - tau, bd.lo, bd.hi);
    return s;
  };
  if (bd.lo == -std::numeric_limits<double>::infinity() &&
      bd.hi == std::numeric_limits<double>::infinity()) {
    const double shift = (std::accumulate(y.begin(), y.end(), 0.0) - target) / n;
    for (double& v : y) v -= shift;
    return;
  }
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double span = std::max(1.0, std::abs(bd.lo) + std::abs(bd.hi));
  double tlo = *mn - span - 1.0;  // sum_at(tlo) is maximal
  double thi = *mx + span + 1.0;  // sum_at(thi) is minimal
  if (std::isinf(bd.lo) || std::isinf(bd.hi)) {
    // One-sided box: widen until the bracket holds.
    double width = span + 1.0;
    while (sum_at(tlo) < target) tlo -= (width *= 2.0);
    while (sum_at(thi) > target) thi += (width *= 2.0);
  }
  for (int it = 0; it < 200 && thi - tlo > 1e-15 * std::max(1.0, std::abs(tlo)); ++it) {
    const double mid = 0.5 * (tlo + thi);
    if (sum_at(mid) > target) tlo = mid;
    else thi = mid;
  }
  const double tau = 0.5 * (tlo + thi);
  for (double& v : y) v = std::clamp(v - tau, bd.lo, bd.hi);
  // Spread the bisection residue over the free coordinates.
  double resid = target - std::accumulate(y.begin(), y.end(), 0.0);
  std::size_t free = 0;
  for (double v : y) free += (v > bd.lo && v < bd.hi);
  if (free > 0 && resid != 0.0) {
    for (double& v : y)
      if (v > bd.lo && v < bd.hi) v += resid / free;
  }
}

struct Transcription {
  int dim;
  int N;
  double dt;
  double m0;
  double kappa_w;  // delta^2, zero for balanced
  std::array<Bounds, 3> bounds;
  std::array<double, 3> targets;  // per-coordinate sums of controls

  // Controls stored coordinate-major: [v_0 (N) | v_1 (N) | w (N)].
  int coords() const { return dim + 1; }
  std::span<double> coord(std::vector<double>& u, int k) const {
    return {u.data() + static_cast<std::size_t>(k) * N, static_cast<std::size_t>(N)};
  }

  void project(std::vector<double>& u) const {
    for (int k = 0; k < coords(); ++k) project_box_sum(coord(u, k), bounds[k], targets[k]);
  }

  // Cost and L2 gradient (derivative divided by dt).
  double cost(const std::vector<double>& u, std::vector<double>* grad) const {
    const double* w = u.data() + static_cast<std::size_t>(dim) * N;
    std::vector<double> step_cost(N);
    double logm = std::log(m0);
    double total = 0.0;
    for (int k = 0; k < N; ++k) {
      double speed2 = 0.0;
      for (int d = 0; d < dim; ++d) speed2 += u[d * N + k] * u[d * N + k];
      const double L = 0.5 * speed2 + 0.5 * kappa_w * w[k] * w[k];
      const double mk = std::exp(logm);
      const double e = expm1_ratio(w[k] * dt);
      step_cost[k] = L * mk * e * dt;
      total += step_cost[k];
      if (grad) {
        for (int d = 0; d < dim; ++d) (*grad)[d * N + k] = u[d * N + k] * mk * e;
        (*grad)[dim * N + k] =
            kappa_w * w[k] * mk * e + L * mk * expm1_ratio_deriv(w[k] * dt) * dt;
      }
      logm += w[k] * dt;
    }
    if (grad) {
      // Later steps carry the mass factor exp(w_k dt).
      double tail = 0.0;
      for (int k = N - 1; k >= 0; --k) {
        (*grad)[dim * N + k] += tail;
        tail += step_cost[k];
      }
    }
    return total;
  }
};

double l2_norm(const std::vector<double>& u, double dt) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s * dt);
}

}  // namespace

DiracPairResult dirac_pair_cost(int dim, const Point& x0, double m0,
                                const Point& x1, double m1,
                                const HamiltonianSpec& ham,
                                const DiracPairOptions& options) {
  check_dim(dim);
  ham.validate();
  if (!(m0 > 0.0) || !(m1 > 0.0) || !std::isfinite(m0) || !std::isfinite(m1))
    throw Error(ErrorCode::InvalidArgument, "dirac masses must be positive");
  if (options.steps < 1 || options.restarts < 1 || options.max_iters < 1)
    throw Error(ErrorCode::InvalidArgument, "invalid transcription options");

  const double inf = std::numeric_limits<double>::infinity();
  const double z = std::log(m1 / m0);
  Transcription tr;
  tr.dim = dim;
  tr.N = options.steps;
  tr.dt = 1.0 / options.steps;
  tr.m0 = m0;
  tr.bounds = {Bounds{-inf, inf}, Bounds{-inf, inf}, Bounds{-inf, inf}};
  for (int k = 0; k < dim; ++k) tr.targets[k] = x1[k] - x0[k];
  tr.targets[dim] = z;

  std::ostringstream why;
  if (const auto* w = std::get_if<Wfr>(&ham.variant)) {
    tr.kappa_w = w->delta * w->delta;
  } else if (ham.is_balanced()) {
    tr.kappa_w = 0.0;
    tr.bounds[dim] = {0.0, 0.0};
    if (std::abs(z) > 1e-9) why << "balanced transport cannot change mass";
  } else {
    const auto& b = std::get<BoxConstrained>(ham.variant);
    tr.kappa_w = b.delta * b.delta;
    for (int k = 0; k < dim; ++k) {
      tr.bounds[k] = {-b.v_max, b.v_max};
      if (std::abs(tr.targets[k]) > b.v_max * (1.0 + 1e-12))
        why << "displacement " << std::abs(tr.targets[k]) << " exceeds v_max "
            << b.v_max << "; ";
    }
    tr.bounds[dim] = {b.w_min, b.w_max};
    if (z < b.w_min - 1e-12 || z > b.w_max + 1e-12)
      why << "log mass ratio " << z << " outside [" << b.w_min << ", " << b.w_max
          << "]";
  }
  if (!why.str().empty()) throw Error(ErrorCode::Infeasible, why.str());
  // The unit time horizon turns the per-step sums into averages.
  for (int k = 0; k <= dim; ++k) tr.targets[k] /= tr.dt;

  const std::size_t n = static_cast<std::size_t>(dim + 1) * tr.N;
  std::vector<double> base(n);
  for (int k = 0; k <= dim; ++k)
    std::fill_n(base.begin() + static_cast<std::ptrdiff_t>(k) * tr.N, tr.N,
                tr.targets[k] * tr.dt);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double scale = 0.1;
  for (int k = 0; k <= dim; ++k) scale = std::max(scale, 0.1 * std::abs(tr.targets[k] * tr.dt));

  DiracPairResult best;
  best.cost = inf;
  for (int run = 0; run < options.restarts; ++run) {
    std::vector<double> u = base;
    for (double& v : u) v += scale * gauss(rng);
    tr.project(u);

    std::vector<double> g(n), u_new(n), g_new(n), step(n);
    double f = tr.cost(u, &g);
    double alpha = 1.0;
    double pg = inf;
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
      // Projected gradient with unit step as the stationarity measure.
      for (std::size_t i = 0; i < n; ++i) step[i] = u[i] - g[i];
      tr.project(step);
      for (std::size_t i = 0; i < n; ++i) step[i] -= u[i];
      pg = l2_norm(step, tr.dt);
      if (pg <= options.grad_tol) break;

      double f_new = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        for (std::size_t i = 0; i < n; ++i) u_new[i] = u[i] - alpha * g[i];
        tr.project(u_new);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (u[i] - u_new[i]);
        f_new = tr.cost(u_new, &g_new);
        if (f_new <= f - 1e-4 * decrease * tr.dt) break;
        alpha *= 0.5;
      }
      // Barzilai-Borwein step for the next iteration.
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = u_new[i] - u[i];
        ss += s * s;
        sy += s * (g_new[i] - g[i]);
      }
      if (ss == 0.0) {
        u.swap(u_new);
        g.swap(g_new);
        f = f_new;
        continue;
      }
      alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
      u.swap(u_new);
      g.swap(g_new);
      f = f_new;
    }
    if (f < best.cost) {
      best.cost = f;
      best.projected_gradient = pg;
      best.iterations = iter;
      best.velocity.assign(tr.N, Point{0.0, 0.0});
      best.growth.assign(u.begin() + static_cast<std::ptrdiff_t>(dim) * tr.N, u.end());
      for (int k = 0; k < tr.N; ++k)
        for (int d = 0; d < dim; ++d) best.velocity[k][d] = u[d * tr.N + k];
    }
  }
  return best;
}

std::vector<Action> action_grid(const HamiltonianSpec& ham, int n_alpha,
                                double alpha_max, int n_beta, double beta_min,
                                double beta_max) {
  if (n_alpha < 1 || n_beta < 1 || !(alpha_max >= 0.0) || !(beta_max >= beta_min))
    throw Error(ErrorCode::InvalidArgument, "invalid action grid");
  std::vector<Action> out;
  for (int i = 0; i < n_alpha; ++i) {
    const double a = n_alpha == 1 ? 0.0 : -alpha_max + 2.0 * alpha_max * i / (n_alpha - 1);
    for (int j = 0; j < n_beta; ++j) {
      const double b =
          n_beta == 1 ? beta_min : beta_min + (beta_max - beta_min) * j / (n_beta - 1);
      if (feasible_F(ham, std::span<const double>(&a, 1), b)) out.push_back({a, b});
    }
  }
  return out;
}

LPProblem build_lp(std::span<const double> mu0, std::span<const double> mu1,
                   std::vector<Action> actions, int T, int J,
                   const HamiltonianSpec& ham, double lo, double hi) {
  ham.validate();
  if (T < 1 || T > 16 || J < 2 || J > 32 || actions.empty() || actions.size() > 25)
    throw Error(ErrorCode::InvalidArgument,
                "LP size outside 1 <= T <= 16, 2 <= J <= 32, 1 <= |actions| <= 25");
  if (mu0.size() != static_cast<std::size_t>(J) || mu1.size() != static_cast<std::size_t>(J))
    throw Error(ErrorCode::InvalidArgument, "boundary masses must have J entries");
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "empty interval");
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (!(mu0[i] >= 0.0) || !(mu1[i] >= 0.0) || !std::isfinite(mu0[i]) ||
        !std::isfinite(mu1[i]))
      throw Error(ErrorCode::InvalidArgument, "masses must be finite and non-negative");
  }
  for (const Action& a : actions) {
    if (!feasible_F(ham, std::span<const double>(&a.alpha, 1), a.beta))
      throw Error(ErrorCode::InvalidArgument, "action outside the control set");
  }

  LPProblem p;
  p.T = T;
  p.J = J;
  p.lo = lo;
  p.hi = hi;
  p.actions = std::move(actions);
  p.mu0.assign(mu0.begin(), mu0.end());
  p.mu1.assign(mu1.begin(), mu1.end());

  const double dt = 1.0 / T;
  const double dx = (hi - lo) / (J - 1);
  const std::size_t A = p.actions.size();
  p.rows = static_cast<std::size_t>(T + 1) * J;
  auto row = [&](int level, int j) { return static_cast<std::size_t>(level) * J + j; };

  struct Column {
    std::size_t out_row;
    std::size_t in_row0, in_row1;
    double in0, in1;
    double cost;
  };
  std::vector<Column> cols;
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < J; ++j) {
      for (std::size_t a = 0; a < A; ++a) {
        const Action& act = p.actions[a];
        const double pos = (j * dx + act.alpha * dt) / dx;
        if (pos < -1e-12 || pos > (J - 1) + 1e-12) continue;
        const double cl = std::clamp(pos, 0.0, static_cast<double>(J - 1));
        int j0 = static_cast<int>(std::floor(cl));
        if (j0 >= J - 1) j0 = J - 2;
        const double theta = cl - j0;
        const double gain = std::exp(act.beta * dt);
        const double L = lagrangian_cost(ham, std::span<const double>(&act.alpha, 1), act.beta);
        Column c;
        c.out_row = row(t, j);
        c.in_row0 = row(t + 1, j0);
        c.in_row1 = row(t + 1, j0 + 1);
        c.in0 = (1.0 - theta) * gain;
        c.in1 = theta * gain;
        c.cost = L * dt * expm1_ratio(act.beta * dt);
        cols.push_back(c);
        p.vars.push_back({t, j, static_cast<int>(a)});
      }
    }
  }
  p.cols = cols.size();
  p.A.assign(p.rows * p.cols, 0.0);
  p.b.assign(p.rows, 0.0);
  p.c.resize(p.cols);
  // Row (level, j): outflow - inflow = mu0 at level 0, = -mu1 at level T.
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Column& c = cols[k];
    p.A[c.out_row * p.cols + k] += 1.0;
    p.A[c.in_row0 * p.cols + k] -= c.in0;
    p.A[c.in_row1 * p.cols + k] -= c.in1;
    p.c[k] = c.cost;
  }
  for (int j = 0; j < J; ++j) {
    p.b[row(0, j)] = p.mu0[j];
    p.b[row(T, j)] = -p.mu1[j];
  }
  return p;
}

SimplexResult simplex(std::size_t m, std::size_t n, std::span<const double> A,
                      std::span<const double> b, std::span<const double> c) {
  if (A.size() != m * n || b.size() != m || c.size() != n)
    throw Error(ErrorCode::InvalidArgument, "simplex dimensions disagree");
  constexpr double kPivotTol = 1e-9;
  constexpr double kCostTol = 1e-9;

  // Tableau columns: n structural, m artificial, rhs.
  const std::size_t width = n + m + 1;
  std::vector<double> tab((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return tab[r * width + col]; };
  std::vector<std::size_t> basis(m);
  double bscale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) at(i, j) = sign * A[i * n + j];
    at(i, n + i) = 1.0;
    at(i, n + m) = sign * b[i];
    basis[i] = n + i;
    bscale = std::max(bscale, std::abs(b[i]));
  }

  SimplexResult res;
  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double pv = at(pr, pc);
    for (std::size_t j = 0; j < width; ++j) at(pr, j) /= pv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    basis[pr] = pc;
    ++res.pivots;
  };
  // Bland's rule: lowest-index improving column, lowest-index leaving variable
  // among ratio ties. Returns false when unbounded.
  auto run = [&](std::size_t allowed_cols) {
    for (;;) {
      std::size_t enter = allowed_cols;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (at(m, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter == allowed_cols) return true;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(at(i, n + m), 0.0) / a;
        const double tie = 1e-14 * std::max(1.0, std::abs(ratio));
        if (leave == m || ratio < best - tie ||
            (ratio <= best + tie && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  // Phase 1: minimize the sum of artificials (objective row holds reduced costs).
  for (std::size_t j = 0; j < width; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += at(i, j);
    at(m, j) = -s;
  }
  for (std::size_t i = 0; i < m; ++i) at(m, n + i) = 0.0;
  run(n + m);
  if (-at(m, n + m) > 1e-9 * bscale) {
    res.status = LPStatus::Infeasible;
    return res;
  }
  // Drive remaining artificials out of the basis; rows with none left are redundant.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(at(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 on the structural columns.
  for (std::size_t j = 0; j < width; ++j) at(m, j) = j < n ? c[j] : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = basis[i];
    if (bj >= n) continue;
    const double f = at(m, bj);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width; ++j) at(m, j) -= f * at(i, j);
  }
  if (!run(n)) {
    res.status = LPStatus::Unbounded;
    return res;
  }
  res.status = LPStatus::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = std::max(at(i, n + m), 0.0);
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

LPSolution solve_lp(const LPProblem& problem) {
  const SimplexResult sx =
      simplex(problem.rows, problem.cols, problem.A, problem.b, problem.c);
  LPSolution sol;
  sol.status = sx.status;
  sol.pivots = sx.pivots;
  if (sx.status != LPStatus::Optimal) return sol;
  sol.mass = sx.x;
  sol.objective = sx.objective;
  double scale = 1.0;
  for (double v : problem.b) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < problem.rows; ++i) {
    double r = -problem.b[i];
    for (std::size_t j = 0; j < problem.cols; ++j)
      r += problem.A[i * problem.cols + j] * sol.mass[j];
    sol.balance_residual = std::max(sol.balance_residual, std::abs(r));
  }
  if (sol.balance_residual > 1e-9 * scale)
    throw Error(ErrorCode::ConvergenceFailure,
                "LP balance check failed: residual " + std::to_string(sol.balance_residual));
  return sol;
}

}  // namespace udot::oracle
