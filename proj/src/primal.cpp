#include "udot/primal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace udot {

PrimalSolution reconstruct(const Field& lambda, const HamiltonianSpec& ham,
                           double mass_floor) {
  const GridSpec& g = lambda.grid();
  if (lambda.components() != stacked_components(g))
    throw Error(ErrorCode::InvalidField, "reconstruct expects a stacked field");
  if (!lambda.all_finite())
    throw Error(ErrorCode::InvalidField, "reconstruct: non-finite multiplier");

  PrimalSolution sol{Field::scalar(g), Field(g, g.dim), Field::scalar(g),
                     mass_floor};
  const std::size_t N = g.node_count();
  for (std::size_t n = 0; n < N; ++n) {
    const double la = lambda(0, n);
    sol.mu(0, n) = std::max(la, 0.0);
    if (!(la > mass_floor)) continue;
    Control u;
    for (int k = 0; k < g.dim; ++k) u.v[k] = lambda(1 + k, n) / la;
    u.w = lambda(g.dim + 1, n) / la;
    u = clamp_to_F(ham, u, g.dim);
    for (int k = 0; k < g.dim; ++k) sol.v(k, n) = u.v[k];
    sol.w(0, n) = u.w;
  }
  return sol;
}

double default_mass_floor(const Field& lambda) {
  const auto a = lambda.component(0);
  double peak = 0.0;
  for (double v : a) peak = std::max(peak, v);
  return 1e-9 * peak;
}

double primal_cost(const PrimalSolution& sol, const HamiltonianSpec& ham) {
  const GridSpec& g = sol.mu.grid();
  const auto w = g.node_weights();
  double total = 0.0;
  std::array<double, 2> v{0.0, 0.0};
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double mu = sol.mu(0, n);
    if (mu == 0.0) continue;
    for (int k = 0; k < g.dim; ++k) v[k] = sol.v(k, n);
    total += w[n] * mu *
             lagrangian_cost(ham, std::span<const double>(v.data(), g.dim),
                             sol.w(0, n));
  }
  return total;
}

double continuity_residual(const PrimalSolution& sol,
                           const MeasurePair& measures) {
  const GridSpec& g = sol.mu.grid();
  if (!(measures.grid == g))
    throw Error(ErrorCode::InvalidField, "continuity_residual: grid mismatch");
  const auto weights = g.node_weights();
  const std::size_t S = g.spatial_count();
  constexpr double pi = std::numbers::pi;

  double worst = 0.0;
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; j <= 4; ++j) {
      // phi(t, x) = cos(i pi t) prod_k cos(j pi (x_k - lo_k) / len_k)
      auto space = [&](const std::array<double, 2>& x, double* val,
                       std::array<double, 2>* grad) {
        std::array<double, 2> c{1.0, 1.0};
        std::array<double, 2> dc{0.0, 0.0};
        for (int k = 0; k < g.dim; ++k) {
          const double len = g.x_hi[k] - g.x_lo[k];
          const double arg = j * pi * (x[k] - g.x_lo[k]) / len;
          c[k] = std::cos(arg);
          dc[k] = -j * pi / len * std::sin(arg);
        }
        *val = c[0] * c[1];
        (*grad)[0] = dc[0] * c[1];
        (*grad)[1] = c[0] * dc[1];
      };

      double lhs = 0.0;
      for (int it = 0; it < g.nodes_t(); ++it) {
        const double t = g.t_at(it);
        const double ct = std::cos(i * pi * t);
        const double dct = -i * pi * std::sin(i * pi * t);
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t n = g.node(it, s);
          const double mu = sol.mu(0, n);
          if (mu == 0.0) continue;
          double sx = 0.0;
          std::array<double, 2> grad{};
          space(g.position(s), &sx, &grad);
          double integrand = dct * sx + sol.w(0, n) * ct * sx;
          for (int k = 0; k < g.dim; ++k) integrand += ct * grad[k] * sol.v(k, n);
          lhs += weights[n] * mu * integrand;
        }
      }
      double rhs = 0.0;
      const double c1 = std::cos(i * pi);
      for (std::size_t s = 0; s < S; ++s) {
        double sx = 0.0;
        std::array<double, 2> grad{};
        space(g.position(s), &sx, &grad);
        rhs += c1 * sx * measures.mu1[s] - sx * measures.mu0[s];
      }
      // |phi|_inf = 1 for every member of the battery.
      worst = std::max(worst, std::abs(lhs - rhs) / 2.0);
    }
  }
  return worst;
}

std::vector<double> slice_masses(const Field& density) {
  const GridSpec& g = density.grid();
  const auto ws = g.spatial_weights();
  std::vector<double> out(g.nodes_t(), 0.0);
  for (int it = 0; it < g.nodes_t(); ++it) {
    for (std::size_t s = 0; s < ws.size(); ++s)
      out[it] += ws[s] * density(0, g.node(it, s));
  }
  return out;
}

}  // namespace udot
