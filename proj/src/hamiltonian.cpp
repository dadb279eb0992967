#include "udot/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace udot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Coord {
  double kappa;
  double lo;
  double hi;
};

// Coordinates 0, 1 are the velocity axes, coordinate 2 is growth.
std::array<Coord, 3> coordinates(const HamiltonianSpec& spec) {
  return std::visit(
      [](const auto& h) -> std::array<Coord, 3> {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, Wfr>) {
          return {{{1.0, -kInf, kInf},
                   {1.0, -kInf, kInf},
                   {h.delta * h.delta, -kInf, kInf}}};
        } else if constexpr (std::is_same_v<T, Balanced>) {
          return {{{1.0, -kInf, kInf}, {1.0, -kInf, kInf}, {1.0, 0.0, 0.0}}};
        } else {
          return {{{1.0, -h.v_max, h.v_max},
                   {1.0, -h.v_max, h.v_max},
                   {h.delta * h.delta, h.w_min, h.w_max}}};
        }
      },
      spec.variant);
}

double argmax_coord(double p, const Coord& co) {
  return std::clamp(p / co.kappa, co.lo, co.hi);
}

double h_coord(double p, const Coord& co) {
  const double u = argmax_coord(p, co);
  return p * u - 0.5 * co.kappa * u * u;
}

struct ProxValue {
  double p;      // prox_{sH}(y)
  double dp_ds;  // derivative in s
};

ProxValue prox_coord(double y, double s, const Coord& co) {
  const double z = y / (s + co.kappa);
  if (z < co.lo) return {y - s * co.lo, -co.lo};
  if (z > co.hi) return {y - s * co.hi, -co.hi};
  return {y * co.kappa / (s + co.kappa), -y * co.kappa / ((s + co.kappa) * (s + co.kappa))};
}

}  // namespace

void HamiltonianSpec::validate() const {
  std::visit(
      [](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, Wfr>) {
          if (!(h.delta > 0.0) || !std::isfinite(h.delta))
            throw Error(ErrorCode::InvalidArgument, "delta must be positive");
        } else if constexpr (std::is_same_v<T, BoxConstrained>) {
          if (!(h.delta > 0.0) || !std::isfinite(h.delta))
            throw Error(ErrorCode::InvalidArgument, "delta must be positive");
          if (!(h.v_max > 0.0) || !std::isfinite(h.v_max))
            throw Error(ErrorCode::InvalidArgument, "v_max must be positive");
          if (!(h.w_min <= h.w_max) || !std::isfinite(h.w_min) ||
              !std::isfinite(h.w_max))
            throw Error(ErrorCode::InvalidArgument, "need w_min <= w_max");
        }
      },
      variant);
}

std::string HamiltonianSpec::name() const {
  switch (variant.index()) {
    case 0: return "wfr";
    case 1: return "balanced";
    default: return "box";
  }
}

double evaluate(const HamiltonianSpec& spec, std::span<const double> b,
                double c) {
  const auto co = coordinates(spec);
  double h = h_coord(c, co[2]);
  for (std::size_t i = 0; i < b.size() && i < 2; ++i) h += h_coord(b[i], co[i]);
  return h;
}

Control maximizer(const HamiltonianSpec& spec, std::span<const double> b,
                  double c) {
  const auto co = coordinates(spec);
  Control u;
  for (std::size_t i = 0; i < b.size() && i < 2; ++i)
    u.v[i] = argmax_coord(b[i], co[i]);
  u.w = argmax_coord(c, co[2]);
  return u;
}

KPoint project_KH(const HamiltonianSpec& spec, const KPoint& y) {
  if (!std::isfinite(y.a) || !std::isfinite(y.b[0]) ||
      !std::isfinite(y.b[1]) || !std::isfinite(y.c))
    throw Error(ErrorCode::InvalidPoint, "project_KH: non-finite input");

  const auto co = coordinates(spec);
  const std::array<double, 3> p{y.b[0], y.b[1], y.c};
  double h0 = 0.0;
  for (int i = 0; i < 3; ++i) h0 += h_coord(p[i], co[i]);
  const double g0 = y.a + h0;
  if (g0 <= 0.0) return y;

  // g(s) = y_a - s + H(prox_{sH}(y)) is strictly decreasing with g(0) > 0 and
  // g(g0) <= 0 because the prox never increases H.
  std::array<double, 3> q{};
  auto g_eval = [&](double s, double* dg) {
    double h = 0.0;
    double slope = -1.0;
    for (int i = 0; i < 3; ++i) {
      const ProxValue pv = prox_coord(p[i], s, co[i]);
      q[i] = pv.p;
      h += h_coord(pv.p, co[i]);
      slope += argmax_coord(pv.p, co[i]) * pv.dp_ds;
    }
    if (dg) *dg = slope;
    return y.a - s + h;
  };

  const double tol = 1e-12 * std::max({1.0, std::abs(y.a), h0});
  double lo = 0.0;
  double hi = g0;
  double s = 0.5 * g0;
  for (int iter = 0; iter < 200; ++iter) {
    double dg = 0.0;
    const double g = g_eval(s, &dg);
    if (std::abs(g) <= tol) break;
    if (g > 0.0) lo = s; else hi = s;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double next = s - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  g_eval(s, nullptr);

  KPoint out;
  out.b = {q[0], q[1]};
  out.c = q[2];
  double h = 0.0;
  for (int i = 0; i < 3; ++i) h += h_coord(q[i], co[i]);
  out.a = -h;
  return out;
}

double lagrangian_cost(const HamiltonianSpec& spec, std::span<const double> v,
                       double w) {
  double vv = 0.0;
  for (double vi : v) vv += vi * vi;
  return std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, Balanced>) {
          return 0.5 * vv;
        } else {
          return 0.5 * vv + 0.5 * h.delta * h.delta * w * w;
        }
      },
      spec.variant);
}

bool feasible_F(const HamiltonianSpec& spec, std::span<const double> v,
                double w) {
  constexpr double tol = 1e-9;
  const auto co = coordinates(spec);
  for (std::size_t i = 0; i < v.size() && i < 2; ++i) {
    if (v[i] < co[i].lo - tol || v[i] > co[i].hi + tol) return false;
  }
  return w >= co[2].lo - tol && w <= co[2].hi + tol;
}

Control clamp_to_F(const HamiltonianSpec& spec, Control u, int dim) {
  const auto co = coordinates(spec);
  for (int i = 0; i < 2; ++i)
    u.v[i] = i < dim ? std::clamp(u.v[i], co[i].lo, co[i].hi) : 0.0;
  u.w = std::clamp(u.w, co[2].lo, co[2].hi);
  return u;
}

ControlBox wfr_truncation(const GridSpec& grid, double mass0, double mass1) {
  double log_ratio = 0.0;
  if (mass0 > 0.0 && mass1 > 0.0) log_ratio = std::abs(std::log(mass1 / mass0));
  return {10.0 * grid.diameter(), 10.0 * std::max(1.0, log_ratio)};
}

}  // namespace udot
