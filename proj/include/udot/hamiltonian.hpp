#pragma once

// Hamiltonians H(b, c) = sup_{(v,w) in F} { b.v + c w - L(v,w) } for the
// quadratic running cost L(v,w) = |v|^2/2 + delta^2 w^2/2, and the pointwise
// Euclidean projection onto K_H = {(a,b,c) : a + H(b,c) <= 0}.
//
// All three variants factor into independent coordinates. Coordinate i has a
// curvature kappa_i (1 for velocity, delta^2 for growth) and a bound interval
// [lo_i, hi_i] on the control, so that
//   H_i(p)            = p u - kappa u^2 / 2,   u = clamp(p / kappa, lo, hi)
//   prox_{s H_i}(y)   = y - s clamp(y / (s + kappa), lo, hi).
// Balanced transport is the growth interval [0, 0].

#include <array>
#include <span>
#include <string>
#include <variant>

#include "udot/grid.hpp"

namespace udot {

struct Wfr {
  double delta = 1.0;
  bool operator==(const Wfr&) const = default;
};

struct Balanced {
  bool operator==(const Balanced&) const = default;
};

struct BoxConstrained {
  double delta = 1.0;
  double v_max = 1.0;
  double w_min = 0.0;
  double w_max = 0.0;
  bool operator==(const BoxConstrained&) const = default;
};

struct HamiltonianSpec {
  std::variant<Wfr, Balanced, BoxConstrained> variant;

  void validate() const;
  bool is_balanced() const {
    return std::holds_alternative<Balanced>(variant);
  }
  std::string name() const;
  bool operator==(const HamiltonianSpec&) const = default;
};

struct KPoint {
  double a = 0.0;
  std::array<double, 2> b{0.0, 0.0};  // unused axes stay zero
  double c = 0.0;
};

struct Control {
  std::array<double, 2> v{0.0, 0.0};
  double w = 0.0;
};

double evaluate(const HamiltonianSpec& spec, std::span<const double> b,
                double c);

// The maximizing control (v, w) = grad H(b, c).
Control maximizer(const HamiltonianSpec& spec, std::span<const double> b,
                  double c);

// Throws Error(InvalidPoint) on non-finite input.
KPoint project_KH(const HamiltonianSpec& spec, const KPoint& y);

double lagrangian_cost(const HamiltonianSpec& spec, std::span<const double> v,
                       double w);
bool feasible_F(const HamiltonianSpec& spec, std::span<const double> v,
                double w);

// Clamp a control into F (identity for WFR, zero growth for Balanced).
Control clamp_to_F(const HamiltonianSpec& spec, Control u, int dim);

// WFR has an unbounded control set; it is truncated to the box
// |v_i| <= velocity_bound, |w| <= growth_bound.
struct ControlBox {
  double velocity_bound;
  double growth_bound;
};
ControlBox wfr_truncation(const GridSpec& grid, double mass0, double mass1);

}  // namespace udot
