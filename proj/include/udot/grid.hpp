#pragma once

// Uniform node-sited space-time grid on [0,1] x X, X a box in R^d (d = 1, 2).
//
// Every field lives on the (n_t+1) x (n_x+1)^d nodes. Node index is
// it * spatial_count() + s, with s = ix + (n_x+1) * iy. Stacked fields hold
// the components (a, b_1..b_d, c) as contiguous blocks of node_count() values.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "udot/errors.hpp"

namespace udot {

struct GridSpec {
  int dim = 1;
  int n_t = 2;
  int n_x = 2;
  std::array<double, 2> x_lo{0.0, 0.0};
  std::array<double, 2> x_hi{1.0, 1.0};

  // Throws Error(InvalidField) when the invariants do not hold.
  void validate() const;

  double h_t() const { return 1.0 / n_t; }
  double h_x(int axis) const { return (x_hi[axis] - x_lo[axis]) / n_x; }
  int nodes_t() const { return n_t + 1; }
  int nodes_x() const { return n_x + 1; }
  std::size_t spatial_count() const;
  std::size_t node_count() const { return spatial_count() * nodes_t(); }
  std::size_t node(int it, std::size_t s) const {
    return static_cast<std::size_t>(it) * spatial_count() + s;
  }

  double t_at(int it) const { return it * h_t(); }
  double x_at(int axis, int ix) const { return x_lo[axis] + ix * h_x(axis); }
  // Spatial coordinates of spatial index s (unused axes are zero).
  std::array<double, 2> position(std::size_t s) const;
  double diameter() const;

  // Quadrature weights. Space: trapezoid. Time: 1/4, 5/4 at each end, which
  // makes the weighted time derivative integrate exactly.
  double time_weight(int it) const;
  double axis_weight(int axis, int ix) const;
  std::vector<double> spatial_weights() const;
  std::vector<double> node_weights() const;

  bool operator==(const GridSpec&) const = default;
};

inline int stacked_components(const GridSpec& g) { return g.dim + 2; }

class Field {
 public:
  Field() = default;
  Field(const GridSpec& grid, int components);

  static Field scalar(const GridSpec& grid) { return Field(grid, 1); }
  static Field stacked(const GridSpec& grid) {
    return Field(grid, stacked_components(grid));
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t node_count() const { return grid_.node_count(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> component(int k);
  std::span<const double> component(int k) const;

  double& operator()(int k, std::size_t node) {
    return values_[k * node_count() + node];
  }
  double operator()(int k, std::size_t node) const {
    return values_[k * node_count() + node];
  }

  bool all_finite() const;

 private:
  GridSpec grid_;
  int components_ = 0;
  std::vector<double> values_;
};

// Spatial node masses of the boundary measures. Node mass means density times
// the spatial trapezoid weight, so sums over nodes are total masses.
struct MeasurePair {
  GridSpec grid;
  std::vector<double> mu0;
  std::vector<double> mu1;

  // Sizes, finiteness and sign only.
  void validate_shape() const;
  // Also requires mass0() > 0.
  void validate() const;
  double mass0() const;
  double mass1() const;
};

// delta(phi) = (d_t phi, grad_x phi, phi). Second-order central differences in
// the interior and second-order one-sided stencils on the boundary.
Field apply_delta(const Field& phi);

// Exact transpose of apply_delta under the weighted inner product.
Field apply_delta_adjoint(const Field& q);

// Quadrature-weighted space-time inner product, summed over components.
double inner(const Field& u, const Field& v);
double norm(const Field& u);

// Span-level kernels used by the solvers to avoid reallocating fields.
void delta_into(const GridSpec& g, std::span<const double> phi,
                std::span<double> out);
void delta_adjoint_into(const GridSpec& g, std::span<const double> q,
                        std::span<double> out);
// `weights` holds one node weight per node; u and v hold `components` blocks.
double weighted_dot(std::span<const double> weights, int components,
                    std::span<const double> u, std::span<const double> v);

}  // namespace udot
