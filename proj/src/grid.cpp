#include "udot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace udot {

namespace {

// Visits every grid line along `axis` (0 = time, 1.. = space) as
// (first node, stride, node count, spacing).
template <typename Fn>
void for_each_line(const GridSpec& g, int axis, Fn&& fn) {
  const std::size_t S = g.spatial_count();
  const std::size_t nx1 = g.nodes_x();
  if (axis == 0) {
    for (std::size_t s = 0; s < S; ++s) fn(s, S, g.nodes_t(), g.h_t());
    return;
  }
  const std::size_t stride = axis == 1 ? 1 : nx1;
  const std::size_t other = g.dim == 1 ? 1 : nx1;
  for (int it = 0; it < g.nodes_t(); ++it) {
    for (std::size_t o = 0; o < other; ++o) {
      const std::size_t start =
          g.node(it, 0) + (axis == 1 ? o * nx1 : o);
      fn(start, stride, g.nodes_x(), g.h_x(axis - 1));
    }
  }
}

void check_stacked(const GridSpec& g, int components) {
  if (components != stacked_components(g)) {
    throw Error(ErrorCode::InvalidField,
                "stacked field needs " + std::to_string(stacked_components(g)) +
                    " components, got " + std::to_string(components));
  }
}

}  // namespace

void GridSpec::validate() const {
  if (dim != 1 && dim != 2)
    throw Error(ErrorCode::InvalidField, "grid dimension must be 1 or 2");
  if (n_t < 2 || n_x < 2)
    throw Error(ErrorCode::InvalidField, "grid needs n_t >= 2 and n_x >= 2");
  for (int k = 0; k < dim; ++k) {
    if (!(x_hi[k] > x_lo[k]) || !std::isfinite(x_lo[k]) ||
        !std::isfinite(x_hi[k]))
      throw Error(ErrorCode::InvalidField, "grid box needs x_hi > x_lo");
  }
}

std::size_t GridSpec::spatial_count() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(nodes_x());
  return n;
}

std::array<double, 2> GridSpec::position(std::size_t s) const {
  const std::size_t nx1 = nodes_x();
  std::array<double, 2> x{0.0, 0.0};
  x[0] = x_at(0, static_cast<int>(s % nx1));
  if (dim == 2) x[1] = x_at(1, static_cast<int>(s / nx1));
  return x;
}

double GridSpec::diameter() const {
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) d2 += (x_hi[k] - x_lo[k]) * (x_hi[k] - x_lo[k]);
  return std::sqrt(d2);
}

// Time weights make sum_i w_i (D_t phi)_i = phi(1) - phi(0) exact for the
// one-sided second-order end stencils, so constant slice masses solve the
// discrete continuity equation. With three nodes the trapezoid already does.
double GridSpec::time_weight(int it) const {
  if (n_t == 2) return it == 1 ? h_t() : 0.5 * h_t();
  if (it == 0 || it == n_t) return 0.25 * h_t();
  if (it == 1 || it == n_t - 1) return 1.25 * h_t();
  return h_t();
}

double GridSpec::axis_weight(int axis, int ix) const {
  return (ix == 0 || ix == n_x) ? 0.5 * h_x(axis) : h_x(axis);
}

std::vector<double> GridSpec::spatial_weights() const {
  const std::size_t nx1 = nodes_x();
  std::vector<double> w(spatial_count());
  for (std::size_t s = 0; s < w.size(); ++s) {
    double ws = axis_weight(0, static_cast<int>(s % nx1));
    if (dim == 2) ws *= axis_weight(1, static_cast<int>(s / nx1));
    w[s] = ws;
  }
  return w;
}

std::vector<double> GridSpec::node_weights() const {
  const auto ws = spatial_weights();
  std::vector<double> w(node_count());
  for (int it = 0; it < nodes_t(); ++it) {
    const double wt = time_weight(it);
    for (std::size_t s = 0; s < ws.size(); ++s) w[node(it, s)] = wt * ws[s];
  }
  return w;
}

Field::Field(const GridSpec& grid, int components)
    : grid_(grid), components_(components) {
  grid_.validate();
  if (components < 1)
    throw Error(ErrorCode::InvalidField, "field needs at least one component");
  values_.assign(static_cast<std::size_t>(components) * grid_.node_count(), 0.0);
}

std::span<double> Field::component(int k) {
  return std::span<double>(values_).subspan(k * node_count(), node_count());
}

std::span<const double> Field::component(int k) const {
  return std::span<const double>(values_).subspan(k * node_count(),
                                                  node_count());
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void MeasurePair::validate_shape() const {
  grid.validate();
  const std::size_t S = grid.spatial_count();
  if (mu0.size() != S || mu1.size() != S)
    throw Error(ErrorCode::InvalidField,
                "measure sizes do not match the spatial node count " +
                    std::to_string(S));
  auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (std::any_of(mu0.begin(), mu0.end(), bad) ||
      std::any_of(mu1.begin(), mu1.end(), bad))
    throw Error(ErrorCode::InvalidField, "measures must be finite and >= 0");
}

void MeasurePair::validate() const {
  validate_shape();
  if (!(mass0() > 0.0))
    throw Error(ErrorCode::InvalidField, "mu0 must carry positive mass");
}

double MeasurePair::mass0() const {
  return std::accumulate(mu0.begin(), mu0.end(), 0.0);
}

double MeasurePair::mass1() const {
  return std::accumulate(mu1.begin(), mu1.end(), 0.0);
}

namespace {

// out[i] = d/dx along a line of n nodes; `src(i)` and `dst(i)` address node i.
// Lines along the time axis are handled a whole spatial slab at a time.
void diff_time(const GridSpec& g, const double* phi, double* out) {
  const std::size_t S = g.spatial_count();
  const int n = g.nodes_t();
  const double s = 1.0 / (2.0 * g.h_t());
  const double* p0 = phi;
  const double* p1 = phi + S;
  const double* p2 = phi + 2 * S;
  for (std::size_t j = 0; j < S; ++j)
    out[j] = s * (-3.0 * p0[j] + 4.0 * p1[j] - p2[j]);
  for (int i = 1; i < n - 1; ++i) {
    const double* lo = phi + (i - 1) * S;
    const double* hi = phi + (i + 1) * S;
    double* o = out + i * S;
    for (std::size_t j = 0; j < S; ++j) o[j] = s * (hi[j] - lo[j]);
  }
  const double* a = phi + (n - 3) * S;
  const double* b = phi + (n - 2) * S;
  const double* c = phi + (n - 1) * S;
  double* o = out + (n - 1) * S;
  for (std::size_t j = 0; j < S; ++j) o[j] = s * (a[j] - 4.0 * b[j] + 3.0 * c[j]);
}

// Transpose of diff_time under the time weights, accumulated into out.
void diff_time_adjoint(const GridSpec& g, const double* q, double* out) {
  const std::size_t S = g.spatial_count();
  const int n = g.nodes_t();
  const double s = 1.0 / (2.0 * g.h_t());
  auto row = [&](int i) { return q + i * S; };
  auto col = [&](int i) { return out + i * S; };
  for (int m = 0; m < n; ++m) {
    double* o = col(m);
    const double wm = g.h_t() / g.time_weight(m);
    for (int i = std::max(0, m - 2); i <= std::min(n - 1, m + 2); ++i) {
      double coef = 0.0;
      const double wi = g.time_weight(i) / g.h_t();
      if (i == 0) {
        coef = m == 0 ? -3.0 : (m == 1 ? 4.0 : (m == 2 ? -1.0 : 0.0));
      } else if (i == n - 1) {
        coef = m == n - 3 ? 1.0 : (m == n - 2 ? -4.0 : (m == n - 1 ? 3.0 : 0.0));
      } else {
        coef = m == i - 1 ? -1.0 : (m == i + 1 ? 1.0 : 0.0);
      }
      if (coef == 0.0) continue;
      const double f = s * coef * wi * wm;
      const double* r = row(i);
      for (std::size_t j = 0; j < S; ++j) o[j] += f * r[j];
    }
  }
}

// Spatial axis: lines of n nodes with the given stride.
void diff_space(const GridSpec& g, int axis, const double* phi, double* out) {
  for_each_line(g, axis + 1, [&](std::size_t start, std::size_t stride, int n,
                                 double h) {
    const double s = 1.0 / (2.0 * h);
    const double* p = phi + start;
    double* o = out + start;
    o[0] = s * (-3.0 * p[0] + 4.0 * p[stride] - p[2 * stride]);
    for (int i = 1; i < n - 1; ++i)
      o[i * stride] = s * (p[(i + 1) * stride] - p[(i - 1) * stride]);
    o[(n - 1) * stride] = s * (p[(n - 3) * stride] - 4.0 * p[(n - 2) * stride] +
                               3.0 * p[(n - 1) * stride]);
  });
}

void diff_space_adjoint(const GridSpec& g, int axis, const double* q,
                        double* out) {
  for_each_line(g, axis + 1, [&](std::size_t start, std::size_t stride, int n,
                                 double h) {
    const double s = 1.0 / (2.0 * h);
    const double* y = q + start;
    double* o = out + start;
    // Interior rows i contribute -s y_i to column i-1 and +s y_i to i+1.
    // Boundary rows carry weight 1/2, boundary columns divide by 1/2.
    auto add = [&](int m, double v) {
      o[m * stride] += ((m == 0 || m == n - 1) ? 2.0 : 1.0) * v;
    };
    const double y0 = 0.5 * y[0];
    const double yn = 0.5 * y[(n - 1) * stride];
    add(0, -3.0 * s * y0);
    add(1, 4.0 * s * y0);
    add(2, -1.0 * s * y0);
    add(n - 3, 1.0 * s * yn);
    add(n - 2, -4.0 * s * yn);
    add(n - 1, 3.0 * s * yn);
    for (int i = 1; i < n - 1; ++i) {
      const double v = s * y[i * stride];
      add(i - 1, -v);
      add(i + 1, v);
    }
  });
}

}  // namespace

void delta_into(const GridSpec& g, std::span<const double> phi,
                std::span<double> out) {
  const std::size_t N = g.node_count();
  diff_time(g, phi.data(), out.data());
  for (int k = 0; k < g.dim; ++k)
    diff_space(g, k, phi.data(), out.data() + (k + 1) * N);
  std::copy(phi.begin(), phi.end(),
            out.begin() + static_cast<std::ptrdiff_t>((g.dim + 1) * N));
}

void delta_adjoint_into(const GridSpec& g, std::span<const double> q,
                        std::span<double> out) {
  const std::size_t N = g.node_count();
  std::copy_n(q.begin() + static_cast<std::ptrdiff_t>((g.dim + 1) * N), N,
              out.begin());
  diff_time_adjoint(g, q.data(), out.data());
  for (int k = 0; k < g.dim; ++k)
    diff_space_adjoint(g, k, q.data() + (k + 1) * N, out.data());
}

double weighted_dot(std::span<const double> weights, int components,
                    std::span<const double> u, std::span<const double> v) {
  const std::size_t N = weights.size();
  double acc = 0.0;
  for (int k = 0; k < components; ++k) {
    const std::size_t off = k * N;
    for (std::size_t n = 0; n < N; ++n)
      acc += weights[n] * u[off + n] * v[off + n];
  }
  return acc;
}

Field apply_delta(const Field& phi) {
  if (phi.components() != 1)
    throw Error(ErrorCode::InvalidField, "apply_delta expects a scalar field");
  Field out = Field::stacked(phi.grid());
  delta_into(phi.grid(), phi.values(), out.values());
  return out;
}

Field apply_delta_adjoint(const Field& q) {
  check_stacked(q.grid(), q.components());
  Field out = Field::scalar(q.grid());
  delta_adjoint_into(q.grid(), q.values(), out.values());
  return out;
}

double inner(const Field& u, const Field& v) {
  if (!(u.grid() == v.grid()) || u.components() != v.components())
    throw Error(ErrorCode::InvalidField, "inner product of mismatched fields");
  const auto w = u.grid().node_weights();
  return weighted_dot(w, u.components(), u.values(), v.values());
}

double norm(const Field& u) { return std::sqrt(std::max(0.0, inner(u, u))); }

}  // namespace udot
