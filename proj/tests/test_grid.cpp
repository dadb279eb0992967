#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "udot/grid.hpp"

using namespace udot;
using testing::grid1;
using testing::grid2;

namespace {

Field sample(const GridSpec& g, auto&& fn) {
  Field f = Field::scalar(g);
  for (int it = 0; it < g.nodes_t(); ++it)
    for (std::size_t s = 0; s < g.spatial_count(); ++s)
      f(0, g.node(it, s)) = fn(g.t_at(it), g.position(s));
  return f;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("grid validation and counts") {
  GridSpec g = grid1(4, 6);
  CHECK_NOTHROW(g.validate());
  CHECK(g.node_count() == 5u * 7u);
  CHECK(grid2(4, 6).node_count() == 5u * 49u);

  GridSpec bad = grid1(1, 4);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = grid1(4, 1);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = grid1(4, 4);
  bad.x_hi[0] = bad.x_lo[0];
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = grid1(4, 4);
  bad.dim = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("quadrature weights integrate constants exactly") {
  GridSpec g = grid2(5, 7);
  g.x_lo = {-1.0, 0.5};
  g.x_hi = {2.0, 1.5};
  const auto w = g.node_weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  const auto ws = g.spatial_weights();
  CHECK(std::accumulate(ws.begin(), ws.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("delta of a constant") {
  for (const GridSpec& g : {grid1(4, 5), grid2(3, 4)}) {
    const Field q = apply_delta(sample(g, [](double, auto) { return 7.0; }));
    for (int k = 0; k <= g.dim; ++k) CHECK(max_abs(q.component(k)) < 1e-12);
    for (double v : q.component(g.dim + 1)) CHECK(v == 7.0);
  }
}

TEST_CASE("delta reproduces affine fields") {
  GridSpec g = grid2(6, 5);
  g.x_lo = {-0.5, 1.0};
  g.x_hi = {0.5, 3.0};
  const Field phi = sample(g, [](double t, auto x) { return 2.0 * t - 3.0 * x[0] + 0.5 * x[1] + 1.0; });
  const Field q = apply_delta(phi);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    CHECK(q(0, n) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(q(1, n) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(q(2, n) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(q(3, n) == phi(0, n));
  }

  const GridSpec g1 = grid1(4, 4);
  const Field qt = apply_delta(sample(g1, [](double t, auto) { return t; }));
  for (int it = 0; it < g1.nodes_t(); ++it) {
    for (std::size_t s = 0; s < g1.spatial_count(); ++s) {
      const std::size_t n = g1.node(it, s);
      CHECK(qt(0, n) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(qt(1, n)) < 1e-12);
      CHECK(qt(2, n) == doctest::Approx(g1.t_at(it)));
    }
  }
}

TEST_CASE("spatial derivative is second order") {
  // Quadratics are reproduced exactly by all the stencils.
  const GridSpec g = grid1(2, 8);
  const Field q = apply_delta(sample(g, [](double, auto x) { return x[0] * x[0]; }));
  for (std::size_t s = 0; s < g.spatial_count(); ++s)
    CHECK(q(1, g.node(1, s)) == doctest::Approx(2.0 * g.position(s)[0]).epsilon(1e-12));

  auto err = [](int n) {
    const GridSpec gn = grid1(2, n);
    const Field qn = apply_delta(sample(gn, [](double, auto x) { return std::sin(3.0 * x[0]); }));
    double e = 0.0;
    for (std::size_t s = 0; s < gn.spatial_count(); ++s)
      e = std::max(e, std::abs(qn(1, gn.node(0, s)) - 3.0 * std::cos(3.0 * gn.position(s)[0])));
    return e;
  };
  const double ratio1 = err(16) / err(32);
  const double ratio2 = err(32) / err(64);
  CHECK(ratio1 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(ratio2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("adjoint identity on random fields") {
  std::mt19937_64 rng(42);
  GridSpec g2 = grid2(5, 6);
  g2.x_lo = {0.0, -1.0};
  g2.x_hi = {2.0, 0.5};
  for (const GridSpec& g : {grid1(2, 2), grid1(7, 9), grid2(2, 2), g2}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Field phi = testing::random_field(g, 1, rng);
      const Field q = testing::random_field(g, stacked_components(g), rng);
      const double lhs = inner(apply_delta(phi), q);
      const double rhs = inner(phi, apply_delta_adjoint(q));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * norm(phi) * norm(q));
    }
  }
}

TEST_CASE("adjoint of simple fields") {
  const GridSpec g = grid2(3, 4);
  const Field zero = Field::stacked(g);
  CHECK(max_abs(apply_delta_adjoint(zero).values()) == 0.0);

  std::mt19937_64 rng(3);
  const Field c = testing::random_field(g, 1, rng);
  Field q = Field::stacked(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) q(g.dim + 1, n) = c(0, n);
  const Field back = apply_delta_adjoint(q);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    CHECK(back(0, n) == doctest::Approx(c(0, n)).epsilon(1e-14));
}

TEST_CASE("normal operator is symmetric positive definite") {
  std::mt19937_64 rng(11);
  for (const GridSpec& g : {grid1(6, 5), grid2(4, 3)}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Field u = testing::random_field(g, 1, rng);
      const Field v = testing::random_field(g, 1, rng);
      const Field Au = apply_delta_adjoint(apply_delta(u));
      const Field Av = apply_delta_adjoint(apply_delta(v));
      const double uAu = inner(Au, u);
      CHECK(uAu > 0.0);
      CHECK(uAu == doctest::Approx(std::pow(norm(apply_delta(u)), 2)).epsilon(1e-12));
      // The identity block bounds the spectrum from below.
      CHECK(uAu >= inner(u, u) * (1.0 - 1e-12));
      CHECK(std::abs(inner(Au, v) - inner(u, Av)) <= 1e-12 * norm(Au) * norm(v) + 1e-12 * norm(u) * norm(Av));
    }
  }
}

TEST_CASE("inner products and norms") {
  const GridSpec g = grid1(8, 8);
  std::mt19937_64 rng(5);
  const Field v = testing::random_field(g, 1, rng);
  CHECK(inner(Field::scalar(g), v) == 0.0);
  CHECK(norm(sample(g, [](double, auto) { return 1.0; })) == doctest::Approx(1.0).epsilon(1e-14));
  const double n2 = std::pow(norm(sample(g, [](double t, auto) { return t; })), 2);
  CHECK(std::abs(n2 - 1.0 / 3.0) <= g.h_t() * g.h_t());
}

TEST_CASE("field shape errors") {
  const GridSpec g = grid1(3, 3);
  CHECK_THROWS_AS(apply_delta(Field::stacked(g)), Error);
  CHECK_THROWS_AS(apply_delta_adjoint(Field::scalar(g)), Error);
  CHECK_THROWS_AS(inner(Field::scalar(g), Field::stacked(g)), Error);
  CHECK_THROWS_AS(inner(Field::scalar(g), Field::scalar(grid1(3, 4))), Error);
}

TEST_CASE("measure pair validation") {
  const GridSpec g = grid1(3, 3);
  MeasurePair mp{g, {0.25, 0.25, 0.25, 0.25}, {0.0, 0.0, 0.5, 0.5}};
  CHECK_NOTHROW(mp.validate());
  CHECK(mp.mass0() == doctest::Approx(1.0));
  mp.mu1[0] = -0.1;
  CHECK_THROWS_AS(mp.validate(), Error);
  mp.mu1[0] = 0.0;
  mp.mu0.assign(4, 0.0);
  CHECK_NOTHROW(mp.validate_shape());
  CHECK_THROWS_AS(mp.validate(), Error);
  mp.mu0.resize(3);
  CHECK_THROWS_AS(mp.validate_shape(), Error);
}
