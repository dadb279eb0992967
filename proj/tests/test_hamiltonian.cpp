#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "udot/hamiltonian.hpp"

using namespace udot;

namespace {

// Closed forms written out independently of the library.
double h_ref(const HamiltonianSpec& spec, double b0, double b1, double c) {
  if (const auto* w = std::get_if<Wfr>(&spec.variant))
    return 0.5 * (b0 * b0 + b1 * b1 + c * c / (w->delta * w->delta));
  if (spec.is_balanced()) return 0.5 * (b0 * b0 + b1 * b1);
  const auto& bx = std::get<BoxConstrained>(spec.variant);
  auto hv = [&](double p) {
    return std::abs(p) <= bx.v_max ? 0.5 * p * p : bx.v_max * std::abs(p) - 0.5 * bx.v_max * bx.v_max;
  };
  const double d2 = bx.delta * bx.delta;
  const double wb = std::clamp(c / d2, bx.w_min, bx.w_max);
  return hv(b0) + hv(b1) + c * wb - 0.5 * d2 * wb * wb;
}

double h_lib(const HamiltonianSpec& spec, double b, double c) {
  return evaluate(spec, std::span<const double>(&b, 1), c);
}

std::vector<HamiltonianSpec> variants() {
  return {HamiltonianSpec{Wfr{1.0}}, HamiltonianSpec{Wfr{0.5}}, HamiltonianSpec{Balanced{}},
          HamiltonianSpec{BoxConstrained{1.0, 1.0, -0.5, 2.0}},
          HamiltonianSpec{BoxConstrained{2.0, 0.3, 0.0, 0.0}}};
}

double dist(const KPoint& p, const KPoint& q) {
  return std::sqrt((p.a - q.a) * (p.a - q.a) + (p.b[0] - q.b[0]) * (p.b[0] - q.b[0]) +
                   (p.b[1] - q.b[1]) * (p.b[1] - q.b[1]) + (p.c - q.c) * (p.c - q.c));
}

double violation(const HamiltonianSpec& spec, const KPoint& p) {
  return p.a + h_ref(spec, p.b[0], p.b[1], p.c);
}

}  // namespace

TEST_CASE("hamiltonian values") {
  const HamiltonianSpec wfr{Wfr{1.0}};
  const double zero[2] = {0.0, 0.0};
  CHECK(evaluate(wfr, zero, 0.0) == 0.0);
  const double b[2] = {1.0, 0.0};
  CHECK(evaluate(wfr, b, 2.0) == doctest::Approx(2.5));

  const HamiltonianSpec box{BoxConstrained{1.0, 1.0, 0.0, 0.0}};
  for (double c : {-3.0, 0.0, 5.0}) CHECK(h_lib(box, 2.0, c) == doctest::Approx(1.5));

  // Brute-force sup over a 10^4-point grid of F = [-1, 1] x {0}.
  double sup = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const double v = -1.0 + 2.0 * i / 9999.0;
    sup = std::max(sup, 2.0 * v - 0.5 * v * v);
  }
  CHECK(std::abs(h_lib(box, 2.0, 0.7) - sup) <= 1e-6);
}

TEST_CASE("hamiltonian matches closed forms") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const auto& spec : variants()) {
    for (int i = 0; i < 1000; ++i) {
      const double b[2] = {u(rng), u(rng)};
      const double c = u(rng);
      CHECK(evaluate(spec, b, c) == doctest::Approx(h_ref(spec, b[0], b[1], c)).epsilon(1e-13));
    }
  }
}

TEST_CASE("fenchel consistency") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& spec : variants()) {
    for (int i = 0; i < 1000; ++i) {
      const double b = u(rng), c = u(rng);
      const double H = h_lib(spec, b, c);
      for (int j = 0; j < 1000; ++j) {
        Control z{{u(rng), 0.0}, u(rng)};
        z = clamp_to_F(spec, z, 1);
        const double val = b * z.v[0] + c * z.w - lagrangian_cost(spec, std::span<const double>(z.v.data(), 1), z.w);
        REQUIRE(H >= val - 1e-12);
      }
      const Control m = maximizer(spec, std::span<const double>(&b, 1), c);
      CHECK(feasible_F(spec, std::span<const double>(m.v.data(), 1), m.w));
      const double at_max =
          b * m.v[0] + c * m.w - lagrangian_cost(spec, std::span<const double>(m.v.data(), 1), m.w);
      CHECK(std::abs(H - at_max) <= 1e-6);
    }
  }
}

TEST_CASE("hamiltonian is convex") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  for (const auto& spec : variants()) {
    for (int i = 0; i < 2000; ++i) {
      const double b0 = u(rng), c0 = u(rng), b1 = u(rng), c1 = u(rng);
      const double th = s(rng);
      const double mid = h_lib(spec, th * b0 + (1 - th) * b1, th * c0 + (1 - th) * c1);
      CHECK(mid <= th * h_lib(spec, b0, c0) + (1 - th) * h_lib(spec, b1, c1) + 1e-12);
    }
  }
}

TEST_CASE("lagrangian and control set") {
  const HamiltonianSpec wfr2{Wfr{2.0}};
  const double v0[2] = {0.0, 0.0};
  CHECK(lagrangian_cost(wfr2, v0, 0.0) == 0.0);
  const double v[2] = {3.0, 4.0};
  CHECK(lagrangian_cost(wfr2, v, 1.0) == doctest::Approx(14.5));
  CHECK(lagrangian_cost(HamiltonianSpec{Balanced{}}, v, 1.0) == doctest::Approx(12.5));

  const HamiltonianSpec box{BoxConstrained{1.0, 1.0, 0.0, 2.0}};
  const double half = 0.5;
  CHECK_FALSE(feasible_F(box, std::span<const double>(&half, 1), 3.0));
  CHECK(feasible_F(box, std::span<const double>(&half, 1), 2.0 + 5e-10));
  CHECK(feasible_F(HamiltonianSpec{Balanced{}}, std::span<const double>(&half, 1), 1e-10));
  CHECK_FALSE(feasible_F(HamiltonianSpec{Balanced{}}, std::span<const double>(&half, 1), 1e-8));
}

TEST_CASE("hamiltonian parameter validation") {
  CHECK_THROWS_AS(HamiltonianSpec{Wfr{0.0}}.validate(), Error);
  CHECK_THROWS_AS((HamiltonianSpec{BoxConstrained{1.0, -1.0, 0.0, 0.0}}.validate()), Error);
  CHECK_THROWS_AS((HamiltonianSpec{BoxConstrained{1.0, 1.0, 1.0, 0.0}}.validate()), Error);
  CHECK_NOTHROW(HamiltonianSpec{Balanced{}}.validate());
}

TEST_CASE("projection examples") {
  const HamiltonianSpec wfr{Wfr{1.0}};
  for (const auto& spec : variants()) {
    const KPoint inside{-1.0, {0.0, 0.0}, 0.0};
    const KPoint p = project_KH(spec, inside);
    CHECK(p.a == -1.0);
    CHECK(p.b[0] == 0.0);
    CHECK(p.c == 0.0);
  }
  const KPoint vertex = project_KH(wfr, KPoint{1.0, {0.0, 0.0}, 0.0});
  CHECK(std::abs(vertex.a) < 1e-12);
  CHECK(std::abs(vertex.b[0]) < 1e-12);
  CHECK(std::abs(vertex.c) < 1e-12);

  // Stationarity of (a - 0)^2 + (b - 2)^2 on a = -b^2/2 gives b^3 + 2b - 4 = 0.
  const KPoint p = project_KH(wfr, KPoint{0.0, {2.0, 0.0}, 0.0});
  CHECK(p.b[0] * p.b[0] * p.b[0] + 2.0 * p.b[0] - 4.0 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(p.b[0] == doctest::Approx(1.1795).epsilon(1e-4));
  CHECK(p.a == doctest::Approx(-0.6957).epsilon(1e-4));
  CHECK(p.c == 0.0);

  CHECK_THROWS_AS(project_KH(wfr, KPoint{std::nan(""), {0.0, 0.0}, 0.0}), Error);
  CHECK_THROWS_AS(project_KH(wfr, KPoint{0.0, {INFINITY, 0.0}, 0.0}), Error);
}

TEST_CASE("projection properties") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& spec : variants()) {
    for (int i = 0; i < 10000; ++i) {
      const KPoint y{u(rng), {u(rng), u(rng)}, u(rng)};
      const KPoint p = project_KH(spec, y);
      REQUIRE(violation(spec, p) <= 1e-9);
      if (violation(spec, y) > 0.0) REQUIRE(std::abs(violation(spec, p)) <= 1e-9);
      const KPoint pp = project_KH(spec, p);
      REQUIRE(dist(p, pp) <= 1e-10);
      if (i % 10 == 0) {
        // Any feasible point is at least as far from y.
        for (int j = 0; j < 20; ++j) {
          KPoint z{0.0, {u(rng), u(rng)}, u(rng)};
          z.a = -h_ref(spec, z.b[0], z.b[1], z.c) - std::abs(u(rng));
          REQUIRE(dist(y, p) <= dist(y, z) + 1e-10);
        }
      }
    }
  }
}

TEST_CASE("projection against brute-force boundary search") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& spec : variants()) {
    int checked = 0;
    while (checked < 30) {
      const KPoint y{u(rng), {u(rng), 0.0}, u(rng)};
      if (violation(spec, y) <= 0.0) continue;
      const KPoint p = project_KH(spec, y);
      const double d = dist(y, p);
      // The optimum lies within d of (y_b, y_c) in the (b, c) plane.
      constexpr int n = 400;
      double best = 1e300;
      for (int i = 0; i < n; ++i) {
        const double b = y.b[0] - d + 2.0 * d * i / (n - 1);
        for (int j = 0; j < n; ++j) {
          const double c = y.c - d + 2.0 * d * j / (n - 1);
          const KPoint z{-h_ref(spec, b, 0.0, c), {b, 0.0}, c};
          best = std::min(best, dist(y, z));
        }
      }
      CHECK(d <= best + 1e-10);
      CHECK(d >= best - 1e-2 * std::max(1.0, d));
      ++checked;
    }
  }
}

TEST_CASE("control truncation box") {
  const GridSpec g = testing::grid1(4, 4);
  const ControlBox box = wfr_truncation(g, 1.0, 4.0);
  CHECK(box.velocity_bound == doctest::Approx(10.0));
  CHECK(box.growth_bound == doctest::Approx(10.0 * std::log(4.0)));
  CHECK(wfr_truncation(g, 1.0, 1.5).growth_bound == doctest::Approx(10.0));
}
