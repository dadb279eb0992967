#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "udot/oracle.hpp"

using namespace udot;
using namespace udot::oracle;

namespace {

const Domain kUnit{1, {0.0, 0.0}, {1.0, 1.0}};

VelocityFn constant_v(double v) {
  return [v](double, const Point&) { return Point{v, 0.0}; };
}
ScalarFn constant_w(double w) {
  return [w](double, const Point&) { return w; };
}

}  // namespace

TEST_CASE("characteristics") {
  auto path = characteristic_solve(kUnit, {0.1, 0.0}, 1.0, constant_v(0.2), constant_w(0.0), 10);
  REQUIRE(path.size() == 11);
  CHECK(path.back().x[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(path.back().t == doctest::Approx(1.0));

  path = characteristic_solve(kUnit, {0.5, 0.0}, 1.0, constant_v(0.0), constant_w(1.0), 10);
  CHECK(std::exp(path.back().logm) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  const VelocityFn linear = [](double, const Point& x) { return Point{x[0], 0.0}; };
  path = characteristic_solve(kUnit, {0.1, 0.0}, 1.0, linear, constant_w(0.0), 100);
  CHECK(std::abs(path.back().x[0] - 0.1 * std::exp(1.0)) <= 1e-8);

  auto err = [&](int steps) {
    return std::abs(characteristic_solve(kUnit, {0.1, 0.0}, 1.0, linear, constant_w(0.0), steps)
                        .back().x[0] - 0.1 * std::exp(1.0));
  };
  const double ratio = err(10) / err(20);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);

  CHECK_THROWS_AS(characteristic_solve(kUnit, {0.5, 0.0}, 1.0, constant_v(2.0), constant_w(0.0), 10),
                  ExitsDomain);
  CHECK_THROWS_AS(characteristic_solve(kUnit, {0.5, 0.0}, 0.0, constant_v(0.0), constant_w(0.0), 10),
                  Error);
  CHECK_THROWS_AS(characteristic_solve(kUnit, {0.5, 0.0}, 1.0, constant_v(0.0), constant_w(0.0), 0),
                  Error);

  // Backward integration.
  path = characteristic_solve(kUnit, {0.3, 0.0}, 1.0, constant_v(0.2), constant_w(0.0), 4, 1.0, 0.0);
  CHECK(path.back().x[0] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("characteristic density") {
  const GridSpec g = testing::grid1(8, 8);
  const Field rho = characteristic_density(
      g, [](const Point&) { return 1.0; }, constant_v(0.0), constant_w(1.0),
      constant_w(0.0), 50);
  for (int it = 0; it < g.nodes_t(); ++it)
    for (std::size_t s = 0; s < g.spatial_count(); ++s)
      CHECK(rho(0, g.node(it, s)) == doctest::Approx(std::exp(g.t_at(it))).epsilon(1e-10));

  // v = x: rho(t, x) = rho0(x e^-t) e^-t.
  const Field lin = characteristic_density(
      g, [](const Point& x) { return 1.0 + x[0]; },
      [](double, const Point& x) { return Point{x[0], 0.0}; }, constant_w(0.0), constant_w(1.0),
      100);
  for (int it = 0; it < g.nodes_t(); ++it)
    for (std::size_t s = 0; s < g.spatial_count(); ++s) {
      const double t = g.t_at(it), x = g.position(s)[0];
      CHECK(lin(0, g.node(it, s)) ==
            doctest::Approx((1.0 + x * std::exp(-t)) * std::exp(-t)).epsilon(1e-8));
    }
}

TEST_CASE("quantile transport") {
  const double x0[] = {0.0}, m0[] = {1.0}, x1[] = {1.0}, m1[] = {1.0};
  CHECK(quantile_ot_1d(x0, m0, x1, m1) == doctest::Approx(0.5));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(7), ma(7), b(5), mb(5);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  for (auto& v : ma) v = u(rng);
  for (auto& v : mb) v = u(rng);
  const double sa = std::accumulate(ma.begin(), ma.end(), 0.0);
  const double sb = std::accumulate(mb.begin(), mb.end(), 0.0);
  for (auto& v : mb) v *= sa / sb;
  const double base = quantile_ot_1d(a, ma, b, mb);
  CHECK(base > 0.0);
  CHECK(quantile_ot_1d(a, ma, a, ma) == doctest::Approx(0.0).scale(1.0));
  CHECK(quantile_ot_1d(b, mb, a, ma) == doctest::Approx(base).epsilon(1e-12));

  // Mass homogeneity and rigid translation.
  std::vector<double> ma3 = ma, mb3 = mb, shifted = a;
  for (auto& v : ma3) v *= 3.0;
  for (auto& v : mb3) v *= 3.0;
  CHECK(quantile_ot_1d(a, ma3, b, mb3) == doctest::Approx(3.0 * base).epsilon(1e-12));
  for (auto& v : shifted) v += 0.4;
  CHECK(quantile_ot_1d(a, ma, shifted, ma) == doctest::Approx(0.5 * sa * 0.16).epsilon(1e-12));

  const double half[] = {0.5};
  try {
    quantile_ot_1d(x0, m0, x1, half);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleMassBalance);
  }
  const double neg[] = {-1.0};
  CHECK_THROWS_AS(quantile_ot_1d(x0, neg, x1, neg), Error);
}

TEST_CASE("single dirac transcription") {
  const HamiltonianSpec wfr{Wfr{1.0}};
  const HamiltonianSpec bal{Balanced{}};
  CHECK(dirac_pair_cost(1, {0.5, 0.0}, 1.0, {0.5, 0.0}, 1.0, wfr).cost == doctest::Approx(0.0).scale(1.0));

  // Pure growth: m(t) = (1 + (sqrt(c) - 1) t)^2 with cost 2 (sqrt(c) - 1)^2.
  const double growth = dirac_pair_cost(1, {0.5, 0.0}, 1.0, {0.5, 0.0}, 4.0, wfr).cost;
  CHECK(std::abs(growth - 2.0) <= 1e-3 * 2.0);

  const double shift = dirac_pair_cost(1, {0.2, 0.0}, 1.0, {0.5, 0.0}, 1.0, bal).cost;
  CHECK(shift == doctest::Approx(0.045).epsilon(1e-6));
  const double shift2 = dirac_pair_cost(2, {0.2, 0.1}, 2.0, {0.5, 0.5}, 2.0, bal).cost;
  CHECK(shift2 == doctest::Approx(0.25).epsilon(1e-6));

  try {
    dirac_pair_cost(1, {0.5, 0.0}, 1.0, {0.5, 0.0}, 2.0, bal);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
  const HamiltonianSpec slow{BoxConstrained{1.0, 0.1, 0.0, 0.0}};
  CHECK_THROWS_AS(dirac_pair_cost(1, {0.1, 0.0}, 1.0, {0.9, 0.0}, 1.0, slow), Error);
  CHECK_THROWS_AS(dirac_pair_cost(1, {0.5, 0.0}, 1.0, {0.5, 0.0}, 2.0, slow), Error);
}

TEST_CASE("simplex") {
  // min x + y subject to x + y = 1
  const double A1[] = {1.0, 1.0}, b1[] = {1.0}, c1[] = {1.0, 1.0};
  SimplexResult r = simplex(1, 2, A1, b1, c1);
  CHECK(r.status == LPStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));

  // min -x - 2y subject to x + y + s = 4, x + 3y + u = 6
  const double A2[] = {1, 1, 1, 0, 1, 3, 0, 1}, b2[] = {4, 6}, c2[] = {-1, -2, 0, 0};
  r = simplex(2, 4, A2, b2, c2);
  CHECK(r.status == LPStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-5.0));
  CHECK(r.x[0] == doctest::Approx(3.0));
  CHECK(r.x[1] == doctest::Approx(1.0));

  const double A3[] = {1.0}, b3[] = {-1.0}, c3[] = {0.0};
  CHECK(simplex(1, 1, A3, b3, c3).status == LPStatus::Infeasible);

  const double A4[] = {1.0, -1.0}, b4[] = {0.0}, c4[] = {-1.0, 0.0};
  CHECK(simplex(1, 2, A4, b4, c4).status == LPStatus::Unbounded);
}

TEST_CASE("occupation measure lp") {
  const HamiltonianSpec wfr{Wfr{1.0}};
  const HamiltonianSpec bal{Balanced{}};

  const double mu[] = {0.2, 0.5, 0.3};
  const LPSolution still = solve_lp(build_lp(mu, mu, action_grid(wfr, 3, 1.0, 3, -1.0, 1.0), 4, 3, wfr));
  CHECK(still.status == LPStatus::Optimal);
  CHECK(std::abs(still.objective) <= 1e-12);
  CHECK(still.balance_residual <= 1e-9);

  // Two-cell shift over one step.
  const double left[] = {1.0, 0.0}, right[] = {0.0, 1.0};
  const LPSolution shift = solve_lp(build_lp(left, right, action_grid(bal, 3, 1.0, 1, 0.0, 0.0), 1, 2, bal));
  CHECK(shift.status == LPStatus::Optimal);
  CHECK(shift.objective == doctest::Approx(0.5).epsilon(1e-12));

  // Unreachable target.
  const LPSolution stuck = solve_lp(build_lp(left, right, action_grid(bal, 1, 0.0, 1, 0.0, 0.0), 2, 2, bal));
  CHECK(stuck.status == LPStatus::Infeasible);

  CHECK_THROWS_AS(build_lp(left, right, action_grid(bal, 3, 1.0, 1, 0.0, 0.0), 0, 2, bal), Error);
  CHECK_THROWS_AS(build_lp(left, right, action_grid(bal, 3, 1.0, 1, 0.0, 0.0), 17, 2, bal), Error);
  CHECK_THROWS_AS(build_lp(left, right, {Action{0.0, 1.0}}, 2, 2, bal), Error);
}

TEST_CASE("lp growth matches enumeration of growth paths") {
  // One cell, four steps, 21 growth rates. Mass can split, so the LP value is
  // the lower convex envelope of the (final mass, cost) pairs of all pure
  // paths evaluated at the target mass.
  const HamiltonianSpec wfr{Wfr{1.0}};
  constexpr int T = 4, nb = 21;
  const double dt = 1.0 / T, target = 4.0;
  std::vector<double> betas(nb);
  for (int i = 0; i < nb; ++i) betas[i] = 3.0 * i / (nb - 1);

  std::vector<std::pair<double, double>> pts;
  int idx[T] = {0, 0, 0, 0};
  while (true) {
    double m = 1.0, cost = 0.0;
    for (int k = 0; k < T; ++k) {
      const double beta = betas[idx[k]];
      const double u = beta * dt;
      const double E = u == 0.0 ? 1.0 : std::expm1(u) / u;
      cost += 0.5 * beta * beta * dt * E * m;
      m *= std::exp(u);
    }
    pts.emplace_back(m, cost);
    int k = 0;
    while (k < T && ++idx[k] == nb) idx[k++] = 0;
    if (k == T) break;
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      if ((b.second - a.second) * (p.first - a.first) >= (p.second - a.second) * (b.first - a.first))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const auto& lo = hull[i];
    const auto& hi = hull[i + 1];
    if (lo.first <= target && target <= hi.first && hi.first > lo.first)
      best = lo.second + (target - lo.first) / (hi.first - lo.first) * (hi.second - lo.second);
  }

  const double m0[] = {1.0, 0.0}, m1[] = {target, 0.0};
  const LPSolution sol = solve_lp(build_lp(m0, m1, action_grid(wfr, 1, 0.0, nb, 0.0, 3.0), T, 2, wfr));
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(std::abs(sol.objective - best) <= 1e-9);
  CHECK(std::abs(sol.objective - 2.0) <= 0.05);
}
