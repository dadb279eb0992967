#pragma once

#include <random>

#include "udot/grid.hpp"
#include "udot/instance.hpp"

namespace testing {

inline udot::GridSpec grid1(int n_t, int n_x) {
  udot::GridSpec g;
  g.dim = 1;
  g.n_t = n_t;
  g.n_x = n_x;
  return g;
}

inline udot::GridSpec grid2(int n_t, int n_x) {
  udot::GridSpec g = grid1(n_t, n_x);
  g.dim = 2;
  return g;
}

inline udot::Field random_field(const udot::GridSpec& g, int components,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  udot::Field f(g, components);
  for (double& v : f.values()) v = u(rng);
  return f;
}

inline udot::MeasurePair bump_pair(const udot::GridSpec& g, double c0, double c1,
                                   double width, double m0, double m1) {
  udot::MeasurePair mp;
  mp.grid = g;
  mp.mu0 = udot::gaussian_masses(g, {c0, c0}, width, m0);
  mp.mu1 = udot::gaussian_masses(g, {c1, c1}, width, m1);
  return mp;
}

}  // namespace testing
