#pragma once

// Primal reconstruction from the converged multiplier. At a saddle point the
// multiplier is (mu, mu v, mu w) as a space-time density.

#include "udot/grid.hpp"
#include "udot/hamiltonian.hpp"

namespace udot {

struct PrimalSolution {
  Field mu;  // density, >= 0
  Field v;   // dim components
  Field w;
  double mass_floor = 0.0;
};

PrimalSolution reconstruct(const Field& lambda, const HamiltonianSpec& ham,
                           double mass_floor);

// 1e-9 times the largest lambda_a node value.
double default_mass_floor(const Field& lambda);

double primal_cost(const PrimalSolution& sol, const HamiltonianSpec& ham);

// Sup over a fixed battery of 25 cosine test functions of the mismatch in the
// weak continuity equation with source, divided by 1 + |phi|_inf.
double continuity_residual(const PrimalSolution& sol,
                           const MeasurePair& measures);

// Total mass of each time slice of a scalar density field.
std::vector<double> slice_masses(const Field& density);

}  // namespace udot
