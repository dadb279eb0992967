#pragma once

// Problem instances: a grid, a Hamiltonian, the boundary measures and solver
// settings, read from and written to a small YAML document
//
//   grid:        {dim: 1, n_t: 64, n_x: 64, x_lo: [0], x_hi: [1]}
//   hamiltonian: {variant: wfr, delta: 1}
//   measures:
//     mu0: [{gaussian: {center: [0.5], width: 0.1, mass: 1}}]
//     mu1: [0.0, 0.1, ...]          # or explicit node masses
//   solver:      {r: 1, max_iters: 5000}

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "udot/alm.hpp"
#include "udot/grid.hpp"
#include "udot/hamiltonian.hpp"

namespace udot {

struct Instance {
  GridSpec grid;
  HamiltonianSpec ham;
  MeasurePair measures;
  SolverConfig solver;

  bool operator==(const Instance& o) const {
    return grid == o.grid && ham == o.ham && measures.mu0 == o.measures.mu0 &&
           measures.mu1 == o.measures.mu1 && solver == o.solver;
  }
};

// Throws ParseError (with a line number when one is known).
Instance parse_instance(std::string_view text);
// Throws Error(Io) or ParseError.
Instance load_instance(const std::filesystem::path& path);

// Canonical form: every measure as explicit node masses, all reals printed
// with 17 significant digits, so parse_instance(write_instance(x)) == x.
std::string write_instance(const Instance& inst);

// Node masses of the measure generators on a grid.
std::vector<double> gaussian_masses(const GridSpec& g, std::array<double, 2> center,
                                    double width, double mass);
std::vector<double> box_masses(const GridSpec& g, std::array<double, 2> lo,
                               std::array<double, 2> hi, double mass);
std::vector<double> smoothed_dirac_masses(const GridSpec& g,
                                          std::array<double, 2> center,
                                          double radius, double mass);

// Necessary feasibility conditions. Returns human-readable warnings; a
// Balanced mass mismatch throws Error(InfeasibleMassBalance).
std::vector<std::string> check_feasibility(const Instance& inst);

}  // namespace udot
