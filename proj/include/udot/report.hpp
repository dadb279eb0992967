#pragma once

// Post-processing of a finished solve and the files written for it:
//   report.json   summary values
//   metrics.csv   one row per iteration
//   mu_t{k}.f64   k = 0..10, primal density at t = k/10 as node masses.
//                 32-byte ASCII header "UDOT <d> <n_t> <n_x> <t>" padded with
//                 spaces and ending in '\n', then (n_x+1)^d little-endian
//                 doubles in spatial node order (x fastest).

#include <filesystem>
#include <string>
#include <vector>

#include "udot/alm.hpp"
#include "udot/hamiltonian.hpp"
#include "udot/instance.hpp"
#include "udot/primal.hpp"

namespace udot {

struct RunSummary {
  Termination termination = Termination::MaxIters;
  std::string message;
  int iterations = 0;
  double dual_value = 0.0;
  double primal_cost = 0.0;
  double gap = 0.0;
  double feas_residual = 0.0;
  double hjb_residual = 0.0;
  double continuity_residual = 0.0;
  ControlBox omega{0.0, 0.0};  // control truncation box (WFR only)
};

RunSummary summarize(const Instance& inst, const SolveReport& report);

// The primal density interpolated linearly in time, as node masses.
std::vector<double> snapshot_masses(const PrimalSolution& sol, double t);

std::string report_json(const Instance& inst, const RunSummary& summary);
std::string metrics_csv(const SolveReport& report);
std::vector<char> snapshot_bytes(const GridSpec& g, double t,
                                 const std::vector<double>& masses);

// Parses a snapshot file; throws ParseError on a malformed header.
struct Snapshot {
  int dim = 0;
  int n_t = 0;
  int n_x = 0;
  double t = 0.0;
  std::vector<double> values;
};
Snapshot read_snapshot(const std::filesystem::path& path);

// Writes every output into out_dir (created if needed). Each file is written
// to a temporary name first and renamed into place.
void write_outputs(const std::filesystem::path& out_dir, const Instance& inst,
                   const SolveReport& report, const RunSummary& summary);

void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace udot
