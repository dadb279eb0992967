#include "udot/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace udot {

namespace {

constexpr std::size_t kHeaderBytes = 32;
constexpr int kSnapshots = 11;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

RunSummary summarize(const Instance& inst, const SolveReport& report) {
  RunSummary s;
  s.termination = report.termination;
  s.message = report.message;
  s.iterations = static_cast<int>(report.iterations.size());
  if (!report.iterations.empty()) s.feas_residual = report.iterations.back().feas_residual;
  if (std::holds_alternative<Wfr>(inst.ham.variant))
    s.omega = wfr_truncation(inst.grid, inst.measures.mass0(), inst.measures.mass1());

  const AlmState& st = report.state;
  if (!st.phi.all_finite() || !st.lambda.all_finite()) {
    s.dual_value = s.primal_cost = s.gap = nan();
    s.hjb_residual = s.continuity_residual = nan();
    return s;
  }
  s.dual_value = dual_value(st.phi, inst.measures);
  s.hjb_residual = hjb_residual(st.phi, inst.ham);
  const auto la = st.lambda.component(0);
  const double peak = std::max(0.0, *std::max_element(la.begin(), la.end()));
  const PrimalSolution sol =
      reconstruct(st.lambda, inst.ham, inst.solver.mass_floor_rel * peak);
  s.primal_cost = primal_cost(sol, inst.ham);
  s.gap = relative_gap(s.primal_cost, s.dual_value);
  s.continuity_residual = continuity_residual(sol, inst.measures);
  return s;
}

std::vector<double> snapshot_masses(const PrimalSolution& sol, double t) {
  const GridSpec& g = sol.mu.grid();
  const double pos = std::clamp(t, 0.0, 1.0) * g.n_t;
  const int i0 = std::min(static_cast<int>(std::floor(pos)), g.n_t - 1);
  const double theta = pos - i0;
  const auto ws = g.spatial_weights();
  std::vector<double> out(ws.size());
  for (std::size_t s = 0; s < ws.size(); ++s) {
    const double a = sol.mu(0, g.node(i0, s));
    const double b = sol.mu(0, g.node(i0 + 1, s));
    out[s] = ws[s] * ((1.0 - theta) * a + theta * b);
  }
  return out;
}

std::string report_json(const Instance& inst, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["termination"] = to_string(s.termination);
  if (!s.message.empty()) j["message"] = s.message;
  j["iterations"] = s.iterations;
  j["dual_value"] = s.dual_value;
  j["primal_cost"] = s.primal_cost;
  j["gap"] = s.gap;
  j["feas_residual"] = s.feas_residual;
  j["hjb_residual"] = s.hjb_residual;
  j["continuity_residual"] = s.continuity_residual;
  j["hamiltonian"] = inst.ham.name();
  if (std::holds_alternative<Wfr>(inst.ham.variant)) {
    j["control_truncation"] = {{"velocity_bound", s.omega.velocity_bound},
                               {"growth_bound", s.omega.growth_bound}};
  }
  const GridSpec& g = inst.grid;
  j["grid"] = {{"dim", g.dim}, {"n_t", g.n_t}, {"n_x", g.n_x}};
  j["mass0"] = inst.measures.mass0();
  j["mass1"] = inst.measures.mass1();
  return j.dump(2) + "\n";
}

std::string metrics_csv(const SolveReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,dual_value,primal_cost,gap,feas_residual,cg_iterations\n";
  for (const auto& r : report.iterations) {
    out << r.iter << ',' << r.dual_value << ',' << r.primal_cost << ',' << r.gap
        << ',' << r.feas_residual << ',' << r.cg_iterations << '\n';
  }
  return out.str();
}

std::vector<char> snapshot_bytes(const GridSpec& g, double t,
                                 const std::vector<double>& masses) {
  char header[kHeaderBytes + 1];
  std::memset(header, ' ', kHeaderBytes);
  const int n = std::snprintf(header, sizeof header, "UDOT %d %d %d %.6g", g.dim,
                              g.n_t, g.n_x, t);
  if (n < 0 || static_cast<std::size_t>(n) >= kHeaderBytes)
    throw Error(ErrorCode::Io, "snapshot header overflow");
  std::memset(header + n, ' ', kHeaderBytes - n);
  header[kHeaderBytes - 1] = '\n';

  std::vector<char> out(header, header + kHeaderBytes);
  out.reserve(kHeaderBytes + masses.size() * sizeof(double));
  for (double v : masses) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return out;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string header(kHeaderBytes, '\0');
  if (!in.read(header.data(), kHeaderBytes) || header.back() != '\n')
    throw ParseError("bad snapshot header in " + path.string(), 1);
  Snapshot snap;
  std::istringstream hs(header);
  std::string magic;
  if (!(hs >> magic >> snap.dim >> snap.n_t >> snap.n_x >> snap.t) || magic != "UDOT")
    throw ParseError("bad snapshot header in " + path.string(), 1);
  const std::size_t count = static_cast<std::size_t>(
      snap.dim == 2 ? (snap.n_x + 1) * (snap.n_x + 1) : snap.n_x + 1);
  std::vector<unsigned char> raw(count * 8);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw ParseError("truncated snapshot " + path.string(), 0);
  snap.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[8 * i + b]) << (8 * b);
    snap.values[i] = std::bit_cast<double>(bits);
  }
  return snap;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

void write_outputs(const std::filesystem::path& out_dir, const Instance& inst,
                   const SolveReport& report, const RunSummary& summary) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string());

  write_file_atomic(out_dir / "report.json", report_json(inst, summary));
  write_file_atomic(out_dir / "metrics.csv", metrics_csv(report));

  if (!report.state.lambda.all_finite()) return;
  const auto la = report.state.lambda.component(0);
  const double peak = std::max(0.0, *std::max_element(la.begin(), la.end()));
  const PrimalSolution sol =
      reconstruct(report.state.lambda, inst.ham, inst.solver.mass_floor_rel * peak);
  for (int k = 0; k < kSnapshots; ++k) {
    const double t = k / 10.0;
    const auto bytes = snapshot_bytes(inst.grid, t, snapshot_masses(sol, t));
    write_file_atomic(out_dir / ("mu_t" + std::to_string(k) + ".f64"),
                      std::string_view(bytes.data(), bytes.size()));
  }
}

}  // namespace udot
