#include "udot/instance.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace udot {

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
  throw ParseError(what, line_of(n));
}

void expect_map(const YAML::Node& n, const std::string& name) {
  if (!n.IsMap()) fail(n, "'" + name + "' must be a mapping");
}

void reject_unknown(const YAML::Node& n, const std::string& section,
                    const std::set<std::string>& known) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(n, "cannot read '" + key + "' from '" + n.Scalar() + "'");
  }
}

template <typename T>
T required(const YAML::Node& parent, const std::string& key) {
  const YAML::Node n = parent[key];
  if (!n) fail(parent, "missing key '" + key + "'");
  return scalar<T>(n, key);
}

template <typename T>
T optional(const YAML::Node& parent, const std::string& key, T fallback) {
  const YAML::Node n = parent[key];
  return n ? scalar<T>(n, key) : fallback;
}

std::array<double, 2> point(const YAML::Node& n, const std::string& key, int dim) {
  std::array<double, 2> p{0.0, 0.0};
  if (n.IsScalar() && dim == 1) {
    p[0] = scalar<double>(n, key);
    return p;
  }
  if (!n.IsSequence() || static_cast<int>(n.size()) != dim)
    fail(n, "'" + key + "' must list " + std::to_string(dim) + " coordinate(s)");
  for (int k = 0; k < dim; ++k) p[k] = scalar<double>(n[k], key);
  return p;
}

GridSpec parse_grid(const YAML::Node& n) {
  expect_map(n, "grid");
  reject_unknown(n, "grid", {"dim", "n_t", "n_x", "x_lo", "x_hi"});
  GridSpec g;
  g.dim = required<int>(n, "dim");
  if (g.dim != 1 && g.dim != 2) fail(n["dim"], "dim must be 1 or 2");
  g.n_t = required<int>(n, "n_t");
  g.n_x = required<int>(n, "n_x");
  // Unused axes keep their defaults so that equal grids compare equal.
  for (int k = 0; k < g.dim; ++k) {
    if (n["x_lo"]) g.x_lo[k] = point(n["x_lo"], "x_lo", g.dim)[k];
    if (n["x_hi"]) g.x_hi[k] = point(n["x_hi"], "x_hi", g.dim)[k];
  }
  try {
    g.validate();
  } catch (const Error& e) {
    fail(n, e.what());
  }
  return g;
}

HamiltonianSpec parse_hamiltonian(const YAML::Node& n) {
  expect_map(n, "hamiltonian");
  const auto variant = required<std::string>(n, "variant");
  HamiltonianSpec h;
  if (variant == "wfr") {
    reject_unknown(n, "hamiltonian", {"variant", "delta"});
    h.variant = Wfr{optional<double>(n, "delta", 1.0)};
  } else if (variant == "balanced") {
    reject_unknown(n, "hamiltonian", {"variant"});
    h.variant = Balanced{};
  } else if (variant == "box") {
    reject_unknown(n, "hamiltonian", {"variant", "delta", "v_max", "w_min", "w_max"});
    h.variant = BoxConstrained{optional<double>(n, "delta", 1.0),
                               required<double>(n, "v_max"),
                               required<double>(n, "w_min"),
                               required<double>(n, "w_max")};
  } else {
    fail(n["variant"], "unknown variant '" + variant + "' (wfr, balanced, box)");
  }
  try {
    h.validate();
  } catch (const Error& e) {
    fail(n, e.what());
  }
  return h;
}

std::vector<double> parse_generator(const GridSpec& g, const YAML::Node& item) {
  if (!item.IsMap() || item.size() != 1)
    fail(item, "a measure term must be a single generator, e.g. {gaussian: {...}}");
  const auto name = item.begin()->first.as<std::string>();
  const YAML::Node args = item.begin()->second;
  expect_map(args, name);
  try {
    if (name == "gaussian") {
      reject_unknown(args, name, {"center", "width", "mass"});
      if (!args["center"]) fail(args, "missing key 'center'");
      return gaussian_masses(g, point(args["center"], "center", g.dim),
                             required<double>(args, "width"),
                             required<double>(args, "mass"));
    }
    if (name == "box") {
      reject_unknown(args, name, {"lo", "hi", "mass"});
      if (!args["lo"] || !args["hi"]) fail(args, "box needs 'lo' and 'hi'");
      return box_masses(g, point(args["lo"], "lo", g.dim),
                        point(args["hi"], "hi", g.dim),
                        required<double>(args, "mass"));
    }
    if (name == "dirac_smoothed") {
      reject_unknown(args, name, {"center", "radius", "mass"});
      if (!args["center"]) fail(args, "missing key 'center'");
      return smoothed_dirac_masses(g, point(args["center"], "center", g.dim),
                                   required<double>(args, "radius"),
                                   required<double>(args, "mass"));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail(args, e.what());
  }
  fail(item, "unknown generator '" + name + "' (gaussian, box, dirac_smoothed)");
}

std::vector<double> parse_measure(const GridSpec& g, const YAML::Node& n,
                                  const std::string& key) {
  const std::size_t S = g.spatial_count();
  if (!n.IsSequence() || n.size() == 0)
    fail(n, "'" + key + "' must be a list of node masses or of generators");
  std::vector<double> out(S, 0.0);
  if (n[0].IsScalar()) {
    if (n.size() != S)
      fail(n, "'" + key + "' lists " + std::to_string(n.size()) +
                  " node masses, the grid has " + std::to_string(S));
    for (std::size_t s = 0; s < S; ++s) {
      out[s] = scalar<double>(n[s], key);
      if (!std::isfinite(out[s]) || out[s] < 0.0)
        fail(n[s], "node masses must be finite and non-negative");
    }
    return out;
  }
  for (const auto& item : n) {
    const auto term = parse_generator(g, item);
    for (std::size_t s = 0; s < S; ++s) out[s] += term[s];
  }
  return out;
}

Preconditioner parse_preconditioner(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "preconditioner");
  if (s == "none") return Preconditioner::None;
  if (s == "diagonal") return Preconditioner::Diagonal;
  if (s == "spectral") return Preconditioner::Spectral;
  fail(n, "unknown preconditioner '" + s + "' (none, diagonal, spectral)");
}

const char* preconditioner_name(Preconditioner p) {
  switch (p) {
    case Preconditioner::None: return "none";
    case Preconditioner::Diagonal: return "diagonal";
    case Preconditioner::Spectral: return "spectral";
  }
  return "spectral";
}

SolverConfig parse_solver(const YAML::Node& n) {
  SolverConfig c;
  if (!n) return c;
  expect_map(n, "solver");
  reject_unknown(n, "solver",
                 {"r", "max_iters", "tol_feas", "tol_obj", "obj_window",
                  "divergence_bound", "mass_floor_rel", "cg_tol", "cg_max_iters",
                  "preconditioner"});
  c.r = optional(n, "r", c.r);
  c.max_iters = optional(n, "max_iters", c.max_iters);
  c.tol_feas = optional(n, "tol_feas", c.tol_feas);
  c.tol_obj = optional(n, "tol_obj", c.tol_obj);
  c.obj_window = optional(n, "obj_window", c.obj_window);
  c.divergence_bound = optional(n, "divergence_bound", c.divergence_bound);
  c.mass_floor_rel = optional(n, "mass_floor_rel", c.mass_floor_rel);
  c.cg.tol_rel = optional(n, "cg_tol", c.cg.tol_rel);
  c.cg.max_cg_iters = optional(n, "cg_max_iters", c.cg.max_cg_iters);
  if (n["preconditioner"]) c.cg.preconditioner = parse_preconditioner(n["preconditioner"]);
  try {
    c.validate();
  } catch (const Error& e) {
    fail(n, e.what());
  }
  return c;
}

void normalize(std::vector<double>& m, double mass, const char* what) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": mass must be positive");
  double total = 0.0;
  for (double v : m) total += v;
  if (!(total > 0.0))
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " has no mass on the grid");
  for (double& v : m) v *= mass / total;
}

double sq_dist(const GridSpec& g, const std::array<double, 2>& x,
               const std::array<double, 2>& c) {
  double d2 = 0.0;
  for (int k = 0; k < g.dim; ++k) d2 += (x[k] - c[k]) * (x[k] - c[k]);
  return d2;
}

}  // namespace

std::vector<double> gaussian_masses(const GridSpec& g, std::array<double, 2> center,
                                    double width, double mass) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw Error(ErrorCode::InvalidArgument, "gaussian: width must be positive");
  const auto ws = g.spatial_weights();
  std::vector<double> m(ws.size());
  for (std::size_t s = 0; s < ws.size(); ++s)
    m[s] = ws[s] * std::exp(-sq_dist(g, g.position(s), center) / (2.0 * width * width));
  normalize(m, mass, "gaussian");
  return m;
}

std::vector<double> box_masses(const GridSpec& g, std::array<double, 2> lo,
                               std::array<double, 2> hi, double mass) {
  for (int k = 0; k < g.dim; ++k)
    if (!(hi[k] >= lo[k])) throw Error(ErrorCode::InvalidArgument, "box: need lo <= hi");
  const auto ws = g.spatial_weights();
  std::vector<double> m(ws.size(), 0.0);
  for (std::size_t s = 0; s < ws.size(); ++s) {
    const auto x = g.position(s);
    bool inside = true;
    for (int k = 0; k < g.dim; ++k) {
      const double tol = 1e-12 * std::max(1.0, std::abs(g.x_hi[k] - g.x_lo[k]));
      inside = inside && x[k] >= lo[k] - tol && x[k] <= hi[k] + tol;
    }
    if (inside) m[s] = ws[s];
  }
  normalize(m, mass, "box");
  return m;
}

std::vector<double> smoothed_dirac_masses(const GridSpec& g,
                                          std::array<double, 2> center,
                                          double radius, double mass) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::InvalidArgument, "dirac_smoothed: radius must be positive");
  const auto ws = g.spatial_weights();
  std::vector<double> m(ws.size(), 0.0);
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < ws.size(); ++s) {
    const double d2 = sq_dist(g, g.position(s), center);
    if (d2 < best) {
      best = d2;
      nearest = s;
    }
    const double u = 1.0 - d2 / (radius * radius);
    if (u > 0.0) m[s] = ws[s] * u * u;
  }
  // A radius below the mesh width collapses onto the nearest node.
  if (std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; }))
    m[nearest] = 1.0;
  normalize(m, mass, "dirac_smoothed");
  return m;
}

Instance parse_instance(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ParseError("instance must be a YAML mapping", line_of(root));
  try {
    reject_unknown(root, "instance", {"grid", "hamiltonian", "measures", "solver"});
    for (const char* key : {"grid", "hamiltonian", "measures"})
      if (!root[key]) fail(root, std::string("missing section '") + key + "'");

    Instance inst;
    inst.grid = parse_grid(root["grid"]);
    inst.ham = parse_hamiltonian(root["hamiltonian"]);
    const YAML::Node meas = root["measures"];
    expect_map(meas, "measures");
    reject_unknown(meas, "measures", {"mu0", "mu1"});
    if (!meas["mu0"] || !meas["mu1"]) fail(meas, "measures need 'mu0' and 'mu1'");
    inst.measures.grid = inst.grid;
    inst.measures.mu0 = parse_measure(inst.grid, meas["mu0"], "mu0");
    inst.measures.mu1 = parse_measure(inst.grid, meas["mu1"], "mu1");
    if (!(inst.measures.mass0() > 0.0)) fail(meas["mu0"], "mu0 has zero total mass");
    inst.solver = parse_solver(root["solver"]);
    return inst;
  } catch (const YAML::Exception& e) {
    throw ParseError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::string write_instance(const Instance& inst) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out.SetSeqFormat(YAML::Flow);
  const GridSpec& g = inst.grid;
  auto vec = [&](const std::array<double, 2>& p) {
    out << YAML::BeginSeq;
    for (int k = 0; k < g.dim; ++k) out << p[k];
    out << YAML::EndSeq;
  };

  out << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dim" << YAML::Value << g.dim;
  out << YAML::Key << "n_t" << YAML::Value << g.n_t;
  out << YAML::Key << "n_x" << YAML::Value << g.n_x;
  out << YAML::Key << "x_lo" << YAML::Value;
  vec(g.x_lo);
  out << YAML::Key << "x_hi" << YAML::Value;
  vec(g.x_hi);
  out << YAML::EndMap;

  out << YAML::Key << "hamiltonian" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "variant" << YAML::Value << inst.ham.name();
  if (const auto* w = std::get_if<Wfr>(&inst.ham.variant)) {
    out << YAML::Key << "delta" << YAML::Value << w->delta;
  } else if (const auto* b = std::get_if<BoxConstrained>(&inst.ham.variant)) {
    out << YAML::Key << "delta" << YAML::Value << b->delta;
    out << YAML::Key << "v_max" << YAML::Value << b->v_max;
    out << YAML::Key << "w_min" << YAML::Value << b->w_min;
    out << YAML::Key << "w_max" << YAML::Value << b->w_max;
  }
  out << YAML::EndMap;

  out << YAML::Key << "measures" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mu0" << YAML::Value << inst.measures.mu0;
  out << YAML::Key << "mu1" << YAML::Value << inst.measures.mu1;
  out << YAML::EndMap;

  const SolverConfig& c = inst.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "r" << YAML::Value << c.r;
  out << YAML::Key << "max_iters" << YAML::Value << c.max_iters;
  out << YAML::Key << "tol_feas" << YAML::Value << c.tol_feas;
  out << YAML::Key << "tol_obj" << YAML::Value << c.tol_obj;
  out << YAML::Key << "obj_window" << YAML::Value << c.obj_window;
  out << YAML::Key << "divergence_bound" << YAML::Value << c.divergence_bound;
  out << YAML::Key << "mass_floor_rel" << YAML::Value << c.mass_floor_rel;
  out << YAML::Key << "cg_tol" << YAML::Value << c.cg.tol_rel;
  out << YAML::Key << "cg_max_iters" << YAML::Value << c.cg.max_cg_iters;
  out << YAML::Key << "preconditioner" << YAML::Value
      << preconditioner_name(c.cg.preconditioner);
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> check_feasibility(const Instance& inst) {
  check_mass_balance(inst.measures, inst.ham);
  std::vector<std::string> warnings;
  const auto* box = std::get_if<BoxConstrained>(&inst.ham.variant);
  if (!box) return warnings;

  const double m0 = inst.measures.mass0();
  const double m1 = inst.measures.mass1();
  const double z = m1 > 0.0 ? std::log(m1 / m0) : -std::numeric_limits<double>::infinity();
  if (z < box->w_min || z > box->w_max) {
    std::ostringstream msg;
    msg << "ln(m1/m0) = " << z << " lies outside [w_min, w_max] = [" << box->w_min
        << ", " << box->w_max << "]";
    warnings.push_back(msg.str());
  }

  // Supports are the nodes carrying at least 1e-6 of the peak node mass.
  const GridSpec& g = inst.grid;
  auto support = [&](const std::vector<double>& mu) {
    std::vector<std::array<double, 2>> pts;
    const double peak = *std::max_element(mu.begin(), mu.end());
    for (std::size_t s = 0; s < mu.size(); ++s)
      if (peak > 0.0 && mu[s] >= 1e-6 * peak) pts.push_back(g.position(s));
    return pts;
  };
  const auto s0 = support(inst.measures.mu0);
  const auto s1 = support(inst.measures.mu1);
  auto directed = [&](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : to) {
        double d = 0.0;
        for (int k = 0; k < g.dim; ++k) d = std::max(d, std::abs(x[k] - y[k]));
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (!s0.empty() && !s1.empty()) {
    const double disp = std::max(directed(s0, s1), directed(s1, s0));
    if (disp > box->v_max) {
      std::ostringstream msg;
      msg << "support displacement " << disp << " exceeds v_max = " << box->v_max;
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

}  // namespace udot
