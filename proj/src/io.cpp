#include "spnp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "spnp/errors.hpp"
#include "spnp/manufactured.hpp"

namespace spnp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": not a number: '" + s + "'", key);
  return v;
}

long to_long(const std::string& s, const std::string& key) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": not an integer: '" + s + "'", key);
  return v;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'", key);
}

std::string one_of(const std::string& s, const std::string& key, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (s == a) return s;
  std::string msg = key + ": expected one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + s + "'", key);
}

std::string join_doubles(const std::vector<double>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + fmt(v[i]);
  return out;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::optional<std::string>(const RunConfig&)> emit;
};

Key double_key(const char* name, std::optional<double> RunConfig::*field, bool allow_zero = false) {
  return {name,
          [=](RunConfig& c, const std::string& s) {
            const double v = to_double(s, name);
            if (!std::isfinite(v) || v < 0 || (!allow_zero && v == 0))
              throw ConfigError(std::string(name) + (allow_zero ? ": must be nonnegative" : ": must be positive") +
                                    ", got " + s,
                                name);
            c.*field = v;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return fmt(*(c.*field));
          }};
}

Key bool_key(const char* name, std::optional<bool> RunConfig::*field) {
  return {name, [=](RunConfig& c, const std::string& s) { c.*field = to_bool(s, name); },
          [=](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return *(c.*field) ? "true" : "false";
          }};
}

Key count_key(const char* name, std::optional<long> RunConfig::*field) {
  return {name,
          [=](RunConfig& c, const std::string& s) {
            const long v = to_long(s, name);
            if (v < 1) throw ConfigError(std::string(name) + ": must be at least 1, got " + s, name);
            c.*field = v;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return std::to_string(*(c.*field));
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"scenario",
       [](RunConfig& c, const std::string& s) {
         if (s != "manufactured") (void)scenario_by_name(s);
         c.scenario = s;
       },
       [](const RunConfig& c) -> std::optional<std::string> { return c.scenario; }},
      {"profile", [](RunConfig& c, const std::string& s) { c.profile = one_of(s, "profile", {"desk", "full"}); },
       [](const RunConfig& c) -> std::optional<std::string> { return c.profile; }},
      double_key("Re", &RunConfig::Re),
      double_key("Pe", &RunConfig::Pe),
      double_key("Co", &RunConfig::Co),
      double_key("lambda", &RunConfig::lambda),
      double_key("mu0", &RunConfig::mu0),
      double_key("mu_inf", &RunConfig::mu_inf),
      double_key("lambda1", &RunConfig::lambda1, true),
      double_key("k", &RunConfig::k),
      {"z",
       [](RunConfig& c, const std::string& s) {
         std::vector<int> z;
         for (const auto& item : split(s, ',')) z.push_back(static_cast<int>(to_long(item, "z")));
         if (z.empty()) throw ConfigError("z: at least one valence is required", "z");
         c.z = z;
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         if (!c.z) return std::nullopt;
         std::string out;
         for (std::size_t i = 0; i < c.z->size(); ++i) out += (i ? "," : "") + std::to_string((*c.z)[i]);
         return out;
       }},
      {"W",
       [](RunConfig& c, const std::string& s) {
         std::vector<std::vector<double>> w;
         for (const auto& row : split(s, ';')) {
           std::vector<double> r;
           for (const auto& item : split(row, ',')) r.push_back(to_double(item, "W"));
           w.push_back(r);
         }
         for (const auto& r : w)
           if (r.size() != w.size()) throw ConfigError("W: must be square, rows separated by ';'", "W");
         c.W = w;
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         if (!c.W) return std::nullopt;
         std::string out;
         for (std::size_t i = 0; i < c.W->size(); ++i) out += (i ? ";" : "") + join_doubles((*c.W)[i]);
         return out;
       }},
      double_key("B", &RunConfig::B),
      count_key("nx", &RunConfig::nx),
      count_key("ny", &RunConfig::ny),
      double_key("dt", &RunConfig::dt),
      double_key("T", &RunConfig::T),
      {"solver", [](RunConfig& c, const std::string& s) { c.solver = one_of(s, "solver", {"direct", "iterative"}); },
       [](const RunConfig& c) { return c.solver; }},
      double_key("solver_tol", &RunConfig::solver_tol),
      count_key("solver_maxit", &RunConfig::solver_maxit),
      bool_key("clamp_viscosity", &RunConfig::clamp_viscosity),
      bool_key("sigma_diffusion_coeff_one", &RunConfig::sigma_diffusion_coeff_one),
      bool_key("strict_energy", &RunConfig::strict_energy),
      bool_key("xi_scales_dirichlet_potential", &RunConfig::xi_scales_dirichlet_potential),
      {"potential_bc",
       [](RunConfig& c, const std::string& s) {
         c.potential_bc = one_of(s, "potential_bc", {"zero_mean", "dirichlet_lr"});
       },
       [](const RunConfig& c) { return c.potential_bc; }},
      {"compatibility",
       [](RunConfig& c, const std::string& s) {
         c.compatibility = one_of(s, "compatibility", {"strict", "project_out"});
       },
       [](const RunConfig& c) { return c.compatibility; }},
      {"out",
       [](RunConfig& c, const std::string& s) {
         if (s.empty()) throw ConfigError("out: empty path", "out");
         c.out = s;
       },
       [](const RunConfig& c) { return c.out; }},
      {"snapshot_times",
       [](RunConfig& c, const std::string& s) {
         std::vector<double> t;
         for (const auto& item : split(s, ',')) {
           const double v = to_double(item, "snapshot_times");
           if (!(v >= 0)) throw ConfigError("snapshot_times: times must be nonnegative", "snapshot_times");
           t.push_back(v);
         }
         c.snapshot_times = t;
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         if (!c.snapshot_times) return std::nullopt;
         return join_doubles(*c.snapshot_times);
       }},
  };
  return table;
}

void assign(RunConfig& cfg, const std::string& key, const std::string& value, int line) {
  for (const auto& k : keys()) {
    if (key != k.name) continue;
    try {
      k.parse(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(line ? "line " + std::to_string(line) + ": " + e.what() : e.what(), key, line);
    }
    return;
  }
  throw ConfigError((line ? "line " + std::to_string(line) + ": " : std::string()) + "unknown key '" + key + "'", key,
                    line);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", {}, line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": missing key", {}, line);
    if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": missing value for " + key, key, line);
    assign(cfg, key, value, line);
  }
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (value.empty()) throw ConfigError("missing value for " + key, key);
  assign(cfg, key, value, 0);
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys())
    if (auto v = k.emit(cfg)) out += std::string(k.name) + " = " + *v + "\n";
  return out;
}

ResolvedRun resolve_config(const RunConfig& cfg) {
  ResolvedRun r;
  Scenario& s = r.scenario;
  if (cfg.scenario == "manufactured") {
    r.manufactured = true;
    s.name = "manufactured";
    s.params = manufactured_params();
    s.cells = 16;
    s.params.T = 0.5;
    s.params.dt = 0.5 / 16;
    s.options.check_mass = false;
    s.options.potential_compatibility = CompatibilityPolicy::ProjectOut;
    s.initial = manufactured_initial(reference_exact_solution());
  } else {
    s = scenario_by_name(cfg.scenario);
    if (cfg.profile == "desk") apply_desk_profile(s);
  }
  Params& p = s.params;
  if (cfg.Re) p.Re = *cfg.Re;
  if (cfg.Pe) p.Pe = *cfg.Pe;
  if (cfg.Co) p.Co = *cfg.Co;
  if (cfg.lambda) p.lambda = *cfg.lambda;
  if (cfg.mu0) p.mu0 = *cfg.mu0;
  if (cfg.mu_inf) p.mu_inf = *cfg.mu_inf;
  if (cfg.lambda1) p.lambda1 = *cfg.lambda1;
  if (cfg.k) p.k = *cfg.k;
  if (cfg.B) p.B = *cfg.B;
  if (cfg.dt) p.dt = *cfg.dt;
  if (cfg.T) p.T = *cfg.T;
  if (cfg.z) p.valence = *cfg.z;
  if (cfg.W) {
    const auto n = static_cast<Eigen::Index>(cfg.W->size());
    p.steric.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) p.steric(i, j) = (*cfg.W)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (r.manufactured && p.n_species() != 2) throw ConfigError("manufactured runs use two species", "z");
  if (static_cast<int>(s.initial.concentration.size()) != p.n_species())
    throw ConfigError("scenario " + s.name + " provides initial data for " +
                          std::to_string(s.initial.concentration.size()) + " species",
                      "z");
  p.validate();

  SchemeOptions& o = s.options;
  if (cfg.solver) o.solver.kind = *cfg.solver == "direct" ? SolverConfig::Kind::Direct : SolverConfig::Kind::Iterative;
  if (cfg.solver_tol) o.solver.tol = *cfg.solver_tol;
  if (cfg.solver_maxit) o.solver.maxit = *cfg.solver_maxit;
  if (cfg.clamp_viscosity) o.clamp_viscosity = *cfg.clamp_viscosity;
  if (cfg.sigma_diffusion_coeff_one) o.sigma_diffusion_coeff_one = *cfg.sigma_diffusion_coeff_one;
  if (cfg.strict_energy) o.strict_energy = *cfg.strict_energy;
  if (cfg.xi_scales_dirichlet_potential) o.xi_scales_dirichlet_potential = *cfg.xi_scales_dirichlet_potential;
  if (cfg.potential_bc)
    o.potential_bc = *cfg.potential_bc == "zero_mean" ? PotentialBc::ZeroMean : PotentialBc::DirichletLeftRight;
  if (cfg.compatibility)
    o.potential_compatibility =
        *cfg.compatibility == "strict" ? CompatibilityPolicy::Strict : CompatibilityPolicy::ProjectOut;
  if (cfg.snapshot_times) s.snapshot_times = *cfg.snapshot_times;
  r.nx = cfg.nx ? *cfg.nx : s.cells;
  r.ny = cfg.ny ? *cfg.ny : s.cells;
  r.out = cfg.out ? *cfg.out : ".";
  return r;
}

std::string diagnostics_header(int n_species) {
  std::string h = "t,E_h,E_spnp";
  if (n_species == 2) {
    h += ",mass_p,mass_n,min_cp,min_cn";
  } else {
    for (int i = 0; i < n_species; ++i) h += ",mass_" + std::to_string(i);
    for (int i = 0; i < n_species; ++i) h += ",min_c" + std::to_string(i);
  }
  return h + ",xi,r,visc_dissip,ionic_dissip";
}

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records, int n_species) {
  std::string out = diagnostics_header(n_species) + "\n";
  for (const auto& r : records) {
    std::vector<double> row{r.t, r.E_h, r.E_spnp};
    row.insert(row.end(), r.mass.begin(), r.mass.end());
    row.insert(row.end(), r.min_c.begin(), r.min_c.end());
    row.insert(row.end(), {r.xi, r.r, r.visc_dissip, r.ionic_dissip});
    out += join_doubles(row) + "\n";
  }
  return out;
}

std::vector<DiagnosticsRecord> parse_diagnostics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("diagnostics file is empty");
  const std::size_t ncols = split(trim(line), ',').size();
  if (ncols < 9 || (ncols - 7) % 2 != 0) throw ConfigError("diagnostics header has unexpected columns");
  const std::size_t ns = (ncols - 7) / 2;
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != ncols) throw ConfigError("diagnostics row has " + std::to_string(f.size()) + " columns");
    std::vector<double> v;
    for (const auto& s : f) v.push_back(to_double(s, "diagnostics"));
    DiagnosticsRecord r;
    r.t = v[0];
    r.E_h = v[1];
    r.E_spnp = v[2];
    r.mass.assign(v.begin() + 3, v.begin() + 3 + static_cast<long>(ns));
    r.min_c.assign(v.begin() + 3 + static_cast<long>(ns), v.begin() + 3 + 2 * static_cast<long>(ns));
    const std::size_t b = 3 + 2 * ns;
    r.xi = v[b];
    r.r = v[b + 1];
    r.visc_dissip = v[b + 2];
    r.ionic_dissip = v[b + 3];
    out.push_back(r);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRecord>& records, int n_species) {
  write_text(path, diagnostics_csv(records, n_species));
}

std::string snapshot_vtk(const Level& level, double t) {
  const FeSpace& p2 = *level.u.field.space;
  const FeSpace& p1 = *level.p.space;
  const Mesh& mesh = p2.mesh();
  const DofMap& dofs = p2.dofs();
  const Index n = p2.n_dofs();

  // Pressure at P2 nodes: vertex values, midpoints from the edge average.
  Eigen::VectorXd p(n);
  p.head(mesh.n_nodes()) = level.p.coeffs.head(p1.n_dofs());
  for (Index e = 0; e < mesh.n_edges(); ++e) {
    const auto& v = mesh.edges[static_cast<std::size_t>(e)].vertices;
    p(mesh.n_nodes() + e) = 0.5 * (level.p.coeffs(v[0]) + level.p.coeffs(v[1]));
  }
  // Velocity: P2 part plus the average cellwise offset of adjacent cells.
  Eigen::Matrix2Xd offset = Eigen::Matrix2Xd::Zero(2, n);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
  for (Index c = 0; c < mesh.n_cells(); ++c)
    for (Index d : p2.cell_dofs(c)) {
      offset.col(d) += level.u.cell_offset.col(c);
      count(d) += 1;
    }

  std::ostringstream o;
  o << "# vtk DataFile Version 3.0\n";
  o << "spnp snapshot t=" << fmt(t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o << "POINTS " << n << " double\n";
  for (Index d = 0; d < n; ++d) {
    const Eigen::Vector2d x = dofs.dof_point(d);
    o << fmt(x.x()) << " " << fmt(x.y()) << " 0\n";
  }
  const Index nc = 4 * mesh.n_cells();
  o << "CELLS " << nc << " " << 4 * nc << "\n";
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto d = p2.cell_dofs(c);
    // vertices 0,1,2; midpoints 3 (0-1), 4 (1-2), 5 (2-0)
    const int sub[4][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
    for (const auto& s : sub) o << "3 " << d[s[0]] << " " << d[s[1]] << " " << d[s[2]] << "\n";
  }
  o << "CELL_TYPES " << nc << "\n";
  for (Index c = 0; c < nc; ++c) o << "5\n";
  o << "POINT_DATA " << n << "\n";
  const auto scalars = [&](const std::string& name, const Eigen::VectorXd& v) {
    o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Index d = 0; d < n; ++d) o << fmt(v(d)) << "\n";
  };
  const std::size_t ns = level.c.size();
  for (std::size_t i = 0; i < ns; ++i) {
    const std::string name = ns == 2 ? (i == 0 ? "c_p" : "c_n") : "c_" + std::to_string(i);
    scalars(name, level.c[i].nodal_values());
  }
  scalars("V", level.v.coeffs);
  scalars("p", p);
  o << "VECTORS u double\n";
  for (Index d = 0; d < n; ++d) {
    const double ox = count(d) > 0 ? offset(0, d) / count(d) : 0.0;
    const double oy = count(d) > 0 ? offset(1, d) / count(d) : 0.0;
    o << fmt(level.u.field.coeffs(d) + ox) << " " << fmt(level.u.field.coeffs(n + d) + oy) << " 0\n";
  }
  return o.str();
}

void write_snapshot(const std::string& path, const Level& level, double t) { write_text(path, snapshot_vtk(level, t)); }

}  // namespace spnp
