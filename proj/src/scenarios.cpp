#include "spnp/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

Params base_params() {
  Params p;
  p.valence = {1, -1};
  p.steric = Eigen::MatrixXd::Zero(2, 2);
  return p;
}

double step_profile(double s) { return 0.5 * (1 + std::tanh(s / 0.04)); }

}  // namespace

Scenario scenario_energy_decay() {
  Scenario s;
  s.name = "energy-decay";
  s.params = base_params();
  s.params.lambda = 0.2;
  s.params.Pe = 50;
  s.params.Re = 1;
  s.params.Co = 0.6;
  s.params.k = 0.2;
  s.params.mu0 = 1.5;
  s.params.mu_inf = 0.5;
  s.params.lambda1 = 0.1;
  s.params.steric = 2 * Eigen::MatrixXd::Identity(2, 2);
  s.params.dt = 1e-2;
  s.params.T = 2;
  s.cells = 40;
  const double pi = std::numbers::pi;
  s.initial.concentration = {
      [pi](double x, double y) { return 12 + 10 * std::cos(pi * x) * std::cos(pi * y); },
      [pi](double x, double y) { return 12 - 10 * std::cos(pi * x) * std::cos(pi * y); },
  };
  return s;
}

Eigen::MatrixXd steric_matrix(int choice) {
  Eigen::Matrix2d w;
  switch (choice) {
    case 0: w << 0, 0, 0, 0; break;
    case 1: w << 4, 1, 1, 4; break;
    case 2: w << 8, 1, 1, 8; break;
    case 3: w << 8, 4, 4, 8; break;
    case 4: w << 8, 7, 7, 8; break;
    default: throw ConfigError("steric matrix index must be 0..4, got " + std::to_string(choice), "scenario");
  }
  return w;
}

Scenario scenario_steric(int choice) {
  Scenario s;
  s.name = "steric:" + std::to_string(choice);
  s.params = base_params();
  s.params.steric = steric_matrix(choice);
  s.params.lambda = 0.1;
  s.params.Pe = 50;
  s.params.Re = 5;
  s.params.Co = 5;
  s.params.k = 0.5;
  s.params.mu0 = 1;
  s.params.mu_inf = 0.5;
  s.params.lambda1 = 1;
  s.params.dt = 1e-3;
  s.params.T = 1;
  s.cells = 40;
  s.snapshot_times = {0.002, 0.1, 1};
  s.options.potential_compatibility = CompatibilityPolicy::ProjectOut;
  s.initial.concentration = {
      [](double x, double y) { return 1e-6 + (1 - 1e-6) * step_profile(x - 0.75) * step_profile(y - 0.55); },
      [](double x, double y) { return 1e-6 + (1 - 1e-6) * step_profile(x - 0.75) * step_profile(0.45 - y); },
  };
  return s;
}

Scenario scenario_exponent_k(double k) {
  if (!(k > 0)) throw ConfigError("exponent k must be positive", "scenario");
  Scenario s;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", k);
  s.name = std::string("exponent-k:") + buf;
  s.params = base_params();
  s.params.k = k;
  s.params.lambda = 0.1;
  s.params.Pe = 50;
  s.params.Re = 50;
  s.params.Co = 100;
  s.params.mu0 = 1;
  s.params.mu_inf = 0.1;
  s.params.lambda1 = 0.1;
  s.params.dt = 1e-3;
  s.params.T = 5;
  s.cells = 60;
  s.snapshot_times = {0.005, 0.075, 0.1, 0.2, 0.3, 5};
  s.options.potential_bc = PotentialBc::DirichletLeftRight;
  s.options.potential_left = 1;
  s.options.potential_right = 0;
  const auto disk = [](double cx, double cy) {
    return [cx, cy](double x, double y) {
      return 1 + 1e-6 - std::tanh(100 * ((x - cx) * (x - cx) + (y - cy) * (y - cy) - 0.05 * 0.05));
    };
  };
  s.initial.concentration = {disk(0.4, 0.4), disk(0.6, 0.6)};
  return s;
}

void apply_desk_profile(Scenario& s) {
  if (s.name == "energy-decay") {
    s.cells = 20;
    s.params.T = 0.5;
  } else if (s.name.rfind("steric:", 0) == 0) {
    s.cells = 20;
    s.params.T = 0.2;
    s.snapshot_times = {0.002, 0.1, 0.2};
  } else if (s.name.rfind("exponent-k:", 0) == 0) {
    s.cells = 20;
    s.params.T = 1;
    s.snapshot_times = {0.005, 0.075, 0.1, 0.2, 0.3, 1};
  }
}

Scenario scenario_by_name(const std::string& name) {
  if (name == "energy-decay") return scenario_energy_decay();
  const auto suffix = [&](const std::string& prefix) -> std::optional<std::string> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    return name.substr(prefix.size());
  };
  if (auto arg = suffix("steric:")) {
    if (arg->size() != 1 || (*arg)[0] < '0' || (*arg)[0] > '4')
      throw ConfigError("steric scenario index must be 0..4: " + name, "scenario");
    return scenario_steric((*arg)[0] - '0');
  }
  if (auto arg = suffix("exponent-k:")) {
    char* end = nullptr;
    const double k = std::strtod(arg->c_str(), &end);
    if (arg->empty() || *end != '\0') throw ConfigError("exponent-k needs a numeric value: " + name, "scenario");
    return scenario_exponent_k(k);
  }
  throw ConfigError("unknown scenario: " + name, "scenario");
}

std::vector<std::string> scenario_families() {
  return {
      "energy-decay        Coulomb-driven cavity flow, energy decay and mass conservation",
      "steric:<0..4>       steric interaction sweep over five W matrices",
      "exponent-k:<value>  vortex under a fixed potential drop for Carreau index k",
  };
}

Field stream_function(const Velocity& u) {
  const auto& space = u.field.space;
  const FeSpace& s = *space;
  const QpVector v = u.values();
  Eigen::VectorXd rhs = load_gradient_vector(s, QpVector{-v.y, v.x});
  SparseMatrix a = stiffness_matrix(s);
  std::vector<Index> dofs;
  for (const auto& bd : s.dofs().boundary_dofs) dofs.push_back(bd.dof);
  const std::vector<double> zeros(dofs.size(), 0.0);
  apply_dirichlet(a, rhs, dofs, zeros, true);
  return {space, DirectSolver(a, MatrixKind::SymmetricPositiveDefinite).solve(rhs), 1};
}

int count_interior_extrema(const Field& psi, double rel_floor) {
  const Mesh& m = psi.space->mesh();
  const Index nx = m.nx, ny = m.ny;
  const auto at = [&](Index i, Index j) { return psi.coeffs(j * (nx + 1) + i); };
  double peak = 0;
  for (Index d = 0; d < m.n_nodes(); ++d) peak = std::max(peak, std::abs(psi.coeffs(d)));
  int count = 0;
  for (Index j = 1; j < ny; ++j)
    for (Index i = 1; i < nx; ++i) {
      const double v = at(i, j);
      if (std::abs(v) <= rel_floor * peak) continue;
      bool is_max = true, is_min = true;
      for (Index dj = -1; dj <= 1; ++dj)
        for (Index di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const double w = at(i + di, j + dj);
          if (w >= v) is_max = false;
          if (w <= v) is_min = false;
        }
      if (is_max || is_min) ++count;
    }
  return count;
}

double max_concentration(const Concentration& c) { return c.nodal_values().maxCoeff(); }

}  // namespace spnp
