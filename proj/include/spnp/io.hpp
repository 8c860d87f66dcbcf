#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spnp/model.hpp"
#include "spnp/scenarios.hpp"
#include "spnp/scheme.hpp"

namespace spnp {

/// Flat run configuration. Unset optionals keep the scenario defaults.
struct RunConfig {
  std::string scenario = "energy-decay";  // scenario name or "manufactured"
  std::string profile = "full";           // "full" or "desk"

  std::optional<double> Re, Pe, Co, lambda, mu0, mu_inf, lambda1, k, B, dt, T;
  std::optional<std::vector<int>> z;
  std::optional<std::vector<std::vector<double>>> W;
  std::optional<long> nx, ny;

  std::optional<std::string> solver;  // "direct" or "iterative"
  std::optional<double> solver_tol;
  std::optional<long> solver_maxit;

  std::optional<bool> clamp_viscosity, sigma_diffusion_coeff_one, strict_energy, xi_scales_dirichlet_potential;
  std::optional<std::string> potential_bc;   // "zero_mean" or "dirichlet_lr"
  std::optional<std::string> compatibility;  // "strict" or "project_out"

  std::optional<std::string> out;
  std::optional<std::vector<double>> snapshot_times;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError
/// with the line number on syntax errors and the key on range errors.
RunConfig parse_config(const std::string& text);
/// Applies a single `key=value` override.
void apply_override(RunConfig& cfg, const std::string& assignment);
/// Inverse of parse_config for the keys that are set.
std::string emit_config(const RunConfig& cfg);

/// Fully resolved run: scenario with overrides applied and validated.
struct ResolvedRun {
  Scenario scenario;
  bool manufactured = false;
  Index nx = 0, ny = 0;
  std::string out;
};

ResolvedRun resolve_config(const RunConfig& cfg);

std::string diagnostics_header(int n_species);
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records, int n_species = 2);
std::vector<DiagnosticsRecord> parse_diagnostics_csv(const std::string& text);
void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRecord>& records, int n_species = 2);

/// Legacy VTK unstructured grid on the P2 nodes, each triangle split in four.
std::string snapshot_vtk(const Level& level, double t);
void write_snapshot(const std::string& path, const Level& level, double t);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace spnp
