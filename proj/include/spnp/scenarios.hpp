#pragma once

#include <string>
#include <vector>

#include "spnp/model.hpp"
#include "spnp/scheme.hpp"

namespace spnp {

/// A preset: parameters, initial data, boundary modes and the resolution
/// used by default.
struct Scenario {
  std::string name;
  Params params;
  InitialData initial;
  SchemeOptions options;
  Index cells = 20;  // grid cells per side, h = sqrt(2) / cells
  std::vector<double> snapshot_times;
};

/// Coulomb-driven cavity flow used to observe energy decay and mass
/// conservation.
Scenario scenario_energy_decay();

/// Steric sweep; choice selects one of the five interaction matrices.
Scenario scenario_steric(int choice);
Eigen::MatrixXd steric_matrix(int choice);

/// Vortex driven by a fixed potential drop for Carreau index k.
Scenario scenario_exponent_k(double k);

/// Shortened horizon and coarser mesh for routine runs.
void apply_desk_profile(Scenario& s);

/// Resolves "energy-decay", "steric:<0..4>" or "exponent-k:<value>";
/// throws ConfigError otherwise.
Scenario scenario_by_name(const std::string& name);

/// One line per scenario family.
std::vector<std::string> scenario_families();

/// Stream function of the velocity: (grad psi, grad phi) = (omega, phi)
/// with zero boundary values, vorticity in weak form.
Field stream_function(const Velocity& u);

/// Interior strict local extrema of a P2 field sampled at the grid
/// vertices, ignoring those below rel_floor * max |psi|.
int count_interior_extrema(const Field& psi, double rel_floor = 1e-3);

/// Largest nodal value of a concentration.
double max_concentration(const Concentration& c);

}  // namespace spnp
