#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spnp/fem.hpp"

namespace spnp {

/// Nondimensional model parameters.
struct Params {
  double Re = 1;
  double Pe = 1;
  double Co = 1;
  double lambda = 1;  // Debye length ratio
  double mu0 = 1;
  double mu_inf = 0.5;
  double lambda1 = 0;  // Carreau relaxation constant
  double k = 1;        // Carreau power index
  std::vector<int> valence{1, -1};
  Eigen::MatrixXd steric = Eigen::MatrixXd::Zero(2, 2);
  std::optional<double> B;  // SAV shift; chosen from the initial energy when empty
  double dt = 1e-2;
  double T = 1;

  int n_species() const { return static_cast<int>(valence.size()); }

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Carreau apparent viscosity for shear_sq = 2 D(u):D(u).
template <class Scalar>
Scalar carreau_viscosity(Scalar shear_sq, const Params& p) {
  using std::pow;
  return p.mu_inf + (p.mu0 - p.mu_inf) * pow(Scalar(1) + p.lambda1 * p.lambda1 * shear_sq, (p.k - 1) / 2);
}

inline QpScalar carreau_viscosity(const QpScalar& shear_sq, const Params& p) {
  return p.mu_inf + (p.mu0 - p.mu_inf) * (1.0 + p.lambda1 * p.lambda1 * shear_sq).pow((p.k - 1) / 2);
}

/// Ion concentration stored through its logarithm, c = exp(log_scale + sigma)
/// with sigma a P2 field. Positive everywhere by construction; the scalar
/// log_scale carries the mass renormalization.
struct Concentration {
  Field sigma;
  double log_scale = 0;

  QpScalar log_values() const { return sigma.values() + log_scale; }
  QpScalar values() const { return log_values().exp(); }
  /// Gradient of log c (equal to grad sigma).
  QpVector log_gradient() const { return sigma.gradients(); }
  Eigen::VectorXd nodal_values() const { return (sigma.coeffs.array() + log_scale).exp().matrix(); }
};

Concentration concentration_from_log(std::shared_ptr<const FeSpace> space, const Eigen::VectorXd& sigma,
                                     double log_scale = 0);

/// Interpolate log c0 at the nodes and scale so that the quadrature mass
/// matches the quadrature mass of c0 itself.
Concentration interpolate_concentration(std::shared_ptr<const FeSpace> space,
                                        const std::function<double(double, double)>& c0);

/// Velocity: a continuous P2 field plus a cellwise-constant part. The
/// projection step leaves u^{n+1} = u~ - (dt / a0) grad psi, whose second
/// term is piecewise constant for P1 psi.
struct Velocity {
  Field field;                   // two components
  Eigen::Matrix2Xd cell_offset;  // 2 x n_cells

  static Velocity zero(std::shared_ptr<const FeSpace> p2);
  QpVector values() const;
  /// Broken gradient (the cellwise-constant part contributes nothing).
  QpTensor gradient() const;
  double squared_l2() const;
};

Velocity operator+(const Velocity& a, const Velocity& b);
Velocity operator-(const Velocity& a, const Velocity& b);
Velocity operator*(double s, const Velocity& a);

/// (u . grad) u evaluated at quadrature points.
QpVector convection(const Velocity& u);

/// Barred chemical potential log c_i + z_i Vbar + sum_j w_ij c_j.
QpScalar chemical_potential_bar(std::span<const Concentration> c, const Field& vbar, int i, const Params& p);
/// Its gradient grad sigma_i + z_i grad Vbar + sum_j w_ij c_j grad sigma_j.
QpVector chemical_potential_bar_gradient(std::span<const Concentration> c, const Field& vbar, int i,
                                         const Params& p);

/// Free energy of the ionic subsystem with the barred potential.
double energy_spnp(std::span<const Concentration> c, const Field& vbar, const Params& p);

/// Lower bound of the free energy over all positive concentrations with the
/// given masses: Co sum_i (M_i log(M_i / |Omega|) - M_i).
double energy_lower_bound(std::span<const double> masses, double area, const Params& p);

/// (Co/Pe) sum_i || sqrt(c_i) grad gbar_i ||^2
double ionic_dissipation_integral(std::span<const Concentration> c, const Field& vbar, const Params& p);

struct DiscreteEnergy {
  double kinetic = 0;    // (1/2)((1/2)|u1|^2 + (1/2)|2u1 - u0|^2)
  double pressure = 0;   // (dt^2/3) |grad p1|^2
  double auxiliary = 0;  // (1/2)(r1^2 + (2 r1 - r0)^2)
  double total() const { return kinetic + pressure + auxiliary; }
};

DiscreteEnergy discrete_energy(const Velocity& u_new, const Velocity& u_old, const Field& p_new, double r_new,
                               double r_old, double dt);

struct PhysicalConstants {
  double density, velocity, length, viscosity, concentration, thermal_energy, charge, diffusivity, permittivity;
};

struct DimensionlessGroups {
  double Re, Co, Pe, lambda;
};

DimensionlessGroups nondimensionalize(const PhysicalConstants& c);

double species_mass(const Concentration& c);
/// Minimum over nodes and quadrature points.
double min_concentration(const Concentration& c);

/// Per-step diagnostics of a run.
struct DiagnosticsRecord {
  double t = 0;
  double E_h = 0;
  double E_spnp = 0;
  std::vector<double> mass;
  std::vector<double> min_c;
  double xi = 1;
  double r = 0;
  double visc_dissip = 0;
  double ionic_dissip = 0;
};

}  // namespace spnp
