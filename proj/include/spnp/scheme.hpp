#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spnp/fem.hpp"
#include "spnp/model.hpp"

namespace spnp {

/// Mesh plus the Taylor-Hood pair: P2 for velocity, ions and potential, P1
/// for pressure.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FeSpace> p1, p2;
};

Discretization make_discretization(Index nx, Index ny, double xmin = 0, double xmax = 1, double ymin = 0,
                                   double ymax = 1);

enum class PotentialBc {
  ZeroMean,            // pure Neumann, integral fixed to zero
  DirichletLeftRight,  // fixed values at x = xmin and x = xmax, Neumann elsewhere
};

struct SchemeOptions {
  bool clamp_viscosity = true;
  bool sigma_diffusion_coeff_one = false;
  bool strict_energy = false;
  bool xi_scales_dirichlet_potential = true;
  bool check_mass = true;
  PotentialBc potential_bc = PotentialBc::ZeroMean;
  CompatibilityPolicy potential_compatibility = CompatibilityPolicy::Strict;
  double potential_left = 1.0;
  double potential_right = 0.0;
  SolverConfig solver;
};

using SpaceTimeFunction = std::function<double(double, double, double)>;

/// Extra source terms of a forced problem, all evaluated at t^{n+1}.
struct Forcing {
  std::function<Eigen::Vector2d(double, double, double)> momentum;
  /// Source of the log-concentration equation, f_c / c per species.
  std::vector<SpaceTimeFunction> log_concentration;
  SpaceTimeFunction potential;
  /// Source of the auxiliary-variable equation, as a function of (t, B).
  std::function<double(double, double)> auxiliary;
  /// Mass targets of the renormalization step, as a function of (species, t).
  std::function<double(int, double)> species_mass;
};

struct InitialData {
  std::vector<std::function<double(double, double)>> concentration;
  std::function<Eigen::Vector2d(double, double)> velocity;  // zero when empty
  std::function<double(double, double)> pressure;           // zero when empty
};

/// Everything stored per time level.
struct Level {
  Velocity u;
  Field p;
  std::vector<Concentration> c;
  Field vbar;
  Field v;
  QpScalar mu;
  double r = 0;
  double xi = 1;
};

struct State {
  Level old;  // n - 1
  Level cur;  // n
  double t = 0;
  long step = 0;
  double B = 0;
  std::vector<double> mass0;
  double E_h0 = 0;
  double E_h = 0;
};

/// Backward-difference weights: d/dt y ~ (a0 y^{n+1} + a1 y^n + a2 y^{n-1}) / dt.
struct TimeWeights {
  double a0, a1, a2;
  static TimeWeights bdf2() { return {1.5, -2.0, 0.5}; }
  static TimeWeights bdf1() { return {1.0, -1.0, 0.0}; }
};

struct StepWorkspace {
  TimeWeights w{TimeWeights::bdf2()};
  double dt = 0;
  double t_new = 0;
  Velocity u_star;
  std::vector<Field> sigma_star;
  std::vector<QpScalar> c_star;
  QpScalar mu_star;
  Field v_star;

  Field u1, u2, u_tilde;
  Eigen::VectorXd F1, F2;  // momentum loads before boundary conditions
  SparseMatrix A_u;        // momentum operator before boundary conditions
  double zeta1 = 0, zeta2 = 0, xi = 1, r = 0;
  double E_bar = 0, sqrt_E = 0;
  double ionic = 0;  // (Co/Pe) sum_i || sqrt(c_i) grad gbar_i ||^2
  Field psi;
};

struct StepReport {
  DiagnosticsRecord record;
  DiscreteEnergy energy;
  double zeta1 = 0;
  double zeta2 = 0;
  double divergence_residual = 0;  // max_q |(u^{n+1}, grad phi_q)|
  double split_residual = 0;       // relative, interior rows
  double energy_change = 0;        // E_h^{n+1} - E_h^n
  double dissipation = 0;          // visc + ionic (rates)
  bool energy_increased = false;
  double potential_removed_mean = 0;
};

/// Pure formula of the auxiliary-variable update.
double xi_update(const TimeWeights& w, double dt, double r_n, double r_nm1, double zeta1, double zeta2, double sqrt_E,
                 double source = 0);

/// exp(sigma) rescaled so its quadrature mass equals mass.
Concentration renormalize_concentration(const Field& sigma, double mass);

class Integrator {
 public:
  Integrator(Discretization disc, Params params, SchemeOptions options = {},
             std::shared_ptr<const Forcing> forcing = nullptr);

  /// Sets level 0 (and level -1 = level 0), B, r^0 and E_h^0.
  void initialize(const InitialData& init);

  /// One step; the first one uses the first-order start.
  StepReport step();

  const State& state() const { return state_; }
  State& mutable_state() { return state_; }
  const Params& params() const { return params_; }
  const SchemeOptions& options() const { return options_; }
  const Discretization& discretization() const { return disc_; }
  DiagnosticsRecord initial_record() const { return initial_record_; }
  double dt() const { return params_.dt; }

  // Individual stages, exposed for testing.
  StepWorkspace prepare(bool first_order) const;
  Field step_sigma(const StepWorkspace& ws, int i) const;
  Field solve_potential(std::span<const Concentration> c, double t, double* removed_mean = nullptr) const;
  void solve_velocity_split(StepWorkspace& ws, std::span<const Concentration> c, const Field& vbar) const;
  void compute_xi(StepWorkspace& ws, std::span<const Concentration> c, const Field& vbar) const;
  Field pressure_poisson(const StepWorkspace& ws, const Field& u_tilde) const;
  /// u^{n+1} = u~ - (dt/a0) grad psi as P2 part plus cellwise offset.
  Velocity correct_velocity(const StepWorkspace& ws, const Field& u_tilde, const Field& psi) const;
  /// max_q |(u, grad phi_q)| over P1 test functions.
  double divergence_residual(const Velocity& u) const;
  QpScalar viscosity_of(const Velocity& u) const;

  /// Zero-mean P1 field recentering.
  Field recenter(const Field& p) const;

 private:
  Field potential_from_rhs(const Eigen::VectorXd& rhs, double* removed_mean, double reference = 0) const;
  DiagnosticsRecord make_record(const Level& lvl, double t, const DiscreteEnergy& e, double visc, double ionic) const;

  Discretization disc_;
  Params params_;
  SchemeOptions options_;
  std::shared_ptr<const Forcing> forcing_;

  SparseMatrix mass2_, stiff2_, vec_mass_, grad_;  // grad_: (grad p, v)
  Eigen::VectorXd lumped1_, lumped2_;
  std::vector<Index> velocity_bc_;
  std::unique_ptr<ZeroMeanSolver> pressure_solver_;
  std::unique_ptr<ZeroMeanSolver> potential_solver_;
  std::unique_ptr<DirectSolver> potential_dirichlet_;
  std::vector<Index> potential_bc_dofs_;
  std::vector<double> potential_bc_values_;
  Field potential_lift_;

  State state_;
  DiagnosticsRecord initial_record_;
  bool initialized_ = false;
};

/// Drives an integrator to time T. The callback sees each step report and
/// may request snapshots; it returns false to stop early.
std::vector<DiagnosticsRecord> run(Integrator& integ, double T,
                                   const std::function<bool(const StepReport&)>& on_step = {});

/// Number of time steps used to reach T with step dt (last step may overshoot
/// by rounding only).
long step_count(double T, double dt);

/// Worker count for independent per-species solves (SPNP_THREADS caps it).
unsigned worker_count();

}  // namespace spnp
