#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spnp/model.hpp"
#include "spnp/scheme.hpp"

namespace spnp {

/// Closed-form smooth solution on the unit square used for accuracy
/// studies. Species 0 is the cation, species 1 the anion.
class ExactSolution {
 public:
  double c(int i, double x, double y, double t) const;
  Eigen::Vector2d grad_c(int i, double x, double y, double t) const;
  double lap_c(int i, double x, double y, double t) const;
  double dt_c(int i, double x, double y, double t) const;

  double V(double x, double y, double t) const;
  Eigen::Vector2d grad_V(double x, double y, double t) const;
  double lap_V(double x, double y, double t) const;

  Eigen::Vector2d u(double x, double y, double t) const;
  /// g(a, j) = d u_a / d x_j
  Eigen::Matrix2d grad_u(double x, double y, double t) const;
  /// Hessian of component a.
  Eigen::Matrix2d hess_u(int a, double x, double y, double t) const;
  Eigen::Vector2d dt_u(double x, double y, double t) const;

  double p(double x, double y, double t) const;
  Eigen::Vector2d grad_p(double x, double y, double t) const;

  /// Species mass on the unit square (constant in time).
  double mass(int) const { return 1.2; }
};

/// Source terms that make ExactSolution solve the forced model.
class SourceTerms {
 public:
  SourceTerms(ExactSolution exact, Params params) : exact_(exact), params_(std::move(params)) {}

  Eigen::Vector2d f_u(double x, double y, double t) const;
  double f_c(int i, double x, double y, double t) const;
  double f_V(double x, double y, double t) const;

  /// Divergence of the Carreau stress 2 mu(2 D:D) D(u), closed form.
  Eigen::Vector2d stress_divergence(double x, double y, double t) const;
  /// Chemical potential log c_i + z_i V + sum_j w_ij c_j with the exact fields.
  double chemical_potential(int i, double x, double y, double t) const;

  const ExactSolution& exact() const { return exact_; }
  const Params& params() const { return params_; }

 private:
  ExactSolution exact_;
  Params params_;
};

/// Parameters of the accuracy study.
Params manufactured_params();

ExactSolution reference_exact_solution();

/// Scheme forcing for the exact solution on the given discretization: the
/// momentum, log-concentration and Poisson sources, the exact masses, and
/// the source of the auxiliary-variable equation that keeps r equal to
/// sqrt(E + B) along the exact solution.
std::shared_ptr<Forcing> manufactured_forcing(const SourceTerms& src, const Discretization& disc);

/// Exact fields at t = 0 as initial data.
InitialData manufactured_initial(const ExactSolution& exact);

struct ErrorRow {
  long N = 0;
  double dt = 0;
  // u, p, c_p, c_n, V
  std::array<double, 5> err{};
  std::array<double, 5> order{};  // NaN on the first row
};

struct ConvergenceTable {
  Index cells = 0;
  double T = 0;
  std::vector<ErrorRow> rows;
};

/// L2 errors of all fields at T for each step count; Delta t = T / N.
ConvergenceTable convergence_study(const std::vector<long>& steps, Index cells, const Params& params, double T = 0.5,
                                   SchemeOptions options = {});

/// Errors at time t of an integrator's current state.
std::array<double, 5> solution_errors(const Integrator& integ, const ExactSolution& exact, double t);

std::string convergence_csv(const ConvergenceTable& table);

}  // namespace spnp
