#include "spnp/model.hpp"

#include <string>

#include <Eigen/Cholesky>

#include "spnp/errors.hpp"

namespace spnp {

void Params::validate() const {
  const auto positive = [](double v, const char* key) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive", key);
  };
  positive(Re, "Re");
  positive(Pe, "Pe");
  positive(Co, "Co");
  positive(lambda, "lambda");
  positive(mu_inf, "mu_inf");
  positive(k, "k");
  positive(dt, "dt");
  positive(T, "T");
  if (!(mu0 > mu_inf)) throw ConfigError("mu0 must exceed mu_inf", "mu0");
  if (!(lambda1 >= 0)) throw ConfigError("lambda1 must be nonnegative", "lambda1");
  if (B && !(*B > 0)) throw ConfigError("B must be positive", "B");
  const int n = n_species();
  if (n < 1) throw ConfigError("at least one species is required", "z");
  if (steric.rows() != n || steric.cols() != n) throw ConfigError("W must be N x N for N valences", "W");
  if ((steric - steric.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1 + steric.cwiseAbs().maxCoeff()))
    throw ConfigError("W must be symmetric", "W");
  if (steric.minCoeff() < 0) throw ConfigError("W entries must be nonnegative", "W");
  // The zero matrix is admitted (classical coupling); otherwise require SPD.
  if (steric.cwiseAbs().maxCoeff() > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(steric);
    if (llt.info() != Eigen::Success) throw ConfigError("W must be positive definite", "W");
  }
}

Concentration concentration_from_log(std::shared_ptr<const FeSpace> space, const Eigen::VectorXd& sigma,
                                     double log_scale) {
  return {Field{std::move(space), sigma, 1}, log_scale};
}

Concentration interpolate_concentration(std::shared_ptr<const FeSpace> space,
                                        const std::function<double(double, double)>& c0) {
  const Eigen::VectorXd sigma = space->interpolate([&](double x, double y) {
    const double v = c0(x, y);
    if (!(v > 0)) throw PositivityError("initial concentration is not positive at (" + std::to_string(x) + ", " +
                                        std::to_string(y) + ")");
    return std::log(v);
  });
  Concentration c = concentration_from_log(space, sigma);
  const double target = space->integrate(space->evaluate(c0));
  c.log_scale = std::log(target / species_mass(c));
  return c;
}

Velocity Velocity::zero(std::shared_ptr<const FeSpace> p2) {
  const Index nc = p2->n_cells();
  return {Field::zero(std::move(p2), 2), Eigen::Matrix2Xd::Zero(2, nc)};
}

QpVector Velocity::values() const {
  QpVector v{field.values(0), field.values(1)};
  v.x.rowwise() += cell_offset.row(0).array();
  v.y.rowwise() += cell_offset.row(1).array();
  return v;
}

QpTensor Velocity::gradient() const {
  const QpVector gx = field.gradients(0), gy = field.gradients(1);
  return {gx.x, gx.y, gy.x, gy.y};
}

double Velocity::squared_l2() const { return field.space->integrate(values().squared_norm()); }

Velocity operator+(const Velocity& a, const Velocity& b) {
  return {Field{a.field.space, a.field.coeffs + b.field.coeffs, 2}, a.cell_offset + b.cell_offset};
}

Velocity operator-(const Velocity& a, const Velocity& b) {
  return {Field{a.field.space, a.field.coeffs - b.field.coeffs, 2}, a.cell_offset - b.cell_offset};
}

Velocity operator*(double s, const Velocity& a) { return {Field{a.field.space, s * a.field.coeffs, 2}, s * a.cell_offset}; }

QpVector convection(const Velocity& u) {
  const QpVector v = u.values();
  const QpTensor g = u.gradient();
  return {v.x * g.xx + v.y * g.xy, v.x * g.yx + v.y * g.yy};
}

namespace {

void check_positive(const QpScalar& c, int i) {
  if (!c.allFinite() || (c <= 0).any())
    throw PositivityError("concentration " + std::to_string(i) + " is not positive and finite at a quadrature point");
}

}  // namespace

QpScalar chemical_potential_bar(std::span<const Concentration> c, const Field& vbar, int i, const Params& p) {
  QpScalar logc = c[static_cast<std::size_t>(i)].log_values();
  check_positive(logc.exp(), i);
  QpScalar g = logc + p.valence[static_cast<std::size_t>(i)] * vbar.values();
  for (int j = 0; j < p.n_species(); ++j)
    if (p.steric(i, j) != 0) g += p.steric(i, j) * c[static_cast<std::size_t>(j)].values();
  return g;
}

QpVector chemical_potential_bar_gradient(std::span<const Concentration> c, const Field& vbar, int i,
                                         const Params& p) {
  QpVector g = c[static_cast<std::size_t>(i)].log_gradient();
  g += static_cast<double>(p.valence[static_cast<std::size_t>(i)]) * vbar.gradients();
  for (int j = 0; j < p.n_species(); ++j) {
    if (p.steric(i, j) == 0) continue;
    const auto& cj = c[static_cast<std::size_t>(j)];
    g += (p.steric(i, j) * cj.values()) * cj.log_gradient();
  }
  return g;
}

double energy_spnp(std::span<const Concentration> c, const Field& vbar, const Params& p) {
  const FeSpace& s = *vbar.space;
  double e = 0.5 * p.lambda * p.Co * s.integrate(vbar.gradients().squared_norm());
  std::vector<QpScalar> cv;
  cv.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    cv.push_back(c[i].values());
    check_positive(cv.back(), static_cast<int>(i));
    e += p.Co * s.integrate(cv.back() * (c[i].log_values() - 1.0));
  }
  for (int i = 0; i < p.n_species(); ++i)
    for (int j = 0; j < p.n_species(); ++j)
      if (p.steric(i, j) != 0)
        e += 0.5 * p.Co * p.steric(i, j) * s.integrate(cv[static_cast<std::size_t>(i)] * cv[static_cast<std::size_t>(j)]);
  return e;
}

double energy_lower_bound(std::span<const double> masses, double area, const Params& p) {
  double e = 0;
  for (double m : masses) e += p.Co * (m * std::log(m / area) - m);
  return e;
}

double ionic_dissipation_integral(std::span<const Concentration> c, const Field& vbar, const Params& p) {
  const FeSpace& s = *vbar.space;
  double d = 0;
  for (int i = 0; i < p.n_species(); ++i) {
    const QpScalar ci = c[static_cast<std::size_t>(i)].values();
    check_positive(ci, i);
    d += s.integrate(ci * chemical_potential_bar_gradient(c, vbar, i, p).squared_norm());
  }
  return p.Co / p.Pe * d;
}

DiscreteEnergy discrete_energy(const Velocity& u_new, const Velocity& u_old, const Field& p_new, double r_new,
                               double r_old, double dt) {
  DiscreteEnergy e;
  e.kinetic = 0.5 * (0.5 * u_new.squared_l2() + 0.5 * (2.0 * u_new - u_old).squared_l2());
  e.pressure = dt * dt / 3.0 * p_new.space->integrate(p_new.gradients().squared_norm());
  e.auxiliary = 0.5 * (r_new * r_new + (2 * r_new - r_old) * (2 * r_new - r_old));
  return e;
}

DimensionlessGroups nondimensionalize(const PhysicalConstants& c) {
  for (double v : {c.density, c.velocity, c.length, c.viscosity, c.concentration, c.thermal_energy, c.charge,
                   c.diffusivity, c.permittivity})
    if (!(v > 0)) throw ArgumentError("nondimensionalize: all physical constants must be positive");
  return {
      c.density * c.velocity * c.length / c.viscosity,
      c.concentration * c.thermal_energy / (c.density * c.velocity * c.velocity * c.charge),
      c.length * c.velocity / c.diffusivity,
      c.permittivity * c.thermal_energy / (c.length * c.length * c.concentration * c.charge),
  };
}

double species_mass(const Concentration& c) { return c.sigma.space->integrate(c.values()); }

double min_concentration(const Concentration& c) {
  return std::min(c.values().minCoeff(), c.nodal_values().minCoeff());
}

}  // namespace spnp
