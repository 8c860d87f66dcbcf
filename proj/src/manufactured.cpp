#include "spnp/manufactured.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

constexpr double pi = std::numbers::pi;

double sign_of(int i) { return i == 0 ? 1.0 : -1.0; }

double phi(double x, double y) { return std::cos(pi * x) * std::cos(pi * y); }

Eigen::Vector2d grad_phi(double x, double y) {
  return {-pi * std::sin(pi * x) * std::cos(pi * y), -pi * std::cos(pi * x) * std::sin(pi * y)};
}

}  // namespace

double ExactSolution::c(int i, double x, double y, double t) const {
  return 1.2 + sign_of(i) * phi(x, y) * std::exp(-t);
}

Eigen::Vector2d ExactSolution::grad_c(int i, double x, double y, double t) const {
  return sign_of(i) * std::exp(-t) * grad_phi(x, y);
}

double ExactSolution::lap_c(int i, double x, double y, double t) const {
  return -2 * pi * pi * sign_of(i) * phi(x, y) * std::exp(-t);
}

double ExactSolution::dt_c(int i, double x, double y, double t) const {
  return -sign_of(i) * phi(x, y) * std::exp(-t);
}

double ExactSolution::V(double x, double y, double t) const { return phi(x, y) * std::exp(-t) / (pi * pi); }

Eigen::Vector2d ExactSolution::grad_V(double x, double y, double t) const {
  return grad_phi(x, y) * std::exp(-t) / (pi * pi);
}

double ExactSolution::lap_V(double x, double y, double t) const { return -2 * phi(x, y) * std::exp(-t); }

Eigen::Vector2d ExactSolution::u(double x, double y, double t) const {
  const double e = std::exp(-t);
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  return {pi * sx * sx * std::sin(2 * pi * y) * e, -pi * std::sin(2 * pi * x) * sy * sy * e};
}

Eigen::Matrix2d ExactSolution::grad_u(double x, double y, double t) const {
  const double e = std::exp(-t), p2 = pi * pi;
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  const double s2x = std::sin(2 * pi * x), s2y = std::sin(2 * pi * y);
  Eigen::Matrix2d g;
  g << p2 * s2x * s2y, 2 * p2 * sx * sx * std::cos(2 * pi * y),  //
      -2 * p2 * std::cos(2 * pi * x) * sy * sy, -p2 * s2x * s2y;
  return e * g;
}

Eigen::Matrix2d ExactSolution::hess_u(int a, double x, double y, double t) const {
  const double e = std::exp(-t), p3 = pi * pi * pi;
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  const double s2x = std::sin(2 * pi * x), s2y = std::sin(2 * pi * y);
  const double c2x = std::cos(2 * pi * x), c2y = std::cos(2 * pi * y);
  Eigen::Matrix2d h;
  if (a == 0)
    h << 2 * p3 * c2x * s2y, 2 * p3 * s2x * c2y,  //
        2 * p3 * s2x * c2y, -4 * p3 * sx * sx * s2y;
  else
    h << 4 * p3 * s2x * sy * sy, -2 * p3 * c2x * s2y,  //
        -2 * p3 * c2x * s2y, -2 * p3 * s2x * c2y;
  return e * h;
}

Eigen::Vector2d ExactSolution::dt_u(double x, double y, double t) const { return -u(x, y, t); }

double ExactSolution::p(double x, double y, double t) const { return phi(x, y) * std::exp(-t); }

Eigen::Vector2d ExactSolution::grad_p(double x, double y, double t) const { return grad_phi(x, y) * std::exp(-t); }

ExactSolution reference_exact_solution() { return {}; }

Params manufactured_params() {
  Params p;
  p.lambda = 1;
  p.Pe = 2;
  p.Re = 1;
  p.Co = 5;
  p.k = 0.5;
  p.mu0 = 1;
  p.mu_inf = 0.5;
  p.lambda1 = 1;
  p.valence = {1, -1};
  p.steric.resize(2, 2);
  p.steric << 2, 1, 1, 2;
  p.T = 0.5;
  return p;
}

Eigen::Vector2d SourceTerms::stress_divergence(double x, double y, double t) const {
  const Params& pr = params_;
  const Eigen::Matrix2d g = exact_.grad_u(x, y, t);
  const Eigen::Matrix2d d = 0.5 * (g + g.transpose());
  const Eigen::Matrix2d h[2] = {exact_.hess_u(0, x, y, t), exact_.hess_u(1, x, y, t)};
  // dD[l](a, b) = d D_ab / d x_l
  Eigen::Matrix2d dD[2];
  for (int l = 0; l < 2; ++l)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) dD[l](a, b) = 0.5 * (h[a](l, b) + h[b](l, a));
  const double s = 2 * (d.array() * d.array()).sum();
  const double l2 = pr.lambda1 * pr.lambda1;
  const double mu = carreau_viscosity(s, pr);
  const double dmu_ds = (pr.mu0 - pr.mu_inf) * 0.5 * (pr.k - 1) * l2 * std::pow(1 + l2 * s, 0.5 * (pr.k - 3));
  Eigen::Vector2d grad_mu;
  for (int l = 0; l < 2; ++l) grad_mu(l) = dmu_ds * 4 * (d.array() * dD[l].array()).sum();
  Eigen::Vector2d out;
  for (int a = 0; a < 2; ++a) {
    double div_d = 0, d_grad_mu = 0;
    for (int l = 0; l < 2; ++l) {
      div_d += dD[l](a, l);
      d_grad_mu += d(a, l) * grad_mu(l);
    }
    out(a) = 2 * mu * div_d + 2 * d_grad_mu;
  }
  return out;
}

Eigen::Vector2d SourceTerms::f_u(double x, double y, double t) const {
  const Eigen::Vector2d u = exact_.u(x, y, t);
  Eigen::Vector2d f = exact_.dt_u(x, y, t) + exact_.grad_u(x, y, t) * u - stress_divergence(x, y, t) / params_.Re +
                      exact_.grad_p(x, y, t);
  double charge = 0;
  for (int i = 0; i < params_.n_species(); ++i) charge += params_.valence[static_cast<std::size_t>(i)] * exact_.c(i, x, y, t);
  return f + params_.Co * charge * exact_.grad_V(x, y, t);
}

double SourceTerms::f_c(int i, double x, double y, double t) const {
  const double zi = params_.valence[static_cast<std::size_t>(i)];
  const double ci = exact_.c(i, x, y, t);
  const Eigen::Vector2d gci = exact_.grad_c(i, x, y, t);
  const Eigen::Vector2d gv = exact_.grad_V(x, y, t);
  double flux_div = exact_.lap_c(i, x, y, t) + zi * (gci.dot(gv) + ci * exact_.lap_V(x, y, t));
  for (int j = 0; j < params_.n_species(); ++j)
    flux_div += params_.steric(i, j) * (gci.dot(exact_.grad_c(j, x, y, t)) + ci * exact_.lap_c(j, x, y, t));
  return exact_.dt_c(i, x, y, t) + exact_.u(x, y, t).dot(gci) - flux_div / params_.Pe;
}

double SourceTerms::f_V(double x, double y, double t) const {
  double charge = 0;
  for (int i = 0; i < params_.n_species(); ++i) charge += params_.valence[static_cast<std::size_t>(i)] * exact_.c(i, x, y, t);
  return -params_.lambda * exact_.lap_V(x, y, t) - charge;
}

double SourceTerms::chemical_potential(int i, double x, double y, double t) const {
  double g = std::log(exact_.c(i, x, y, t)) + params_.valence[static_cast<std::size_t>(i)] * exact_.V(x, y, t);
  for (int j = 0; j < params_.n_species(); ++j) g += params_.steric(i, j) * exact_.c(j, x, y, t);
  return g;
}

std::shared_ptr<Forcing> manufactured_forcing(const SourceTerms& src, const Discretization& disc) {
  auto f = std::make_shared<Forcing>();
  f->momentum = [src](double x, double y, double t) { return src.f_u(x, y, t); };
  for (int i = 0; i < src.params().n_species(); ++i)
    f->log_concentration.push_back(
        [src, i](double x, double y, double t) { return src.f_c(i, x, y, t) / src.exact().c(i, x, y, t); });
  f->potential = [src](double x, double y, double t) { return src.f_V(x, y, t); };
  f->species_mass = [src](int i, double) { return src.exact().mass(i); };

  const std::shared_ptr<const FeSpace> space = disc.p2;
  f->auxiliary = [src, space](double t, double B) {
    const ExactSolution& ex = src.exact();
    const Params& p = src.params();
    const int n = p.n_species();
    double energy = 0, rate = 0, law = 0;
    for (Index cell = 0; cell < space->n_cells(); ++cell)
      for (Eigen::Index q = 0; q < space->n_qp(); ++q) {
        const double x = space->qp_x()(q, cell), y = space->qp_y()(q, cell), w = space->jxw()(q, cell);
        const Eigen::Vector2d gv = ex.grad_V(x, y, t);
        const Eigen::Vector2d u = ex.u(x, y, t);
        double e = 0.5 * p.lambda * p.Co * gv.squaredNorm();
        double de = -p.lambda * p.Co * gv.squaredNorm();  // grad V decays like exp(-t)
        double l = (ex.grad_u(x, y, t) * u).dot(u);
        for (int i = 0; i < n; ++i) {
          const double ci = ex.c(i, x, y, t), dci = ex.dt_c(i, x, y, t);
          const double zi = p.valence[static_cast<std::size_t>(i)];
          e += p.Co * ci * (std::log(ci) - 1);
          de += p.Co * std::log(ci) * dci;
          Eigen::Vector2d gg = ex.grad_c(i, x, y, t) / ci + zi * gv;
          for (int j = 0; j < n; ++j) {
            const double cj = ex.c(j, x, y, t);
            e += 0.5 * p.Co * p.steric(i, j) * ci * cj;
            de += p.Co * p.steric(i, j) * dci * cj;
            gg += p.steric(i, j) * ex.grad_c(j, x, y, t);
          }
          l += -p.Co / p.Pe * ci * gg.squaredNorm() + p.Co * zi * ci * u.dot(gv);
        }
        energy += w * e;
        rate += w * de;
        law += w * l;
      }
    return (rate - law) / (2 * std::sqrt(energy + B));
  };
  return f;
}

std::array<double, 5> solution_errors(const Integrator& integ, const ExactSolution& exact, double t) {
  const State& st = integ.state();
  const FeSpace& s = *integ.discretization().p2;
  std::array<double, 5> e{};
  const QpVector uh = st.cur.u.values();
  const QpScalar ux = s.evaluate([&](double x, double y) { return exact.u(x, y, t).x(); });
  const QpScalar uy = s.evaluate([&](double x, double y) { return exact.u(x, y, t).y(); });
  e[0] = std::sqrt(s.integrate((uh.x - ux).square() + (uh.y - uy).square()));
  e[1] = error_norm_l2(st.cur.p, [&](double x, double y) { return exact.p(x, y, t); });
  for (int i = 0; i < 2; ++i)
    e[static_cast<std::size_t>(2 + i)] =
        error_norm_l2(s, st.cur.c[static_cast<std::size_t>(i)].values(), [&](double x, double y) { return exact.c(i, x, y, t); });
  e[4] = error_norm_l2(st.cur.v, [&](double x, double y) { return exact.V(x, y, t); });
  return e;
}

InitialData manufactured_initial(const ExactSolution& exact) {
  InitialData init;
  for (int i = 0; i < 2; ++i)
    init.concentration.push_back([exact, i](double x, double y) { return exact.c(i, x, y, 0); });
  init.velocity = [exact](double x, double y) { return exact.u(x, y, 0); };
  init.pressure = [exact](double x, double y) { return exact.p(x, y, 0); };
  return init;
}

ConvergenceTable convergence_study(const std::vector<long>& steps, Index cells, const Params& params, double T,
                                   SchemeOptions options) {
  if (steps.empty()) throw ArgumentError("convergence_study: no step counts");
  for (std::size_t k = 1; k < steps.size(); ++k)
    if (steps[k] <= steps[k - 1]) throw ArgumentError("convergence_study: step counts must increase");
  options.check_mass = false;
  options.potential_compatibility = CompatibilityPolicy::ProjectOut;
  const ExactSolution exact = reference_exact_solution();
  const SourceTerms src(exact, params);
  ConvergenceTable table;
  table.cells = cells;
  table.T = T;
  const Discretization disc = make_discretization(cells, cells);
  const auto forcing = manufactured_forcing(src, disc);
  const InitialData init = manufactured_initial(exact);

  for (long n : steps) {
    Params p = params;
    p.dt = T / static_cast<double>(n);
    p.T = T;
    Integrator integ(disc, p, options, forcing);
    integ.initialize(init);
    for (long k = 0; k < n; ++k) integ.step();
    ErrorRow row;
    row.N = n;
    row.dt = p.dt;
    row.err = solution_errors(integ, exact, integ.state().t);
    row.order.fill(std::numeric_limits<double>::quiet_NaN());
    if (!table.rows.empty()) {
      const ErrorRow& prev = table.rows.back();
      const double ratio = static_cast<double>(n) / static_cast<double>(prev.N);
      for (std::size_t f = 0; f < 5; ++f) row.order[f] = std::log(prev.err[f] / row.err[f]) / std::log(ratio);
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string out = "N,dt,err_u,ord_u,err_p,ord_p,err_cp,ord_cp,err_cn,ord_cn,err_V,ord_V\n";
  char buf[64];
  for (const auto& row : table.rows) {
    out += std::to_string(row.N);
    std::snprintf(buf, sizeof buf, ",%.17g", row.dt);
    out += buf;
    for (std::size_t f = 0; f < 5; ++f) {
      std::snprintf(buf, sizeof buf, ",%.17g,", row.err[f]);
      out += buf;
      if (!std::isnan(row.order[f])) {
        std::snprintf(buf, sizeof buf, "%.17g", row.order[f]);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace spnp
