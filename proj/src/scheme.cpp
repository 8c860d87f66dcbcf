#include "spnp/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

QpScalar evaluate_at(const FeSpace& s, const SpaceTimeFunction& f, double t) {
  return s.evaluate([&](double x, double y) { return f(x, y, t); });
}

Field combine(double a, const Field& x, double b, const Field& y) {
  return {x.space, a * x.coeffs + b * y.coeffs, x.components};
}

std::string at_step(long step) { return " (step " + std::to_string(step) + ")"; }

}  // namespace

Discretization make_discretization(Index nx, Index ny, double xmin, double xmax, double ymin, double ymax) {
  auto mesh = std::make_shared<const Mesh>(build_rect_mesh(xmin, xmax, ymin, ymax, nx, ny));
  const QuadRule rule = quad_rule(6);
  auto p1 = std::make_shared<const FeSpace>(std::make_shared<const DofMap>(dof_map(mesh, 1)), rule);
  auto p2 = std::make_shared<const FeSpace>(std::make_shared<const DofMap>(dof_map(mesh, 2)), rule);
  return {std::move(mesh), std::move(p1), std::move(p2)};
}

double xi_update(const TimeWeights& w, double dt, double r_n, double r_nm1, double zeta1, double zeta2, double sqrt_E,
                 double source) {
  const double denom = w.a0 * sqrt_E + dt * zeta2;
  if (!(denom > 0)) throw StructuralError("auxiliary-variable denominator is not positive: " + std::to_string(denom));
  return (-w.a1 * r_n - w.a2 * r_nm1 + dt * (zeta1 + source)) / denom;
}

Concentration renormalize_concentration(const Field& sigma, double mass) {
  if (!(mass > 0)) throw ArgumentError("renormalize_concentration: mass must be positive");
  if (!sigma.coeffs.allFinite()) throw StructuralError("log-concentration is not finite");
  const FeSpace& s = *sigma.space;
  const QpScalar lv = sigma.values();
  // Shift by the maximum so the exponential cannot overflow.
  const double top = lv.maxCoeff();
  const double integral = s.integrate((lv - top).exp());
  if (!(integral > 0) || !std::isfinite(integral)) throw StructuralError("concentration integral overflow");
  return {sigma, std::log(mass) - top - std::log(integral)};
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPNP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

long step_count(double T, double dt) {
  const double n = T / dt;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) <= 1e-9 * std::max(1.0, n)) return static_cast<long>(rounded);
  return static_cast<long>(std::ceil(n));
}

Integrator::Integrator(Discretization disc, Params params, SchemeOptions options, std::shared_ptr<const Forcing> forcing)
    : disc_(std::move(disc)), params_(std::move(params)), options_(options), forcing_(std::move(forcing)) {
  params_.validate();
  const FeSpace& p1 = *disc_.p1;
  const FeSpace& p2 = *disc_.p2;
  mass2_ = mass_matrix(p2);
  stiff2_ = stiffness_matrix(p2);
  vec_mass_ = vector_mass_matrix(p2);
  grad_ = gradient_matrix(p1, p2);
  lumped1_ = p1.lumped_mass();
  lumped2_ = p2.lumped_mass();

  const Index n2 = p2.n_dofs();
  for (const auto& bd : p2.dofs().boundary_dofs) {
    velocity_bc_.push_back(bd.dof);
    velocity_bc_.push_back(n2 + bd.dof);
  }
  std::sort(velocity_bc_.begin(), velocity_bc_.end());

  pressure_solver_ = std::make_unique<ZeroMeanSolver>(stiffness_matrix(p1), lumped1_, options_.solver);

  const SparseMatrix poisson = params_.lambda * stiff2_;
  if (options_.potential_bc == PotentialBc::ZeroMean) {
    potential_solver_ = std::make_unique<ZeroMeanSolver>(poisson, lumped2_, options_.solver);
  } else {
    for (Index d : p2.dofs().boundary_dofs_on(mask(Side::Left))) {
      potential_bc_dofs_.push_back(d);
      potential_bc_values_.push_back(options_.potential_left);
    }
    for (Index d : p2.dofs().boundary_dofs_on(mask(Side::Right))) {
      potential_bc_dofs_.push_back(d);
      potential_bc_values_.push_back(options_.potential_right);
    }
    SparseMatrix a = poisson;
    Eigen::VectorXd dummy = Eigen::VectorXd::Zero(n2);
    apply_dirichlet(a, dummy, potential_bc_dofs_, potential_bc_values_);
    potential_dirichlet_ = std::make_unique<DirectSolver>(a);
    potential_lift_ = potential_from_rhs(Eigen::VectorXd::Zero(n2), nullptr);
  }
}

Field Integrator::potential_from_rhs(const Eigen::VectorXd& rhs, double* removed_mean, double reference) const {
  if (potential_solver_) {
    ZeroMeanSolution sol = potential_solver_->solve(rhs, options_.potential_compatibility, reference);
    if (removed_mean) *removed_mean = sol.removed_mean;
    return {disc_.p2, std::move(sol.x), 1};
  }
  Eigen::VectorXd b = rhs;
  for (std::size_t k = 0; k < potential_bc_dofs_.size(); ++k) b(potential_bc_dofs_[k]) = potential_bc_values_[k];
  if (removed_mean) *removed_mean = 0;
  return {disc_.p2, potential_dirichlet_->solve(b), 1};
}

Field Integrator::solve_potential(std::span<const Concentration> c, double t, double* removed_mean) const {
  const FeSpace& p2 = *disc_.p2;
  QpScalar charge = QpScalar::Zero(p2.n_qp(), p2.n_cells());
  QpScalar total = QpScalar::Zero(p2.n_qp(), p2.n_cells());
  for (int i = 0; i < params_.n_species(); ++i) {
    const QpScalar ci = c[static_cast<std::size_t>(i)].values();
    charge += params_.valence[static_cast<std::size_t>(i)] * ci;
    total += std::abs(params_.valence[static_cast<std::size_t>(i)]) * ci;
  }
  if (forcing_ && forcing_->potential) {
    const QpScalar f = evaluate_at(p2, forcing_->potential, t);
    charge += f;
    total += f.abs();
  }
  // Net charge is judged against the total ionic charge sum_i |z_i| M_i.
  return potential_from_rhs(load_vector(p2, charge), removed_mean, p2.integrate(total));
}

QpScalar Integrator::viscosity_of(const Velocity& u) const {
  return carreau_viscosity(QpScalar(2.0 * u.gradient().sym_squared()), params_);
}

Field Integrator::recenter(const Field& p) const {
  const double mean = lumped1_.dot(p.coeffs) / disc_.mesh->area();
  return {p.space, (p.coeffs.array() - mean).matrix(), 1};
}

DiagnosticsRecord Integrator::make_record(const Level& lvl, double t, const DiscreteEnergy& e, double visc,
                                          double ionic) const {
  DiagnosticsRecord rec;
  rec.t = t;
  rec.E_h = e.total();
  rec.E_spnp = energy_spnp(lvl.c, lvl.vbar, params_);
  for (const auto& ci : lvl.c) {
    rec.mass.push_back(species_mass(ci));
    rec.min_c.push_back(min_concentration(ci));
  }
  rec.xi = lvl.xi;
  rec.r = lvl.r;
  rec.visc_dissip = visc;
  rec.ionic_dissip = ionic;
  return rec;
}

void Integrator::initialize(const InitialData& init) {
  const int n = params_.n_species();
  if (static_cast<int>(init.concentration.size()) != n)
    throw ArgumentError("initialize: expected " + std::to_string(n) + " initial concentrations");
  const auto& p2 = disc_.p2;
  Level lvl;
  for (const auto& c0 : init.concentration) lvl.c.push_back(interpolate_concentration(p2, c0));
  lvl.u = Velocity::zero(p2);
  if (init.velocity) {
    const Index n2 = p2->n_dofs();
    lvl.u.field.coeffs.head(n2) = p2->interpolate([&](double x, double y) { return init.velocity(x, y).x(); });
    lvl.u.field.coeffs.tail(n2) = p2->interpolate([&](double x, double y) { return init.velocity(x, y).y(); });
    for (Index d : velocity_bc_) lvl.u.field.coeffs(d) = 0;
  }
  lvl.p = Field::zero(disc_.p1);
  if (init.pressure) lvl.p = recenter({disc_.p1, disc_.p1->interpolate(init.pressure), 1});
  double removed = 0;
  lvl.vbar = solve_potential(lvl.c, 0.0, &removed);
  if (options_.potential_compatibility == CompatibilityPolicy::ProjectOut && std::abs(removed) > 1e-10)
    std::clog << "initial potential solve: removed mean charge " << removed << "\n";
  lvl.v = lvl.vbar;
  lvl.mu = viscosity_of(lvl.u);

  state_.mass0.clear();
  for (const auto& ci : lvl.c) state_.mass0.push_back(species_mass(ci));

  const double e0 = energy_spnp(lvl.c, lvl.vbar, params_);
  const double floor = std::min(e0, energy_lower_bound(state_.mass0, disc_.mesh->area(), params_));
  state_.B = params_.B ? *params_.B : 1.0 + std::max(0.0, -floor);
  if (!(e0 + state_.B > 0)) throw StructuralError("initial energy plus B is not positive");
  lvl.r = std::sqrt(e0 + state_.B);
  lvl.xi = 1;
  const DiscreteEnergy e = discrete_energy(lvl.u, lvl.u, lvl.p, lvl.r, lvl.r, params_.dt);
  state_.E_h0 = state_.E_h = e.total();
  state_.old = lvl;
  state_.cur = std::move(lvl);
  state_.t = 0;
  state_.step = 0;
  initial_record_ = make_record(state_.cur, 0.0, e, 0, 0);
  initialized_ = true;
}

StepWorkspace Integrator::prepare(bool first_order) const {
  const Level& cur = state_.cur;
  const Level& old = state_.old;
  StepWorkspace ws;
  ws.w = first_order ? TimeWeights::bdf1() : TimeWeights::bdf2();
  ws.dt = params_.dt;
  ws.t_new = state_.t + params_.dt;
  if (first_order) {
    ws.u_star = cur.u;
    for (const auto& ci : cur.c) {
      ws.sigma_star.push_back(ci.sigma);
      ws.c_star.push_back(ci.values());
    }
    ws.mu_star = cur.mu;
    ws.v_star = cur.v;
  } else {
    ws.u_star = 2.0 * cur.u - old.u;
    for (std::size_t i = 0; i < cur.c.size(); ++i) {
      ws.sigma_star.push_back(combine(2.0, cur.c[i].sigma, -1.0, old.c[i].sigma));
      ws.c_star.push_back(2.0 * cur.c[i].values() - old.c[i].values());
    }
    ws.mu_star = 2.0 * cur.mu - old.mu;
    ws.v_star = combine(2.0, cur.v, -1.0, old.v);
  }
  if (options_.clamp_viscosity) ws.mu_star = ws.mu_star.max(params_.mu_inf);
  return ws;
}

Field Integrator::step_sigma(const StepWorkspace& ws, int i) const {
  const auto si = static_cast<std::size_t>(i);
  const FeSpace& s = *disc_.p2;
  const double inv_pe = 1.0 / params_.Pe;
  const double zi = params_.valence[si];
  const double diff = options_.sigma_diffusion_coeff_one ? 1.0 : inv_pe;

  const QpVector grad_v = ws.v_star.gradients();
  QpVector drift = ws.sigma_star[si].gradients() + zi * grad_v;
  QpVector explicit_flux = zi * grad_v;
  for (int j = 0; j < params_.n_species(); ++j) {
    const double wij = params_.steric(i, j);
    if (wij == 0) continue;
    const QpVector flux = (wij * ws.c_star[static_cast<std::size_t>(j)]) * ws.sigma_star[static_cast<std::size_t>(j)].gradients();
    drift += flux;
    if (j != i) explicit_flux += flux;
  }
  const QpVector b = ws.u_star.values() - inv_pe * drift;
  const QpScalar kappa = diff + params_.steric(i, i) * inv_pe * ws.c_star[si];
  const double m = ws.w.a0 / ws.dt;

  SparseMatrix a = assemble(s, 1, s, 1, [&](Index c, const CellBasis& tb, const CellBasis& rb, const Eigen::VectorXd& w,
                                             Eigen::MatrixXd& local) {
    const Eigen::VectorXd bx = b.x.col(c).matrix().cwiseProduct(w);
    const Eigen::VectorXd by = b.y.col(c).matrix().cwiseProduct(w);
    const Eigen::VectorXd kw = kappa.col(c).matrix().cwiseProduct(w);
    local.noalias() += tb.phi.transpose() * (m * w).asDiagonal() * rb.phi;
    local.noalias() += tb.phi.transpose() * (bx.asDiagonal() * rb.gx + by.asDiagonal() * rb.gy);
    local.noalias() += tb.gx.transpose() * kw.asDiagonal() * rb.gx + tb.gy.transpose() * kw.asDiagonal() * rb.gy;
  });

  const Level& cur = state_.cur;
  const Level& old = state_.old;
  Eigen::VectorXd hist = -ws.w.a1 * cur.c[si].sigma.coeffs;
  if (ws.w.a2 != 0) hist -= ws.w.a2 * old.c[si].sigma.coeffs;
  Eigen::VectorXd rhs = mass2_ * hist / ws.dt - inv_pe * load_gradient_vector(s, explicit_flux);
  if (forcing_ && si < forcing_->log_concentration.size() && forcing_->log_concentration[si])
    rhs += load_vector(s, evaluate_at(s, forcing_->log_concentration[si], ws.t_new));

  const LinearSolver solver(std::move(a), MatrixKind::General, options_.solver);
  return {disc_.p2, solver.solve(rhs), 1};
}

void Integrator::solve_velocity_split(StepWorkspace& ws, std::span<const Concentration> c, const Field& vbar) const {
  const FeSpace& s = *disc_.p2;
  const Level& cur = state_.cur;
  const Level& old = state_.old;

  ws.A_u = (ws.w.a0 / ws.dt) * vec_mass_ + (1.0 / params_.Re) * deformation_matrix(s, ws.mu_star);

  QpVector hist = (-ws.w.a1 / ws.dt) * cur.u.values();
  if (ws.w.a2 != 0) hist += (-ws.w.a2 / ws.dt) * old.u.values();
  if (forcing_ && forcing_->momentum) {
    QpVector f = QpVector::zero(s.n_qp(), s.n_cells());
    for (Index cell = 0; cell < s.n_cells(); ++cell)
      for (Eigen::Index q = 0; q < s.n_qp(); ++q) {
        const Eigen::Vector2d v = forcing_->momentum(s.qp_x()(q, cell), s.qp_y()(q, cell), ws.t_new);
        f.x(q, cell) = v.x();
        f.y(q, cell) = v.y();
      }
    hist += f;
  }
  ws.F1 = vector_load(s, hist) - grad_ * cur.p.coeffs;

  QpScalar charge = QpScalar::Zero(s.n_qp(), s.n_cells());
  for (int i = 0; i < params_.n_species(); ++i)
    charge += params_.valence[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)].values();
  ws.F2 = -vector_load(s, convection(ws.u_star) + (params_.Co * charge) * vbar.gradients());

  SparseMatrix a = ws.A_u;
  Eigen::VectorXd b1 = ws.F1, b2 = ws.F2;
  const std::vector<double> zeros(velocity_bc_.size(), 0.0);
  apply_dirichlet(a, b1, velocity_bc_, zeros, true);
  for (Index d : velocity_bc_) b2(d) = 0;
  const LinearSolver solver(std::move(a), MatrixKind::SymmetricPositiveDefinite, options_.solver);
  ws.u1 = {disc_.p2, solver.solve(b1), 2};
  ws.u2 = {disc_.p2, solver.solve(b2), 2};
}

void Integrator::compute_xi(StepWorkspace& ws, std::span<const Concentration> c, const Field& vbar) const {
  ws.E_bar = energy_spnp(c, vbar, params_);
  const double radicand = ws.E_bar + state_.B;
  if (!(radicand > 0))
    throw StructuralError("energy plus B is not positive: " + std::to_string(radicand) + at_step(state_.step + 1),
                          state_.step + 1);
  ws.sqrt_E = std::sqrt(radicand);
  ws.ionic = ionic_dissipation_integral(c, vbar, params_);
  ws.zeta1 = -ws.F2.dot(ws.u1.coeffs) / (2 * ws.sqrt_E);
  ws.zeta2 = (ws.ionic + ws.F2.dot(ws.u2.coeffs)) / (2 * ws.sqrt_E);
  if (ws.zeta2 < -1e-12)
    throw StructuralError("zeta2 is negative: " + std::to_string(ws.zeta2) + at_step(state_.step + 1), state_.step + 1);
  const double source = forcing_ && forcing_->auxiliary ? forcing_->auxiliary(ws.t_new, state_.B) : 0.0;
  ws.xi = xi_update(ws.w, ws.dt, state_.cur.r, state_.old.r, ws.zeta1, ws.zeta2, ws.sqrt_E, source);
  ws.r = ws.xi * ws.sqrt_E;
}

Field Integrator::pressure_poisson(const StepWorkspace& ws, const Field& u_tilde) const {
  const Eigen::VectorXd rhs = (ws.w.a0 / ws.dt) * (grad_.transpose() * u_tilde.coeffs);
  return {disc_.p1, pressure_solver_->solve(rhs).x, 1};
}

Velocity Integrator::correct_velocity(const StepWorkspace& ws, const Field& u_tilde, const Field& psi) const {
  const FeSpace& p1 = *disc_.p1;
  Velocity u{u_tilde, Eigen::Matrix2Xd(2, p1.n_cells())};
  Eigen::MatrixXd gx, gy;
  const double scale = -ws.dt / ws.w.a0;
  for (Index c = 0; c < p1.n_cells(); ++c) {
    p1.cell_gradients(c, gx, gy);
    const auto d = p1.cell_dofs(c);
    double px = 0, py = 0;
    for (int a = 0; a < 3; ++a) {
      px += gx(0, a) * psi.coeffs(d[a]);
      py += gy(0, a) * psi.coeffs(d[a]);
    }
    u.cell_offset(0, c) = scale * px;
    u.cell_offset(1, c) = scale * py;
  }
  return u;
}

double Integrator::divergence_residual(const Velocity& u) const {
  return load_gradient_vector(*disc_.p1, u.values()).cwiseAbs().maxCoeff();
}

StepReport Integrator::step() {
  if (!initialized_) throw ArgumentError("Integrator::step called before initialize");
  const long index = state_.step + 1;
  const int n = params_.n_species();
  StepWorkspace ws = prepare(state_.step == 0);

  // Steps 1-2: log-concentrations, then renormalized concentrations.
  std::vector<Field> sigma(static_cast<std::size_t>(n));
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(n));
  if (workers > 1) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    for (int start = 0; start < n; start += static_cast<int>(workers)) {
      std::vector<std::thread> pool;
      for (int i = start; i < std::min(n, start + static_cast<int>(workers)); ++i)
        pool.emplace_back([&, i] {
          try {
            sigma[static_cast<std::size_t>(i)] = step_sigma(ws, i);
          } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (int i = 0; i < n; ++i) sigma[static_cast<std::size_t>(i)] = step_sigma(ws, i);
  }

  Level next;
  for (int i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double target = forcing_ && forcing_->species_mass ? forcing_->species_mass(i, ws.t_new) : state_.mass0[si];
    next.c.push_back(renormalize_concentration(sigma[si], target));
    const double cmin = min_concentration(next.c.back());
    if (!(cmin > 0) || !std::isfinite(cmin))
      throw PositivityError("concentration " + std::to_string(i) + " lost positivity" + at_step(index), index);
  }

  // Step 3: potential.
  StepReport report;
  next.vbar = solve_potential(next.c, ws.t_new, &report.potential_removed_mean);

  // Steps 4-5: split momentum solves and the scalar update.
  solve_velocity_split(ws, next.c, next.vbar);
  compute_xi(ws, next.c, next.vbar);

  // Step 6.
  next.r = ws.r;
  next.xi = ws.xi;
  if (options_.potential_bc == PotentialBc::DirichletLeftRight && !options_.xi_scales_dirichlet_potential)
    next.v = {disc_.p2, potential_lift_.coeffs + ws.xi * (next.vbar.coeffs - potential_lift_.coeffs), 1};
  else
    next.v = {disc_.p2, ws.xi * next.vbar.coeffs, 1};
  ws.u_tilde = {disc_.p2, ws.u1.coeffs + ws.xi * ws.u2.coeffs, 2};

  // Steps 7-8: projection and update.
  ws.psi = pressure_poisson(ws, ws.u_tilde);
  next.u = correct_velocity(ws, ws.u_tilde, ws.psi);
  next.p = recenter({disc_.p1, ws.psi.coeffs + state_.cur.p.coeffs, 1});
  next.mu = viscosity_of(next.u);

  // Identity checks.
  report.zeta1 = ws.zeta1;
  report.zeta2 = ws.zeta2;
  report.divergence_residual = divergence_residual(next.u);
  {
    Eigen::VectorXd res = ws.A_u * ws.u_tilde.coeffs - ws.F1 - ws.xi * ws.F2;
    Eigen::VectorXd rhs = ws.F1 + ws.xi * ws.F2;
    for (Index d : velocity_bc_) res(d) = rhs(d) = 0;
    const double nr = rhs.norm();
    report.split_residual = nr > 0 ? res.norm() / nr : res.norm();
  }

  if (options_.check_mass && !(forcing_ && forcing_->species_mass)) {
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const double m = species_mass(next.c[si]);
      if (std::abs(m - state_.mass0[si]) > 1e-10 * state_.mass0[si])
        throw StructuralError("mass of species " + std::to_string(i) + " drifted to " + std::to_string(m) +
                                  at_step(index),
                              index);
    }
  }

  const QpTensor gu = next.u.gradient();
  const double visc = disc_.p2->integrate(ws.mu_star * 2.0 * gu.sym_squared()) / params_.Re;
  const double ionic = ws.xi * ws.xi * ws.ionic;
  report.energy = discrete_energy(next.u, state_.cur.u, next.p, next.r, state_.cur.r, params_.dt);
  report.energy_change = report.energy.total() - state_.E_h;
  report.dissipation = visc + ionic;
  if (report.energy_change > 1e-10 * std::abs(state_.E_h0)) {
    report.energy_increased = true;
    const std::string msg = "discrete energy increased by " + std::to_string(report.energy_change) + at_step(index);
    if (options_.strict_energy) throw StructuralError(msg, index);
    std::cerr << "warning: " << msg << "\n";
  }

  report.record = make_record(next, ws.t_new, report.energy, visc, ionic);

  state_.old = std::move(state_.cur);
  state_.cur = std::move(next);
  state_.t = ws.t_new;
  state_.step = index;
  state_.E_h = report.energy.total();
  return report;
}

std::vector<DiagnosticsRecord> run(Integrator& integ, double T, const std::function<bool(const StepReport&)>& on_step) {
  std::vector<DiagnosticsRecord> records{integ.initial_record()};
  const long n = step_count(T, integ.dt());
  for (long k = 0; k < n; ++k) {
    StepReport rep = integ.step();
    records.push_back(rep.record);
    if (on_step && !on_step(rep)) break;
  }
  return records;
}

}  // namespace spnp
