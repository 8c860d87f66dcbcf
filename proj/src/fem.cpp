#include "spnp/fem.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

bool uses_coefficient(const QpScalar& w) { return w.size() != 0; }

double coefficient(const QpScalar& w, Eigen::Index q, Index c) { return uses_coefficient(w) ? w(q, c) : 1.0; }

// Relative size of the constant component tolerated in a Neumann rhs.
constexpr double kCompatibilityTol = 1e-8;

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const DofMap> dofs, QuadRule rule)
    : dofs_(std::move(dofs)), rule_(std::move(rule)), ref_(ref_element(dofs_->order, rule_)) {
  const Mesh& m = mesh();
  const Index nc = m.n_cells();
  const Eigen::Index nq = rule_.size();
  geom_.resize(static_cast<std::size_t>(nc));
  jxw_.resize(nq, nc);
  qp_x_.resize(nq, nc);
  qp_y_.resize(nq, nc);
  for (Index c = 0; c < nc; ++c) {
    const auto& t = m.triangles[static_cast<std::size_t>(c)];
    CellGeometry& g = geom_[static_cast<std::size_t>(c)];
    g.origin = m.nodes.col(t[0]);
    g.jacobian.col(0) = m.nodes.col(t[1]) - g.origin;
    g.jacobian.col(1) = m.nodes.col(t[2]) - g.origin;
    g.det = g.jacobian.determinant();
    if (!(g.det > 0)) throw ArgumentError("FeSpace: degenerate or clockwise triangle " + std::to_string(c));
    g.inv_jac_t = g.jacobian.inverse().transpose();
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = g.origin + g.jacobian * rule_.points.col(q);
      qp_x_(q, c) = x.x();
      qp_y_(q, c) = x.y();
      jxw_(q, c) = rule_.weights(q) * g.det;
    }
  }
}

void FeSpace::cell_gradients(Index c, Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const {
  const Eigen::Matrix2d& r = geom_[static_cast<std::size_t>(c)].inv_jac_t;
  gx = r(0, 0) * ref_.grad_x + r(0, 1) * ref_.grad_y;
  gy = r(1, 0) * ref_.grad_x + r(1, 1) * ref_.grad_y;
}

QpScalar FeSpace::values(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != n_dofs()) throw ArgumentError("FeSpace::values: coefficient length mismatch");
  QpScalar out(n_qp(), n_cells());
  Eigen::VectorXd local(n_basis());
  for (Index c = 0; c < n_cells(); ++c) {
    const auto d = cell_dofs(c);
    for (int a = 0; a < n_basis(); ++a) local(a) = coeffs(d[a]);
    out.col(c) = (ref_.values * local).array();
  }
  return out;
}

QpVector FeSpace::gradients(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != n_dofs()) throw ArgumentError("FeSpace::gradients: coefficient length mismatch");
  QpVector out = QpVector::zero(n_qp(), n_cells());
  Eigen::VectorXd local(n_basis());
  Eigen::MatrixXd gx, gy;
  for (Index c = 0; c < n_cells(); ++c) {
    const auto d = cell_dofs(c);
    for (int a = 0; a < n_basis(); ++a) local(a) = coeffs(d[a]);
    cell_gradients(c, gx, gy);
    out.x.col(c) = (gx * local).array();
    out.y.col(c) = (gy * local).array();
  }
  return out;
}

QpScalar FeSpace::evaluate(const std::function<double(double, double)>& f) const {
  QpScalar out(n_qp(), n_cells());
  for (Index c = 0; c < n_cells(); ++c)
    for (Eigen::Index q = 0; q < n_qp(); ++q) out(q, c) = f(qp_x_(q, c), qp_y_(q, c));
  return out;
}

Eigen::VectorXd FeSpace::interpolate(const std::function<double(double, double)>& f) const {
  Eigen::VectorXd out(n_dofs());
  for (Index d = 0; d < n_dofs(); ++d) {
    const Eigen::Vector2d p = dofs_->dof_point(d);
    out(d) = f(p.x(), p.y());
  }
  return out;
}

Eigen::VectorXd FeSpace::lumped_mass() const {
  return assemble_vector(*this, 1, [](Index, const CellBasis& t, const Eigen::VectorXd& w, Eigen::VectorXd& local) {
    local += t.phi.transpose() * w;
  });
}

double FeSpace::eval_in_cell(const Eigen::VectorXd& coeffs, Index c, double xi, double eta) const {
  Eigen::VectorXd v(n_basis()), gx(n_basis()), gy(n_basis());
  eval_basis(dofs_->order, xi, eta, v, gx, gy);
  const auto d = cell_dofs(c);
  double s = 0;
  for (int a = 0; a < n_basis(); ++a) s += v(a) * coeffs(d[a]);
  return s;
}

void check_same_mesh(const FeSpace& a, const FeSpace& b) {
  if (a.dofs().mesh != b.dofs().mesh) throw ArgumentError("assembly: spaces live on different meshes");
  if (a.n_qp() != b.n_qp()) throw ArgumentError("assembly: spaces use different quadrature rules");
}

// ---------------------------------------------------------------------------

SparseMatrix mass_matrix(const FeSpace& s, const QpScalar& w) {
  return assemble(s, 1, s, 1, [&](Index c, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                                  Eigen::MatrixXd& local) {
    for (Eigen::Index q = 0; q < jxw.size(); ++q)
      local.noalias() += (coefficient(w, q, c) * jxw(q)) * t.phi.row(q).transpose() * r.phi.row(q);
  });
}

SparseMatrix stiffness_matrix(const FeSpace& s, const QpScalar& w) {
  return assemble(s, 1, s, 1, [&](Index c, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                                  Eigen::MatrixXd& local) {
    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
      const double f = coefficient(w, q, c) * jxw(q);
      local.noalias() += f * (t.gx.row(q).transpose() * r.gx.row(q) + t.gy.row(q).transpose() * r.gy.row(q));
    }
  });
}

SparseMatrix advection_matrix(const FeSpace& s, const QpVector& b) {
  return assemble(s, 1, s, 1, [&](Index c, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                                  Eigen::MatrixXd& local) {
    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
      const Eigen::RowVectorXd dir = b.x(q, c) * r.gx.row(q) + b.y(q, c) * r.gy.row(q);
      local.noalias() += jxw(q) * t.phi.row(q).transpose() * dir;
    }
  });
}

SparseMatrix vector_mass_matrix(const FeSpace& s, const QpScalar& w) {
  const int nb = s.n_basis();
  return assemble(s, 2, s, 2, [&](Index c, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                                  Eigen::MatrixXd& local) {
    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
      const Eigen::MatrixXd m = (coefficient(w, q, c) * jxw(q)) * t.phi.row(q).transpose() * r.phi.row(q);
      local.block(0, 0, nb, nb) += m;
      local.block(nb, nb, nb, nb) += m;
    }
  });
}

SparseMatrix deformation_matrix(const FeSpace& s, const QpScalar& mu) {
  const int nb = s.n_basis();
  // 2 D(phi_a e_i) : D(phi_b e_j) = delta_ij grad phi_a . grad phi_b + d_j phi_a d_i phi_b
  return assemble(s, 2, s, 2, [&](Index c, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                                  Eigen::MatrixXd& local) {
    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
      const double f = mu(q, c) * jxw(q);
      const Eigen::RowVectorXd tx = t.gx.row(q), ty = t.gy.row(q), rx = r.gx.row(q), ry = r.gy.row(q);
      const Eigen::MatrixXd lap = tx.transpose() * rx + ty.transpose() * ry;
      // test component i (rows), trial component j (cols): + d_i(trial) d_j(test)
      local.block(0, 0, nb, nb) += f * (lap + tx.transpose() * rx);
      local.block(0, nb, nb, nb) += f * (ty.transpose() * rx);
      local.block(nb, 0, nb, nb) += f * (tx.transpose() * ry);
      local.block(nb, nb, nb, nb) += f * (lap + ty.transpose() * ry);
    }
  });
}

SparseMatrix divergence_matrix(const FeSpace& pressure, const FeSpace& velocity) {
  const int nb = velocity.n_basis();
  return assemble(pressure, 1, velocity, 2,
                  [&](Index, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                      Eigen::MatrixXd& local) {
                    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
                      local.block(0, 0, t.phi.cols(), nb) += jxw(q) * t.phi.row(q).transpose() * r.gx.row(q);
                      local.block(0, nb, t.phi.cols(), nb) += jxw(q) * t.phi.row(q).transpose() * r.gy.row(q);
                    }
                  });
}

SparseMatrix gradient_matrix(const FeSpace& pressure, const FeSpace& velocity) {
  const int nb = velocity.n_basis();
  return assemble(velocity, 2, pressure, 1,
                  [&](Index, const CellBasis& t, const CellBasis& r, const Eigen::VectorXd& jxw,
                      Eigen::MatrixXd& local) {
                    for (Eigen::Index q = 0; q < jxw.size(); ++q) {
                      local.block(0, 0, nb, r.phi.cols()) += jxw(q) * t.phi.row(q).transpose() * r.gx.row(q);
                      local.block(nb, 0, nb, r.phi.cols()) += jxw(q) * t.phi.row(q).transpose() * r.gy.row(q);
                    }
                  });
}

Eigen::VectorXd load_vector(const FeSpace& s, const QpScalar& f) {
  return assemble_vector(s, 1, [&](Index c, const CellBasis& t, const Eigen::VectorXd& jxw, Eigen::VectorXd& local) {
    local.noalias() += t.phi.transpose() * (jxw.array() * f.col(c)).matrix();
  });
}

Eigen::VectorXd load_gradient_vector(const FeSpace& s, const QpVector& f) {
  return assemble_vector(s, 1, [&](Index c, const CellBasis& t, const Eigen::VectorXd& jxw, Eigen::VectorXd& local) {
    local.noalias() += t.gx.transpose() * (jxw.array() * f.x.col(c)).matrix();
    local.noalias() += t.gy.transpose() * (jxw.array() * f.y.col(c)).matrix();
  });
}

Eigen::VectorXd vector_load(const FeSpace& s, const QpVector& f) {
  const int nb = s.n_basis();
  return assemble_vector(s, 2, [&](Index c, const CellBasis& t, const Eigen::VectorXd& jxw, Eigen::VectorXd& local) {
    local.head(nb).noalias() += t.phi.transpose() * (jxw.array() * f.x.col(c)).matrix();
    local.tail(nb).noalias() += t.phi.transpose() * (jxw.array() * f.y.col(c)).matrix();
  });
}

// ---------------------------------------------------------------------------

void apply_dirichlet(SparseMatrix& a, Eigen::VectorXd& b, std::span<const Index> dofs, std::span<const double> values,
                     bool symmetric) {
  if (dofs.size() != values.size()) throw ArgumentError("apply_dirichlet: dofs and values differ in length");
  if (dofs.empty()) return;
  std::vector<char> fixed(static_cast<std::size_t>(a.rows()), 0);
  Eigen::VectorXd value = Eigen::VectorXd::Zero(a.rows());
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    if (dofs[k] < 0 || dofs[k] >= a.rows()) throw ArgumentError("apply_dirichlet: dof out of range");
    fixed[static_cast<std::size_t>(dofs[k])] = 1;
    value(dofs[k]) = values[k];
  }
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    const bool row_fixed = fixed[static_cast<std::size_t>(r)];
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      if (row_fixed) {
        it.valueRef() = 0.0;
      } else if (symmetric && fixed[static_cast<std::size_t>(it.col())]) {
        b(r) -= it.value() * value(it.col());
        it.valueRef() = 0.0;
      }
    }
  }
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    a.coeffRef(dofs[k], dofs[k]) = 1.0;
    b(dofs[k]) = values[k];
  }
  a.prune(0.0);
  a.makeCompressed();
}

ZeroMeanSolver::ZeroMeanSolver(const SparseMatrix& a, Eigen::VectorXd lumped, SolverConfig config)
    : lumped_(std::move(lumped)),
      solver_(
          [&] {
            if (a.rows() != a.cols() || a.rows() != lumped_.size())
              throw ArgumentError("ZeroMeanSolver: dimension mismatch");
            const Index n = a.rows();
            TripletList t(n + 1, n + 1);
            t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n));
            for (Eigen::Index r = 0; r < a.outerSize(); ++r)
              for (SparseMatrix::InnerIterator it(a, r); it; ++it) t.add(r, it.col(), it.value());
            for (Index d = 0; d < n; ++d) {
              t.add(d, n, lumped_(d));
              t.add(n, d, lumped_(d));
            }
            return t.compress();
          }(),
          MatrixKind::General, config) {}

ZeroMeanSolution ZeroMeanSolver::solve(const Eigen::VectorXd& b, CompatibilityPolicy policy, double reference) const {
  const Index n = lumped_.size();
  if (b.size() != n) throw ArgumentError("ZeroMeanSolver::solve: dimension mismatch");
  ZeroMeanSolution out;
  // Constants lie in the kernel, so (rhs, 1) = sum_d b_d must vanish.
  const double total = b.sum();
  const double scale = b.lpNorm<1>();
  if (policy == CompatibilityPolicy::Strict && std::abs(total) > kCompatibilityTol * (reference > 0 ? reference : scale))
    throw CompatibilityError("pure-Neumann right-hand side is incompatible: (rhs, 1) = " + std::to_string(total) +
                             " (net charge imbalance?)");
  out.removed_mean = total / lumped_.sum();
  if (scale == 0) {
    out.x = Eigen::VectorXd::Zero(n);
    return out;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs.head(n) = b;
  const Eigen::VectorXd sol = solver_.solve(rhs, &out.report);
  out.x = sol.head(n);
  return out;
}

ZeroMeanSolution solve_zero_mean(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& lumped,
                                 CompatibilityPolicy policy) {
  return ZeroMeanSolver(a, lumped).solve(b, policy);
}

double error_norm_l2(const FeSpace& s, const QpScalar& values, const std::function<double(double, double)>& exact) {
  return std::sqrt(s.integrate((values - s.evaluate(exact)).square()));
}

double error_norm_l2(const Field& field, const std::function<double(double, double)>& exact) {
  return error_norm_l2(*field.space, field.values(), exact);
}

}  // namespace spnp
