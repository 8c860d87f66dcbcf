#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spnp/mesh.hpp"
#include "spnp/quadrature.hpp"
#include "spnp/sparse.hpp"

namespace spnp {

/// Scalar data at quadrature points: rows are points, columns are cells.
using QpScalar = Eigen::ArrayXXd;

/// Vector data at quadrature points, one array per Cartesian component.
struct QpVector {
  QpScalar x, y;

  static QpVector zero(Eigen::Index nq, Eigen::Index ncells) {
    return {QpScalar::Zero(nq, ncells), QpScalar::Zero(nq, ncells)};
  }
  QpScalar dot(const QpVector& o) const { return x * o.x + y * o.y; }
  QpScalar squared_norm() const { return x.square() + y.square(); }
};

inline QpVector operator+(const QpVector& a, const QpVector& b) { return {a.x + b.x, a.y + b.y}; }
inline QpVector operator-(const QpVector& a, const QpVector& b) { return {a.x - b.x, a.y - b.y}; }
inline QpVector operator*(double s, const QpVector& a) { return {s * a.x, s * a.y}; }
inline QpVector operator*(const QpScalar& s, const QpVector& a) { return {s * a.x, s * a.y}; }
inline QpVector& operator+=(QpVector& a, const QpVector& b) {
  a.x += b.x;
  a.y += b.y;
  return a;
}

/// Gradient of a vector field: g(i, j) = d u_i / d x_j.
struct QpTensor {
  QpScalar xx, xy, yx, yy;

  /// Frobenius square of the symmetric part, D:D.
  QpScalar sym_squared() const {
    const QpScalar off = 0.5 * (xy + yx);
    return xx.square() + yy.square() + 2.0 * off.square();
  }
};

struct CellGeometry {
  Eigen::Vector2d origin;
  Eigen::Matrix2d jacobian;      // columns: v1 - v0, v2 - v0
  Eigen::Matrix2d inv_jac_t;     // maps reference to physical gradients
  double det = 0;
};

/// Scalar Lagrange space of order 1 or 2 with a fixed quadrature rule.
///
/// Two spaces built on the same mesh object may be combined in one
/// assembly (e.g. pressure-velocity coupling).
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const DofMap> dofs, QuadRule rule);

  const DofMap& dofs() const { return *dofs_; }
  const std::shared_ptr<const DofMap>& dofs_ptr() const { return dofs_; }
  const Mesh& mesh() const { return *dofs_->mesh; }
  const QuadRule& rule() const { return rule_; }
  const RefElement& ref() const { return ref_; }
  Index n_dofs() const { return dofs_->n_dofs; }
  Index n_cells() const { return mesh().n_cells(); }
  Eigen::Index n_qp() const { return rule_.size(); }
  int n_basis() const { return ref_.n_basis(); }
  std::span<const Index> cell_dofs(Index c) const {
    return {dofs_->cell_to_dofs[static_cast<std::size_t>(c)].data(), static_cast<std::size_t>(n_basis())};
  }
  const CellGeometry& geometry(Index c) const { return geom_[static_cast<std::size_t>(c)]; }

  /// Quadrature weight times |det J|, per point and cell.
  const QpScalar& jxw() const { return jxw_; }
  const QpScalar& qp_x() const { return qp_x_; }
  const QpScalar& qp_y() const { return qp_y_; }

  /// Physical basis gradients on cell c (rows: points, cols: basis).
  void cell_gradients(Index c, Eigen::MatrixXd& gx, Eigen::MatrixXd& gy) const;

  QpScalar values(const Eigen::VectorXd& coeffs) const;
  QpVector gradients(const Eigen::VectorXd& coeffs) const;

  double integrate(const QpScalar& f) const { return (f * jxw_).sum(); }
  QpScalar evaluate(const std::function<double(double, double)>& f) const;

  /// Nodal interpolant.
  Eigen::VectorXd interpolate(const std::function<double(double, double)>& f) const;

  /// Integral of each basis function, m_d = (phi_d, 1).
  Eigen::VectorXd lumped_mass() const;

  /// Value of a coefficient vector at a reference point of cell c.
  double eval_in_cell(const Eigen::VectorXd& coeffs, Index c, double xi, double eta) const;

 private:
  std::shared_ptr<const DofMap> dofs_;
  QuadRule rule_;
  RefElement ref_;
  std::vector<CellGeometry> geom_;
  QpScalar jxw_, qp_x_, qp_y_;
};

/// Finite-element function: coefficients over a space, one block of
/// n_dofs entries per component.
struct Field {
  std::shared_ptr<const FeSpace> space;
  Eigen::VectorXd coeffs;
  int components = 1;

  static Field zero(std::shared_ptr<const FeSpace> space, int components = 1) {
    const auto n = space->n_dofs() * components;
    return {std::move(space), Eigen::VectorXd::Zero(n), components};
  }
  Eigen::VectorXd component(int i) const { return coeffs.segment(i * space->n_dofs(), space->n_dofs()); }
  QpScalar values(int comp = 0) const { return space->values(component(comp)); }
  QpVector gradients(int comp = 0) const { return space->gradients(component(comp)); }
  double mean() const { return space->integrate(values()) / space->mesh().area(); }
};

// ---------------------------------------------------------------------------
// Generic assembly.

/// Basis tabulation handed to assembly kernels for one cell.
struct CellBasis {
  const Eigen::MatrixXd& phi;  // points x basis
  Eigen::MatrixXd gx, gy;      // physical gradients, points x basis
};

/// Quadrature-summed local matrices scattered into a global matrix.
///
/// The kernel is called as kernel(cell, test, trial, jxw, local) where jxw
/// is the column of weights for the cell and local has size
/// (test_components * test_basis) x (trial_components * trial_basis), with
/// component-major local numbering. Global numbering is
/// component * n_dofs + dof.
template <class Kernel>
SparseMatrix assemble(const FeSpace& test, int test_components, const FeSpace& trial, int trial_components,
                      Kernel&& kernel);

/// Vector counterpart: kernel(cell, test, jxw, local) with local of size
/// test_components * test_basis.
template <class Kernel>
Eigen::VectorXd assemble_vector(const FeSpace& test, int test_components, Kernel&& kernel);

void check_same_mesh(const FeSpace& a, const FeSpace& b);

// ---------------------------------------------------------------------------
// Named forms. Coefficients are evaluated at quadrature points; an empty
// coefficient array means 1.

/// (w phi, psi)
SparseMatrix mass_matrix(const FeSpace& s, const QpScalar& w = {});
/// (w grad phi, grad psi)
SparseMatrix stiffness_matrix(const FeSpace& s, const QpScalar& w = {});
/// (b . grad phi, psi)
SparseMatrix advection_matrix(const FeSpace& s, const QpVector& b);
/// Two-component (w phi, psi) for vector fields.
SparseMatrix vector_mass_matrix(const FeSpace& s, const QpScalar& w = {});
/// (2 mu D(u) : D(v)) for two-component u, v.
SparseMatrix deformation_matrix(const FeSpace& s, const QpScalar& mu);
/// (q, div v): rows are the scalar space q, columns the two-component v.
SparseMatrix divergence_matrix(const FeSpace& pressure, const FeSpace& velocity);
/// (grad p, v): rows are the two-component v, columns the scalar space p.
SparseMatrix gradient_matrix(const FeSpace& pressure, const FeSpace& velocity);

/// (f, psi)
Eigen::VectorXd load_vector(const FeSpace& s, const QpScalar& f);
/// (F, grad psi)
Eigen::VectorXd load_gradient_vector(const FeSpace& s, const QpVector& f);
/// (f, v) for two-component v.
Eigen::VectorXd vector_load(const FeSpace& s, const QpVector& f);

// ---------------------------------------------------------------------------
// Constraints and special solves.

/// Replace Dirichlet rows by identity rows with the given values. With
/// symmetric = true the matching columns are eliminated as well, moving
/// their contribution to b.
void apply_dirichlet(SparseMatrix& a, Eigen::VectorXd& b, std::span<const Index> dofs,
                     std::span<const double> values, bool symmetric = false);

enum class CompatibilityPolicy {
  Strict,       // incompatible right-hand side is an error
  ProjectOut,   // its constant component is removed by the multiplier
};

struct ZeroMeanSolution {
  Eigen::VectorXd x;
  double removed_mean = 0;  // constant subtracted from the rhs density
  SolveReport report;
};

/// Pure-Neumann solves with one Lagrange multiplier enforcing
/// sum_d m_d x_d = 0 (m = lumped mass, i.e. the integral constraint).
class ZeroMeanSolver {
 public:
  ZeroMeanSolver(const SparseMatrix& a, Eigen::VectorXd lumped, SolverConfig config = {});
  /// The compatibility test is |(b, 1)| <= 1e-8 * reference, with the l1
  /// norm of b as reference when none is given.
  ZeroMeanSolution solve(const Eigen::VectorXd& b, CompatibilityPolicy policy = CompatibilityPolicy::Strict,
                         double reference = 0) const;

 private:
  Eigen::VectorXd lumped_;
  LinearSolver solver_;
};

ZeroMeanSolution solve_zero_mean(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& lumped,
                                 CompatibilityPolicy policy = CompatibilityPolicy::Strict);

/// L2 distance between a scalar field and an exact function.
double error_norm_l2(const Field& field, const std::function<double(double, double)>& exact);
/// L2 distance between quadrature data and an exact function.
double error_norm_l2(const FeSpace& s, const QpScalar& values, const std::function<double(double, double)>& exact);

// ---------------------------------------------------------------------------

template <class Kernel>
SparseMatrix assemble(const FeSpace& test, int test_components, const FeSpace& trial, int trial_components,
                      Kernel&& kernel) {
  check_same_mesh(test, trial);
  const int nbt = test.n_basis(), nbr = trial.n_basis();
  const Index nt = test.n_dofs(), nr = trial.n_dofs();
  TripletList triplets(nt * test_components, nr * trial_components);
  triplets.reserve(static_cast<std::size_t>(test.n_cells() * nbt * nbr * test_components * trial_components));
  Eigen::MatrixXd local(nbt * test_components, nbr * trial_components);
  CellBasis tb{test.ref().values, {}, {}};
  CellBasis rb{trial.ref().values, {}, {}};
  Eigen::VectorXd w(test.n_qp());
  for (Index c = 0; c < test.n_cells(); ++c) {
    test.cell_gradients(c, tb.gx, tb.gy);
    trial.cell_gradients(c, rb.gx, rb.gy);
    w = test.jxw().col(c).matrix();
    local.setZero();
    kernel(c, static_cast<const CellBasis&>(tb), static_cast<const CellBasis&>(rb),
           static_cast<const Eigen::VectorXd&>(w), local);
    const auto td = test.cell_dofs(c);
    const auto rd = trial.cell_dofs(c);
    for (int ct = 0; ct < test_components; ++ct)
      for (int a = 0; a < nbt; ++a)
        for (int cr = 0; cr < trial_components; ++cr)
          for (int b = 0; b < nbr; ++b) {
            const double v = local(ct * nbt + a, cr * nbr + b);
            if (v != 0.0) triplets.add(ct * nt + td[a], cr * nr + rd[b], v);
          }
  }
  return triplets.compress();
}

template <class Kernel>
Eigen::VectorXd assemble_vector(const FeSpace& test, int test_components, Kernel&& kernel) {
  const int nbt = test.n_basis();
  const Index nt = test.n_dofs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nt * test_components);
  Eigen::VectorXd local(nbt * test_components);
  CellBasis tb{test.ref().values, {}, {}};
  Eigen::VectorXd w(test.n_qp());
  for (Index c = 0; c < test.n_cells(); ++c) {
    test.cell_gradients(c, tb.gx, tb.gy);
    w = test.jxw().col(c).matrix();
    local.setZero();
    kernel(c, static_cast<const CellBasis&>(tb), static_cast<const Eigen::VectorXd&>(w), local);
    const auto td = test.cell_dofs(c);
    for (int ct = 0; ct < test_components; ++ct)
      for (int a = 0; a < nbt; ++a) out(ct * nt + td[a]) += local(ct * nbt + a);
  }
  return out;
}

}  // namespace spnp
