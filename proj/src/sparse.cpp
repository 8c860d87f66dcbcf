#include "spnp/sparse.hpp"

#include <cmath>
#include <string>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// Direct solves must reproduce b to this relative residual.
constexpr double kDirectResidualTol = 1e-10;

void check_square(const SparseMatrix& a, Eigen::Index n, const char* who) {
  if (a.rows() != a.cols()) throw ArgumentError(std::string(who) + ": matrix is not square");
  if (a.rows() != n) throw ArgumentError(std::string(who) + ": dimension mismatch");
}

}  // namespace

std::string_view to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Direct: return "direct";
    case SolveMethod::Cg: return "cg";
    case SolveMethod::BiCgStab: return "bicgstab";
  }
  return "unknown";
}

SparseMatrix TripletList::compress() const {
  SparseMatrix a(rows_, cols_);
  a.setFromTriplets(entries_.begin(), entries_.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd spmv(const SparseMatrix& a, const Eigen::VectorXd& x) {
  if (x.size() != a.cols()) throw ArgumentError("spmv: dimension mismatch");
  return a * x;
}

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double nr = (a * x - b).norm();
  return nb > 0 ? nr / nb : nr;
}

struct DirectSolver::Impl {
  std::variant<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>,
               Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>
      factor;
  SparseMatrix a;
};

DirectSolver::DirectSolver(const SparseMatrix& a, MatrixKind kind) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw ArgumentError("DirectSolver: matrix is not square");
  impl_->a = a;
  const ColMatrix col(a);
  bool ok = false;
  if (kind == MatrixKind::SymmetricPositiveDefinite) {
    auto& f = impl_->factor.emplace<1>();
    f.compute(col);
    ok = f.info() == Eigen::Success;
    if (ok) {
      // A non-positive pivot means the matrix is not SPD after all.
      const auto d = f.vectorD();
      ok = d.size() == 0 || d.minCoeff() > 0;
    }
    if (!ok) {
      auto& lu = impl_->factor.emplace<0>();
      lu.compute(col);
      ok = lu.info() == Eigen::Success;
    }
  } else {
    auto& lu = impl_->factor.emplace<0>();
    lu.compute(col);
    ok = lu.info() == Eigen::Success;
  }
  if (!ok) throw SingularMatrixError("sparse factorization failed: matrix is numerically singular");
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

Eigen::Index DirectSolver::size() const { return impl_->a.rows(); }

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b, SolveReport* report) const {
  check_square(impl_->a, b.size(), "DirectSolver::solve");
  Eigen::VectorXd x;
  if (b.norm() == 0) {
    x = Eigen::VectorXd::Zero(b.size());
  } else {
    x = std::visit([&](const auto& f) -> Eigen::VectorXd { return f.solve(b); }, impl_->factor);
  }
  const double res = relative_residual(impl_->a, x, b);
  if (!x.allFinite() || !(res <= kDirectResidualTol))
    throw SingularMatrixError("direct solve residual " + std::to_string(res) +
                              " exceeds tolerance: matrix is numerically singular");
  if (report) *report = {1, res, SolveMethod::Direct};
  return x;
}

std::pair<Eigen::VectorXd, SolveReport> solve_direct(const SparseMatrix& a, const Eigen::VectorXd& b) {
  check_square(a, b.size(), "solve_direct");
  SolveReport rep;
  if (b.norm() == 0) return {Eigen::VectorXd::Zero(b.size()), rep};
  DirectSolver s(a);
  Eigen::VectorXd x = s.solve(b, &rep);
  return {std::move(x), rep};
}

std::pair<Eigen::VectorXd, SolveReport> solve_iterative(const SparseMatrix& a, const Eigen::VectorXd& b,
                                                        bool spd, double tol, long maxit) {
  check_square(a, b.size(), "solve_iterative");
  if (!(tol > 0) || maxit < 1) throw ArgumentError("solve_iterative: tol must be > 0 and maxit >= 1");
  SolveReport rep;
  rep.method = spd ? SolveMethod::Cg : SolveMethod::BiCgStab;
  if (b.norm() == 0) return {Eigen::VectorXd::Zero(b.size()), rep};

  const ColMatrix col(a);
  Eigen::VectorXd x;
  if (spd) {
    Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(maxit);
    cg.compute(col);
    x = cg.solve(b);
    rep.iterations = cg.iterations();
  } else {
    Eigen::BiCGSTAB<ColMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
    bicg.setTolerance(tol);
    bicg.setMaxIterations(maxit);
    bicg.compute(col);
    x = bicg.solve(b);
    rep.iterations = bicg.iterations();
  }
  // Eigen's own estimate can be stale on breakdown; recompute.
  rep.residual = relative_residual(a, x, b);
  if (!x.allFinite() || !(rep.residual <= tol))
    throw ConvergenceError(std::string(to_string(rep.method)) + " did not converge: residual " +
                               std::to_string(rep.residual) + " after " + std::to_string(rep.iterations) +
                               " iterations",
                           rep.iterations, rep.residual);
  return {std::move(x), rep};
}

LinearSolver::LinearSolver(SparseMatrix a, MatrixKind kind, SolverConfig config)
    : a_(std::move(a)), kind_(kind), config_(config) {
  if (config_.kind == SolverConfig::Kind::Direct) direct_ = std::make_shared<DirectSolver>(a_, kind_);
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b, SolveReport* report) const {
  if (direct_) return direct_->solve(b, report);
  auto [x, rep] = solve_iterative(a_, b, kind_ == MatrixKind::SymmetricPositiveDefinite, config_.tol,
                                  config_.maxit);
  if (report) *report = rep;
  return x;
}

}  // namespace spnp
