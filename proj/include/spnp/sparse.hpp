#pragma once

#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace spnp {

/// Compressed-row sparse matrix. Column indices are sorted within each row
/// once the matrix is compressed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

enum class SolveMethod { Direct, Cg, BiCgStab };

std::string_view to_string(SolveMethod m);

struct SolveReport {
  long iterations = 0;
  double residual = 0;  // ||A x - b|| / ||b||
  SolveMethod method = SolveMethod::Direct;
};

/// Triplet accumulator; duplicates are summed on compression.
class TripletList {
 public:
  TripletList(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}
  void reserve(std::size_t n) { entries_.reserve(n); }
  void add(Eigen::Index r, Eigen::Index c, double v) { entries_.emplace_back(r, c, v); }
  SparseMatrix compress() const;

 private:
  Eigen::Index rows_, cols_;
  std::vector<Triplet> entries_;
};

Eigen::VectorXd spmv(const SparseMatrix& a, const Eigen::VectorXd& x);

/// ||A x - b||_2 / ||b||_2, or ||A x||_2 when b == 0.
double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

enum class MatrixKind { General, SymmetricPositiveDefinite };

/// Sparse direct factorization, reusable for several right-hand sides.
/// SPD matrices use a simplicial LDL^T; everything else sparse LU with
/// partial pivoting.
class DirectSolver {
 public:
  explicit DirectSolver(const SparseMatrix& a, MatrixKind kind = MatrixKind::General);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveReport* report = nullptr) const;
  Eigen::Index size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::pair<Eigen::VectorXd, SolveReport> solve_direct(const SparseMatrix& a, const Eigen::VectorXd& b);

/// Jacobi-preconditioned CG (spd) or BiCGSTAB. Throws ConvergenceError when
/// the relative residual is above tol after maxit iterations.
std::pair<Eigen::VectorXd, SolveReport> solve_iterative(const SparseMatrix& a, const Eigen::VectorXd& b,
                                                        bool spd, double tol, long maxit);

struct SolverConfig {
  enum class Kind { Direct, Iterative } kind = Kind::Direct;
  double tol = 1e-12;
  long maxit = 5000;
};

/// One linear system under a SolverConfig: factorizes once when direct,
/// otherwise runs the Krylov method per right-hand side.
class LinearSolver {
 public:
  LinearSolver(SparseMatrix a, MatrixKind kind, SolverConfig config);
  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveReport* report = nullptr) const;
  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
  MatrixKind kind_;
  SolverConfig config_;
  std::shared_ptr<const DirectSolver> direct_;
};

}  // namespace spnp
