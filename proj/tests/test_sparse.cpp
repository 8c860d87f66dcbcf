#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "spnp/errors.hpp"
#include "spnp/fem.hpp"
#include "spnp/scheme.hpp"
#include "spnp/sparse.hpp"

using namespace spnp;

namespace {

SparseMatrix identity(Eigen::Index n) {
  TripletList t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) t.add(i, i, 1.0);
  return t.compress();
}

SparseMatrix laplacian_1d(Eigen::Index n) {
  TripletList t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.add(i, i, 2.0);
    if (i > 0) t.add(i, i - 1, -1.0);
    if (i + 1 < n) t.add(i, i + 1, -1.0);
  }
  return t.compress();
}

// Neumann P1 stiffness bordered by the integral constraint row/column.
std::pair<SparseMatrix, Eigen::VectorXd> bordered_neumann(Index cells) {
  const Discretization d = make_discretization(cells, cells);
  const SparseMatrix k = stiffness_matrix(*d.p1);
  const Eigen::VectorXd m = d.p1->lumped_mass();
  const Eigen::Index n = k.rows();
  TripletList t(n + 1, n + 1);
  for (Eigen::Index r = 0; r < n; ++r)
    for (SparseMatrix::InnerIterator it(k, r); it; ++it) t.add(r, it.col(), it.value());
  for (Eigen::Index r = 0; r < n; ++r) {
    t.add(r, n, m(r));
    t.add(n, r, m(r));
  }
  Eigen::VectorXd b = load_vector(*d.p1, d.p1->evaluate([](double x, double y) { return x - y * y + 1.0 / 3; }));
  b.conservativeResize(n + 1);
  b(n) = 0;
  return {t.compress(), b};
}

}  // namespace

TEST(Sparse, TripletDuplicatesAreSummed) {
  TripletList t(2, 2);
  t.add(0, 1, 1.5);
  t.add(0, 1, 2.5);
  t.add(1, 0, -1);
  const SparseMatrix a = t.compress();
  EXPECT_EQ(a.nonZeros(), 2);
  EXPECT_DOUBLE_EQ(a.coeff(0, 1), 4.0);
}

TEST(Sparse, SpmvIdentity) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(7, -1, 2);
  EXPECT_EQ(spmv(identity(7), x), x);
}

TEST(Sparse, SpmvHandArithmetic) {
  TripletList t(2, 2);
  t.add(0, 0, 2);
  t.add(0, 1, 1);
  t.add(1, 1, 3);
  const Eigen::VectorXd y = spmv(t.compress(), Eigen::Vector2d(1, 1));
  EXPECT_DOUBLE_EQ(y(0), 3);
  EXPECT_DOUBLE_EQ(y(1), 3);
}

TEST(Sparse, SpmvRandomAgainstDense) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> val(-1, 1), coin(0, 1);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(50, 50);
  TripletList t(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j)
      if (coin(rng) < 0.1) {
        dense(i, j) = val(rng);
        t.add(i, j, dense(i, j));
      }
  Eigen::VectorXd x(50);
  for (auto& v : x) v = val(rng);
  EXPECT_LE((spmv(t.compress(), x) - dense * x).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Sparse, SpmvDimensionMismatch) { EXPECT_THROW(spmv(identity(3), Eigen::VectorXd::Ones(4)), ArgumentError); }

TEST(Sparse, DirectIdentity) {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1, 5);
  const auto [x, rep] = solve_direct(identity(5), b);
  EXPECT_LE((x - b).norm(), 1e-15);
  EXPECT_EQ(rep.method, SolveMethod::Direct);
}

TEST(Sparse, DirectTridiagonalAgainstDenseLu) {
  const SparseMatrix a = laplacian_1d(10);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(10);
  const Eigen::VectorXd ref = Eigen::MatrixXd(a).partialPivLu().solve(b);
  const auto [x, rep] = solve_direct(a, b);
  EXPECT_LE((x - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(rep.residual, 1e-14);
  const DirectSolver spd(a, MatrixKind::SymmetricPositiveDefinite);
  EXPECT_LE((spd.solve(b) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sparse, DirectSingularThrows) {
  TripletList t(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.add(i, j, 1.0);
  EXPECT_THROW(solve_direct(t.compress(), Eigen::VectorXd::Ones(3)), SingularMatrixError);
}

TEST(Sparse, IterativeDiagonal) {
  TripletList t(5, 5);
  for (int i = 0; i < 5; ++i) t.add(i, i, i + 1.0);
  const auto [x, rep] = solve_iterative(t.compress(), Eigen::VectorXd::Ones(5), true, 1e-12, 100);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(x(i), 1.0 / (i + 1), 1e-12);
  EXPECT_EQ(rep.method, SolveMethod::Cg);
}

TEST(Sparse, IterativeBorderedNeumannMatchesDirect) {
  const auto [a, b] = bordered_neumann(8);
  const auto [xd, rd] = solve_direct(a, b);
  const auto [xi, ri] = solve_iterative(a, b, false, 1e-13, 5000);
  EXPECT_EQ(ri.method, SolveMethod::BiCgStab);
  EXPECT_LE((xd - xi).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sparse, IterativeReportsNonConvergence) {
  const SparseMatrix a = laplacian_1d(200);
  try {
    solve_iterative(a, Eigen::VectorXd::Ones(200), true, 1e-12, 1);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 1);
    EXPECT_GT(e.residual(), 1e-12);
  }
}

TEST(Sparse, RelativeResidual) {
  const SparseMatrix a = laplacian_1d(4);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd b = spmv(a, x);
  EXPECT_DOUBLE_EQ(relative_residual(a, x, b), 0.0);
  EXPECT_DOUBLE_EQ(relative_residual(a, x, Eigen::VectorXd::Zero(4)), b.norm());
}

TEST(Sparse, LinearSolverBothKinds) {
  const SparseMatrix a = laplacian_1d(30);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(30, 0, 1);
  const LinearSolver direct(a, MatrixKind::SymmetricPositiveDefinite, {});
  const LinearSolver iter(a, MatrixKind::SymmetricPositiveDefinite, {SolverConfig::Kind::Iterative, 1e-13, 1000});
  EXPECT_LE((direct.solve(b) - iter.solve(b)).cwiseAbs().maxCoeff(), 1e-9);
}
