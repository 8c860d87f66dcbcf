#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "oracle.hpp"
#include "spnp/errors.hpp"
#include "spnp/fem.hpp"
#include "spnp/scheme.hpp"

using namespace spnp;

namespace {

constexpr double pi = std::numbers::pi;

double integrate_ref(const QuadRule& r, const std::function<double(double, double)>& f) {
  double s = 0;
  for (Eigen::Index q = 0; q < r.size(); ++q) s += r.weights(q) * f(r.points(0, q), r.points(1, q));
  return s;
}

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

double neumann_poisson_error(Index cells) {
  const Discretization d = make_discretization(cells, cells);
  const FeSpace& s = *d.p2;
  const auto rho = [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
  const auto exact = [&](double x, double y) { return rho(x, y) / (2 * pi * pi); };
  const ZeroMeanSolution sol =
      solve_zero_mean(stiffness_matrix(s), load_vector(s, s.evaluate(rho)), s.lumped_mass());
  return error_norm_l2(Field{d.p2, sol.x, 1}, exact);
}

}  // namespace

TEST(Quadrature, ConstantIntegratesToHalf) {
  for (int deg = 1; deg <= 6; ++deg) {
    const QuadRule r = quad_rule(deg);
    EXPECT_GE(r.degree, deg);
    EXPECT_NEAR(r.weights.sum(), 0.5, 1e-15);
    EXPECT_GT(r.weights.minCoeff(), 0);
  }
}

TEST(Quadrature, MonomialX2Y2) {
  EXPECT_NEAR(integrate_ref(quad_rule(4), [](double x, double y) { return x * x * y * y; }), 1.0 / 180, 1e-14);
}

TEST(Quadrature, MonomialX6) {
  EXPECT_NEAR(integrate_ref(quad_rule(6), [](double x, double) { return std::pow(x, 6); }), 1.0 / 56, 1e-14);
}

TEST(Quadrature, AllMonomialsUpToDegree) {
  // Exact reference integrals: int x^a y^b = a! b! / (a + b + 2)!
  const auto fact = [](int n) { return std::tgamma(n + 1.0); };
  for (int deg : {1, 2, 4, 5, 6}) {
    const QuadRule r = quad_rule(deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        EXPECT_NEAR(integrate_ref(r, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); }),
                    fact(a) * fact(b) / fact(a + b + 2), 1e-15)
            << "rule " << deg << " monomial " << a << "," << b;
  }
}

TEST(Quadrature, UnsupportedDegreeThrows) { EXPECT_THROW(quad_rule(7), ArgumentError); }

TEST(RefElement, NodalAndPartitionOfUnity) {
  const std::vector<Eigen::Vector2d> nodes = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
  Eigen::VectorXd v(6), gx(6), gy(6);
  for (int i = 0; i < 6; ++i) {
    eval_basis(2, nodes[static_cast<std::size_t>(i)].x(), nodes[static_cast<std::size_t>(i)].y(), v, gx, gy);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(v(j), i == j ? 1.0 : 0.0, 1e-15);
  }
  const RefElement e = ref_element(2, quad_rule(6));
  EXPECT_LE((e.values.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-14);
  EXPECT_LE(e.grad_x.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(e.grad_y.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_THROW(ref_element(3, quad_rule(6)), ArgumentError);
}

TEST(Assembly, P1MassAndStiffnessByHand) {
  // Unit square, vertices 0 (0,0), 1 (1,0), 2 (0,1), 3 (1,1). Each right
  // triangle contributes area/12 [[2,1,1],[1,2,1],[1,1,2]] to the mass and
  // (1/2)[[2,-1,-1],[-1,1,0],[-1,0,1]] (right angle first) to the stiffness.
  const Discretization d = make_discretization(1, 1);
  Eigen::Matrix4d m;
  m << 4, 1, 1, 2,  //
      1, 2, 0, 1,   //
      1, 0, 2, 1,   //
      2, 1, 1, 4;
  m /= 24;
  Eigen::Matrix4d k;
  k << 1, -0.5, -0.5, 0,  //
      -0.5, 1, 0, -0.5,   //
      -0.5, 0, 1, -0.5,   //
      0, -0.5, -0.5, 1;
  EXPECT_LE((dense(mass_matrix(*d.p1)) - m).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((dense(stiffness_matrix(*d.p1)) - k).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, ZeroCoefficientGivesZeroMatrix) {
  const Discretization d = make_discretization(2, 2);
  const QpScalar zero = QpScalar::Zero(d.p2->n_qp(), d.p2->n_cells());
  EXPECT_EQ(dense(mass_matrix(*d.p2, zero)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(dense(stiffness_matrix(*d.p2, zero)).cwiseAbs().maxCoeff(), 0.0);
}

class AssemblyOracle : public ::testing::TestWithParam<std::pair<Index, Index>> {
 protected:
  void SetUp() override {
    const auto [nx, ny] = GetParam();
    d = make_discretization(nx, ny, -0.5, 1.0, 0.25, 2.0);
  }
  Discretization d;
};

TEST_P(AssemblyOracle, WeightedMass) {
  const auto w = [](double x, double y) { return 1 + x + y * y; };
  for (const auto& s : {d.p1, d.p2}) {
    const Eigen::MatrixXd ref = oracle::bilinear(*s, 1, *s, 1, [&](double x, double y, const auto& t, const auto& r) {
      return Eigen::MatrixXd(w(x, y) * t.v * r.v.transpose());
    });
    EXPECT_LE(oracle::max_abs_diff(mass_matrix(*s, s->evaluate(w)), ref), 1e-12);
  }
}

TEST_P(AssemblyOracle, WeightedStiffness) {
  const auto w = [](double x, double y) { return 2 + x * y; };
  for (const auto& s : {d.p1, d.p2}) {
    const Eigen::MatrixXd ref = oracle::bilinear(*s, 1, *s, 1, [&](double x, double y, const auto& t, const auto& r) {
      return Eigen::MatrixXd(w(x, y) * (t.gx * r.gx.transpose() + t.gy * r.gy.transpose()));
    });
    EXPECT_LE(oracle::max_abs_diff(stiffness_matrix(*s, s->evaluate(w)), ref), 1e-12);
  }
}

TEST_P(AssemblyOracle, Advection) {
  const FeSpace& s = *d.p2;
  const auto bx = [](double, double y) { return 1 + y; };
  const auto by = [](double x, double) { return x * x - 0.3; };
  const Eigen::MatrixXd ref = oracle::bilinear(s, 1, s, 1, [&](double x, double y, const auto& t, const auto& r) {
    return Eigen::MatrixXd(t.v * (bx(x, y) * r.gx + by(x, y) * r.gy).transpose());
  });
  EXPECT_LE(oracle::max_abs_diff(advection_matrix(s, {s.evaluate(bx), s.evaluate(by)}), ref), 1e-12);
}

TEST_P(AssemblyOracle, VectorMass) {
  const FeSpace& s = *d.p2;
  const Eigen::MatrixXd ref = oracle::bilinear(s, 2, s, 2, [&](double, double, const auto& t, const auto& r) {
    const Eigen::MatrixXd m = t.v * r.v.transpose();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(12, 12);
    out.topLeftCorner(6, 6) = m;
    out.bottomRightCorner(6, 6) = m;
    return out;
  });
  EXPECT_LE(oracle::max_abs_diff(vector_mass_matrix(s), ref), 1e-12);
}

TEST_P(AssemblyOracle, WeightedDeformation) {
  const FeSpace& s = *d.p2;
  const auto mu = [](double x, double y) { return 1 + x * x + 0.5 * y; };
  // 2 mu D(u):D(v) with u = phi_j e_a, v = phi_i e_b, assembled entry by entry.
  const Eigen::MatrixXd ref = oracle::bilinear(s, 2, s, 2, [&](double x, double y, const auto& t, const auto& r) {
    Eigen::MatrixXd out(12, 12);
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 6; ++i)
        for (int a = 0; a < 2; ++a)
          for (int j = 0; j < 6; ++j) {
            Eigen::Matrix2d gv = Eigen::Matrix2d::Zero(), gu = Eigen::Matrix2d::Zero();
            gv.row(b) << t.gx(i), t.gy(i);
            gu.row(a) << r.gx(j), r.gy(j);
            const Eigen::Matrix2d dv = 0.5 * (gv + gv.transpose()), du = 0.5 * (gu + gu.transpose());
            out(b * 6 + i, a * 6 + j) = 2 * mu(x, y) * (du.array() * dv.array()).sum();
          }
    return out;
  });
  EXPECT_LE(oracle::max_abs_diff(deformation_matrix(s, s.evaluate(mu)), ref), 1e-12);
}

TEST_P(AssemblyOracle, PressureCoupling) {
  const FeSpace& p = *d.p1;
  const FeSpace& v = *d.p2;
  const Eigen::MatrixXd div = oracle::bilinear(p, 1, v, 2, [&](double, double, const auto& t, const auto& r) {
    Eigen::MatrixXd out(3, 12);
    out.leftCols(6) = t.v * r.gx.transpose();
    out.rightCols(6) = t.v * r.gy.transpose();
    return out;
  });
  EXPECT_LE(oracle::max_abs_diff(divergence_matrix(p, v), div), 1e-12);
  const Eigen::MatrixXd grad = oracle::bilinear(v, 2, p, 1, [&](double, double, const auto& t, const auto& r) {
    Eigen::MatrixXd out(12, 3);
    out.topRows(6) = t.v * r.gx.transpose();
    out.bottomRows(6) = t.v * r.gy.transpose();
    return out;
  });
  EXPECT_LE(oracle::max_abs_diff(gradient_matrix(p, v), grad), 1e-12);
}

TEST_P(AssemblyOracle, LoadVector) {
  const auto f = [](double x, double y) { return x * x - 2 * y + 1; };
  for (const auto& s : {d.p1, d.p2})
    EXPECT_LE((load_vector(*s, s->evaluate(f)) - oracle::linear(*s, f)).cwiseAbs().maxCoeff(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Meshes, AssemblyOracle, ::testing::Values(std::pair<Index, Index>{1, 1},
                                                                   std::pair<Index, Index>{3, 2}));

TEST(Assembly, MismatchedMeshesThrow) {
  const Discretization a = make_discretization(2, 2), b = make_discretization(2, 2);
  EXPECT_THROW(divergence_matrix(*a.p1, *b.p2), ArgumentError);
}

TEST(AssemblyVector, UnitLoadIsAdjacentAreaOverThree) {
  const Discretization d = make_discretization(3, 2, 0, 3, 0, 1);
  const FeSpace& s = *d.p1;
  const Mesh& m = s.mesh();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(m.n_nodes());
  for (Index c = 0; c < m.n_cells(); ++c)
    for (Index v : m.triangles[static_cast<std::size_t>(c)]) expected(v) += m.signed_area(c) / 3;
  const QpScalar one = QpScalar::Ones(s.n_qp(), s.n_cells());
  EXPECT_LE((load_vector(s, one) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((s.lumped_mass() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(load_vector(s, QpScalar::Zero(s.n_qp(), s.n_cells())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssemblyVector, GradientLoadMatchesStiffnessProduct) {
  const Discretization d = make_discretization(4, 3);
  const FeSpace& s = *d.p2;
  const Eigen::VectorXd v = s.interpolate([](double x, double) { return x; });
  const Eigen::VectorXd lhs = load_gradient_vector(s, s.gradients(v));
  EXPECT_LE((lhs - spmv(stiffness_matrix(s), v)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(AssemblyVector, VectorLoadComponents) {
  const Discretization d = make_discretization(2, 2);
  const FeSpace& s = *d.p2;
  const QpScalar fx = s.evaluate([](double x, double) { return x; });
  const QpScalar fy = s.evaluate([](double, double y) { return 1 - y; });
  const Eigen::VectorXd b = vector_load(s, {fx, fy});
  EXPECT_LE((b.head(s.n_dofs()) - load_vector(s, fx)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((b.tail(s.n_dofs()) - load_vector(s, fy)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dirichlet, HomogeneousMatchesReducedSystem) {
  const Discretization d = make_discretization(4, 4);
  const FeSpace& s = *d.p2;
  SparseMatrix a = stiffness_matrix(s);
  Eigen::VectorXd b = load_vector(s, s.evaluate([](double x, double y) { return 1 + x * y; }));
  const Eigen::MatrixXd ad = dense(a);
  const Eigen::VectorXd bd = b;

  std::vector<Index> bc;
  for (const auto& bdof : s.dofs().boundary_dofs) bc.push_back(bdof.dof);
  std::vector<Index> interior;
  for (Index k = 0; k < s.n_dofs(); ++k)
    if (std::find(bc.begin(), bc.end(), k) == bc.end()) interior.push_back(k);
  const auto ni = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd ai(ni, ni);
  Eigen::VectorXd bi(ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    bi(i) = bd(interior[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < ni; ++j) ai(i, j) = ad(interior[static_cast<std::size_t>(i)], interior[static_cast<std::size_t>(j)]);
  }
  const Eigen::VectorXd xi = ai.llt().solve(bi);

  for (bool symmetric : {false, true}) {
    SparseMatrix a2 = a;
    Eigen::VectorXd b2 = b;
    apply_dirichlet(a2, b2, bc, std::vector<double>(bc.size(), 0.0), symmetric);
    const auto [x, rep] = solve_direct(a2, b2);
    for (Index k : bc) EXPECT_NEAR(x(k), 0.0, 1e-15);
    for (Eigen::Index i = 0; i < ni; ++i) EXPECT_NEAR(x(interior[static_cast<std::size_t>(i)]), xi(i), 1e-12);
  }
}

TEST(Dirichlet, LeftRightDropIsLinear) {
  const Discretization d = make_discretization(5, 3);
  const FeSpace& s = *d.p2;
  SparseMatrix a = stiffness_matrix(s);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s.n_dofs());
  std::vector<Index> dofs;
  std::vector<double> vals;
  for (Index k : s.dofs().boundary_dofs_on(mask(Side::Left))) {
    dofs.push_back(k);
    vals.push_back(1.0);
  }
  for (Index k : s.dofs().boundary_dofs_on(mask(Side::Right))) {
    dofs.push_back(k);
    vals.push_back(0.0);
  }
  apply_dirichlet(a, b, dofs, vals, true);
  const Field v{d.p2, solve_direct(a, b).first, 1};
  EXPECT_LE(error_norm_l2(v, [](double x, double) { return 1 - x; }), 1e-12);
}

TEST(Dirichlet, EmptySetLeavesSystemUnchanged) {
  const Discretization d = make_discretization(2, 2);
  SparseMatrix a = stiffness_matrix(*d.p2);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(a.rows(), 0, 1);
  const Eigen::MatrixXd a0 = dense(a);
  const Eigen::VectorXd b0 = b;
  apply_dirichlet(a, b, {}, {}, true);
  EXPECT_EQ((dense(a) - a0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b, b0);
}

TEST(ZeroMean, ZeroRhsGivesZero) {
  const Discretization d = make_discretization(3, 3);
  const auto sol =
      solve_zero_mean(stiffness_matrix(*d.p2), Eigen::VectorXd::Zero(d.p2->n_dofs()), d.p2->lumped_mass());
  EXPECT_LE(sol.x.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ZeroMean, ConstantRhsIsIncompatible) {
  const Discretization d = make_discretization(3, 3);
  const FeSpace& s = *d.p2;
  const Eigen::VectorXd b = load_vector(s, QpScalar::Ones(s.n_qp(), s.n_cells()));
  EXPECT_THROW(solve_zero_mean(stiffness_matrix(s), b, s.lumped_mass()), CompatibilityError);
  const auto sol = solve_zero_mean(stiffness_matrix(s), b, s.lumped_mass(), CompatibilityPolicy::ProjectOut);
  EXPECT_NEAR(sol.removed_mean, 1.0, 1e-12);
  EXPECT_LE(sol.x.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ZeroMean, SolutionHasZeroIntegral) {
  const Discretization d = make_discretization(6, 6);
  const FeSpace& s = *d.p2;
  const auto f = [](double x, double y) { return std::cos(pi * x) + x * y - 0.25; };
  const auto sol = solve_zero_mean(stiffness_matrix(s), load_vector(s, s.evaluate(f)), s.lumped_mass(),
                                   CompatibilityPolicy::ProjectOut);
  EXPECT_NEAR(Field(d.p2, sol.x, 1).mean(), 0.0, 1e-14);
}

TEST(ZeroMean, NeumannEigenfunctionConvergesCubically) {
  std::vector<double> err;
  for (Index n : {4, 8, 16, 32}) err.push_back(neumann_poisson_error(n));
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    EXPECT_GE(order, 2.7) << "refinement " << k;
    EXPECT_LE(order, 3.3) << "refinement " << k;
  }
}

TEST(ErrorNorm, ReproducesQuadratics) {
  const Discretization d = make_discretization(3, 5);
  const auto f = [](double x, double y) { return 1 + 2 * x - y + x * x - 3 * x * y + 0.5 * y * y; };
  EXPECT_LE(error_norm_l2(Field{d.p2, d.p2->interpolate(f), 1}, f), 1e-13);
}

TEST(ErrorNorm, ZeroFieldAgainstOne) {
  const Discretization d = make_discretization(2, 2);
  EXPECT_NEAR(error_norm_l2(Field::zero(d.p2), [](double, double) { return 1.0; }), 1.0, 1e-15);
}

TEST(ErrorNorm, InterpolationOrderIsCubic) {
  const auto f = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  const Discretization c = make_discretization(8, 8), fine = make_discretization(16, 16);
  const double e1 = error_norm_l2(Field{c.p2, c.p2->interpolate(f), 1}, f);
  const double e2 = error_norm_l2(Field{fine.p2, fine.p2->interpolate(f), 1}, f);
  EXPECT_GT(e1 / e2, 7.0);
  EXPECT_LT(e1 / e2, 9.0);
}

TEST(FeSpace, PointEvaluationMatchesInterpolant) {
  const Discretization d = make_discretization(3, 3);
  const auto f = [](double x, double y) { return x * x + y; };
  const Eigen::VectorXd v = d.p2->interpolate(f);
  const auto& t = d.mesh->triangles[4];
  const Eigen::Vector2d p = d.mesh->nodes.col(t[0]) + 0.2 * (d.mesh->nodes.col(t[1]) - d.mesh->nodes.col(t[0])) +
                            0.3 * (d.mesh->nodes.col(t[2]) - d.mesh->nodes.col(t[0]));
  EXPECT_NEAR(d.p2->eval_in_cell(v, 4, 0.2, 0.3), f(p.x(), p.y()), 1e-14);
  const QpScalar vals = d.p2->values(v);
  EXPECT_LE((vals - d.p2->evaluate(f)).abs().maxCoeff(), 1e-14);
  EXPECT_THROW(d.p2->values(Eigen::VectorXd::Zero(3)), ArgumentError);
}
