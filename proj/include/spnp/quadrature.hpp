#pragma once

#include <Eigen/Core>

namespace spnp {

/// Symmetric quadrature on the reference triangle {x, y >= 0, x + y <= 1}.
/// Points are stored as reference coordinates (x, y), i.e. the barycentric
/// weights of vertices 1 and 2; weights are positive and sum to 1/2.
struct QuadRule {
  int degree = 0;
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return weights.size(); }
};

/// Smallest tabulated rule exact for polynomials of total degree
/// min_degree (1, 2, 4, 5 or 6 points rules; degree 6 is the 12-point
/// Dunavant rule). Throws ArgumentError above degree 6.
QuadRule quad_rule(int min_degree = 6);

/// Lagrange basis of order 1 or 2 on the reference triangle.
///
/// P2 ordering: vertex functions first, then the midpoints of edges
/// (0,1), (1,2), (2,0).
struct RefElement {
  int order = 1;
  // Rows: quadrature points, columns: basis functions.
  Eigen::MatrixXd values;
  Eigen::MatrixXd grad_x;
  Eigen::MatrixXd grad_y;

  int n_basis() const { return order == 1 ? 3 : 6; }
};

RefElement ref_element(int order, const QuadRule& rule);

/// Basis values and reference gradients at one reference point.
void eval_basis(int order, double x, double y, Eigen::Ref<Eigen::VectorXd> values,
                Eigen::Ref<Eigen::VectorXd> grad_x, Eigen::Ref<Eigen::VectorXd> grad_y);

}  // namespace spnp
