#include "spnp/quadrature.hpp"

#include <cmath>
#include <vector>

#include "spnp/errors.hpp"

namespace spnp {

namespace {

struct Orbit {
  // Barycentric generator and weight (weights normalized to sum 1).
  double a, b, c;
  double w;
};

QuadRule from_orbits(int degree, const std::vector<Orbit>& orbits) {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> w;
  for (const auto& o : orbits) {
    if (o.a == o.b && o.b == o.c) {
      bary.emplace_back(o.a, o.b, o.c);
      w.push_back(o.w);
    } else if (o.b == o.c) {
      bary.emplace_back(o.a, o.b, o.b);
      bary.emplace_back(o.b, o.a, o.b);
      bary.emplace_back(o.b, o.b, o.a);
      w.insert(w.end(), 3, o.w);
    } else {
      const double p[3] = {o.a, o.b, o.c};
      const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (const auto& q : perm) bary.emplace_back(p[q[0]], p[q[1]], p[q[2]]);
      w.insert(w.end(), 6, o.w);
    }
  }
  QuadRule r;
  r.degree = degree;
  r.points.resize(2, static_cast<Eigen::Index>(bary.size()));
  r.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < bary.size(); ++i) {
    r.points(0, static_cast<Eigen::Index>(i)) = bary[i][1];
    r.points(1, static_cast<Eigen::Index>(i)) = bary[i][2];
    r.weights(static_cast<Eigen::Index>(i)) = 0.5 * w[i];
  }
  return r;
}

}  // namespace

QuadRule quad_rule(int min_degree) {
  if (min_degree > 6) throw ArgumentError("quad_rule: degree above 6 is not tabulated");
  if (min_degree <= 1) return from_orbits(1, {{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}});
  if (min_degree == 2) return from_orbits(2, {{2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3}});
  if (min_degree <= 4)
    return from_orbits(4, {{0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632,
                            0.22338158967801146570},
                           {0.81684757298045851308, 0.09157621350977074346, 0.09157621350977074346,
                            0.10995174365532186764}});
  if (min_degree == 5) {
    const double s = std::sqrt(15.0);
    const double a1 = (6.0 - s) / 21.0, a2 = (6.0 + s) / 21.0;
    return from_orbits(5, {{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
                           {1.0 - 2 * a1, a1, a1, (155.0 - s) / 1200},
                           {1.0 - 2 * a2, a2, a2, (155.0 + s) / 1200}});
  }
  return from_orbits(6, {{0.50142650965817915742, 0.24928674517091042129, 0.24928674517091042129,
                          0.11678627572637936603},
                         {0.87382197101699554332, 0.06308901449150222834, 0.06308901449150222834,
                          0.05084490637020681692},
                         {0.05314504984481694735, 0.31035245103378440542, 0.63650249912139864723,
                          0.08285107561837357519}});
}

void eval_basis(int order, double x, double y, Eigen::Ref<Eigen::VectorXd> v, Eigen::Ref<Eigen::VectorXd> gx,
                Eigen::Ref<Eigen::VectorXd> gy) {
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  // d(l0,l1,l2)/dx = (-1,1,0), d/dy = (-1,0,1)
  if (order == 1) {
    v << l0, l1, l2;
    gx << -1, 1, 0;
    gy << -1, 0, 1;
    return;
  }
  if (order != 2) throw ArgumentError("eval_basis: order must be 1 or 2");
  v << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0;
  gx << -(4 * l0 - 1), 4 * l1 - 1, 0, 4 * (l0 - l1), 4 * l2, -4 * l2;
  gy << -(4 * l0 - 1), 0, 4 * l2 - 1, -4 * l1, 4 * l1, 4 * (l0 - l2);
}

RefElement ref_element(int order, const QuadRule& rule) {
  if (order != 1 && order != 2) throw ArgumentError("ref_element: order must be 1 or 2");
  RefElement e;
  e.order = order;
  const int nb = e.n_basis();
  e.values.resize(rule.size(), nb);
  e.grad_x.resize(rule.size(), nb);
  e.grad_y.resize(rule.size(), nb);
  Eigen::VectorXd v(nb), gx(nb), gy(nb);
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    eval_basis(order, rule.points(0, q), rule.points(1, q), v, gx, gy);
    e.values.row(q) = v.transpose();
    e.grad_x.row(q) = gx.transpose();
    e.grad_y.row(q) = gy.transpose();
  }
  return e;
}

}  // namespace spnp
