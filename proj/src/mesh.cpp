#include "spnp/mesh.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "spnp/errors.hpp"

namespace spnp {

double Mesh::mesh_size() const {
  const double hx = (xmax - xmin) / static_cast<double>(nx);
  const double hy = (ymax - ymin) / static_cast<double>(ny);
  return std::hypot(hx, hy);
}

double Mesh::signed_area(Index c) const {
  const auto& t = triangles[static_cast<std::size_t>(c)];
  const Eigen::Vector2d a = nodes.col(t[1]) - nodes.col(t[0]);
  const Eigen::Vector2d b = nodes.col(t[2]) - nodes.col(t[0]);
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

SideMask Mesh::sides_of(const Eigen::Vector2d& p) const {
  const double tol = 1e-12 * std::max(xmax - xmin, ymax - ymin);
  SideMask m = 0;
  if (std::abs(p.x() - xmin) <= tol) m |= mask(Side::Left);
  if (std::abs(p.x() - xmax) <= tol) m |= mask(Side::Right);
  if (std::abs(p.y() - ymin) <= tol) m |= mask(Side::Bottom);
  if (std::abs(p.y() - ymax) <= tol) m |= mask(Side::Top);
  return m;
}

Mesh build_rect_mesh(double xmin, double xmax, double ymin, double ymax, Index nx, Index ny) {
  if (nx < 1 || ny < 1) throw ArgumentError("build_rect_mesh: nx and ny must be >= 1");
  if (!(xmax > xmin) || !(ymax > ymin))
    throw ArgumentError("build_rect_mesh: empty or inverted extents");

  Mesh m;
  m.xmin = xmin;
  m.xmax = xmax;
  m.ymin = ymin;
  m.ymax = ymax;
  m.nx = nx;
  m.ny = ny;

  const auto vid = [nx](Index i, Index j) { return j * (nx + 1) + i; };
  m.nodes.resize(2, (nx + 1) * (ny + 1));
  for (Index j = 0; j <= ny; ++j)
    for (Index i = 0; i <= nx; ++i) {
      // Interpolate from both ends so the far boundary is hit exactly.
      const double sx = static_cast<double>(i) / static_cast<double>(nx);
      const double sy = static_cast<double>(j) / static_cast<double>(ny);
      m.nodes(0, vid(i, j)) = (i == nx) ? xmax : xmin + sx * (xmax - xmin);
      m.nodes(1, vid(i, j)) = (j == ny) ? ymax : ymin + sy * (ymax - ymin);
    }

  m.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const Index v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }

  std::map<std::pair<Index, Index>, Index> edge_ids;
  m.cell_edges.resize(m.triangles.size());
  for (Index c = 0; c < m.n_cells(); ++c) {
    const auto& t = m.triangles[static_cast<std::size_t>(c)];
    for (int k = 0; k < 3; ++k) {
      const Index a = t[k], b = t[(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, m.n_edges());
      if (inserted) {
        m.edges.push_back(Edge{{key.first, key.second}, {c, -1}});
      } else {
        m.edges[static_cast<std::size_t>(it->second)].cells[1] = c;
      }
      m.cell_edges[static_cast<std::size_t>(c)][k] = it->second;
    }
  }

  for (Index e = 0; e < m.n_edges(); ++e) {
    const auto& edge = m.edges[static_cast<std::size_t>(e)];
    if (edge.cells[1] >= 0) continue;
    const Eigen::Vector2d mid = 0.5 * (m.nodes.col(edge.vertices[0]) + m.nodes.col(edge.vertices[1]));
    const SideMask s = m.sides_of(mid);
    for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top})
      if (has_side(s, side)) m.boundary_edges.push_back({e, side});
  }
  return m;
}

Eigen::Vector2d DofMap::dof_point(Index dof) const {
  const Index nv = mesh->n_nodes();
  if (dof < nv) return mesh->nodes.col(dof);
  const auto& e = mesh->edges[static_cast<std::size_t>(dof - nv)];
  return 0.5 * (mesh->nodes.col(e.vertices[0]) + mesh->nodes.col(e.vertices[1]));
}

std::vector<Index> DofMap::boundary_dofs_on(SideMask sides) const {
  std::vector<Index> out;
  for (const auto& b : boundary_dofs)
    if (b.sides & sides) out.push_back(b.dof);
  return out;
}

DofMap dof_map(std::shared_ptr<const Mesh> mesh, int order) {
  if (!mesh) throw ArgumentError("dof_map: null mesh");
  if (order != 1 && order != 2) throw ArgumentError("dof_map: order must be 1 or 2");

  DofMap d;
  d.mesh = mesh;
  d.order = order;
  const Index nv = mesh->n_nodes();
  d.n_dofs = order == 1 ? nv : nv + mesh->n_edges();
  d.cell_to_dofs.resize(static_cast<std::size_t>(mesh->n_cells()));
  for (Index c = 0; c < mesh->n_cells(); ++c) {
    auto& cd = d.cell_to_dofs[static_cast<std::size_t>(c)];
    const auto& t = mesh->triangles[static_cast<std::size_t>(c)];
    cd = {t[0], t[1], t[2], -1, -1, -1};
    if (order == 2)
      for (int k = 0; k < 3; ++k) cd[3 + k] = nv + mesh->cell_edges[static_cast<std::size_t>(c)][k];
  }

  for (Index dof = 0; dof < d.n_dofs; ++dof) {
    // Edge dofs: only boundary edges can lie on the boundary.
    if (dof >= nv && mesh->edges[static_cast<std::size_t>(dof - nv)].cells[1] >= 0) continue;
    const SideMask s = mesh->sides_of(d.dof_point(dof));
    if (s != 0) d.boundary_dofs.push_back({dof, s});
  }
  return d;
}

}  // namespace spnp
