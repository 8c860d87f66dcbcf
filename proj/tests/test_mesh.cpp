#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <utility>

#include "spnp/errors.hpp"
#include "spnp/mesh.hpp"

using namespace spnp;

namespace {

std::shared_ptr<const Mesh> unit_mesh(Index nx, Index ny) {
  return std::make_shared<const Mesh>(build_rect_mesh(0, 1, 0, 1, nx, ny));
}

// Independent edge count: distinct unordered vertex pairs over all triangles.
std::size_t enumerate_edges(const Mesh& m) {
  std::set<std::pair<Index, Index>> edges;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  return edges.size();
}

}  // namespace

TEST(Mesh, SmallestGrid) {
  const auto m = unit_mesh(1, 1);
  EXPECT_EQ(m->n_nodes(), 4);
  EXPECT_EQ(m->n_cells(), 2);
  EXPECT_EQ(m->n_edges(), 5);
  EXPECT_EQ(m->boundary_edges.size(), 4u);
}

TEST(Mesh, MeshSizeMatchesDiagonal) {
  const auto m = unit_mesh(40, 40);
  EXPECT_NEAR(m->mesh_size(), std::sqrt(2.0) / 40, 1e-15);
}

TEST(Mesh, EulerCount) {
  const auto m = unit_mesh(3, 2);
  EXPECT_EQ(m->n_nodes(), 12);
  EXPECT_EQ(m->n_cells(), 12);
  EXPECT_EQ(m->n_edges(), 23);
  // V - E + F = 1 for a triangulated disk.
  EXPECT_EQ(m->n_nodes() - m->n_edges() + m->n_cells(), 1);
  EXPECT_EQ(enumerate_edges(*m), 23u);
}

TEST(Mesh, TrianglesCounterclockwiseAndTileTheDomain) {
  const Mesh m = build_rect_mesh(-1, 2, 0.5, 1.5, 5, 4);
  double total = 0;
  for (Index c = 0; c < m.n_cells(); ++c) {
    EXPECT_GT(m.signed_area(c), 0);
    total += m.signed_area(c);
  }
  EXPECT_NEAR(total, m.area(), 1e-14);
}

TEST(Mesh, EdgeAdjacency) {
  const auto m = unit_mesh(4, 3);
  std::size_t boundary = 0;
  for (const auto& e : m->edges) {
    EXPECT_GE(e.cells[0], 0);
    if (e.cells[1] < 0) ++boundary;
  }
  EXPECT_EQ(boundary, m->boundary_edges.size());
  EXPECT_EQ(boundary, static_cast<std::size_t>(2 * (4 + 3)));
  for (Index c = 0; c < m->n_cells(); ++c)
    for (int k = 0; k < 3; ++k) {
      const auto& e = m->edges[static_cast<std::size_t>(m->cell_edges[static_cast<std::size_t>(c)][k])];
      const auto& t = m->triangles[static_cast<std::size_t>(c)];
      EXPECT_EQ(std::minmax(e.vertices[0], e.vertices[1]), std::minmax(t[k], t[(k + 1) % 3]));
    }
}

TEST(Mesh, BoundarySides) {
  const auto m = unit_mesh(2, 2);
  for (const auto& be : m->boundary_edges) {
    const auto& e = m->edges[static_cast<std::size_t>(be.edge)];
    const Eigen::Vector2d mid = 0.5 * (m->nodes.col(e.vertices[0]) + m->nodes.col(e.vertices[1]));
    EXPECT_TRUE(has_side(m->sides_of(mid), be.side));
  }
  EXPECT_EQ(m->sides_of({0, 0}), mask(Side::Left) | mask(Side::Bottom));
  EXPECT_EQ(m->sides_of({0.5, 0.5}), 0);
}

TEST(Mesh, InvalidArgumentsThrow) {
  EXPECT_THROW(build_rect_mesh(0, 1, 0, 1, 0, 1), ArgumentError);
  EXPECT_THROW(build_rect_mesh(0, 1, 0, 1, 2, -1), ArgumentError);
  EXPECT_THROW(build_rect_mesh(1, 0, 0, 1, 2, 2), ArgumentError);
  EXPECT_THROW(build_rect_mesh(0, 1, 1, 1, 2, 2), ArgumentError);
}

TEST(DofMap, LinearTwoTriangles) {
  const DofMap d = dof_map(unit_mesh(1, 1), 1);
  EXPECT_EQ(d.n_dofs, 4);
  EXPECT_EQ(d.boundary_dofs.size(), 4u);
}

TEST(DofMap, QuadraticTwoTriangles) {
  const DofMap d = dof_map(unit_mesh(1, 1), 2);
  EXPECT_EQ(d.n_dofs, 9);
  EXPECT_EQ(d.boundary_dofs.size(), 8u);
  // The only interior dof is the diagonal midpoint.
  std::set<Index> boundary;
  for (const auto& b : d.boundary_dofs) boundary.insert(b.dof);
  for (Index k = 0; k < d.n_dofs; ++k)
    if (!boundary.count(k)) EXPECT_TRUE(d.dof_point(k).isApprox(Eigen::Vector2d(0.5, 0.5)));
}

TEST(DofMap, QuadraticCountOn40x40) {
  const auto m = unit_mesh(40, 40);
  const DofMap d = dof_map(m, 2);
  const auto n_edges = static_cast<Index>(enumerate_edges(*m));
  EXPECT_EQ(n_edges, 4880);
  EXPECT_EQ(d.n_dofs, 41 * 41 + n_edges);
  EXPECT_EQ(d.n_dofs, 6561);
}

TEST(DofMap, LocalOrderingPlacesMidpoints) {
  const auto m = unit_mesh(3, 2);
  const DofMap d = dof_map(m, 2);
  for (Index c = 0; c < m->n_cells(); ++c) {
    const auto& dofs = d.cell_to_dofs[static_cast<std::size_t>(c)];
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d mid = 0.5 * (d.dof_point(dofs[k]) + d.dof_point(dofs[(k + 1) % 3]));
      EXPECT_TRUE(d.dof_point(dofs[3 + k]).isApprox(mid, 1e-14));
    }
  }
}

TEST(DofMap, BoundaryDofsOnSide) {
  const DofMap d = dof_map(unit_mesh(3, 2), 2);
  const auto left = d.boundary_dofs_on(mask(Side::Left));
  EXPECT_EQ(left.size(), 5u);
  for (Index k : left) EXPECT_NEAR(d.dof_point(k).x(), 0, 1e-15);
  EXPECT_EQ(d.boundary_dofs.size(), static_cast<std::size_t>(2 * (6 + 4)));
}

TEST(DofMap, UnsupportedOrderThrows) { EXPECT_THROW(dof_map(unit_mesh(1, 1), 3), ArgumentError); }
