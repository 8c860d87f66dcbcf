#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace spnp {

using Index = std::int64_t;

enum class Side : std::uint8_t { Left = 1, Right = 2, Bottom = 4, Top = 8 };

/// Bit set of rectangle sides; corner points carry two bits.
using SideMask = std::uint8_t;

constexpr SideMask mask(Side s) { return static_cast<SideMask>(s); }
constexpr bool has_side(SideMask m, Side s) { return (m & mask(s)) != 0; }

struct Edge {
  std::array<Index, 2> vertices;
  // Adjacent triangles; cells[1] == -1 on the boundary.
  std::array<Index, 2> cells{-1, -1};
};

struct BoundaryEdge {
  Index edge;
  Side side;
};

/// Uniform triangulation of an axis-aligned rectangle.
///
/// Each grid cell (i,j) is split along the diagonal from (i,j) to
/// (i+1,j+1). Triangles are counterclockwise. Local edge k of a triangle
/// joins local vertices k and (k+1)%3.
struct Mesh {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  Index nx = 0, ny = 0;

  Eigen::Matrix2Xd nodes;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<Index, 3>> cell_edges;
  std::vector<BoundaryEdge> boundary_edges;

  Index n_nodes() const { return nodes.cols(); }
  Index n_cells() const { return static_cast<Index>(triangles.size()); }
  Index n_edges() const { return static_cast<Index>(edges.size()); }

  /// Length of the grid-cell diagonal, the mesh size h.
  double mesh_size() const;
  double area() const { return (xmax - xmin) * (ymax - ymin); }

  /// Signed area of triangle c (positive for counterclockwise).
  double signed_area(Index c) const;

  /// Sides a point lies on (0 for interior points).
  SideMask sides_of(const Eigen::Vector2d& p) const;
};

Mesh build_rect_mesh(double xmin, double xmax, double ymin, double ymax, Index nx, Index ny);

struct BoundaryDof {
  Index dof;
  SideMask sides;
};

/// Continuous Lagrange P1/P2 degree-of-freedom map.
///
/// P1 dofs are the mesh vertices. P2 adds one dof per edge, numbered after
/// the vertices (dof = n_nodes + edge). Local P2 ordering is the three
/// vertices followed by the midpoints of local edges 0, 1, 2.
struct DofMap {
  std::shared_ptr<const Mesh> mesh;
  int order = 1;
  Index n_dofs = 0;
  std::vector<std::array<Index, 6>> cell_to_dofs;
  std::vector<BoundaryDof> boundary_dofs;

  int dofs_per_cell() const { return order == 1 ? 3 : 6; }
  Eigen::Vector2d dof_point(Index dof) const;
  /// Boundary dof indices restricted to the given sides.
  std::vector<Index> boundary_dofs_on(SideMask sides) const;
};

DofMap dof_map(std::shared_ptr<const Mesh> mesh, int order);

}  // namespace spnp
