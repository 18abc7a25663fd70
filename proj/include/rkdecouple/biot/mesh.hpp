#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace rkdecouple::biot {

/// Structured triangulation of the unit square: n x n squares, each split along the
/// diagonal from its lower-left to its upper-right corner. Triangles are counterclockwise.
struct Mesh {
  int n = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> cells;
  /// Edges as (lower vertex id, higher vertex id).
  std::vector<std::array<int, 2>> edges;
  /// cell_edges[c][e] is the edge joining local vertices e and (e + 1) % 3.
  std::vector<std::array<int, 3>> cell_edges;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }
  std::size_t num_edges() const { return edges.size(); }
};

/// Throws DomainError for n < 2.
Mesh build_mesh(int n);

}  // namespace rkdecouple::biot
