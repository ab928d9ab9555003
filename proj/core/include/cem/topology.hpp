#pragma once

#include <vector>

#include "cem/mesh.hpp"

namespace cem {

struct Edge {
  int n1 = -1;  // n1 < n2 unless the edge is a seam side
  int n2 = -1;
  std::array<int, 2> elems{-1, -1};  // adjacent element IDs, -1 = none
  Vec2 qp;                           // quadrature point = edge midpoint (reference)
  bool seam = false;                 // one side of a seam-split edge

  int adjacent_count() const { return (elems[0] >= 0 ? 1 : 0) + (elems[1] >= 0 ? 1 : 0); }
  bool boundary() const { return adjacent_count() == 1; }
};

struct EdgeTopology {
  std::vector<Edge> edges;                      // sorted by node-ID pair
  std::vector<std::vector<int>> node_edges;     // per-node incident edge IDs
  std::vector<std::vector<int>> element_edges;  // per-element edge IDs (local order)
};

/// Deterministic edge enumeration; throws on non-manifold input.
EdgeTopology build_edge_topology(const Mesh2D& mesh);

}  // namespace cem
