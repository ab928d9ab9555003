#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/geometry.hpp"

namespace cem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ElemKind : std::uint8_t { CST, QUAD };

struct Element {
  ElemKind kind = ElemKind::CST;
  std::array<int, 4> nodes{-1, -1, -1, -1};  // nodes[3] unused for CST
  int region = 0;

  int node_count() const { return kind == ElemKind::CST ? 3 : 4; }
};

/// A sorted node pair identifying one geometric mesh edge.
struct NodePair {
  int a = -1;
  int b = -1;
  NodePair() = default;
  NodePair(int n1, int n2) : a(n1 < n2 ? n1 : n2), b(n1 < n2 ? n2 : n1) {}
  auto operator<=>(const NodePair&) const = default;
};

struct Mesh2D {
  std::vector<Vec2> nodes;  // reference coordinates X, meters
  std::vector<Element> elements;
  std::map<int, std::string> region_names;
  // Edges split by a seam: both adjacent elements keep the same node pair
  // but the edge is treated as two boundary edges, one per side.
  std::set<NodePair> seam_edges;

  double element_area(int e) const;
  double total_area() const;
  /// Throws Error if any invariant is violated.
  void validate() const;
};

struct SeamSpec {
  std::vector<Vec2> polyline;
  double tolerance = 1e-9;  // snapping tolerance, meters
};

enum class DiagonalRule { Main, Anti, Alternating };

Mesh2D parse_gmsh(const std::string& text);

Mesh2D generate_structured_grid(double width, double height, int nx, int ny,
                                ElemKind kind,
                                DiagonalRule rule = DiagonalRule::Main,
                                int region = 0);

/// Disconnect the mesh along a polyline that coincides with element edges.
/// Interior seam nodes are duplicated; endpoints stay single (crack tips)
/// unless they lie on the mesh hull, in which case the seam has an open
/// mouth there and the endpoint is duplicated as well.
Mesh2D insert_seam(const Mesh2D& mesh, const SeamSpec& seam);

/// Plain-text listing of nodes, elements and edges for golden-file tests.
std::string dump_mesh(const Mesh2D& mesh);

}  // namespace cem
