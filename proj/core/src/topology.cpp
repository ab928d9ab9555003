#include "cem/topology.hpp"

#include <algorithm>
#include <map>

namespace cem {

EdgeTopology build_edge_topology(const Mesh2D& mesh) {
  std::map<NodePair, std::vector<int>> uses;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const Element& el = mesh.elements[e];
    const int nc = el.node_count();
    for (int i = 0; i < nc; ++i) {
      auto& u = uses[NodePair(el.nodes[i], el.nodes[(i + 1) % nc])];
      u.push_back(e);
      if (u.size() > 2)
        throw Error("non-manifold edge (" + std::to_string(el.nodes[i]) + "," +
                    std::to_string(el.nodes[(i + 1) % nc]) + ")");
    }
  }

  EdgeTopology topo;
  topo.node_edges.resize(mesh.nodes.size());
  topo.element_edges.resize(mesh.elements.size());

  for (const auto& [pair, elems] : uses) {
    const bool seam = mesh.seam_edges.count(pair) > 0;
    const Vec2 mid = 0.5 * (mesh.nodes[pair.a] + mesh.nodes[pair.b]);
    // A seam edge is split into one boundary-side record per element,
    // sorted adjacent element first so the enumeration stays deterministic.
    std::vector<int> sorted_elems = elems;
    std::sort(sorted_elems.begin(), sorted_elems.end());
    const int sides = seam ? static_cast<int>(sorted_elems.size()) : 1;
    for (int s = 0; s < sides; ++s) {
      Edge edge;
      edge.n1 = pair.a;
      edge.n2 = pair.b;
      edge.qp = mid;
      edge.seam = seam;
      if (seam) {
        edge.elems[0] = sorted_elems[s];
      } else {
        for (size_t k = 0; k < sorted_elems.size(); ++k)
          edge.elems[k] = sorted_elems[k];
      }
      const int id = static_cast<int>(topo.edges.size());
      topo.edges.push_back(edge);
      topo.node_edges[pair.a].push_back(id);
      topo.node_edges[pair.b].push_back(id);
      for (int k = 0; k < 2; ++k)
        if (edge.elems[k] >= 0) topo.element_edges[edge.elems[k]].push_back(id);
    }
  }
  return topo;
}

}  // namespace cem
