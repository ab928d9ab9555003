#include "cem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cem {

double Mesh2D::element_area(int e) const {
  const Element& el = elements[e];
  if (el.kind == ElemKind::CST) {
    return triangle_area(nodes[el.nodes[0]], nodes[el.nodes[1]], nodes[el.nodes[2]]);
  }
  // shoelace for the quadrilateral
  double a = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = nodes[el.nodes[i]];
    const Vec2& q = nodes[el.nodes[(i + 1) % 4]];
    a += p.cross(q);
  }
  return 0.5 * a;
}

double Mesh2D::total_area() const {
  double a = 0.0;
  for (int e = 0; e < static_cast<int>(elements.size()); ++e) a += element_area(e);
  return a;
}

void Mesh2D::validate() const {
  const int nn = static_cast<int>(nodes.size());
  std::map<NodePair, std::vector<std::pair<int, int>>> edge_use;  // pair -> (elem, pair count)
  for (int e = 0; e < static_cast<int>(elements.size()); ++e) {
    const Element& el = elements[e];
    const int nc = el.node_count();
    for (int i = 0; i < nc; ++i) {
      int n = el.nodes[i];
      if (n < 0 || n >= nn)
        throw Error("element " + std::to_string(e) + " references missing node " +
                    std::to_string(n));
      for (int j = i + 1; j < nc; ++j)
        if (el.nodes[j] == n)
          throw Error("element " + std::to_string(e) + " has repeated node " +
                      std::to_string(n));
    }
    if (element_area(e) <= 0.0)
      throw Error("element " + std::to_string(e) +
                  " has non-positive area (check counter-clockwise ordering)");
    for (int i = 0; i < nc; ++i)
      edge_use[NodePair(el.nodes[i], el.nodes[(i + 1) % nc])].push_back({e, i});
  }
  // no two elements share more than one edge
  std::map<std::pair<int, int>, int> shared;
  for (const auto& [pair, uses] : edge_use) {
    if (uses.size() > 2)
      throw Error("non-manifold edge (" + std::to_string(pair.a) + "," +
                  std::to_string(pair.b) + ") shared by " + std::to_string(uses.size()) +
                  " elements");
    if (uses.size() == 2 && !seam_edges.count(pair)) {
      int e1 = std::min(uses[0].first, uses[1].first);
      int e2 = std::max(uses[0].first, uses[1].first);
      if (++shared[{e1, e2}] > 1)
        throw Error("elements " + std::to_string(e1) + " and " + std::to_string(e2) +
                    " share more than one edge");
    }
  }
}

// ---------------------------------------------------------------------------
// gmsh v2.2 ASCII subset
// ---------------------------------------------------------------------------

Mesh2D parse_gmsh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Mesh2D mesh;
  std::map<int, int> node_index;  // file node ID -> local index

  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(in, out)) {
      // strip trailing CR from DOS files
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (!out.empty()) return true;
    }
    return false;
  };

  while (next_line(line)) {
    if (line == "$MeshFormat") {
      if (!next_line(line)) throw Error("truncated $MeshFormat section");
      std::istringstream ls(line);
      double version = 0.0;
      int file_type = 0, data_size = 0;
      ls >> version >> file_type >> data_size;
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        throw Error("unsupported mesh format version (need ASCII 2.x)");
      if (!next_line(line) || line != "$EndMeshFormat")
        throw Error("malformed $MeshFormat section");
    } else if (line == "$PhysicalNames") {
      if (!next_line(line)) throw Error("truncated $PhysicalNames section");
      int count = std::stoi(line);
      for (int i = 0; i < count; ++i) {
        if (!next_line(line)) throw Error("truncated $PhysicalNames section");
        std::istringstream ls(line);
        int dim = 0, tag = 0;
        std::string name;
        ls >> dim >> tag >> name;
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
          name = name.substr(1, name.size() - 2);
        if (dim == 2) mesh.region_names[tag] = name;
      }
      if (!next_line(line) || line != "$EndPhysicalNames")
        throw Error("malformed $PhysicalNames section");
    } else if (line == "$Nodes") {
      if (!next_line(line)) throw Error("truncated $Nodes section");
      int count = std::stoi(line);
      for (int i = 0; i < count; ++i) {
        if (!next_line(line)) throw Error("truncated $Nodes section");
        std::istringstream ls(line);
        int id = 0;
        double x = 0, y = 0, z = 0;
        if (!(ls >> id >> x >> y >> z)) throw Error("malformed node record: " + line);
        if (std::abs(z) > 1e-12)
          throw Error("non-planar node " + std::to_string(id) + " (z = " +
                      std::to_string(z) + ")");
        if (node_index.count(id)) throw Error("duplicate node ID " + std::to_string(id));
        node_index[id] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.push_back({x, y});
      }
      if (!next_line(line) || line != "$EndNodes") throw Error("malformed $Nodes section");
    } else if (line == "$Elements") {
      if (!next_line(line)) throw Error("truncated $Elements section");
      int count = std::stoi(line);
      for (int i = 0; i < count; ++i) {
        if (!next_line(line)) throw Error("truncated $Elements section");
        std::istringstream ls(line);
        int id = 0, type = 0, ntags = 0;
        if (!(ls >> id >> type >> ntags)) throw Error("malformed element record: " + line);
        int physical = 0;
        for (int t = 0; t < ntags; ++t) {
          int tag = 0;
          ls >> tag;
          if (t == 0) physical = tag;
        }
        if (type == 15 || type == 1) {
          // points and boundary lines carry no area; skip
          continue;
        }
        if (type != 2 && type != 3)
          throw Error("unsupported element type " + std::to_string(type));
        Element el;
        el.kind = type == 2 ? ElemKind::CST : ElemKind::QUAD;
        el.region = physical;
        const int nc = el.node_count();
        for (int k = 0; k < nc; ++k) {
          int n = 0;
          if (!(ls >> n)) throw Error("malformed element record: " + line);
          auto it = node_index.find(n);
          if (it == node_index.end())
            throw Error("element " + std::to_string(id) + " references missing node " +
                        std::to_string(n));
          el.nodes[k] = it->second;
        }
        mesh.elements.push_back(el);
      }
      if (!next_line(line) || line != "$EndElements")
        throw Error("malformed $Elements section");
    } else if (!line.empty() && line[0] == '$') {
      // skip unknown sections
      const std::string end = "$End" + line.substr(1);
      while (next_line(line) && line != end) {}
    }
  }
  if (mesh.nodes.empty()) throw Error("mesh file contains no $Nodes section");
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------------------
// structured grids
// ---------------------------------------------------------------------------

Mesh2D generate_structured_grid(double width, double height, int nx, int ny,
                                ElemKind kind, DiagonalRule rule, int region) {
  if (nx < 1 || ny < 1) throw Error("structured grid needs nx, ny >= 1");
  if (width <= 0.0 || height <= 0.0) throw Error("structured grid needs positive dimensions");
  Mesh2D mesh;
  mesh.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.push_back({width * i / nx, height * j / ny});
  auto nid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int n00 = nid(i, j), n10 = nid(i + 1, j), n11 = nid(i + 1, j + 1), n01 = nid(i, j + 1);
      if (kind == ElemKind::QUAD) {
        Element el;
        el.kind = ElemKind::QUAD;
        el.nodes = {n00, n10, n11, n01};
        el.region = region;
        mesh.elements.push_back(el);
      } else {
        bool main_diag = rule == DiagonalRule::Main ||
                         (rule == DiagonalRule::Alternating && (i + j) % 2 == 0);
        Element a, b;
        a.kind = b.kind = ElemKind::CST;
        a.region = b.region = region;
        if (main_diag) {  // diagonal n00-n11
          a.nodes = {n00, n10, n11, -1};
          b.nodes = {n00, n11, n01, -1};
        } else {  // diagonal n10-n01
          a.nodes = {n00, n10, n01, -1};
          b.nodes = {n10, n11, n01, -1};
        }
        mesh.elements.push_back(a);
        mesh.elements.push_back(b);
      }
    }
  }
  mesh.region_names[region] = "default";
  return mesh;
}

// ---------------------------------------------------------------------------
// seams
// ---------------------------------------------------------------------------

namespace {

int nearest_node(const Mesh2D& mesh, const Vec2& p, double tol) {
  int best = -1;
  double best_d = tol;
  for (int n = 0; n < static_cast<int>(mesh.nodes.size()); ++n) {
    double d = (mesh.nodes[n] - p).norm();
    if (d <= best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

}  // namespace

Mesh2D insert_seam(const Mesh2D& mesh_in, const SeamSpec& seam) {
  if (seam.polyline.size() < 2) throw Error("seam polyline needs at least 2 points");
  for (size_t i = 1; i < seam.polyline.size(); ++i)
    if ((seam.polyline[i] - seam.polyline[i - 1]).norm() == 0.0)
      throw Error("seam polyline has repeated consecutive points");

  Mesh2D mesh = mesh_in;

  // Snap polyline vertices to nodes, then walk mesh edges between them.
  std::vector<int> snapped;
  for (const Vec2& p : seam.polyline) {
    int n = nearest_node(mesh, p, seam.tolerance);
    if (n < 0) {
      std::ostringstream os;
      os << "seam point (" << p.x << ", " << p.y << ") is farther than the snapping "
         << "tolerance from any mesh node";
      throw Error(os.str());
    }
    snapped.push_back(n);
  }

  // adjacency of mesh edges
  std::map<NodePair, std::vector<int>> edge_elems;
  std::vector<std::vector<int>> node_nbrs(mesh.nodes.size());
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const Element& el = mesh.elements[e];
    const int nc = el.node_count();
    for (int i = 0; i < nc; ++i) {
      int a = el.nodes[i], b = el.nodes[(i + 1) % nc];
      edge_elems[NodePair(a, b)].push_back(e);
      node_nbrs[a].push_back(b);
      node_nbrs[b].push_back(a);
    }
  }

  // Expand each polyline segment into a chain of collinear mesh edges.
  std::vector<int> chain{snapped.front()};
  for (size_t s = 1; s < snapped.size(); ++s) {
    int cur = chain.back();
    const int target = snapped[s];
    const Vec2 a = mesh.nodes[cur];
    const Vec2 b = mesh.nodes[target];
    const Vec2 dir = (b - a).normalized();
    const double seg_len = (b - a).norm();
    while (cur != target) {
      int next = -1;
      for (int nb : node_nbrs[cur]) {
        Vec2 d = mesh.nodes[nb] - mesh.nodes[cur];
        double along = d.dot(dir);
        if (along <= 0.0) continue;
        double off = std::abs(d.cross(dir));
        double overshoot = (mesh.nodes[nb] - a).dot(dir) - seg_len;
        if (off <= seam.tolerance && overshoot <= seam.tolerance &&
            (next < 0 || along < (mesh.nodes[next] - mesh.nodes[cur]).dot(dir)))
          next = nb;
      }
      if (next < 0)
        throw Error("seam segment cannot be traced along mesh edges within tolerance");
      if (!edge_elems.count(NodePair(cur, next)))
        throw Error("seam segment does not follow an existing mesh edge");
      chain.push_back(next);
      cur = next;
    }
  }
  for (size_t i = 0; i < chain.size(); ++i)
    for (size_t j = i + 1; j < chain.size(); ++j)
      if (chain[i] == chain[j]) throw Error("seam crosses itself");

  std::set<NodePair> seam_pairs;
  for (size_t i = 1; i < chain.size(); ++i)
    seam_pairs.insert(NodePair(chain[i - 1], chain[i]));

  // boundary nodes: incident to any edge with a single adjacent element
  auto on_hull = [&](int n) {
    for (int nb : node_nbrs[n])
      if (edge_elems.at(NodePair(n, nb)).size() == 1) return true;
    return false;
  };

  // Nodes to duplicate: strictly interior chain nodes, plus endpoints that
  // sit on the mesh hull (open seam mouth).
  std::vector<int> to_split;
  for (size_t i = 0; i < chain.size(); ++i) {
    bool endpoint = i == 0 || i + 1 == chain.size();
    if (!endpoint || on_hull(chain[i])) to_split.push_back(chain[i]);
  }

  auto local_dir = [&](int n) {
    // tangent of the seam at node n, from the neighboring chain nodes
    size_t i = 0;
    while (chain[i] != n) ++i;
    size_t lo = i > 0 ? i - 1 : i;
    size_t hi = i + 1 < chain.size() ? i + 1 : i;
    return (mesh.nodes[chain[hi]] - mesh.nodes[chain[lo]]).normalized();
  };

  for (int n : to_split) {
    const Vec2 seam_dir = local_dir(n);
    // Partition elements around n into the two seam sides by the sign of the
    // element-centroid offset from the seam line through n.
    std::set<int> incident;
    for (int nb : node_nbrs[n])
      for (int e : edge_elems.at(NodePair(n, nb))) incident.insert(e);
    std::vector<int> neg_side;
    for (int e : incident) {
      const Element& el = mesh.elements[e];
      Vec2 c{0, 0};
      for (int i = 0; i < el.node_count(); ++i) c += mesh.nodes[el.nodes[i]];
      c = c * (1.0 / el.node_count());
      if (seam_dir.cross(c - mesh.nodes[n]) < 0.0) neg_side.push_back(e);
    }
    if (neg_side.empty() || neg_side.size() == incident.size())
      throw Error("seam node " + std::to_string(n) + " has elements on one side only");
    const int dup = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back(mesh.nodes[n]);
    for (int e : neg_side) {
      Element& el = mesh.elements[e];
      for (int i = 0; i < el.node_count(); ++i)
        if (el.nodes[i] == n) el.nodes[i] = dup;
    }
  }

  // Re-express seam pairs with whatever node IDs the two sides now carry and
  // keep only those still shared by two elements (single-edge seams).
  std::map<NodePair, int> count;
  for (const Element& el : mesh.elements) {
    const int nc = el.node_count();
    for (int i = 0; i < nc; ++i) ++count[NodePair(el.nodes[i], el.nodes[(i + 1) % nc])];
  }
  for (const NodePair& p : seam_pairs)
    if (count.count(p) && count.at(p) == 2) mesh.seam_edges.insert(p);

  mesh.validate();
  return mesh;
}

std::string dump_mesh(const Mesh2D& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "nodes " << mesh.nodes.size() << "\n";
  for (size_t n = 0; n < mesh.nodes.size(); ++n)
    os << n << " " << mesh.nodes[n].x << " " << mesh.nodes[n].y << "\n";
  os << "elements " << mesh.elements.size() << "\n";
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const Element& el = mesh.elements[e];
    os << e << " " << (el.kind == ElemKind::CST ? "cst" : "quad");
    for (int i = 0; i < el.node_count(); ++i) os << " " << el.nodes[i];
    os << " region " << el.region << "\n";
  }
  os << "seam_edges " << mesh.seam_edges.size() << "\n";
  for (const NodePair& p : mesh.seam_edges) os << p.a << " " << p.b << "\n";
  return os.str();
}

}  // namespace cem
