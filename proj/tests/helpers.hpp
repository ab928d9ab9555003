#pragma once

// Shared fixtures for the unit-test suites: tiny hand-checkable meshes and a
// small assembly bundle that owns everything an EsfemAssembly points into.

#include <memory>
#include <vector>

#include "cem/esfem.hpp"
#include "cem/mesh.hpp"
#include "cem/topology.hpp"

namespace cem::testing {

inline MaterialModel unit_material() {
  MaterialModel m;
  m.name = "unit";
  m.E = 1.0;
  m.nu = 0.0;
  m.rho = 1.0;
  m.Gc = 1.0;
  return m;
}

inline MaterialModel steel() {
  MaterialModel m;
  m.name = "steel";
  m.E = 190e9;
  m.nu = 0.3;
  m.rho = 8000.0;
  m.Gc = 2.213e4;
  return m;
}

inline MaterialModel pmma() {
  MaterialModel m;
  m.name = "pmma";
  m.E = 5.76e9;
  m.nu = 0.42;
  m.rho = 1180.0;
  m.Gc = 352.3;
  return m;
}

/// Unit square split into two CSTs along the main diagonal (0,0)-(1,1).
/// Nodes: (0,0) (1,0) (1,1) (0,1); elements (0,1,2) and (0,2,3).
inline Mesh2D two_cst_square() {
  Mesh2D m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  Element e1;
  e1.kind = ElemKind::CST;
  e1.nodes = {0, 1, 2, -1};
  Element e2;
  e2.kind = ElemKind::CST;
  e2.nodes = {0, 2, 3, -1};
  m.elements = {e1, e2};
  m.region_names[0] = "unit";
  return m;
}

/// Mixed mesh: one unit QUAD next to two CSTs covering a second unit cell.
/// Nodes: (0,0) (1,0) (2,0) (0,1) (1,1) (2,1).
inline Mesh2D mixed_quad_cst() {
  Mesh2D m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}};
  Element q;
  q.kind = ElemKind::QUAD;
  q.nodes = {0, 1, 4, 3};
  Element t1;
  t1.kind = ElemKind::CST;
  t1.nodes = {1, 2, 5, -1};
  Element t2;
  t2.kind = ElemKind::CST;
  t2.nodes = {1, 5, 4, -1};
  m.elements = {q, t1, t2};
  m.region_names[0] = "unit";
  return m;
}

/// Structured CST grid with interior nodes displaced by a smooth, deterministic
/// jitter (all element areas stay positive).
inline Mesh2D irregular_cst_grid(double w, double h, int nx, int ny) {
  Mesh2D m = generate_structured_grid(w, h, nx, ny, ElemKind::CST, DiagonalRule::Main);
  const double dx = w / nx, dy = h / ny;
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      Vec2& p = m.nodes[static_cast<size_t>(j) * (nx + 1) + i];
      p.x += 0.18 * dx * std::sin(3.1 * i + 1.7 * j);
      p.y += 0.18 * dy * std::cos(2.3 * i - 1.1 * j);
    }
  m.validate();
  return m;
}

/// Owns the mesh/topology/assembly triple so tests can pass it around.
struct Bundle {
  Mesh2D mesh;
  EdgeTopology topo;
  std::unique_ptr<EsfemAssembly> assembly;

  Bundle(Mesh2D m, MaterialModel mat) : mesh(std::move(m)) {
    topo = build_edge_topology(mesh);
    assembly = std::make_unique<EsfemAssembly>(
        mesh, topo, std::vector<MaterialModel>{std::move(mat)},
        std::vector<int>(mesh.elements.size(), 0));
  }
};

/// Nodal displacement vector for the affine field u = B x + c.
inline std::vector<double> affine_field(const Mesh2D& mesh, double b11, double b12,
                                        double b21, double b22, double cx = 0.0,
                                        double cy = 0.0) {
  std::vector<double> u(2 * mesh.nodes.size());
  for (size_t n = 0; n < mesh.nodes.size(); ++n) {
    u[2 * n] = b11 * mesh.nodes[n].x + b12 * mesh.nodes[n].y + cx;
    u[2 * n + 1] = b21 * mesh.nodes[n].x + b22 * mesh.nodes[n].y + cy;
  }
  return u;
}

/// Index of the unique interior edge of the two-CST unit square.
inline int interior_edge(const EdgeTopology& topo) {
  for (size_t i = 0; i < topo.edges.size(); ++i)
    if (topo.edges[i].adjacent_count() == 2) return static_cast<int>(i);
  return -1;
}

}  // namespace cem::testing
