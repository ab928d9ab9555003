#include "cem/esfem.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace cem {

namespace {

void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

struct ElemB {
  std::array<int, 4> nodes{-1, -1, -1, -1};
  int count = 0;
  // per node 3x2 blocks, unscaled
  std::array<std::array<double, 6>, 4> b{};
  double area = 0.0;
  int r = 3;
};

ElemB cst_b(const Mesh2D& mesh, const std::array<int, 3>& n) {
  ElemB out;
  out.count = 3;
  out.r = 3;
  for (int i = 0; i < 3; ++i) out.nodes[i] = n[i];
  const Vec2 p0 = mesh.nodes[n[0]], p1 = mesh.nodes[n[1]], p2 = mesh.nodes[n[2]];
  const double A = triangle_area(p0, p1, p2);
  out.area = A;
  const std::array<Vec2, 3> p{p0, p1, p2};
  for (int i = 0; i < 3; ++i) {
    const Vec2& pj = p[(i + 1) % 3];
    const Vec2& pk = p[(i + 2) % 3];
    const double dNdx = (pj.y - pk.y) / (2.0 * A);
    const double dNdy = (pk.x - pj.x) / (2.0 * A);
    out.b[i] = {dNdx, 0.0, 0.0, dNdy, dNdy, dNdx};
  }
  return out;
}

ElemB quad_b(const Mesh2D& mesh, const Element& el, const NodePair& edge) {
  ElemB out;
  out.count = 4;
  out.r = 4;
  for (int i = 0; i < 4; ++i) out.nodes[i] = el.nodes[i];
  // natural coordinates of the quadrature point: midpoint of the matching edge
  int local = -1;
  for (int i = 0; i < 4; ++i)
    if (NodePair(el.nodes[i], el.nodes[(i + 1) % 4]) == edge) local = i;
  if (local < 0) throw Error("edge does not belong to quadrilateral element");
  static constexpr std::array<std::array<double, 2>, 4> mid{
      {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}}};
  const double xi = mid[local][0], eta = mid[local][1];
  static constexpr std::array<std::array<double, 2>, 4> sign{
      {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};
  std::array<double, 4> dxi{}, deta{};
  for (int i = 0; i < 4; ++i) {
    dxi[i] = 0.25 * sign[i][0] * (1.0 + sign[i][1] * eta);
    deta[i] = 0.25 * sign[i][1] * (1.0 + sign[i][0] * xi);
  }
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;  // J = d(x,y)/d(xi,eta)
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = mesh.nodes[el.nodes[i]];
    j11 += dxi[i] * p.x;
    j12 += dxi[i] * p.y;
    j21 += deta[i] * p.x;
    j22 += deta[i] * p.y;
  }
  const double det = j11 * j22 - j12 * j21;
  if (det <= 0.0) throw Error("quadrilateral element has non-positive Jacobian");
  for (int i = 0; i < 4; ++i) {
    const double dNdx = (j22 * dxi[i] - j12 * deta[i]) / det;
    const double dNdy = (-j21 * dxi[i] + j11 * deta[i]) / det;
    out.b[i] = {dNdx, 0.0, 0.0, dNdy, dNdy, dNdx};
  }
  // shoelace area
  double a = 0.0;
  for (int i = 0; i < 4; ++i)
    a += mesh.nodes[el.nodes[i]].cross(mesh.nodes[el.nodes[(i + 1) % 4]]);
  out.area = 0.5 * a;
  return out;
}

}  // namespace

EsfemAssembly::EsfemAssembly(const Mesh2D& mesh, const EdgeTopology& topo,
                             std::vector<MaterialModel> materials,
                             std::vector<int> element_material)
    : mesh_(&mesh),
      topo_(&topo),
      materials_(std::move(materials)),
      element_material_(std::move(element_material)),
      eff_(mesh.elements.size()) {
  if (element_material_.size() != mesh.elements.size())
    throw Error("element material table size mismatch");
  for (const MaterialModel& m : materials_) m.validate();
  domains_.resize(topo.edges.size());
  for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) build_domain(e);
}

void EsfemAssembly::build_domain(int edge) {
  const Edge& ed = topo_->edges[edge];
  SmoothingDomain dom;
  dom.edge = edge;

  struct Contrib {
    int elem;
    ElemB b;
    ElasticMatrix C;
    double alpha_eff;
    double Gc;
  };
  std::vector<Contrib> contribs;
  for (int k = 0; k < 2; ++k) {
    const int e = ed.elems[k];
    if (e < 0 || eff_.state[e] == ElemState::Failed) continue;
    const Element& el = mesh_->elements[e];
    ElemB b;
    if (eff_.state[e] == ElemState::Partial) {
      const auto& tri = eff_.partial_tri[e];
      // the edge must lie on the surviving triangle
      bool has1 = false, has2 = false;
      for (int n : tri) {
        has1 |= n == ed.n1;
        has2 |= n == ed.n2;
      }
      if (!has1 || !has2) continue;
      b = cst_b(*mesh_, tri);
    } else if (el.kind == ElemKind::CST) {
      b = cst_b(*mesh_, {el.nodes[0], el.nodes[1], el.nodes[2]});
    } else {
      b = quad_b(*mesh_, el, NodePair(ed.n1, ed.n2));
    }
    if (b.area <= 0.0)
      throw Error("element " + std::to_string(e) + " is degenerate (non-positive area)");
    const MaterialModel& m = material_of(e);
    contribs.push_back({e, b, elastic_matrix(m), thermal_strain(m, 1.0), m.Gc});
  }

  if (contribs.empty()) {
    dom.active = false;
    domains_[edge] = dom;
    return;
  }

  double area_sum = 0.0;
  for (const Contrib& c : contribs) area_sum += c.b.area;

  std::vector<BBlock> blocks;
  for (const Contrib& c : contribs) {
    const double w = c.b.area / area_sum;
    dom.elems.push_back(c.elem);
    dom.weights.push_back(w);
    dom.omega += c.b.area / c.b.r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dom.C[i][j] += w * c.C[i][j];
    dom.thermal_stress_per_K[0] += w * (c.C[0][0] + c.C[0][1]) * c.alpha_eff;
    dom.thermal_stress_per_K[1] += w * (c.C[1][0] + c.C[1][1]) * c.alpha_eff;
    dom.Gc += w * c.Gc;
    for (int i = 0; i < c.b.count; ++i) {
      BBlock blk;
      blk.node = c.b.nodes[i];
      for (int q = 0; q < 6; ++q) blk.b[q] = w * c.b.b[i][q];
      blocks.push_back(blk);
    }
  }
  // merge blocks of shared nodes, deterministic ascending-node order
  std::sort(blocks.begin(), blocks.end(),
            [](const BBlock& a, const BBlock& b) { return a.node < b.node; });
  for (const BBlock& blk : blocks) {
    if (!dom.blocks.empty() && dom.blocks.back().node == blk.node) {
      for (int q = 0; q < 6; ++q) dom.blocks.back().b[q] += blk.b[q];
    } else {
      dom.blocks.push_back(blk);
    }
  }
  domains_[edge] = dom;
}

void EsfemAssembly::set_element_failed(int elem) {
  eff_.state[elem] = ElemState::Failed;
  for (int e : topo_->element_edges[elem]) build_domain(e);
}

void EsfemAssembly::set_element_partial(int elem, const std::array<int, 3>& tri) {
  std::array<int, 3> t = tri;
  if (triangle_area(mesh_->nodes[t[0]], mesh_->nodes[t[1]], mesh_->nodes[t[2]]) < 0.0)
    std::swap(t[1], t[2]);
  eff_.state[elem] = ElemState::Partial;
  eff_.partial_tri[elem] = t;
  for (int e : topo_->element_edges[elem]) build_domain(e);
}

void EsfemAssembly::compute_strains(const std::vector<double>& u, std::vector<Voigt>& eps,
                                    int threads) const {
  const int n = static_cast<int>(domains_.size());
  eps.assign(n, Voigt{});
  parallel_for(n, threads, [&](int lo, int hi) {
    for (int e = lo; e < hi; ++e) {
      const SmoothingDomain& d = domains_[e];
      if (!d.active) continue;
      Voigt v{};
      for (const BBlock& blk : d.blocks)
        blk.accumulate_strain(v, u[2 * blk.node], u[2 * blk.node + 1]);
      eps[e] = v;
    }
  });
}

void EsfemAssembly::compute_stresses(const std::vector<Voigt>& eps, double dT,
                                     std::vector<Voigt>& sigma, int threads) const {
  const int n = static_cast<int>(domains_.size());
  sigma.assign(n, Voigt{});
  parallel_for(n, threads, [&](int lo, int hi) {
    for (int e = lo; e < hi; ++e) {
      const SmoothingDomain& d = domains_[e];
      if (!d.active) continue;
      const Voigt& s = eps[e];
      for (int i = 0; i < 3; ++i)
        sigma[e][i] = d.C[i][0] * s[0] + d.C[i][1] * s[1] + d.C[i][2] * s[2] -
                      dT * d.thermal_stress_per_K[i];
    }
  });
}

void EsfemAssembly::internal_force(const std::vector<Voigt>& sigma, std::vector<double>& f,
                                   int threads) const {
  const int n = static_cast<int>(domains_.size());
  struct Scratch {
    std::array<int, 6> node;
    std::array<double, 12> fv;
    int count = 0;
  };
  static thread_local std::vector<Scratch> scratch;
  scratch.assign(n, Scratch{});
  parallel_for(n, threads, [&](int lo, int hi) {
    for (int e = lo; e < hi; ++e) {
      const SmoothingDomain& d = domains_[e];
      if (!d.active) continue;
      const Voigt& s = sigma[e];
      Scratch& sc = scratch[e];
      for (const BBlock& blk : d.blocks) {
        const double fx = d.omega * (blk.b[0] * s[0] + blk.b[2] * s[1] + blk.b[4] * s[2]);
        const double fy = d.omega * (blk.b[1] * s[0] + blk.b[3] * s[1] + blk.b[5] * s[2]);
        sc.node[sc.count] = blk.node;
        sc.fv[2 * sc.count] = fx;
        sc.fv[2 * sc.count + 1] = fy;
        ++sc.count;
      }
    }
  });
  // ordered reduction keeps the result bit-identical for any worker count
  f.assign(dof_count(), 0.0);
  for (int e = 0; e < n; ++e) {
    const Scratch& sc = scratch[e];
    for (int i = 0; i < sc.count; ++i) {
      f[2 * sc.node[i]] += sc.fv[2 * i];
      f[2 * sc.node[i] + 1] += sc.fv[2 * i + 1];
    }
  }
}

std::vector<double> EsfemAssembly::lumped_mass() const {
  std::vector<double> m(dof_count(), 0.0);
  for (int e = 0; e < static_cast<int>(mesh_->elements.size()); ++e) {
    const Element& el = mesh_->elements[e];
    const double share = material_of(e).rho * mesh_->element_area(e) / el.node_count();
    for (int i = 0; i < el.node_count(); ++i) {
      m[2 * el.nodes[i]] += share;
      m[2 * el.nodes[i] + 1] += share;
    }
  }
  return m;
}

double EsfemAssembly::strain_energy(const std::vector<Voigt>& eps,
                                    const std::vector<Voigt>& sigma, double dT) const {
  double u = 0.0;
  for (int e = 0; e < static_cast<int>(domains_.size()); ++e) {
    const SmoothingDomain& d = domains_[e];
    if (!d.active) continue;
    // elastic part of the strain; shear carries no thermal contribution
    double eth[2] = {0.0, 0.0};
    if (dT != 0.0) {
      // invert sigma_th = C*eps_th relation through the stored per-K stress
      // (exact for single-material domains)
      const double det = d.C[0][0] * d.C[1][1] - d.C[0][1] * d.C[1][0];
      if (det != 0.0) {
        const double s0 = dT * d.thermal_stress_per_K[0];
        const double s1 = dT * d.thermal_stress_per_K[1];
        eth[0] = (d.C[1][1] * s0 - d.C[0][1] * s1) / det;
        eth[1] = (-d.C[1][0] * s0 + d.C[0][0] * s1) / det;
      }
    }
    u += 0.5 * d.omega *
         (sigma[e][0] * (eps[e][0] - eth[0]) + sigma[e][1] * (eps[e][1] - eth[1]) +
          sigma[e][2] * eps[e][2]);
  }
  return u;
}

std::vector<double> assemble_external_force(const Mesh2D& mesh, const EdgeTopology& topo,
                                            const Vec2& body_force,
                                            const std::vector<Traction>& tractions) {
  std::vector<double> f(2 * mesh.nodes.size(), 0.0);
  if (body_force.x != 0.0 || body_force.y != 0.0) {
    for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
      const Element& el = mesh.elements[e];
      const double share = mesh.element_area(e) / el.node_count();
      for (int i = 0; i < el.node_count(); ++i) {
        f[2 * el.nodes[i]] += body_force.x * share;
        f[2 * el.nodes[i] + 1] += body_force.y * share;
      }
    }
  }
  for (const Traction& t : tractions) {
    const Edge& ed = topo.edges.at(t.edge);
    if (!ed.boundary()) throw Error("traction applied on interior edge " + std::to_string(t.edge));
    const double l = (mesh.nodes[ed.n2] - mesh.nodes[ed.n1]).norm();
    for (int n : {ed.n1, ed.n2}) {
      f[2 * n] += 0.5 * t.value.x * l;
      f[2 * n + 1] += 0.5 * t.value.y * l;
    }
  }
  return f;
}

}  // namespace cem
