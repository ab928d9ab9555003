#include <random>

#include "cem/esfem.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cem;
using cem::testing::Bundle;
using cem::testing::affine_field;

namespace {

// Smoothed strains for a displacement vector.
std::vector<Voigt> strains_of(const Bundle& b, const std::vector<double>& u) {
  std::vector<Voigt> eps;
  b.assembly->compute_strains(u, eps);
  return eps;
}

void check_constant_strain(const Bundle& b, double b11, double b12, double b21,
                           double b22) {
  const Voigt expect{b11, b22, b12 + b21};
  const std::vector<Voigt> eps = strains_of(b, affine_field(b.mesh, b11, b12, b21, b22,
                                                            0.37, -0.81));
  const double scale = std::max({std::fabs(expect[0]), std::fabs(expect[1]),
                                 std::fabs(expect[2]), 1e-30});
  for (size_t g = 0; g < b.topo.edges.size(); ++g) {
    if (!b.assembly->domains()[g].active) continue;
    for (int k = 0; k < 3; ++k)
      CHECK(std::fabs(eps[g][k] - expect[k]) <= 1e-10 * scale);
  }
}

}  // namespace

TEST_SUITE("esfem") {

TEST_CASE("smoothing domains: weights, measures, area partition") {
  // Two CSTs of areas 3 and 1 sharing an edge: weights (0.75, 0.25).
  Mesh2D m;
  m.nodes = {{0.0, 0.0}, {2.0, 0.0}, {0.0, 3.0}, {-2.0 / 3.0, 1.0}};
  Element big;
  big.nodes = {0, 1, 2, -1};
  Element small;
  small.nodes = {0, 2, 3, -1};
  m.elements = {big, small};
  Bundle b(std::move(m), cem::testing::unit_material());

  int shared = cem::testing::interior_edge(b.topo);
  REQUIRE(shared >= 0);
  const SmoothingDomain& d = b.assembly->domains()[shared];
  REQUIRE(d.weights.size() == 2);
  // weights follow the element order in d.elems
  double w_big = d.elems[0] == 0 ? d.weights[0] : d.weights[1];
  CHECK(w_big == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(d.weights[0] + d.weights[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.omega == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // total measure = total area
  double sum = 0.0;
  for (const SmoothingDomain& dom : b.assembly->domains()) sum += dom.omega;
  CHECK(sum == doctest::Approx(b.mesh.total_area()).epsilon(1e-10));
}

TEST_CASE("smoothing domains: unit-square interior edge measure 1/3") {
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  int shared = cem::testing::interior_edge(b.topo);
  CHECK(b.assembly->domains()[shared].omega ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // boundary edge domain: single contributor, weight 1
  for (const Edge& e : b.topo.edges)
    if (e.boundary()) {
      const SmoothingDomain& d =
          b.assembly->domains()[&e - b.topo.edges.data()];
      REQUIRE(d.weights.size() == 1);
      CHECK(d.weights[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("smoothed strain: rigid motion gives zero") {
  Bundle b(cem::testing::mixed_quad_cst(), cem::testing::unit_material());
  // translation
  auto eps = strains_of(b, affine_field(b.mesh, 0, 0, 0, 0, 1.3, -0.4));
  for (const Voigt& e : eps)
    for (double c : e) CHECK(std::fabs(c) < 1e-12);
  // infinitesimal rotation u = (−ωy, ωx)
  eps = strains_of(b, affine_field(b.mesh, 0, -1e-3, 1e-3, 0));
  for (const Voigt& e : eps)
    for (double c : e) CHECK(std::fabs(c) < 1e-14);
}

TEST_CASE("smoothed strain: uniaxial and shear reproduction") {
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  auto eps = strains_of(b, affine_field(b.mesh, 1, 0, 0, 0));
  for (const Voigt& e : eps) {
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(e[1]) < 1e-12);
    CHECK(std::fabs(e[2]) < 1e-12);
  }
  eps = strains_of(b, affine_field(b.mesh, 0, 1, 1, 0));  // u = (y, x)
  for (const Voigt& e : eps) CHECK(e[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("patch test: five mesh families reproduce affine fields") {
  std::vector<Bundle> bundles;
  bundles.emplace_back(generate_structured_grid(1.3, 0.9, 4, 3, ElemKind::CST,
                                                DiagonalRule::Main),
                       cem::testing::steel());
  bundles.emplace_back(generate_structured_grid(1.3, 0.9, 4, 3, ElemKind::CST,
                                                DiagonalRule::Anti),
                       cem::testing::steel());
  bundles.emplace_back(cem::testing::irregular_cst_grid(1.3, 0.9, 5, 4),
                       cem::testing::steel());
  bundles.emplace_back(generate_structured_grid(1.3, 0.9, 4, 3, ElemKind::QUAD),
                       cem::testing::steel());
  bundles.emplace_back(cem::testing::mixed_quad_cst(), cem::testing::steel());
  for (const Bundle& b : bundles) {
    check_constant_strain(b, 3e-4, 1e-4, -2e-4, 4e-4);
    check_constant_strain(b, -1e-3, 0.0, 0.0, 2e-3);
  }
}

TEST_CASE("internal force: zero stress gives zero force") {
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  std::vector<Voigt> sigma(b.topo.edges.size(), Voigt{0.0, 0.0, 0.0});
  std::vector<double> f;
  b.assembly->internal_force(sigma, f);
  for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("internal force: frozen single-domain oracle") {
  // Unit-square 2-CST mesh; unit sigma11 on the interior edge only.
  // Hand evaluation of Omega_g B^T sigma (Omega = 1/3, area weights 1/2 each):
  // f = (-1/6, 0, 1/6, 0, 1/6, 0, -1/6, 0) on nodes (0,0),(1,0),(1,1),(0,1).
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  std::vector<Voigt> sigma(b.topo.edges.size(), Voigt{0.0, 0.0, 0.0});
  sigma[cem::testing::interior_edge(b.topo)] = {1.0, 0.0, 0.0};
  std::vector<double> f;
  b.assembly->internal_force(sigma, f);
  CHECK(f[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  CHECK(f[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(f[4] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(f[6] == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  for (int n = 0; n < 4; ++n) CHECK(std::fabs(f[2 * n + 1]) < 1e-15);
}

TEST_CASE("internal force: zero sum for arbitrary stress fields") {
  Bundle b(cem::testing::irregular_cst_grid(1.0, 1.0, 4, 4),
           cem::testing::steel());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Voigt> sigma(b.topo.edges.size());
    double norm = 0.0;
    for (Voigt& s : sigma) {
      s = {d(rng), d(rng), d(rng)};
      norm = std::max({norm, std::fabs(s[0]), std::fabs(s[1]), std::fabs(s[2])});
    }
    std::vector<double> f;
    b.assembly->internal_force(sigma, f);
    double sx = 0.0, sy = 0.0;
    for (size_t n = 0; n < b.mesh.nodes.size(); ++n) {
      sx += f[2 * n];
      sy += f[2 * n + 1];
    }
    CHECK(std::fabs(sx) <= 1e-9 * norm);
    CHECK(std::fabs(sy) <= 1e-9 * norm);
  }
}

TEST_CASE("internal force: equivalent-stiffness symmetry") {
  Bundle b(cem::testing::irregular_cst_grid(1.0, 0.7, 3, 3),
           cem::testing::steel());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1e-4, 1e-4);
  auto force_of = [&](const std::vector<double>& u) {
    std::vector<Voigt> eps, sigma;
    b.assembly->compute_strains(u, eps);
    b.assembly->compute_stresses(eps, 0.0, sigma);
    std::vector<double> f;
    b.assembly->internal_force(sigma, f);
    return f;
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u1(b.assembly->dof_count()), u2(b.assembly->dof_count());
    for (double& v : u1) v = d(rng);
    for (double& v : u2) v = d(rng);
    std::vector<double> f1 = force_of(u1), f2 = force_of(u2);
    double a = 0.0, c = 0.0, mag = 0.0;
    for (int i = 0; i < b.assembly->dof_count(); ++i) {
      a += u1[i] * f2[i];
      c += u2[i] * f1[i];
      mag += std::fabs(u1[i] * f2[i]);
    }
    CHECK(std::fabs(a - c) <= 1e-9 * std::max(mag, 1e-30));
  }
}

TEST_CASE("internal force: bit-identical across worker counts") {
  Bundle b(cem::testing::irregular_cst_grid(1.0, 1.0, 6, 6),
           cem::testing::steel());
  std::vector<double> u = affine_field(b.mesh, 2e-4, -1e-4, 3e-4, 1e-4);
  std::vector<Voigt> eps, sigma;
  b.assembly->compute_strains(u, eps, 1);
  b.assembly->compute_stresses(eps, 0.0, sigma, 1);
  std::vector<double> f1, f4;
  b.assembly->internal_force(sigma, f1, 1);
  b.assembly->internal_force(sigma, f4, 4);
  REQUIRE(f1.size() == f4.size());
  for (size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f4[i]);

  std::vector<Voigt> eps4, sigma4;
  b.assembly->compute_strains(u, eps4, 4);
  b.assembly->compute_stresses(eps4, 0.0, sigma4, 4);
  for (size_t g = 0; g < eps.size(); ++g)
    for (int k = 0; k < 3; ++k) {
      CHECK(eps[g][k] == eps4[g][k]);
      CHECK(sigma[g][k] == sigma4[g][k]);
    }
}

TEST_CASE("lumped mass: per-node shares and conservation") {
  // one CST, area 1, rho 3 -> each node carries mass 1 on both DOFs
  Mesh2D tri;
  tri.nodes = {{0.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}};
  Element e;
  e.nodes = {0, 1, 2, -1};
  tri.elements = {e};
  MaterialModel m = cem::testing::unit_material();
  m.rho = 3.0;
  Bundle tb(std::move(tri), m);
  std::vector<double> mass = tb.assembly->lumped_mass();
  for (double v : mass) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  // one unit QUAD, rho 4 -> each node mass 1
  m.rho = 4.0;
  Bundle qb(generate_structured_grid(1.0, 1.0, 1, 1, ElemKind::QUAD), m);
  mass = qb.assembly->lumped_mass();
  for (double v : mass) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  // conservation on an irregular mesh
  Bundle ib(cem::testing::irregular_cst_grid(1.2, 0.8, 4, 4), cem::testing::steel());
  mass = ib.assembly->lumped_mass();
  double total = 0.0;
  for (size_t n = 0; n < ib.mesh.nodes.size(); ++n) total += mass[2 * n];
  CHECK(total == doctest::Approx(8000.0 * ib.mesh.total_area()).epsilon(1e-12));
  for (double v : mass) CHECK(v > 0.0);
}

TEST_CASE("external force: tractions and body force") {
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  // nothing applied -> zero
  std::vector<double> f =
      assemble_external_force(b.mesh, b.topo, {0.0, 0.0}, {});
  for (double v : f) CHECK(v == 0.0);

  // constant traction (p, 0) on the bottom boundary edge (nodes 0-1, length 1)
  int bottom = -1;
  for (size_t i = 0; i < b.topo.edges.size(); ++i)
    if (b.topo.edges[i].n1 == 0 && b.topo.edges[i].n2 == 1) bottom = (int)i;
  REQUIRE(bottom >= 0);
  Traction t;
  t.edge = bottom;
  t.value = {5.0, 0.0};
  f = assemble_external_force(b.mesh, b.topo, {0.0, 0.0}, {t});
  CHECK(f[0] == doctest::Approx(2.5));
  CHECK(f[2] == doctest::Approx(2.5));
  CHECK(f[1] == 0.0);
  CHECK(f[4] == 0.0);

  // body force on the two CSTs: each element spreads b*A/3 to its nodes
  f = assemble_external_force(b.mesh, b.topo, {0.0, -9.0}, {});
  // node 0 and node 2 belong to both elements (A = 1/2 each)
  CHECK(f[1] == doctest::Approx(-3.0));
  CHECK(f[5] == doctest::Approx(-3.0));
  CHECK(f[3] == doctest::Approx(-1.5));
  CHECK(f[7] == doctest::Approx(-1.5));

  // traction on an interior edge is rejected
  Traction bad;
  bad.edge = cem::testing::interior_edge(b.topo);
  bad.value = {1.0, 0.0};
  CHECK_THROWS_AS(assemble_external_force(b.mesh, b.topo, {0.0, 0.0}, {bad}),
                  Error);
}

TEST_CASE("failed elements: weight renormalization and deactivation") {
  Bundle b(cem::testing::two_cst_square(), cem::testing::unit_material());
  int shared = cem::testing::interior_edge(b.topo);
  b.assembly->set_element_failed(0);
  const SmoothingDomain& d = b.assembly->domains()[shared];
  REQUIRE(d.active);
  REQUIRE(d.elems.size() == 1);
  CHECK(d.elems[0] == 1);
  CHECK(d.weights[0] == doctest::Approx(1.0));
  CHECK(d.omega == doctest::Approx(0.5 / 3.0).epsilon(1e-14));
  // edges touching only the failed element are deactivated
  for (size_t g = 0; g < b.topo.edges.size(); ++g) {
    const Edge& e = b.topo.edges[g];
    bool only_failed = (e.elems[0] == 0 || e.elems[0] == -1) &&
                       (e.elems[1] == 0 || e.elems[1] == -1);
    if (only_failed) CHECK_FALSE(b.assembly->domains()[g].active);
  }
  // deactivated domains produce zero strain
  std::vector<Voigt> eps;
  b.assembly->compute_strains(affine_field(b.mesh, 1, 0, 0, 0), eps);
  for (size_t g = 0; g < b.topo.edges.size(); ++g)
    if (!b.assembly->domains()[g].active)
      for (double c : eps[g]) CHECK(c == 0.0);
}

}  // TEST_SUITE
