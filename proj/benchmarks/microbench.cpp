// Microbenchmarks for the hot per-step kernels: smoothed strain/stress
// evaluation, internal force scatter, and one full explicit step.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "cem/dynamics.hpp"
#include "cem/esfem.hpp"

namespace {

struct Fixture {
  cem::Mesh2D mesh;
  cem::EdgeTopology topo;
  std::unique_ptr<cem::EsfemAssembly> assembly;
  std::vector<double> u;

  explicit Fixture(int n, cem::ElemKind kind) {
    mesh = cem::generate_structured_grid(1.0, 1.0, n, n, kind,
                                         cem::DiagonalRule::Alternating);
    topo = cem::build_edge_topology(mesh);
    cem::MaterialModel m;
    m.name = "steel";
    m.E = 190e9;
    m.nu = 0.3;
    m.rho = 8000.0;
    m.Gc = 2.213e4;
    assembly = std::make_unique<cem::EsfemAssembly>(
        mesh, topo, std::vector<cem::MaterialModel>{m},
        std::vector<int>(mesh.elements.size(), 0));
    u.resize(assembly->dof_count());
    for (size_t i = 0; i < u.size(); ++i)
      u[i] = 1e-6 * std::sin(0.1 * static_cast<double>(i));
  }
};

void BM_SmoothedStrains(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), cem::ElemKind::CST);
  std::vector<cem::Voigt> eps;
  for (auto _ : state) {
    f.assembly->compute_strains(f.u, eps, static_cast<int>(state.range(1)));
    benchmark::DoNotOptimize(eps.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(f.topo.edges.size()));
}
BENCHMARK(BM_SmoothedStrains)->Args({32, 1})->Args({128, 1})->Args({128, 4});

void BM_InternalForce(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), cem::ElemKind::CST);
  std::vector<cem::Voigt> eps, sigma;
  f.assembly->compute_strains(f.u, eps, 1);
  f.assembly->compute_stresses(eps, 0.0, sigma, 1);
  std::vector<double> fi;
  for (auto _ : state) {
    f.assembly->internal_force(sigma, fi, static_cast<int>(state.range(1)));
    benchmark::DoNotOptimize(fi.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(f.topo.edges.size()));
}
BENCHMARK(BM_InternalForce)->Args({32, 1})->Args({128, 1})->Args({128, 4});

void BM_ExplicitStep(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), cem::ElemKind::CST);
  const std::vector<double> mass = f.assembly->lumped_mass();
  const std::vector<double> f_ext(mass.size(), 0.0);
  cem::LoadProgram loads;
  cem::KinematicState ks;
  ks.resize(f.assembly->dof_count());
  ks.u = f.u;
  const double dt = cem::stable_timestep(f.mesh, *f.assembly, 0.6);
  std::vector<cem::Voigt> eps, sigma;
  auto force = [&](const std::vector<double>& u, double, std::vector<double>& out) {
    f.assembly->compute_strains(u, eps, 1);
    f.assembly->compute_stresses(eps, 0.0, sigma, 1);
    f.assembly->internal_force(sigma, out, 1);
  };
  long step = 0;
  for (auto _ : state) {
    cem::newmark_step(ks, dt, 0.5, mass, f_ext, force, loads, step++);
    benchmark::DoNotOptimize(ks.u.data());
  }
}
BENCHMARK(BM_ExplicitStep)->Arg(32)->Arg(64);

void BM_QuadAssembly(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), cem::ElemKind::QUAD);
  std::vector<cem::Voigt> eps;
  for (auto _ : state) {
    f.assembly->compute_strains(f.u, eps, 1);
    benchmark::DoNotOptimize(eps.data());
  }
}
BENCHMARK(BM_QuadAssembly)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
