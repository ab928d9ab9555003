#pragma once

#include <vector>

#include "cem/material.hpp"
#include "cem/mesh.hpp"
#include "cem/topology.hpp"

namespace cem {

/// 3x2 strain-displacement block of one node: maps (ux, uy) to Voigt strain.
struct BBlock {
  int node = -1;
  std::array<double, 6> b{};  // row-major 3x2, already scaled by the area weight

  void accumulate_strain(Voigt& eps, double ux, double uy) const {
    eps[0] += b[0] * ux + b[1] * uy;
    eps[1] += b[2] * ux + b[3] * uy;
    eps[2] += b[4] * ux + b[5] * uy;
  }
};

/// Per-edge smoothing domain: area-weighted strain operator and measure.
struct SmoothingDomain {
  int edge = -1;
  bool active = true;
  std::vector<BBlock> blocks;
  std::vector<int> elems;     // surviving contributors
  std::vector<double> weights;  // w_Aj over surviving contributors
  double omega = 0.0;         // (sum A_j / r_j), m^2
  ElasticMatrix C{};          // area-weighted constitutive matrix
  Voigt thermal_stress_per_K{};  // C : eps_th per unit temperature change
  double Gc = 0.0;            // area-weighted toughness (diagnostic only)
};

enum class ElemState : std::uint8_t { Intact, Partial, Failed };

/// Effective per-element view maintained as the crack front splits elements.
struct EffectiveElements {
  std::vector<ElemState> state;
  std::vector<std::array<int, 3>> partial_tri;  // surviving CST of a partial QUAD

  explicit EffectiveElements(size_t n) : state(n, ElemState::Intact), partial_tri(n) {}
};

class EsfemAssembly {
 public:
  EsfemAssembly(const Mesh2D& mesh, const EdgeTopology& topo,
                std::vector<MaterialModel> materials,
                std::vector<int> element_material);

  const Mesh2D& mesh() const { return *mesh_; }
  const EdgeTopology& topology() const { return *topo_; }
  const std::vector<SmoothingDomain>& domains() const { return domains_; }
  const EffectiveElements& effective() const { return eff_; }
  const MaterialModel& material_of(int elem) const {
    return materials_[element_material_[elem]];
  }

  void set_element_failed(int elem);
  void set_element_partial(int elem, const std::array<int, 3>& surviving_tri);

  /// eps_i = sum_j w_Aj B^Aj u for every active edge (zero when deactivated).
  void compute_strains(const std::vector<double>& u, std::vector<Voigt>& eps,
                       int threads = 1) const;
  void compute_stresses(const std::vector<Voigt>& eps, double dT,
                        std::vector<Voigt>& sigma, int threads = 1) const;
  /// f_int = sum_edges Omega_g B^T sigma, deterministic regardless of threads.
  void internal_force(const std::vector<Voigt>& sigma, std::vector<double>& f,
                      int threads = 1) const;

  std::vector<double> lumped_mass() const;

  /// Strain energy over surviving domains, per unit thickness (J/m).
  double strain_energy(const std::vector<Voigt>& eps, const std::vector<Voigt>& sigma,
                       double dT) const;

  int dof_count() const { return 2 * static_cast<int>(mesh_->nodes.size()); }

 private:
  void build_domain(int edge);

  const Mesh2D* mesh_;
  const EdgeTopology* topo_;
  std::vector<MaterialModel> materials_;
  std::vector<int> element_material_;
  EffectiveElements eff_;
  std::vector<SmoothingDomain> domains_;
};

struct Traction {
  int edge = -1;  // boundary edge ID
  Vec2 value;     // N/m^2, constant over the edge
};

std::vector<double> assemble_external_force(const Mesh2D& mesh, const EdgeTopology& topo,
                                            const Vec2& body_force,
                                            const std::vector<Traction>& tractions);

}  // namespace cem
