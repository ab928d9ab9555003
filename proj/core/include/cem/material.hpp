#pragma once

#include <array>
#include <optional>
#include <string>

#include "cem/geometry.hpp"
#include "cem/mesh.hpp"

namespace cem {

enum class AnalysisMode { PlaneStrain, PlaneStress };

struct MaterialModel {
  std::string name = "material";
  double E = 0.0;        // Young's modulus, Pa
  double nu = 0.0;       // Poisson ratio
  double rho = 0.0;      // density, kg/m^3
  double Gc = 0.0;       // critical fracture energy release rate, J/m^2
  std::optional<double> ft;  // tensile strength, Pa
  double alpha = 0.0;    // thermal expansion coefficient, 1/K
  AnalysisMode mode = AnalysisMode::PlaneStrain;

  void validate() const;
};

struct WaveSpeeds {
  double v_d = 0.0;  // dilatational, m/s
  double v_s = 0.0;  // shear, m/s
  double v_R = 0.0;  // Rayleigh (Viktorov approximation), m/s
};

/// Symmetric 3x3 constitutive matrix in Voigt order (11, 22, 12).
using ElasticMatrix = std::array<std::array<double, 3>, 3>;

ElasticMatrix elastic_matrix(const MaterialModel& m);

WaveSpeeds wave_speeds(const MaterialModel& m);

/// sigma = C : (eps - eps_th), plane-strain thermal strain uses alpha*(1+nu).
Voigt stress_update(const MaterialModel& m, const Voigt& eps, double dT);

/// In-plane normal thermal strain for a temperature change dT.
double thermal_strain(const MaterialModel& m, double dT);

}  // namespace cem
