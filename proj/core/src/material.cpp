#include "cem/material.hpp"

#include <cmath>

namespace cem {

void MaterialModel::validate() const {
  if (!(E > 0.0)) throw Error(name + ": E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw Error(name + ": nu must be in [0, 0.5)");
  if (!(rho > 0.0)) throw Error(name + ": rho must be positive");
  if (!(Gc > 0.0)) throw Error(name + ": Gc must be positive");
  if (ft && !(*ft > 0.0)) throw Error(name + ": ft must be positive when given");
  if (!std::isfinite(alpha)) throw Error(name + ": alpha must be finite");
}

ElasticMatrix elastic_matrix(const MaterialModel& m) {
  m.validate();
  ElasticMatrix C{};
  if (m.mode == AnalysisMode::PlaneStrain) {
    const double f = m.E / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu));
    C[0][0] = C[1][1] = f * (1.0 - m.nu);
    C[0][1] = C[1][0] = f * m.nu;
    C[2][2] = 0.5 * f * (1.0 - 2.0 * m.nu);
  } else {
    const double f = m.E / (1.0 - m.nu * m.nu);
    C[0][0] = C[1][1] = f;
    C[0][1] = C[1][0] = f * m.nu;
    C[2][2] = 0.5 * f * (1.0 - m.nu);
  }
  return C;
}

WaveSpeeds wave_speeds(const MaterialModel& m) {
  m.validate();
  WaveSpeeds w;
  w.v_d = std::sqrt(m.E * (1.0 - m.nu) / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu) * m.rho));
  w.v_s = std::sqrt(m.E / (2.0 * (1.0 + m.nu) * m.rho));
  w.v_R = w.v_s * (0.862 + 1.14 * m.nu) / (1.0 + m.nu);
  return w;
}

double thermal_strain(const MaterialModel& m, double dT) {
  const double a = m.mode == AnalysisMode::PlaneStrain ? m.alpha * (1.0 + m.nu) : m.alpha;
  return a * dT;
}

Voigt stress_update(const MaterialModel& m, const Voigt& eps, double dT) {
  const ElasticMatrix C = elastic_matrix(m);
  const double eth = thermal_strain(m, dT);
  const Voigt e{eps[0] - eth, eps[1] - eth, eps[2]};
  Voigt s{};
  for (int i = 0; i < 3; ++i)
    s[i] = C[i][0] * e[0] + C[i][1] * e[1] + C[i][2] * e[2];
  return s;
}

}  // namespace cem
