#pragma once

#include <functional>
#include <vector>

#include "cem/esfem.hpp"

namespace cem {

struct KinematicState {
  double t = 0.0;
  std::vector<double> u, v, a;  // per-DOF displacement, velocity, acceleration
  double dT = 0.0;              // current temperature change, K

  void resize(int dofs) {
    u.assign(dofs, 0.0);
    v.assign(dofs, 0.0);
    a.assign(dofs, 0.0);
  }
};

enum class RampShape { Hold, ReturnToZero };

/// Linear ramp to `target` at t0, then hold (or drop back to zero).
double ramp_value(double target, double t0, double t, RampShape shape = RampShape::Hold);
/// Time derivative of ramp_value.
double ramp_rate(double target, double t0, double t, RampShape shape = RampShape::Hold);

struct VelocityBc {
  std::vector<int> dofs;  // global DOF indices
  double v0 = 0.0;        // target velocity, m/s
  double t0 = 0.0;        // ramp duration, s
  double t_start = 0.0;   // load arrival time: v = 0 before this, s
  RampShape shape = RampShape::Hold;
};

struct LoadProgram {
  std::vector<VelocityBc> velocity_bcs;
  std::vector<int> fixed_dofs;
  double delta_T = 0.0;       // thermal ramp target, K
  double thermal_t0 = 0.0;    // thermal ramp duration, s
  RampShape thermal_shape = RampShape::Hold;
  Vec2 body_force;
  std::vector<Traction> tractions;

  void validate(int dof_count) const;
  double temperature(double t) const {
    return thermal_t0 > 0.0 ? ramp_value(delta_T, thermal_t0, t, thermal_shape) : 0.0;
  }
};

struct EnergyLedger {
  double kinetic = 0.0;     // J/m
  double strain = 0.0;      // J/m
  double external = 0.0;    // J/m, accumulated work of prescribed/applied loads
  double dissipated = 0.0;  // J/m, supplied by the crack front
};

/// Critical-timestep estimate: safety * min_e (shortest edge / dilatational speed).
double stable_timestep(const Mesh2D& mesh, const EsfemAssembly& assembly, double safety);

using ForceFn = std::function<void(const std::vector<double>& u, double t,
                                   std::vector<double>& f_int)>;

/// One explicit Newmark (beta = 0) step over the generic force callback.
/// Throws Error on NaN/Inf with the step number in the message.
void newmark_step(KinematicState& state, double dt, double gamma,
                  const std::vector<double>& mass, const std::vector<double>& f_ext,
                  const ForceFn& f_int_fn, const LoadProgram& loads, long step_index);

/// Trapezoidal accumulation of reaction work on prescribed-velocity DOFs.
/// reaction = M a + f_int measured after the step.
double prescribed_work_increment(const KinematicState& before, const KinematicState& after,
                                 const std::vector<double>& mass,
                                 const std::vector<double>& f_int_before,
                                 const std::vector<double>& f_int_after,
                                 const LoadProgram& loads, double dt);

}  // namespace cem
