#include "cem/dynamics.hpp"

#include <cmath>
#include <set>

namespace cem {

double ramp_value(double target, double t0, double t, RampShape shape) {
  if (t0 <= 0.0) throw Error("ramp duration t0 must be positive");
  if (t <= t0) return target * t / t0;
  return shape == RampShape::Hold ? target : 0.0;
}

double ramp_rate(double target, double t0, double t, RampShape shape) {
  if (t0 <= 0.0) throw Error("ramp duration t0 must be positive");
  return t <= t0 ? target / t0 : 0.0;
}

namespace {

// exact time integral of the velocity ramp, for consistent prescribed u
double ramp_integral(double target, double t0, double t, RampShape shape) {
  if (t <= t0) return 0.5 * target * t * t / t0;
  const double at_t0 = 0.5 * target * t0;
  return shape == RampShape::Hold ? at_t0 + target * (t - t0) : at_t0;
}

}  // namespace

void LoadProgram::validate(int dof_count) const {
  std::set<int> prescribed;
  for (const VelocityBc& bc : velocity_bcs) {
    if (bc.t0 <= 0.0) throw Error("velocity ramp needs t0 > 0");
    for (int d : bc.dofs) {
      if (d < 0 || d >= dof_count) throw Error("velocity BC references invalid DOF");
      prescribed.insert(d);
    }
  }
  for (int d : fixed_dofs) {
    if (d < 0 || d >= dof_count) throw Error("fixed BC references invalid DOF");
    if (prescribed.count(d))
      throw Error("DOF " + std::to_string(d) + " is both velocity-prescribed and fixed");
  }
}

double stable_timestep(const Mesh2D& mesh, const EsfemAssembly& assembly, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw Error("safety factor must be in (0, 1]");
  double dt = std::numeric_limits<double>::infinity();
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const Element& el = mesh.elements[e];
    const int nc = el.node_count();
    double h = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i)
      h = std::min(h, (mesh.nodes[el.nodes[(i + 1) % nc]] - mesh.nodes[el.nodes[i]]).norm());
    const double vd = wave_speeds(assembly.material_of(e)).v_d;
    dt = std::min(dt, h / vd);
  }
  return safety * dt;
}

void newmark_step(KinematicState& state, double dt, double gamma,
                  const std::vector<double>& mass, const std::vector<double>& f_ext,
                  const ForceFn& f_int_fn, const LoadProgram& loads, long step_index) {
  const int n = static_cast<int>(state.u.size());
  const double t_next = state.t + dt;

  for (int i = 0; i < n; ++i)
    state.u[i] += state.v[i] * dt + 0.5 * state.a[i] * dt * dt;
  for (const VelocityBc& bc : loads.velocity_bcs) {
    const double u_p =
        t_next > bc.t_start ? ramp_integral(bc.v0, bc.t0, t_next - bc.t_start, bc.shape) : 0.0;
    for (int d : bc.dofs) state.u[d] = u_p;
  }
  for (int d : loads.fixed_dofs) state.u[d] = 0.0;

  static thread_local std::vector<double> f_int;
  f_int_fn(state.u, t_next, f_int);

  for (int i = 0; i < n; ++i) {
    const double a_next = (f_ext[i] - f_int[i]) / mass[i];
    state.v[i] += ((1.0 - gamma) * state.a[i] + gamma * a_next) * dt;
    state.a[i] = a_next;
  }
  for (const VelocityBc& bc : loads.velocity_bcs) {
    const double v_p =
        t_next > bc.t_start ? ramp_value(bc.v0, bc.t0, t_next - bc.t_start, bc.shape) : 0.0;
    const double a_p =
        t_next > bc.t_start ? ramp_rate(bc.v0, bc.t0, t_next - bc.t_start, bc.shape) : 0.0;
    for (int d : bc.dofs) {
      state.v[d] = v_p;
      state.a[d] = a_p;
    }
  }
  for (int d : loads.fixed_dofs) {
    state.v[d] = 0.0;
    state.a[d] = 0.0;
  }
  state.t = t_next;
  state.dT = loads.temperature(t_next);

  for (int i = 0; i < n; ++i)
    if (!std::isfinite(state.u[i]) || !std::isfinite(state.v[i]) ||
        !std::isfinite(state.a[i]))
      throw Error("numerical instability: non-finite state at step " +
                  std::to_string(step_index) + ", DOF " + std::to_string(i));
}

double prescribed_work_increment(const KinematicState& before, const KinematicState& after,
                                 const std::vector<double>& mass,
                                 const std::vector<double>& f_int_before,
                                 const std::vector<double>& f_int_after,
                                 const LoadProgram& loads, double dt) {
  double p0 = 0.0, p1 = 0.0;  // reaction power at step start / end
  for (const VelocityBc& bc : loads.velocity_bcs) {
    for (int d : bc.dofs) {
      const double r0 = mass[d] * before.a[d] + f_int_before[d];
      const double r1 = mass[d] * after.a[d] + f_int_after[d];
      p0 += r0 * before.v[d];
      p1 += r1 * after.v[d];
    }
  }
  return 0.5 * (p0 + p1) * dt;
}

}  // namespace cem
