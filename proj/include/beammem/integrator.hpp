#pragma once

// Average-acceleration Newmark for M a + K u + F e_b = 0 with the boundary
// traction F = u_xxx(1,t) = g0 u_t(1,t) + I(t) solved implicitly.
//
// I^{n+1} depends affinely on the new tip velocity, I^{n+1} = g_m v_b^{n+1} + G^n
// with g_m = lambda(0) dt / 2, so the step solves
//
//   (M + dt^2/4 K + dt/2 (g0 + g_m) e_b e_b^T) a^{n+1} = rhs
//
// with a factorization computed once per simulation.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beammem/banded.hpp"
#include "beammem/beam_fem.hpp"
#include "beammem/errors.hpp"
#include "beammem/history.hpp"
#include "beammem/kernel.hpp"
#include "beammem/memory_state.hpp"

namespace beammem {

struct InitialConditionSpec {
  enum class Kind { eigenmode, tip_load_shape, custom };
  Kind kind = Kind::eigenmode;
  int mode = 1;
  double amplitude = 1.0;
  /// custom: nodal values at x_0 .. x_n (node 0 must be clamped)
  std::vector<double> deflection, rotation, velocity, angular_velocity;

  static InitialConditionSpec eigenmode(int k, double A) { return {Kind::eigenmode, k, A, {}, {}, {}, {}}; }
  static InitialConditionSpec tip_load_shape(double A) { return {Kind::tip_load_shape, 1, A, {}, {}, {}, {}}; }
};

struct InitialData {
  Eigen::VectorXd u, v;
  bool compatible = true;  ///< false when the data violate the free-end feedback condition
  std::string note;
};

inline InitialData initial_condition(const InitialConditionSpec& spec, const BeamAssembly& a) {
  const int n = a.mesh.n_elements;
  InitialData out;
  out.u = Eigen::VectorXd::Zero(a.dim());
  out.v = Eigen::VectorXd::Zero(a.dim());
  switch (spec.kind) {
    case InitialConditionSpec::Kind::eigenmode:
      for (int i = 1; i <= n; ++i) {
        const double x = a.mesh.node(i);
        out.u[2 * (i - 1)] = spec.amplitude * mode_shape(spec.mode, x, 0);
        out.u[2 * (i - 1) + 1] = spec.amplitude * mode_shape(spec.mode, x, 1);
      }
      break;
    case InitialConditionSpec::Kind::tip_load_shape:
      // u0 = A x^2 (3 - x) / 6: u_xx(1) = 0 but u_xxx(1) = -A
      for (int i = 1; i <= n; ++i) {
        const double x = a.mesh.node(i);
        out.u[2 * (i - 1)] = spec.amplitude * x * x * (3.0 - x) / 6.0;
        out.u[2 * (i - 1) + 1] = spec.amplitude * x * (2.0 - x) / 2.0;
      }
      out.compatible = false;
      out.note = "tip_load_shape initial data violate the shear feedback condition at t = 0 (u_xxx(1,0) = -A)";
      break;
    case InitialConditionSpec::Kind::custom: {
      const auto expect = static_cast<std::size_t>(n + 1);
      auto get = [&](const std::vector<double>& field, const char* name, bool required) -> std::vector<double> {
        if (field.empty() && !required) return std::vector<double>(expect, 0.0);
        if (field.size() != expect) {
          throw InputError(std::string("custom initial condition: '") + name + "' needs n_elements + 1 values");
        }
        if (std::abs(field[0]) > 1e-12) {
          throw InputError(std::string("custom initial condition: '") + name + "' violates the clamp at x = 0");
        }
        return field;
      };
      const auto w = get(spec.deflection, "deflection", true);
      const auto th = get(spec.rotation, "rotation", true);
      const auto wv = get(spec.velocity, "velocity", false);
      const auto thv = get(spec.angular_velocity, "angular_velocity", false);
      for (int i = 1; i <= n; ++i) {
        out.u[2 * (i - 1)] = w[static_cast<std::size_t>(i)];
        out.u[2 * (i - 1) + 1] = th[static_cast<std::size_t>(i)];
        out.v[2 * (i - 1)] = wv[static_cast<std::size_t>(i)];
        out.v[2 * (i - 1) + 1] = thv[static_cast<std::size_t>(i)];
      }
      break;
    }
  }
  return out;
}

struct SimState {
  double t = 0.0;
  Eigen::VectorXd u, v, a;
  std::optional<MemoryState> memory;  ///< absent when no kernel is configured
};

/// One simulation's stepping machinery: a copy of the assembly and the
/// factorized effective matrix.
class Stepper {
 public:
  Stepper(const BeamAssembly& assembly, std::optional<KernelSpec> kernel, double gamma0, double dt)
      : assembly_(assembly), kernel_(std::move(kernel)), gamma0_(gamma0), dt_(dt),
        factor_(effective_matrix(assembly, kernel_, gamma0, dt)) {}

  const BeamAssembly& assembly() const { return assembly_; }
  const std::optional<KernelSpec>& kernel() const { return kernel_; }
  double gamma0() const { return gamma0_; }
  double dt() const { return dt_; }

  /// Effective tip coefficient g0 + lambda(0) dt / 2.
  double tip_gain() const { return gamma0_ + (kernel_ ? memory_gain(*kernel_, dt_) : 0.0); }

  /// State at t = 0 with a consistent initial acceleration.
  SimState initial_state(Eigen::VectorXd u0, Eigen::VectorXd v0, std::optional<MemoryState> memory) const {
    if (u0.size() != assembly_.dim() || v0.size() != assembly_.dim()) {
      throw InputError("initial state: dimension mismatch");
    }
    if (kernel_.has_value() != memory.has_value()) {
      throw InputError("initial state: memory must be given exactly when a kernel is configured");
    }
    SimState s;
    s.u = std::move(u0);
    s.v = std::move(v0);
    s.memory = std::move(memory);
    Eigen::VectorXd rhs = -assembly_.stiffness.multiply(s.u);
    rhs[assembly_.tip_index] -= traction(s);
    s.a = BandedCholesky(assembly_.mass).solve(rhs);
    return s;
  }

  /// u_xxx(1, t) for the given state.
  double traction(const SimState& s) const {
    const double vb = s.v[assembly_.tip_index];
    return kernel_ ? feedback(*s.memory, *kernel_, gamma0_, vb) : gamma0_ * vb;
  }

  void step(SimState& s) const {
    const int b = assembly_.tip_index;
    const double dt = dt_;
    const Eigen::VectorXd u_pred = s.u + dt * s.v + (0.25 * dt * dt) * s.a;
    const Eigen::VectorXd v_pred = s.v + (0.5 * dt) * s.a;
    const double v_old = s.v[b];
    const double known = kernel_ ? memory_integral_known(*s.memory, *kernel_, v_old, dt) : 0.0;

    Eigen::VectorXd rhs = -assembly_.stiffness.multiply(u_pred);
    rhs[b] -= tip_gain() * v_pred[b] + known;
    s.a = factor_.solve(rhs);
    s.u = u_pred + (0.25 * dt * dt) * s.a;
    s.v = v_pred + (0.5 * dt) * s.a;
    if (kernel_) s.memory = advance(std::move(*s.memory), *kernel_, v_old, s.v[b], dt, s.u[b]);
    s.t += dt;
  }

  /// Backward error of the momentum balance:
  /// ||M a + K u + F e_b||_inf / || |M||a| + |K||u| + |F| e_b ||_inf.
  double residual(const SimState& s) const {
    const double f = traction(s);
    Eigen::VectorXd r = assembly_.mass.multiply(s.a) + assembly_.stiffness.multiply(s.u);
    r[assembly_.tip_index] += f;
    Eigen::VectorXd scale = assembly_.mass.multiply_abs(s.a) + assembly_.stiffness.multiply_abs(s.u);
    scale[assembly_.tip_index] += std::abs(f);
    const double denom = scale.lpNorm<Eigen::Infinity>();
    const double num = r.lpNorm<Eigen::Infinity>();
    return denom > 0.0 ? num / denom : num;
  }

 private:
  static BandedSymmetric effective_matrix(const BeamAssembly& a, const std::optional<KernelSpec>& kernel,
                                          double gamma0, double dt) {
    if (!(dt > 0.0)) throw InputError("time step must be > 0");
    if (!(gamma0 >= 0.0)) throw InputError("gamma0 must be >= 0");
    BandedSymmetric m = a.mass.plus(a.stiffness, 0.25 * dt * dt);
    const double gain = gamma0 + (kernel ? memory_gain(*kernel, dt) : 0.0);
    const auto b = static_cast<std::size_t>(a.tip_index);
    m.at(b, b) += 0.5 * dt * gain;
    return m;
  }

  BeamAssembly assembly_;
  std::optional<KernelSpec> kernel_;
  double gamma0_;
  double dt_;
  BandedCholesky factor_;
};

}  // namespace beammem
