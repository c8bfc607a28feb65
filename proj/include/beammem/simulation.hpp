#pragma once

// End-to-end runs: configuration, admissibility gate, stepping and trace
// recording.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "beammem/beam_fem.hpp"
#include "beammem/energy.hpp"
#include "beammem/errors.hpp"
#include "beammem/history.hpp"
#include "beammem/integrator.hpp"
#include "beammem/kernel.hpp"
#include "beammem/memory_state.hpp"

namespace beammem {

struct SimConfig {
  int n_elements = 40;
  double dt = 1e-3;
  double T = 10.0;
  double gamma0 = 0.0;
  std::optional<KernelSpec> kernel;
  MemoryRepresentation representation = MemoryRepresentation::exp_modal;
  double s_hist = 0.0;  ///< sampled memory horizon; <= 0 selects the default
  InitialConditionSpec initial = InitialConditionSpec::eigenmode(1, 1.0);
  HistoryFunction history = HistoryFunction::zero();
  int output_stride = 1;
  std::optional<double> k0;  ///< absent: largest admissible k0 of the kernel
  std::optional<double> t0;  ///< absent: t0_threshold
  bool override_admissibility = false;
};

struct RunResult {
  EnergyTrace trace;
  SimState final_state;
  std::optional<AdmissibilityReport> admissibility;
  std::optional<double> k0;
  double t0 = 1.0;
  std::vector<std::string> warnings;
};

/// Number of steps covering [0, T]; T/dt is rounded when it is an integer
/// up to round-off.
inline long step_count(double T, double dt) {
  const double ratio = T / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<long>(nearest);
  return static_cast<long>(std::floor(ratio));
}

inline void validate(const SimConfig& c) {
  if (c.n_elements < 2) throw InputError("beam.n_elements must be >= 2");
  if (!(c.dt > 0.0)) throw InputError("time.dt must be > 0");
  if (!(c.T > 0.0)) throw InputError("time.T must be > 0");
  if (c.dt > c.T) throw InputError("time.dt must not exceed time.T");
  if (!(c.gamma0 >= 0.0)) throw InputError("gamma0 must be >= 0");
  if (c.output_stride < 1) throw InputError("output stride must be >= 1");
  if (c.kernel && c.representation == MemoryRepresentation::exp_modal &&
      c.kernel->family() != KernelFamily::exponential_sum) {
    throw InputError("memory.representation 'exp_modal' requires an exponential_sum kernel; use 'sampled'");
  }
}

/// Name of the first failed well-posedness hypothesis, empty when none.
inline std::string failed_hypothesis(const AdmissibilityReport& r) {
  if (!r.bvk_ok) {
    std::ostringstream s;
    s << r.bvk_failure;
    if (r.bvk_failure_s) s << " (fails at s = " << *r.bvk_failure_s << ")";
    return s.str();
  }
  if (!r.fourier.ok) {
    std::ostringstream s;
    s << "omega int lambda'(s) sin(omega s) ds < 0 (fails at omega = " << r.fourier.worst_omega << ")";
    return s.str();
  }
  return {};
}

inline TraceRow make_row(const Stepper& stepper, const SimState& s, double t0) {
  const auto& a = stepper.assembly();
  TraceRow r;
  r.t = s.t;
  r.psi_omega = interior_energy(a, s.u, s.v);
  r.psi_b = stepper.kernel() ? boundary_energy(*s.memory, *stepper.kernel()) : 0.0;
  r.psi = r.psi_omega + r.psi_b;
  r.u_tip = s.u[a.tip_index];
  r.v_tip = s.v[a.tip_index];
  r.F = stepper.traction(s);
  r.cross = cross_term(a, s.u, s.v);
  r.L = lyapunov(r, t0);
  return r;
}

inline RunResult run(const SimConfig& config) {
  validate(config);
  RunResult result;

  if (config.kernel) {
    const auto& kernel = *config.kernel;
    const auto s_grid = default_s_grid(kernel);
    const auto w_grid = default_omega_grid();
    result.admissibility = check_admissibility(kernel, s_grid, w_grid);
    const auto& rep = *result.admissibility;
    const std::string failed = failed_hypothesis(rep);
    if (!failed.empty()) {
      if (!config.override_admissibility) throw HypothesisError("kernel is not admissible: " + failed);
      result.warnings.push_back("admissibility overridden: " + failed);
    }
    if (config.k0) {
      result.k0 = config.k0;
    } else if (rep.k0_max) {
      result.k0 = rep.k0_max;
    } else if (!config.override_admissibility) {
      throw HypothesisError(
          "kernel is not admissible: lambda'' + k0 lambda' >= 0 holds for no k0 > 0 (k0 'auto' needs it)");
    } else {
      result.warnings.push_back("admissibility overridden: lambda'' + k0 lambda' >= 0 holds for no k0 > 0");
    }
  } else if (config.k0) {
    result.k0 = config.k0;
  }

  if (config.t0) {
    result.t0 = *config.t0;
  } else if (config.gamma0 > 0.0 && config.kernel && result.k0) {
    result.t0 = t0_threshold(config.gamma0, config.kernel->eval(0.0), *result.k0);
  } else if (config.gamma0 > 0.0 && !config.kernel) {
    result.t0 = std::max((1.0 + config.gamma0 * config.gamma0) / (2.0 * config.gamma0), 1.0);
  } else {
    result.t0 = 1.0;
  }

  const BeamAssembly assembly = assemble(config.n_elements);
  const InitialData init = initial_condition(config.initial, assembly);
  if (!init.compatible) result.warnings.push_back(init.note);

  std::optional<MemoryState> memory;
  if (config.kernel) {
    memory = init_from_history(*config.kernel, config.history, config.representation, config.dt, config.s_hist,
                               init.u[assembly.tip_index]);
  }
  const Stepper stepper(assembly, config.kernel, config.gamma0, config.dt);
  SimState state = stepper.initial_state(init.u, init.v, std::move(memory));

  auto& trace = result.trace;
  trace.meta.dt = config.dt;
  trace.meta.stride = config.output_stride;
  trace.meta.t0 = result.t0;
  trace.meta.k0 = result.k0;
  if (state.memory && state.memory->representation() == MemoryRepresentation::sampled) {
    trace.meta.s_hist = state.memory->sampled().tables->horizon();
  }

  const long steps = step_count(config.T, config.dt);
  trace.rows.reserve(static_cast<std::size_t>(steps / config.output_stride + 1));
  trace.rows.push_back(make_row(stepper, state, result.t0));
  for (long n = 1; n <= steps; ++n) {
    stepper.step(state);
    state.t = static_cast<double>(n) * config.dt;
    const int b = assembly.tip_index;
    if (!std::isfinite(state.u[b]) || !std::isfinite(state.v[b]) || !std::isfinite(state.a[b])) {
      throw NumericError("non-finite state detected at step " + std::to_string(n));
    }
    if (n % config.output_stride == 0) trace.rows.push_back(make_row(stepper, state, result.t0));
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace beammem
