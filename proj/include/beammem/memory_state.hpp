#pragma once

// Boundary memory of the feedback u_xxx(1,t) = g0 u_t(1,t) + int lambda(s) u_t(1,t-s) ds.
//
// The state kept is the minimal information needed to produce the feedback:
//
//   a(s) = -int_0^inf lambda'(tau + s) w(tau) dtau,   w(tau) = u(1,t-tau) - u(1,t),
//
// with boundary energy psi_b = -1/2 int_0^inf (d a/ds)^2 / lambda'(s) ds.
//
// Two representations:
//   exp_modal  exponential-sum kernels; one amplitude per mode,
//              q_j = int_0^inf exp(-mu_j tau) u_t(1,t-tau) dtau, so that
//              a(s) = -sum_j c_j exp(-mu_j s) q_j.
//   sampled    any kernel; a ring of tip displacement/velocity samples at the
//              time step, truncated at the horizon S_hist. Older motion is
//              frozen at the oldest stored displacement.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/circular_buffer.hpp>

#include "beammem/errors.hpp"
#include "beammem/history.hpp"
#include "beammem/kernel.hpp"
#include "beammem/quadrature.hpp"

namespace beammem {

enum class MemoryRepresentation { exp_modal, sampled };

inline const char* to_string(MemoryRepresentation r) {
  return r == MemoryRepresentation::exp_modal ? "exp_modal" : "sampled";
}

struct ModalMemory {
  std::vector<double> q;
};

/// Kernel-dependent weights of the sampled representation, shared between
/// copies of a state.
struct SampledTables {
  double dt = 0.0;
  std::size_t steps = 0;                  ///< N; ages 0..N are stored
  std::vector<double> feedback_weights;   ///< trapezoid weight * lambda(k dt)
  std::vector<double> s_nodes, s_weights; ///< outer rule for psi_b
  std::vector<double> neg_inv_d1;         ///< -1/lambda'(s_m)
  std::vector<double> slope_table;        ///< [m][k] trapezoid weight * lambda''(k dt + s_m)
  std::vector<double> slope_tail;         ///< lambda'(N dt + s_m)

  double horizon() const { return dt * static_cast<double>(steps); }
};

struct SampledMemory {
  std::shared_ptr<const SampledTables> tables;
  boost::circular_buffer<double> u;  ///< u[k] = u(1, t - k dt)
  boost::circular_buffer<double> v;  ///< v[k] = u_t(1, t - k dt)
};

struct MemoryState {
  double t = 0.0;
  std::variant<ModalMemory, SampledMemory> rep;

  MemoryRepresentation representation() const {
    return std::holds_alternative<ModalMemory>(rep) ? MemoryRepresentation::exp_modal : MemoryRepresentation::sampled;
  }
  const ModalMemory& modal() const { return std::get<ModalMemory>(rep); }
  const SampledMemory& sampled() const { return std::get<SampledMemory>(rep); }
};

/// Smallest s (to relative precision 1e-9) with lambda(s) <= rel * lambda(0),
/// clipped to the tabulated support.
inline double decay_horizon(const KernelSpec& kernel, double rel) {
  double hi = horizon(kernel, rel);
  if (hi >= kernel.support_end()) return kernel.support_end();
  const double target = rel * kernel.eval(0.0);
  double lo = hi / 2.0;
  if (kernel.eval(lo) <= target) return lo;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (kernel.eval(mid) <= target ? hi : lo) = mid;
  }
  return hi;
}

inline double default_history_horizon(const KernelSpec& kernel) {
  if (kernel.family() == KernelFamily::tabulated) return 0.5 * kernel.support_end();
  return decay_horizon(kernel, 1e-12);
}

namespace detail {

inline std::shared_ptr<const SampledTables> build_sampled_tables(const KernelSpec& kernel, double dt, double s_hist) {
  if (!(dt > 0.0)) throw InputError("sampled memory: dt must be > 0");
  if (!(s_hist > 0.0)) throw InputError("sampled memory: S_hist must be > 0");
  auto t = std::make_shared<SampledTables>();
  t->dt = dt;
  const double ratio = std::ceil(s_hist / dt - 1e-9);
  if (ratio > 5e7) {
    throw InputError("sampled memory: S_hist / dt = " + std::to_string(ratio) +
                     " samples exceeds the buffer budget of 5e7; set memory.S_hist explicitly");
  }
  t->steps = static_cast<std::size_t>(ratio);
  const std::size_t n = t->steps;
  const double S = t->horizon();
  if (S > kernel.support_end()) throw InputError("sampled memory: S_hist exceeds the tabulated kernel support");

  auto trap = [&](std::size_t k) { return (k == 0 || k == n ? 0.5 : 1.0) * dt; };
  t->feedback_weights.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t->feedback_weights[k] = trap(k) * kernel.eval(dt * static_cast<double>(k));

  double s_max = std::min(decay_horizon(kernel, 1e-12), kernel.support_end() - S);
  if (!(s_max > 0.0)) throw InputError("sampled memory: no room left in the kernel support for the energy integral");
  const auto rule = quad::gauss_legendre(quad::graded_breakpoints(s_max, 0.25, 0.25 * std::max(s_max, 1.0)));
  t->s_nodes = rule.nodes;
  t->s_weights = rule.weights;
  const std::size_t m = rule.nodes.size();
  t->neg_inv_d1.resize(m);
  t->slope_tail.resize(m);
  t->slope_table.resize(m * (n + 1));
  for (std::size_t i = 0; i < m; ++i) {
    const double s = rule.nodes[i];
    const double d1 = kernel.eval(s, 1);
    if (!(d1 < 0.0)) {
      throw HypothesisError("boundary energy needs lambda'(s) < 0; violated at s = " + std::to_string(s));
    }
    t->neg_inv_d1[i] = -1.0 / d1;
    t->slope_tail[i] = kernel.eval(S + s, 1);
    for (std::size_t k = 0; k <= n; ++k) {
      t->slope_table[i * (n + 1) + k] = trap(k) * kernel.eval(dt * static_cast<double>(k) + s, 2);
    }
  }
  return t;
}

inline void require_exp_sum(const KernelSpec& kernel) {
  if (kernel.family() != KernelFamily::exponential_sum) {
    throw InputError("exp_modal memory requires an exponential_sum kernel");
  }
}

}  // namespace detail

/// Memory state at t = 0 built from a prescribed past history.
///
/// `dt` and `s_hist` are used by the sampled representation only;
/// `s_hist <= 0` selects the default horizon. `u_tip0` is u(1, 0).
inline MemoryState init_from_history(const KernelSpec& kernel, const HistoryFunction& history,
                                     MemoryRepresentation rep, double dt = 0.0, double s_hist = 0.0,
                                     double u_tip0 = 0.0) {
  if (std::abs(history.value(0.0)) > 1e-12) {
    throw InputError("past history must satisfy w(0) = 0");
  }
  MemoryState state;
  if (rep == MemoryRepresentation::exp_modal) {
    detail::require_exp_sum(kernel);
    ModalMemory m;
    for (const auto& mode : kernel.modes()) {
      if (history.type == HistoryFunction::Type::zero) {
        m.q.push_back(0.0);
        continue;
      }
      // mu int exp(-mu tau) w dtau = -q
      auto f = [&](double tau) { return std::exp(-mode.mu * tau) * history.value(tau); };
      const double end = 40.0 / mode.mu;
      const auto breaks = quad::graded_breakpoints(end, std::min(0.5 / mode.mu, history.scale()),
                                                   std::min(end, history.scale()));
      m.q.push_back(-mode.mu * quad::over_panels(f, breaks, 1e-13, 12));
    }
    state.rep = std::move(m);
    return state;
  }

  const double horizon_s = s_hist > 0.0 ? s_hist : default_history_horizon(kernel);
  SampledMemory sm;
  sm.tables = detail::build_sampled_tables(kernel, dt, horizon_s);
  const std::size_t n = sm.tables->steps;
  sm.u.set_capacity(n + 1);
  sm.v.set_capacity(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double tau = dt * static_cast<double>(k);
    sm.u.push_back(u_tip0 + history.value(tau));
    sm.v.push_back(-history.derivative(tau));
  }
  state.rep = std::move(sm);
  return state;
}

/// Memory with zero past history (the tip at rest before t = 0).
inline MemoryState zero_memory(const KernelSpec& kernel, MemoryRepresentation rep, double dt = 0.0,
                               double s_hist = 0.0, double u_tip0 = 0.0) {
  return init_from_history(kernel, HistoryFunction::zero(), rep, dt, s_hist, u_tip0);
}

/// Partial derivative of the memory integral at the new step with respect to
/// the new tip velocity: lambda(0) dt / 2 for both representations.
inline double memory_gain(const KernelSpec& kernel, double dt) { return 0.5 * dt * kernel.eval(0.0); }

/// I = int_0^inf lambda(s) u_t(1, t - s) ds = -a(0).
inline double memory_integral(const MemoryState& state, const KernelSpec& kernel) {
  if (state.representation() == MemoryRepresentation::exp_modal) {
    const auto& q = state.modal().q;
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) acc += kernel.modes()[j].c * q[j];
    return acc;
  }
  const auto& sm = state.sampled();
  const auto& w = sm.tables->feedback_weights;
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * sm.v[k];
  return acc;
}

/// Part of the next-step memory integral that does not depend on the new tip
/// velocity: I^{n+1} = memory_gain * v^{n+1} + memory_integral_known(...).
inline double memory_integral_known(const MemoryState& state, const KernelSpec& kernel, double v_tip_old, double dt) {
  if (state.representation() == MemoryRepresentation::exp_modal) {
    const auto& q = state.modal().q;
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto& m = kernel.modes()[j];
      acc += m.c * std::exp(-m.mu * dt) * (q[j] + 0.5 * dt * v_tip_old);
    }
    return acc;
  }
  const auto& sm = state.sampled();
  const auto& w = sm.tables->feedback_weights;
  double acc = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) acc += w[k] * sm.v[k - 1];
  return acc;
}

/// Advance the memory by one step dt given the tip velocity at both ends of
/// the step (and, for the sampled representation, the new tip displacement).
inline MemoryState advance(MemoryState state, const KernelSpec& kernel, double v_tip_old, double v_tip_new, double dt,
                           double u_tip_new = 0.0) {
  if (!(dt > 0.0)) throw InputError("advance: dt must be > 0");
  state.t += dt;
  if (state.representation() == MemoryRepresentation::exp_modal) {
    auto& q = std::get<ModalMemory>(state.rep).q;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double e = std::exp(-kernel.modes()[j].mu * dt);
      q[j] = e * q[j] + 0.5 * dt * (e * v_tip_old + v_tip_new);
    }
    return state;
  }
  auto& sm = std::get<SampledMemory>(state.rep);
  if (std::abs(dt - sm.tables->dt) > 1e-12 * dt) throw InputError("advance: dt differs from the sampled memory step");
  sm.u.push_front(u_tip_new);
  sm.v.push_front(v_tip_new);
  return state;
}

/// Boundary traction u_xxx(1, t) = g0 v_tip + I.
inline double feedback(const MemoryState& state, const KernelSpec& kernel, double gamma0, double v_tip) {
  return gamma0 * v_tip + memory_integral(state, kernel);
}

/// a(1, s).
inline double minimal_state(const MemoryState& state, const KernelSpec& kernel, double s) {
  if (!(s >= 0.0)) throw DomainError("minimal_state: s must be >= 0");
  if (state.representation() == MemoryRepresentation::exp_modal) {
    const auto& q = state.modal().q;
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto& m = kernel.modes()[j];
      acc -= m.c * std::exp(-m.mu * s) * q[j];
    }
    return acc;
  }
  const auto& sm = state.sampled();
  const std::size_t n = sm.tables->steps;
  const double dt = sm.tables->dt;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double weight = (k == 0 || k == n ? 0.5 : 1.0) * dt;
    acc -= weight * kernel.eval(dt * static_cast<double>(k) + s, 1) * (sm.u[k] - sm.u[0]);
  }
  return acc + (sm.u[n] - sm.u[0]) * kernel.eval(sm.tables->horizon() + s);
}

/// d a(1, s) / ds.
inline double minimal_state_slope(const MemoryState& state, const KernelSpec& kernel, double s) {
  if (!(s >= 0.0)) throw DomainError("minimal_state_slope: s must be >= 0");
  if (state.representation() == MemoryRepresentation::exp_modal) {
    const auto& q = state.modal().q;
    double acc = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto& m = kernel.modes()[j];
      acc += m.c * m.mu * std::exp(-m.mu * s) * q[j];
    }
    return acc;
  }
  const auto& sm = state.sampled();
  const std::size_t n = sm.tables->steps;
  const double dt = sm.tables->dt;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double weight = (k == 0 || k == n ? 0.5 : 1.0) * dt;
    acc -= weight * kernel.eval(dt * static_cast<double>(k) + s, 2) * (sm.u[k] - sm.u[0]);
  }
  return acc + (sm.u[n] - sm.u[0]) * kernel.eval(sm.tables->horizon() + s, 1);
}

/// psi_b = -1/2 int_0^inf (d a/ds)^2 / lambda'(s) ds >= 0.
inline double boundary_energy(const MemoryState& state, const KernelSpec& kernel) {
  if (state.representation() == MemoryRepresentation::exp_modal) {
    const auto& q = state.modal().q;
    const auto& modes = kernel.modes();
    if (modes.size() == 1) return 0.5 * modes[0].c * q[0] * q[0];
    // integrand = exp(-mu_min s) * num^2 / den, scaled to avoid underflow
    const double mmin = kernel.mu_min();
    auto f = [&](double s) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double e = modes[j].c * modes[j].mu * std::exp(-(modes[j].mu - mmin) * s);
        num += e * q[j];
        den += e;
      }
      return std::exp(-mmin * s) * num * num / den;
    };
    const double end = 40.0 / mmin;
    return 0.5 * quad::over_panels(f, quad::graded_breakpoints(end, 0.25 / mmin, end), 1e-13, 15);
  }
  const auto& sm = state.sampled();
  const auto& tb = *sm.tables;
  const std::size_t n = tb.steps;
  const double w_end = sm.u[n] - sm.u[0];
  double total = 0.0;
  for (std::size_t i = 0; i < tb.s_nodes.size(); ++i) {
    const double* row = &tb.slope_table[i * (n + 1)];
    double slope = w_end * tb.slope_tail[i];
    for (std::size_t k = 1; k <= n; ++k) slope -= row[k] * (sm.u[k] - sm.u[0]);
    total += tb.s_weights[i] * tb.neg_inv_d1[i] * slope * slope;
  }
  return 0.5 * total;
}

namespace detail {
// Panel caps for integrands containing w: oscillating histories need panels
// no longer than a half period, monotone ones do not.
inline double history_first_panel(const HistoryFunction& h) { return 0.25 * std::min(h.scale(), 1.0); }
inline double history_panel_cap(const HistoryFunction& h, double end) {
  if (h.type == HistoryFunction::Type::sine || h.type == HistoryFunction::Type::custom) return h.scale();
  return std::max(end / 8.0, 1.0);
}
}  // namespace detail

/// -1/2 int_0^inf lambda'(s) w(s)^2 ds for a past history w.
inline double graffi_functional(const HistoryFunction& history, const KernelSpec& kernel) {
  if (history.type == HistoryFunction::Type::zero) return 0.0;
  const double bound = history.sup_abs();
  double S = std::min(1.0, kernel.support_end());
  while (S < kernel.support_end() && 0.5 * bound * bound * kernel.eval(S) > 1e-13) {
    S = std::min(2.0 * S, kernel.support_end());
    if (S > 1e9) throw NumericError("graffi_functional: truncation horizon exceeded 1e9");
  }
  auto f = [&](double s) {
    const double w = history.value(s);
    return kernel.eval(s, 1) * w * w;
  };
  const auto breaks = quad::graded_breakpoints(S, detail::history_first_panel(history),
                                               detail::history_panel_cap(history, S));
  if (history.type == HistoryFunction::Type::sine || history.type == HistoryFunction::Type::custom) {
    // many short panels of a smooth integrand: a fixed rule is accurate and
    // avoids adaptive refinement chasing round-off far out in the tail
    const auto rule = quad::gauss_legendre(breaks);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
    return -0.5 * acc;
  }
  return -0.5 * quad::over_panels(f, breaks, 1e-13, 10);
}

/// psi_b of the minimal state generated by `history`, computed straight from
/// the definition with nested quadrature (no representation involved):
/// d a/ds = -int_0^inf lambda''(tau + s) w(tau) dtau.
inline double boundary_energy_from_history(const HistoryFunction& history, const KernelSpec& kernel) {
  if (history.type == HistoryFunction::Type::zero) return 0.0;
  if (kernel.family() == KernelFamily::tabulated) {
    throw InputError("boundary_energy_from_history needs an analytic kernel");
  }
  const double bound = history.sup_abs();
  auto slope = [&](double s) {
    double T = 1.0;
    while (bound * std::abs(kernel.eval(T + s, 1)) > 1e-13) T *= 2.0;
    auto g = [&](double tau) { return kernel.eval(tau + s, 2) * history.value(tau); };
    const auto breaks = quad::graded_breakpoints(T, detail::history_first_panel(history),
                                                 detail::history_panel_cap(history, T));
    return -quad::over_panels(g, breaks, 1e-12, 8);
  };
  double S = 1.0;
  while (bound * bound * kernel.eval(S) > 1e-12) S *= 2.0;
  auto f = [&](double s) {
    const double d = slope(s);
    return -d * d / kernel.eval(s, 1);
  };
  return 0.5 * quad::over_panels(f, quad::graded_breakpoints(S, 0.25, std::max(S / 8.0, 1.0)), 1e-10, 6);
}

}  // namespace beammem
