#pragma once

// Pinned scenarios with pass/fail verdicts, shared by the `demo` subcommand
// and the acceptance runner.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "beammem/decay_analysis.hpp"
#include "beammem/energy.hpp"
#include "beammem/simulation.hpp"
#include "beammem/spectrum.hpp"

namespace beammem {

struct Verdict {
  std::string name;
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

namespace experiments {

inline std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

inline KernelSpec exp_kernel() { return KernelSpec::exponential_sum({{1.0, 1.0}}); }

/// gamma0 = 1, lambda = e^{-s}, eigenmode-1 start, T = 60.
inline SimConfig damped_reference(int n_elements = 40) {
  SimConfig c;
  c.n_elements = n_elements;
  c.dt = 1e-3;
  c.T = 60.0;
  c.gamma0 = 1.0;
  c.kernel = exp_kernel();
  return c;
}

inline SimConfig conservative(double T, int mode = 1) {
  SimConfig c;
  c.n_elements = 40;
  c.dt = 1e-3;
  c.T = T;
  c.initial = InitialConditionSpec::eigenmode(mode, 1.0);
  return c;
}

inline Verdict conservation() {
  Verdict v{"conservation", true, {}};
  const auto start = std::chrono::steady_clock::now();
  const auto r = run(conservative(10.0));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double e0 = r.trace.rows.front().psi_omega;
  double drift = 0.0;
  for (const auto& row : r.trace.rows) drift = std::max(drift, std::abs(row.psi_omega - e0) / e0);
  v.require(drift <= 1e-9, "psi_Omega relative drift " + fmt(drift) + " <= 1e-9");
  const double w = dominant_frequency(r.trace.times(), r.trace.column(&TraceRow::u_tip), 0.5, 20.0);
  const double b = cantilever_beta(1);
  const double rel = std::abs(w - b * b) / (b * b);
  v.require(rel <= 0.01, "dominant tip frequency " + fmt(w) + " vs " + fmt(b * b) + " (rel " + fmt(rel) + ")");
  v.require(seconds <= 5.0, "runtime " + fmt(seconds) + " s <= 5 s");
  return v;
}

inline Verdict dissipation_identity() {
  Verdict v{"dissipation-identity", true, {}};
  const SimConfig c = damped_reference();
  const auto a = assemble(c.n_elements);
  const Stepper st(a, c.kernel, c.gamma0, c.dt);
  const auto ic = initial_condition(c.initial, a);
  auto s = st.initial_state(ic.u, ic.v, init_from_history(*c.kernel, c.history, c.representation, c.dt));
  const double e_ref = interior_energy(a, s.u, s.v);
  const double psi0 = e_ref + boundary_energy(*s.memory, *c.kernel);
  const long steps = step_count(c.T, c.dt);
  double worst_identity = 0.0, worst_rise = -std::numeric_limits<double>::infinity();
  double e_old = e_ref, psi_old = psi0;
  for (long n = 0; n < steps; ++n) {
    const double vb_old = s.v[a.tip_index];
    const double f_old = st.traction(s);
    st.step(s);
    const double e_new = interior_energy(a, s.u, s.v);
    const double psi_new = e_new + boundary_energy(*s.memory, *c.kernel);
    const double work = -0.25 * c.dt * (vb_old + s.v[a.tip_index]) * (f_old + st.traction(s));
    worst_identity = std::max(worst_identity, std::abs((e_new - e_old) - work) / e_ref);
    worst_rise = std::max(worst_rise, psi_new - psi_old);
    e_old = e_new;
    psi_old = psi_new;
  }
  v.require(worst_identity <= 1e-11, "per-step work identity, worst relative defect " + fmt(worst_identity));
  v.require(worst_rise <= 1e-9 * psi0, "largest per-step rise of psi " + fmt(worst_rise / psi0) + " psi(0)");
  return v;
}

inline Verdict monitors() {
  Verdict v{"monitors", true, {}};
  const auto r = run(damped_reference());
  v.require(r.k0 && std::abs(*r.k0 - 1.0) <= 1e-9, "k0 = " + (r.k0 ? fmt(*r.k0) : std::string("none")));
  v.require(r.t0 == 1.0, "t0 = " + fmt(r.t0));
  const auto rep = monitor(r.trace, r.k0, 1.0, r.t0, MonitorTolerances{1e-6, 1e-10, 1e-6});
  for (const auto* c : {&rep.dissipation, &rep.cross_bound, &rep.lyapunov, &rep.rational}) {
    v.require(c->applicable && c->pass,
              c->name + " worst margin " + fmt(c->worst_margin) + " at t = " + fmt(c->worst_time));
  }
  return v;
}

inline Verdict decay_exponential() {
  Verdict v{"decay-exponential", true, {}};
  std::vector<double> estimates;
  for (int n : {40, 80}) {
    const auto r = run(damped_reference(n));
    const auto s = sliding_rates_over(r.trace, 10.0, 60.0, 9);
    const auto cl = classify(s.fits);
    std::string rates;
    for (const auto& f : s.fits) rates += fmt(f.c1) + " ";
    v.note("n = " + std::to_string(n) + " window rates on [10, 60]: " + rates);
    v.require(cl.kind == DecayClass::exponential,
              "n = " + std::to_string(n) + " classification " + to_string(cl.kind) + " (" + cl.reason + ")");
    estimates.push_back(cl.c1_est);
  }
  const double rel = std::abs(estimates[1] - estimates[0]) / std::abs(estimates[0]);
  v.require(rel <= 0.10, "median rate n=40 " + fmt(estimates[0]) + " vs n=80 " + fmt(estimates[1]) +
                             " (rel " + fmt(rel) + ")");
  return v;
}

inline Verdict decay_polynomial() {
  Verdict v{"decay-polynomial", true, {}};
  SimConfig c;
  c.n_elements = 20;
  c.dt = 0.01;
  c.T = 200.0;
  c.gamma0 = 1.0;
  c.kernel = KernelSpec::polynomial(1.0, 2.0);
  c.representation = MemoryRepresentation::sampled;
  c.s_hist = 100.0;
  c.override_admissibility = true;
  c.output_stride = 10;
  const auto r = run(c);
  const double horizon = r.trace.meta.s_hist.value_or(0.0);
  v.note("S_hist = " + fmt(horizon) + " (the sampled kernel is truncated beyond this age)");

  // Within the horizon the simulated kernel is the polynomial one.
  const double t_end = std::min(c.T, horizon);
  const auto s = sliding_rates_over(r.trace, 10.0, t_end, 9);
  const auto cl = classify(s.fits);
  std::string rates;
  for (const auto& f : s.fits) rates += fmt(f.c1) + " ";
  v.note("window rates on [10, " + fmt(t_end) + "]: " + rates);
  v.require(cl.kind != DecayClass::exponential, "classification " + std::string(to_string(cl.kind)));
  bool decreasing = s.fits.size() >= 3;
  for (std::size_t i = 1; i < s.fits.size(); ++i) decreasing = decreasing && s.fits[i].c1 < s.fits[i - 1].c1;
  v.require(decreasing, "window rates decrease");

  const auto whole = sliding_rates_over(r.trace, 10.0, c.T, 9);
  rates.clear();
  for (const auto& f : whole.fits) rates += fmt(f.c1) + " ";
  v.note("for reference, rates on [10, " + fmt(c.T) + "]: " + rates + "-> " + to_string(classify(whole.fits).kind));
  return v;
}

inline Verdict proposition1() {
  Verdict v{"proposition1", true, {}};
  const auto k = exp_kernel();
  const auto h = HistoryFunction::exp_approach(1.0, 1.0);
  const double psib = boundary_energy(init_from_history(k, h, MemoryRepresentation::exp_modal), k);
  const double graffi = graffi_functional(h, k);
  v.require(std::abs(psib - 0.125) <= 1e-8, "psi_b = " + fmt(psib) + " (0.125 +- 1e-8)");
  v.require(std::abs(graffi - 1.0 / 6.0) <= 1e-8, "graffi = " + fmt(graffi) + " (1/6 +- 1e-8)");
  v.require(psib <= graffi, "psi_b=" + fmt(psib, 5) + " <= graffi=" + fmt(graffi, 5));

  const std::vector<KernelSpec> kernels{exp_kernel(), KernelSpec::exponential_sum({{2.0, 1.0}, {1.0, 3.0}}),
                                        KernelSpec::polynomial(1.0, 2.0)};
  const std::vector<HistoryFunction> histories{h, HistoryFunction::sine(0.5, 2.0),
                                               HistoryFunction::exp_approach(-2.0, 0.3)};
  for (const auto& kk : kernels) {
    for (const auto& hh : histories) {
      const bool modal = kk.family() == KernelFamily::exponential_sum;
      const double pb = modal ? boundary_energy(init_from_history(kk, hh, MemoryRepresentation::exp_modal), kk)
                              : boundary_energy(init_from_history(kk, hh, MemoryRepresentation::sampled, 0.01, 200.0), kk);
      const double g = graffi_functional(hh, kk);
      v.require(pb >= 0.0 && pb <= g, std::string(to_string(kk.family())) + " / " + hh.name() + ": psi_b " + fmt(pb) +
                                          " <= graffi " + fmt(g));
    }
  }
  return v;
}

inline Verdict pointwise() {
  Verdict v{"pointwise", true, {}};
  const SimConfig c = damped_reference();
  const auto a = assemble(c.n_elements);
  const auto& k = *c.kernel;
  const Stepper st(a, c.kernel, c.gamma0, c.dt);
  const auto ic = initial_condition(c.initial, a);
  auto s = st.initial_state(ic.u, ic.v, init_from_history(k, c.history, c.representation, c.dt));
  const auto grid = default_s_grid(k, 50);
  const long steps = step_count(c.T, c.dt);
  double worst_state = std::numeric_limits<double>::infinity();
  double worst_force = std::numeric_limits<double>::infinity();
  for (long n = 0; n <= steps; ++n) {
    if (n > 0) st.step(s);
    const double psib = boundary_energy(*s.memory, k);
    const double vb = s.v[a.tip_index];
    const double f = st.traction(s);
    worst_force = std::min(worst_force, 2.0 * c.gamma0 * c.gamma0 * vb * vb + 4.0 * k.eval(0.0) * psib - f * f);
    if (n % 100 == 0) {
      for (double age : grid) {
        const double m = minimal_state(*s.memory, k, age);
        worst_state = std::min(worst_state, 2.0 * k.eval(age) * psib - m * m);
      }
    }
  }
  v.require(worst_state >= -1e-10, "a(1,s)^2 <= 2 lambda(s) psi_b on a 50-point grid, worst margin " + fmt(worst_state));
  v.require(worst_force >= -1e-10, "|F|^2 <= 2 g0^2 |v_tip|^2 + 4 lambda(0) psi_b, worst margin " + fmt(worst_force));
  return v;
}

inline Verdict kernel_checker() {
  Verdict v{"kernel-checker", true, {}};
  const auto w = default_omega_grid();
  const auto k2 = KernelSpec::exponential_sum({{1.0, 2.0}});
  const auto r2 = check_admissibility(k2, default_s_grid(k2), w);
  v.require(r2.k0_max && std::abs(*r2.k0_max - 2.0) <= 1e-9,
            "e^{-2s}: k0_max = " + (r2.k0_max ? fmt(*r2.k0_max) : std::string("none")));
  const auto kp = KernelSpec::polynomial(1.0, 2.0);
  const auto rp = check_admissibility(kp, default_s_grid(kp), w);
  v.require(!rp.k0_max, "(1+s)^-2: k0_max absent");
  const double fv = fourier_value(exp_kernel(), 1.0);
  v.require(std::abs(fv + 0.5) <= 1e-10, "Fourier value at omega = 1: " + fmt(fv));
  const auto lap = laplace(exp_kernel(), std::complex<double>{1.0, 0.0});
  v.require(lap == std::complex<double>{0.5, 0.0}, "Laplace transform at 1: " + fmt(lap.real()));
  return v;
}

inline Verdict observability() {
  Verdict v{"observability", true, {}};
  const auto r = run(conservative(20.0));
  const auto obs = observability_check(r.trace);
  v.require(obs.pass, "(t-2) psi_Omega(0) <= int |u_t(1)|^2, worst relative margin " + fmt(obs.worst_margin) +
                          " at t = " + fmt(obs.worst_time));
  return v;
}

inline Verdict cross_representation() {
  Verdict v{"cross-representation", true, {}};
  SimConfig c = damped_reference();
  c.T = 20.0;
  c.output_stride = 100;
  const auto modal = run(c);
  c.representation = MemoryRepresentation::sampled;
  c.s_hist = 40.0;
  const auto sampled = run(c);
  double worst = 0.0;
  const std::size_t rows = std::min(modal.trace.size(), sampled.trace.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const double p = modal.trace.rows[i].psi;
    worst = std::max(worst, std::abs(sampled.trace.rows[i].psi - p) / p);
  }
  v.require(modal.trace.size() == sampled.trace.size(), "row counts " + std::to_string(modal.trace.size()) + " / " +
                                                            std::to_string(sampled.trace.size()));
  v.require(worst <= 1e-3, "max relative psi deviation " + fmt(worst) + " (S_hist = 40)");
  return v;
}

/// Named demos for the command line.
inline const std::map<std::string, std::function<Verdict()>>& demos() {
  static const std::map<std::string, std::function<Verdict()>> table{
      {"conservation", conservation},         {"decay-exponential", decay_exponential},
      {"decay-polynomial", decay_polynomial}, {"observability", observability},
      {"proposition1", proposition1}};
  return table;
}

}  // namespace experiments
}  // namespace beammem
