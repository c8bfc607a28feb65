#pragma once

// Energy traces and runtime monitors for the decay estimates.
//
// A trace row holds psi_Omega (beam), psi_b (memory), psi = psi_Omega + psi_b,
// the tip motion, the traction F = u_xxx(1,t), the cross term
// int x u_t u_x dx and the Lyapunov value L = (t + t0) psi + cross.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beammem/errors.hpp"

namespace beammem {

struct TraceRow {
  double t = 0.0;
  double psi_omega = 0.0;
  double psi_b = 0.0;
  double psi = 0.0;
  double u_tip = 0.0;
  double v_tip = 0.0;
  double F = 0.0;
  double cross = 0.0;
  double L = 0.0;
};

struct TraceMeta {
  double dt = 0.0;
  int stride = 1;
  double t0 = 1.0;
  std::optional<double> k0;
  std::optional<double> s_hist;
  std::string config_echo;
};

struct EnergyTrace {
  std::vector<TraceRow> rows;
  TraceMeta meta;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  template <class Field>
  std::vector<double> column(Field field) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.*field);
    return out;
  }
  std::vector<double> times() const { return column(&TraceRow::t); }
  std::vector<double> psi() const { return column(&TraceRow::psi); }
};

/// Rows with t in [t_a, t_b].
inline EnergyTrace restrict_window(const EnergyTrace& trace, double t_a, double t_b) {
  EnergyTrace out;
  out.meta = trace.meta;
  for (const auto& r : trace.rows) {
    if (r.t >= t_a - 1e-12 && r.t <= t_b + 1e-12) out.rows.push_back(r);
  }
  return out;
}

/// Smallest admissible t0 for the Lyapunov functional:
/// max{ (1 + g0^2) / (2 g0), lambda(0) / k0, 1 }.
inline double t0_threshold(double gamma0, double lambda0, double k0) {
  if (!(gamma0 > 0.0)) throw InputError("t0_threshold: gamma0 must be > 0");
  if (!(k0 > 0.0)) throw InputError("t0_threshold: k0 must be > 0");
  if (!(lambda0 > 0.0)) throw InputError("t0_threshold: lambda(0) must be > 0");
  return std::max({(1.0 + gamma0 * gamma0) / (2.0 * gamma0), lambda0 / k0, 1.0});
}

inline double lyapunov(const TraceRow& row, double t0) { return (row.t + t0) * row.psi + row.cross; }

struct MonitorTolerances {
  double dissipation = 1e-6;  ///< eps_1, relative to psi(0), per unit time
  double cross = 1e-10;       ///< eps_2, relative to psi(0)
  double bound = 1e-6;        ///< eps_3, relative slack on the rational bound
};

struct CheckResult {
  std::string name;
  bool applicable = true;
  std::string skip_reason;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  std::vector<std::size_t> violations;  ///< row indices, capped at 100
};

struct MonitorReport {
  CheckResult dissipation;  ///< psi' <= -g0 |u_t(1,t)|^2 - k0 psi_b
  CheckResult cross_bound;  ///< |int x u_t u_x dx| <= psi_Omega
  CheckResult lyapunov;     ///< L nonincreasing
  CheckResult rational;     ///< psi(t) <= (t0 + 1) psi(0) / (t + t0 - 1)

  bool all_pass() const {
    for (const auto* c : {&dissipation, &cross_bound, &lyapunov, &rational}) {
      if (c->applicable && !c->pass) return false;
    }
    return true;
  }
};

namespace detail {
inline void record(CheckResult& c, std::size_t row, double t, double margin, double tol) {
  if (margin < c.worst_margin) {
    c.worst_margin = margin;
    c.worst_time = t;
  }
  if (margin < -tol) {
    c.pass = false;
    if (c.violations.size() < 100) c.violations.push_back(row);
  }
}
inline void skip(CheckResult& c, std::string reason) {
  c.applicable = false;
  c.skip_reason = std::move(reason);
  c.worst_margin = 0.0;
}
}  // namespace detail

/// Check the decay inequalities row by row. Monitors annotate; they never
/// throw on a violation.
///
/// The dissipation inequality and the monotonicity of L are checked on each
/// row interval [t_i, t_{i+1}] as a difference quotient centered at the
/// interval midpoint, with the right-hand side averaged over the endpoints.
inline MonitorReport monitor(const EnergyTrace& trace, std::optional<double> k0, double gamma0, double t0,
                             const MonitorTolerances& tol = {}) {
  if (trace.size() < 3) throw InputError("monitor: trace needs at least 3 rows");
  const auto& rows = trace.rows;
  const double psi0 = rows.front().psi;

  MonitorReport rep;
  rep.dissipation.name = "dissipation";
  rep.cross_bound.name = "cross_bound";
  rep.lyapunov.name = "lyapunov_monotone";
  rep.rational.name = "rational_bound";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    detail::record(rep.cross_bound, i, r.t, r.psi_omega - std::abs(r.cross), tol.cross * psi0);
  }

  std::string unmet;
  if (!(gamma0 > 0.0)) unmet = "gamma0 = 0: decay hypotheses unmet";
  else if (!k0 || !(*k0 > 0.0)) unmet = "no positive k0 with lambda'' + k0 lambda' >= 0: decay hypotheses unmet";
  if (!unmet.empty()) {
    detail::skip(rep.dissipation, unmet);
    detail::skip(rep.lyapunov, unmet);
    detail::skip(rep.rational, unmet);
    return rep;
  }

  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[i + 1];
    const double h = b.t - a.t;
    if (!(h > 0.0)) throw InputError("monitor: trace times must be strictly increasing");
    const double vbar = 0.5 * (a.v_tip + b.v_tip);
    const double psib_bar = 0.5 * (a.psi_b + b.psi_b);
    const double rate = (b.psi - a.psi) / h;
    detail::record(rep.dissipation, i + 1, b.t, -gamma0 * vbar * vbar - *k0 * psib_bar - rate,
                   tol.dissipation * psi0);
    const double l_rate = (lyapunov(b, t0) - lyapunov(a, t0)) / h;
    detail::record(rep.lyapunov, i + 1, b.t, -l_rate, tol.dissipation * psi0);
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double denom = r.t + t0 - 1.0;
    if (!(denom > 0.0)) continue;
    const double bound = (t0 + 1.0) / denom * psi0 * (1.0 + tol.bound);
    detail::record(rep.rational, i, r.t, bound - r.psi, 0.0);
  }
  return rep;
}

}  // namespace beammem
