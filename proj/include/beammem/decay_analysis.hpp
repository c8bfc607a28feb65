#pragma once

// Decay-rate fits, decay-type classification and bound checks over energy
// traces.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "beammem/energy.hpp"
#include "beammem/errors.hpp"

namespace beammem {

inline constexpr double kEnergyFloor = 1e-280;
inline constexpr std::size_t kMinFitRows = 10;

/// psi(t) ~ c2 exp(-c1 t) psi(0) on [t_a, t_b].
struct RateFit {
  double c1 = 0.0;
  double c2 = 1.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double r2 = 1.0;
  std::size_t rows = 0;        ///< rows used in the regression
  std::size_t floor_hits = 0;  ///< rows skipped for psi <= floor
};

namespace detail {

/// Least-squares line through (t, log psi) for rows [first, last) of the
/// trace. psi0 normalizes the prefactor.
inline RateFit fit_rows(const std::vector<TraceRow>& rows, std::size_t first, std::size_t last, double psi0,
                        double floor) {
  RateFit fit;
  std::vector<double> ts, ys;
  for (std::size_t i = first; i < last; ++i) {
    if (rows[i].psi > floor) {
      ts.push_back(rows[i].t);
      ys.push_back(std::log(rows[i].psi));
    } else {
      ++fit.floor_hits;
    }
  }
  fit.rows = ts.size();
  if (ts.size() < kMinFitRows) {
    throw WindowError("fit_rate: " + std::to_string(ts.size()) + " rows above the energy floor, need at least " +
                      std::to_string(kMinFitRows));
  }
  // shift by the first log so constant data stay exactly constant
  const double y_ref = ys.front();
  for (double& y : ys) y -= y_ref;
  const auto n = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - tm, dy = ys[i] - ym;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (!(stt > 0.0)) throw WindowError("fit_rate: window spans a single time");
  const double slope = sty / stt;
  const double intercept = y_ref + ym - slope * tm;
  fit.c1 = -slope;
  fit.c2 = std::exp(intercept - std::log(psi0));
  fit.t_a = ts.front();
  fit.t_b = ts.back();
  // Constant data: the line is exact.
  fit.r2 = syy > 0.0 ? std::clamp(sty * sty / (stt * syy), 0.0, 1.0) : 1.0;
  return fit;
}

inline double reference_energy(const EnergyTrace& trace) {
  if (trace.empty()) throw WindowError("empty trace");
  const double psi0 = trace.rows.front().psi;
  if (!(psi0 > 0.0)) throw WindowError("trace has psi(0) <= 0");
  return psi0;
}

}  // namespace detail

/// Fit on the rows with t in [t_a, t_b]; c2 is relative to the first row.
inline RateFit fit_rate(const EnergyTrace& trace, double t_a, double t_b, double floor = kEnergyFloor) {
  if (!(t_a < t_b)) throw WindowError("fit_rate: window needs t_a < t_b");
  const double psi0 = detail::reference_energy(trace);
  const auto& rows = trace.rows;
  const auto lo = std::lower_bound(rows.begin(), rows.end(), t_a - 1e-12,
                                   [](const TraceRow& r, double t) { return r.t < t; });
  const auto hi = std::upper_bound(rows.begin(), rows.end(), t_b + 1e-12,
                                   [](double t, const TraceRow& r) { return t < r.t; });
  return detail::fit_rows(rows, static_cast<std::size_t>(lo - rows.begin()), static_cast<std::size_t>(hi - rows.begin()),
                          psi0, floor);
}

/// Fit over the whole trace.
inline RateFit fit_rate(const EnergyTrace& trace, double floor = kEnergyFloor) {
  const double psi0 = detail::reference_energy(trace);
  return detail::fit_rows(trace.rows, 0, trace.size(), psi0, floor);
}

struct SlidingRates {
  std::vector<RateFit> fits;
  std::size_t floor_hits = 0;  ///< rows below the floor across skipped and used windows
};

namespace detail {
inline SlidingRates slide(const std::vector<TraceRow>& rows, std::size_t width, std::size_t stride, double psi0,
                          double floor) {
  if (width < kMinFitRows) throw WindowError("sliding_rates: width must be >= 10 rows");
  if (stride < 1) throw WindowError("sliding_rates: stride must be >= 1 row");
  SlidingRates out;
  for (std::size_t first = 0; first + width <= rows.size(); first += stride) {
    try {
      auto fit = fit_rows(rows, first, first + width, psi0, floor);
      out.floor_hits += fit.floor_hits;
      out.fits.push_back(fit);
    } catch (const WindowError&) {
      for (std::size_t i = first; i < first + width; ++i) {
        if (!(rows[i].psi > floor)) ++out.floor_hits;
      }
    }
  }
  return out;
}
}  // namespace detail

/// Fits on windows of `width` rows advanced by `stride` rows. Windows with
/// fewer than 10 rows above the floor are dropped and counted in floor_hits.
inline SlidingRates sliding_rates(const EnergyTrace& trace, std::size_t width, std::size_t stride,
                                  double floor = kEnergyFloor) {
  return detail::slide(trace.rows, width, stride, detail::reference_energy(trace), floor);
}

/// Sliding fits on [t_a, t_b] split into `windows` half-overlapping windows.
inline SlidingRates sliding_rates_over(const EnergyTrace& trace, double t_a, double t_b, std::size_t windows,
                                       double floor = kEnergyFloor) {
  if (windows < 1) throw WindowError("sliding_rates: need at least one window");
  const double psi0 = detail::reference_energy(trace);
  const EnergyTrace sub = restrict_window(trace, t_a, t_b);
  // windows of width w and stride w/2 cover (windows + 1) w / 2 rows
  const std::size_t width = 2 * sub.size() / (windows + 1);
  return detail::slide(sub.rows, width, std::max<std::size_t>(1, width / 2), psi0, floor);
}

struct ClassifyThresholds {
  double spread = 0.10;      ///< exponential: every rate within this fraction of the median
  double drop = 0.50;        ///< subexponential: last <= (1 - drop) * first
  double rate_floor = 1e-6;  ///< exponential needs median > 10 * rate_floor
};

enum class DecayClass { exponential, subexponential, inconclusive };

inline const char* to_string(DecayClass c) {
  switch (c) {
    case DecayClass::exponential: return "exponential";
    case DecayClass::subexponential: return "subexponential";
    case DecayClass::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Classification {
  DecayClass kind = DecayClass::inconclusive;
  double c1_est = 0.0;  ///< median window rate
  std::string reason;
};

/// Heuristic decision from window rates; needs at least 3 windows to decide.
inline Classification classify(const std::vector<double>& rates, const ClassifyThresholds& th = {}) {
  Classification out;
  if (rates.size() < 3) {
    out.reason = "fewer than 3 windows";
    return out;
  }
  std::vector<double> sorted = rates;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  out.c1_est = median;

  const bool tight = std::all_of(rates.begin(), rates.end(),
                                 [&](double r) { return std::abs(r - median) <= th.spread * std::abs(median); });
  if (tight && median > 10.0 * th.rate_floor) {
    out.kind = DecayClass::exponential;
    out.reason = "all window rates within " + std::to_string(th.spread) + " of the median";
    return out;
  }
  const bool nonincreasing = std::is_sorted(rates.rbegin(), rates.rend());
  if (nonincreasing && rates.back() <= (1.0 - th.drop) * rates.front()) {
    out.kind = DecayClass::subexponential;
    out.reason = "window rates decrease monotonically by at least " + std::to_string(th.drop);
    return out;
  }
  out.reason = "neither rule applies";
  return out;
}

inline Classification classify(const std::vector<RateFit>& fits, const ClassifyThresholds& th = {}) {
  std::vector<double> rates;
  rates.reserve(fits.size());
  for (const auto& f : fits) rates.push_back(f.c1);
  return classify(rates, th);
}

struct BoundCheck {
  bool pass = true;
  std::size_t worst_row = 0;
  double worst_ratio = 0.0;  ///< max psi(t) / (c2 exp(-c1 t) psi(0))
};

/// Row-wise psi(t) <= c2 exp(-c1 t) psi(0) (1 + tolerance), compared in log
/// space so long decays do not underflow.
inline BoundCheck verify_bound(const EnergyTrace& trace, double c1, double c2, double tolerance) {
  const double psi0 = detail::reference_energy(trace);
  if (!(c2 > 0.0)) throw InputError("verify_bound: c2 must be > 0");
  BoundCheck out;
  double worst_log = -std::numeric_limits<double>::infinity();
  const double log_slack = std::log1p(tolerance);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace.rows[i];
    if (!(r.psi > 0.0)) continue;
    const double log_ratio = std::log(r.psi) - (std::log(c2) - c1 * r.t + std::log(psi0));
    if (log_ratio > worst_log) {
      worst_log = log_ratio;
      out.worst_row = i;
    }
    if (log_ratio > log_slack) out.pass = false;
  }
  out.worst_ratio = std::exp(worst_log);
  return out;
}

struct ObservabilityResult {
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();  ///< relative to psi_Omega(0) max(1, t)
  double worst_time = 0.0;
};

/// (t - 2) psi_Omega(0) <= int_0^t |u_t(1, tau)|^2 dtau at every trace time,
/// with the integral a cumulative trapezoid over the rows. The trace must
/// come from a conservative run.
inline ObservabilityResult observability_check(const EnergyTrace& trace, double rel_tol = 1e-6,
                                               double conservation_tol = 1e-8) {
  if (trace.size() < 2) throw PreconditionError("observability_check: trace needs at least 2 rows");
  const double e0 = trace.rows.front().psi_omega;
  if (!(e0 > 0.0)) throw PreconditionError("observability_check: psi_Omega(0) must be > 0");
  for (const auto& r : trace.rows) {
    if (std::abs(r.psi_omega - e0) > conservation_tol * e0 || r.psi_b != 0.0) {
      throw PreconditionError("observability_check: trace is not conservative (psi_Omega varies at t = " +
                              std::to_string(r.t) + ")");
    }
  }
  ObservabilityResult out;
  double integral = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace.rows[i];
    if (i > 0) {
      const auto& p = trace.rows[i - 1];
      integral += 0.5 * (r.t - p.t) * (p.v_tip * p.v_tip + r.v_tip * r.v_tip);
    }
    const double margin = (integral - (r.t - 2.0) * e0) / (e0 * std::max(1.0, r.t));
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_time = r.t;
    }
    if (margin < -rel_tol) out.pass = false;
  }
  return out;
}

}  // namespace beammem
