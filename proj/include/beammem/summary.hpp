#pragma once

// Post-run analysis and the JSON summary written next to the trace.

#include <optional>
#include <string>

#include "json.hpp"

#include "beammem/config.hpp"
#include "beammem/decay_analysis.hpp"
#include "beammem/energy.hpp"
#include "beammem/simulation.hpp"

namespace beammem {

struct Analysis {
  MonitorReport monitors;
  std::optional<RateFit> full_fit;
  std::string full_fit_error;
  SlidingRates windows;
  std::string windows_error;
  double window_t_a = 0.0, window_t_b = 0.0;
  Classification classification;
  std::optional<BoundCheck> bound;
  double bound_tolerance = 0.0;
  std::optional<ObservabilityResult> observability;
  std::string observability_error;
};

inline Analysis analyze(const RunResult& run, const ExperimentConfig& cfg) {
  Analysis a;
  const auto& sim = cfg.sim;
  a.monitors = monitor(run.trace, run.k0, sim.gamma0, run.t0, cfg.analysis.tolerances);

  try {
    a.full_fit = fit_rate(run.trace);
    a.bound_tolerance = 3.0 * (1.0 - a.full_fit->r2) + 1e-9;
    a.bound = verify_bound(run.trace, a.full_fit->c1, a.full_fit->c2, a.bound_tolerance);
  } catch (const WindowError& e) {
    a.full_fit_error = e.what();
  }

  a.window_t_a = cfg.analysis.windows.t_a;
  a.window_t_b = cfg.analysis.windows.t_b.value_or(run.trace.rows.back().t);
  try {
    a.windows = sliding_rates_over(run.trace, a.window_t_a, a.window_t_b, cfg.analysis.windows.count);
    a.classification = classify(a.windows.fits, cfg.analysis.thresholds);
  } catch (const WindowError& e) {
    a.windows_error = e.what();
    a.classification.reason = e.what();
  }

  if (sim.gamma0 == 0.0 && !sim.kernel) {
    try {
      a.observability = observability_check(run.trace);
    } catch (const PreconditionError& e) {
      a.observability_error = e.what();
    }
  }
  return a;
}

namespace summary_detail {

using json = nlohmann::json;

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json check_json(const CheckResult& c) {
  json j{{"applicable", c.applicable}, {"pass", c.pass}};
  if (!c.applicable) {
    j["skip_reason"] = c.skip_reason;
  } else {
    j["worst_margin"] = c.worst_margin;
    j["worst_time"] = c.worst_time;
    j["violations"] = c.violations;
  }
  return j;
}

inline json fit_json(const RateFit& f) {
  return {{"c1", f.c1}, {"c2", f.c2}, {"t_a", f.t_a}, {"t_b", f.t_b},
          {"r2", f.r2}, {"rows", f.rows}, {"floor_hits", f.floor_hits}};
}

}  // namespace summary_detail

inline nlohmann::json admissibility_json(const AdmissibilityReport& r) {
  using summary_detail::optional_number;
  return {{"bvk_ok", r.bvk_ok},
          {"bvk_failure", r.bvk_failure.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.bvk_failure)},
          {"bvk_failure_s", optional_number(r.bvk_failure_s)},
          {"fourier_ok", r.fourier.ok},
          {"fourier_worst_omega", r.fourier.worst_omega},
          {"fourier_worst_value", r.fourier.worst_value},
          {"k0_max", optional_number(r.k0_max)},
          {"exp_decay", optional_number(r.exp_decay)},
          {"well_posed", r.well_posed()}};
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  using summary_detail::optional_number;
  const auto& s = cfg.sim;
  nlohmann::json ic;
  switch (s.initial.kind) {
    case InitialConditionSpec::Kind::eigenmode:
      ic = {{"kind", "eigenmode"}, {"mode", s.initial.mode}, {"amplitude", s.initial.amplitude}};
      break;
    case InitialConditionSpec::Kind::tip_load_shape:
      ic = {{"kind", "tip_load_shape"}, {"amplitude", s.initial.amplitude}};
      break;
    case InitialConditionSpec::Kind::custom:
      ic = {{"kind", "custom"},
            {"deflection", s.initial.deflection},
            {"rotation", s.initial.rotation},
            {"velocity", s.initial.velocity},
            {"angular_velocity", s.initial.angular_velocity}};
      break;
  }
  nlohmann::json hist{{"kind", s.history.name()}};
  if (s.history.type != HistoryFunction::Type::zero) {
    hist["amplitude"] = s.history.amplitude;
    hist["rate"] = s.history.rate;
  }
  return {{"beam", {{"n_elements", s.n_elements}}},
          {"time", {{"dt", s.dt}, {"T", s.T}}},
          {"gamma0", s.gamma0},
          {"kernel", s.kernel ? kernel_to_json(*s.kernel) : nlohmann::json(nullptr)},
          {"memory", {{"representation", to_string(s.representation)}, {"S_hist", s.s_hist}}},
          {"initial_condition", ic},
          {"history", hist},
          {"analysis",
           {{"k0", s.k0 ? nlohmann::json(*s.k0) : nlohmann::json("auto")},
            {"t0", s.t0 ? nlohmann::json(*s.t0) : nlohmann::json("auto")},
            {"override_admissibility", s.override_admissibility},
            {"fit_windows",
             {{"t_a", cfg.analysis.windows.t_a},
              {"t_b", optional_number(cfg.analysis.windows.t_b)},
              {"count", cfg.analysis.windows.count}}},
            {"classify_thresholds",
             {{"spread", cfg.analysis.thresholds.spread},
              {"drop", cfg.analysis.thresholds.drop},
              {"rate_floor", cfg.analysis.thresholds.rate_floor}}},
            {"tolerances",
             {{"dissipation", cfg.analysis.tolerances.dissipation},
              {"cross", cfg.analysis.tolerances.cross},
              {"bound", cfg.analysis.tolerances.bound}}}}},
          {"output",
           {{"csv_path", cfg.output.csv_path},
            {"summary_path", cfg.output.summary_path},
            {"stride", s.output_stride}}}};
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const RunResult& run, const Analysis& a) {
  using namespace summary_detail;
  json j;
  j["config"] = config_json(cfg);
  j["admissibility"] = run.admissibility ? admissibility_json(*run.admissibility) : json(nullptr);
  j["run"] = {{"rows", run.trace.size()},
              {"k0", optional_number(run.k0)},
              {"t0", run.t0},
              {"S_hist", optional_number(run.trace.meta.s_hist)},
              {"warnings", run.warnings},
              {"final_psi", run.trace.rows.back().psi},
              {"initial_psi", run.trace.rows.front().psi}};
  j["monitors"] = {{"dissipation", check_json(a.monitors.dissipation)},
                   {"cross_bound", check_json(a.monitors.cross_bound)},
                   {"lyapunov_monotone", check_json(a.monitors.lyapunov)},
                   {"rational_bound", check_json(a.monitors.rational)},
                   {"all_pass", a.monitors.all_pass()}};

  json fits;
  fits["full"] = a.full_fit ? fit_json(*a.full_fit) : json(nullptr);
  if (!a.full_fit_error.empty()) fits["full_error"] = a.full_fit_error;
  fits["window_range"] = {a.window_t_a, a.window_t_b};
  fits["windows"] = json::array();
  for (const auto& f : a.windows.fits) fits["windows"].push_back(fit_json(f));
  fits["floor_hits"] = a.windows.floor_hits;
  if (!a.windows_error.empty()) fits["windows_error"] = a.windows_error;
  if (a.bound) {
    fits["bound"] = {{"pass", a.bound->pass},
                     {"tolerance", a.bound_tolerance},
                     {"worst_row", a.bound->worst_row},
                     {"worst_ratio", a.bound->worst_ratio}};
  }
  j["fits"] = fits;

  j["classification"] = {{"kind", to_string(a.classification.kind)},
                         {"c1_est", a.classification.c1_est},
                         {"reason", a.classification.reason},
                         {"S_hist", optional_number(run.trace.meta.s_hist)}};
  if (a.observability) {
    j["observability"] = {{"pass", a.observability->pass},
                          {"worst_margin", a.observability->worst_margin},
                          {"worst_time", a.observability->worst_time}};
  } else if (!a.observability_error.empty()) {
    j["observability"] = {{"error", a.observability_error}};
  }
  return j;
}

}  // namespace beammem
