#pragma once

// JSON experiment configuration. Every error names the offending field by its
// dotted path, or the line and column for malformed JSON.
//
// {
//   "beam":   {"n_elements": 40},
//   "time":   {"dt": 1e-3, "T": 40},
//   "gamma0": 1.0,
//   "kernel": {"family": "exponential_sum", "modes": [{"c": 1, "mu": 1}]} | null,
//   "memory": {"representation": "exp_modal" | "sampled", "S_hist": 40},
//   "initial_condition": {"kind": "eigenmode", "mode": 1, "amplitude": 1},
//   "history": {"kind": "zero" | "exp_approach" | "sine", "amplitude": 1, "rate": 1},
//   "analysis": {"k0": "auto", "t0": "auto",
//                "fit_windows": {"t_a": 0, "t_b": null, "count": 9},
//                "classify_thresholds": {"spread": 0.1, "drop": 0.5, "rate_floor": 1e-6},
//                "tolerances": {"dissipation": 1e-6, "cross": 1e-10, "bound": 1e-6},
//                "override_admissibility": false},
//   "output": {"csv_path": "trace.csv", "summary_path": "summary.json", "stride": 1}
// }

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beammem/decay_analysis.hpp"
#include "beammem/energy.hpp"
#include "beammem/simulation.hpp"

namespace beammem {

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct FitWindows {
  double t_a = 0.0;
  std::optional<double> t_b;  ///< absent: end of the run
  std::size_t count = 9;
};

struct AnalysisConfig {
  FitWindows windows;
  ClassifyThresholds thresholds;
  MonitorTolerances tolerances;
};

struct OutputConfig {
  std::string csv_path = "trace.csv";
  std::string summary_path = "summary.json";
};

struct ExperimentConfig {
  SimConfig sim;
  AnalysisConfig analysis;
  OutputConfig output;
};

namespace config_detail {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

inline void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail(join(path, item.key()), "unknown field");
  }
}

inline double number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (fallback) return *fallback;
    fail(p, "required number is missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(p, "expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

inline long integer(const json& obj, const std::string& path, const char* key, std::optional<long> fallback) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (fallback) return *fallback;
    fail(p, "required integer is missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(p, "expected an integer, got " + std::string(v.type_name()));
  return v.get<long>();
}

inline std::string text(const json& obj, const std::string& path, const char* key, std::optional<std::string> fallback) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (fallback) return *fallback;
    fail(p, "required string is missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(p, "expected a string, got " + std::string(v.type_name()));
  return v.get<std::string>();
}

inline bool flag(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

inline std::vector<double> numbers(const json& obj, const std::string& path, const char* key, bool required) {
  const std::string p = join(path, key);
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (required) fail(p, "required array is missing");
    return {};
  }
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(p + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

/// "auto" or a number.
inline std::optional<double> auto_or_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  const auto& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (!v.is_number()) fail(join(path, key), "expected \"auto\" or a number");
  return v.get<double>();
}

/// Wraps library validation errors with the field path.
template <class F>
auto guarded(const std::string& path, F make) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

}  // namespace config_detail

inline KernelSpec parse_kernel(const nlohmann::json& k, const std::string& path = "kernel") {
  using namespace config_detail;
  if (!k.is_object()) fail(path, "expected an object");
  const std::string family = text(k, path, "family", std::nullopt);
  if (family == "exponential_sum") {
    only_keys(k, path, {"family", "modes"});
    if (!k.contains("modes") || !k.at("modes").is_array()) fail(join(path, "modes"), "expected an array of {c, mu}");
    std::vector<ExpMode> modes;
    const auto& arr = k.at("modes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string mp = join(path, "modes") + "[" + std::to_string(i) + "]";
      only_keys(arr[i], mp, {"c", "mu"});
      modes.push_back({number(arr[i], mp, "c", std::nullopt), number(arr[i], mp, "mu", std::nullopt)});
    }
    return guarded(join(path, "modes"), [&] { return KernelSpec::exponential_sum(modes); });
  }
  if (family == "polynomial") {
    only_keys(k, path, {"family", "c", "p"});
    const double c = number(k, path, "c", std::nullopt), p = number(k, path, "p", std::nullopt);
    return guarded(path, [&] { return KernelSpec::polynomial(c, p); });
  }
  if (family == "tabulated") {
    only_keys(k, path, {"family", "ds", "values"});
    const double ds = number(k, path, "ds", std::nullopt);
    auto values = numbers(k, path, "values", true);
    return guarded(path, [&] { return KernelSpec::tabulated(ds, std::move(values)); });
  }
  fail(join(path, "family"), "unknown family '" + family + "' (exponential_sum, polynomial, tabulated)");
}

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
  nlohmann::json j;
  j["family"] = to_string(k.family());
  switch (k.family()) {
    case KernelFamily::exponential_sum:
      j["modes"] = nlohmann::json::array();
      for (const auto& m : k.modes()) j["modes"].push_back({{"c", m.c}, {"mu", m.mu}});
      break;
    case KernelFamily::polynomial:
      j["c"] = k.amplitude();
      j["p"] = k.exponent();
      break;
    case KernelFamily::tabulated:
      j["ds"] = k.step();
      j["values"] = k.values();
      break;
  }
  return j;
}

inline ExperimentConfig parse_config(const nlohmann::json& root) {
  using namespace config_detail;
  only_keys(root, "", {"beam", "time", "gamma0", "kernel", "memory", "initial_condition", "history", "analysis",
                       "output"});
  ExperimentConfig cfg;
  auto& sim = cfg.sim;
  const json empty = json::object();
  auto section = [&](const char* key) -> const json& {
    if (!root.contains(key) || root.at(key).is_null()) return empty;
    if (!root.at(key).is_object()) fail(key, "expected an object");
    return root.at(key);
  };

  const auto& beam = section("beam");
  only_keys(beam, "beam", {"n_elements"});
  sim.n_elements = static_cast<int>(integer(beam, "beam", "n_elements", 40));

  const auto& time = section("time");
  only_keys(time, "time", {"dt", "T"});
  sim.dt = number(time, "time", "dt", 1e-3);
  sim.T = number(time, "time", "T", std::nullopt);

  sim.gamma0 = number(root, "", "gamma0", 0.0);

  if (root.contains("kernel") && !root.at("kernel").is_null()) sim.kernel = parse_kernel(root.at("kernel"));

  const auto& memory = section("memory");
  only_keys(memory, "memory", {"representation", "S_hist"});
  const std::string rep = text(memory, "memory", "representation", std::string("exp_modal"));
  if (rep == "exp_modal") sim.representation = MemoryRepresentation::exp_modal;
  else if (rep == "sampled") sim.representation = MemoryRepresentation::sampled;
  else fail("memory.representation", "expected \"exp_modal\" or \"sampled\"");
  sim.s_hist = number(memory, "memory", "S_hist", 0.0);

  const auto& ic = section("initial_condition");
  const std::string kind = text(ic, "initial_condition", "kind", std::string("eigenmode"));
  if (kind == "eigenmode") {
    only_keys(ic, "initial_condition", {"kind", "mode", "amplitude"});
    const long mode = integer(ic, "initial_condition", "mode", 1);
    if (mode < 1 || mode > 5) fail("initial_condition.mode", "must be in 1..5");
    sim.initial = InitialConditionSpec::eigenmode(static_cast<int>(mode),
                                                  number(ic, "initial_condition", "amplitude", 1.0));
  } else if (kind == "tip_load_shape") {
    only_keys(ic, "initial_condition", {"kind", "amplitude"});
    sim.initial = InitialConditionSpec::tip_load_shape(number(ic, "initial_condition", "amplitude", 1.0));
  } else if (kind == "custom") {
    only_keys(ic, "initial_condition", {"kind", "deflection", "rotation", "velocity", "angular_velocity"});
    InitialConditionSpec s;
    s.kind = InitialConditionSpec::Kind::custom;
    s.deflection = numbers(ic, "initial_condition", "deflection", true);
    s.rotation = numbers(ic, "initial_condition", "rotation", true);
    s.velocity = numbers(ic, "initial_condition", "velocity", false);
    s.angular_velocity = numbers(ic, "initial_condition", "angular_velocity", false);
    sim.initial = std::move(s);
  } else {
    fail("initial_condition.kind", "expected eigenmode, tip_load_shape or custom");
  }

  const auto& hist = section("history");
  const std::string hk = text(hist, "history", "kind", std::string("zero"));
  if (hk == "zero") {
    only_keys(hist, "history", {"kind"});
    sim.history = HistoryFunction::zero();
  } else if (hk == "exp_approach" || hk == "sine") {
    only_keys(hist, "history", {"kind", "amplitude", "rate"});
    const double A = number(hist, "history", "amplitude", std::nullopt);
    const double rate = number(hist, "history", "rate", std::nullopt);
    sim.history = guarded("history", [&] {
      return hk == "sine" ? HistoryFunction::sine(A, rate) : HistoryFunction::exp_approach(A, rate);
    });
  } else {
    fail("history.kind", "expected zero, exp_approach or sine");
  }

  const auto& an = section("analysis");
  only_keys(an, "analysis", {"k0", "t0", "fit_windows", "classify_thresholds", "tolerances", "override_admissibility"});
  sim.k0 = auto_or_number(an, "analysis", "k0");
  sim.t0 = auto_or_number(an, "analysis", "t0");
  if (sim.k0 && !(*sim.k0 > 0.0)) fail("analysis.k0", "must be > 0");
  if (sim.t0 && !(*sim.t0 > 0.0)) fail("analysis.t0", "must be > 0");
  sim.override_admissibility = flag(an, "analysis", "override_admissibility", false);
  if (an.contains("fit_windows") && !an.at("fit_windows").is_null()) {
    const auto& fw = an.at("fit_windows");
    only_keys(fw, "analysis.fit_windows", {"t_a", "t_b", "count"});
    cfg.analysis.windows.t_a = number(fw, "analysis.fit_windows", "t_a", 0.0);
    if (fw.contains("t_b") && !fw.at("t_b").is_null()) {
      cfg.analysis.windows.t_b = number(fw, "analysis.fit_windows", "t_b", std::nullopt);
    }
    const long count = integer(fw, "analysis.fit_windows", "count", 9);
    if (count < 1) fail("analysis.fit_windows.count", "must be >= 1");
    cfg.analysis.windows.count = static_cast<std::size_t>(count);
  }
  if (an.contains("classify_thresholds") && !an.at("classify_thresholds").is_null()) {
    const auto& th = an.at("classify_thresholds");
    const std::string p = "analysis.classify_thresholds";
    only_keys(th, p, {"spread", "drop", "rate_floor"});
    auto& t = cfg.analysis.thresholds;
    t.spread = number(th, p, "spread", t.spread);
    t.drop = number(th, p, "drop", t.drop);
    t.rate_floor = number(th, p, "rate_floor", t.rate_floor);
  }
  if (an.contains("tolerances") && !an.at("tolerances").is_null()) {
    const auto& tl = an.at("tolerances");
    const std::string p = "analysis.tolerances";
    only_keys(tl, p, {"dissipation", "cross", "bound"});
    auto& t = cfg.analysis.tolerances;
    t.dissipation = number(tl, p, "dissipation", t.dissipation);
    t.cross = number(tl, p, "cross", t.cross);
    t.bound = number(tl, p, "bound", t.bound);
  }

  const auto& out = section("output");
  only_keys(out, "output", {"csv_path", "summary_path", "stride"});
  cfg.output.csv_path = text(out, "output", "csv_path", cfg.output.csv_path);
  cfg.output.summary_path = text(out, "output", "summary_path", cfg.output.summary_path);
  const long stride = integer(out, "output", "stride", 1);
  if (stride < 1) fail("output.stride", "must be >= 1");
  sim.output_stride = static_cast<int>(stride);

  guarded("", [&] {
    validate(sim);
    return 0;
  });
  return cfg;
}

/// Parse JSON text; syntax errors report line and column.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                      e.what() + ")");
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace beammem
