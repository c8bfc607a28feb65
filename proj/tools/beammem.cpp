#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "beammem/config.hpp"
#include "beammem/csv.hpp"
#include "beammem/experiments.hpp"
#include "beammem/summary.hpp"

namespace fs = std::filesystem;
using namespace beammem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct Options {
  std::string config;
  std::string out = ".";
  bool strict = false;
  bool override_admissibility = false;
  int stride = 0;
  bool quiet = false;
  std::string demo;
};

fs::path resolve(const std::string& dir, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p : fs::path(dir) / p;
}

int simulate(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.override_admissibility) cfg.sim.override_admissibility = true;
  if (opt.stride > 0) cfg.sim.output_stride = opt.stride;

  const RunResult result = run(cfg.sim);
  const Analysis analysis = analyze(result, cfg);

  fs::create_directories(opt.out);
  const fs::path csv_path = resolve(opt.out, cfg.output.csv_path);
  const fs::path summary_path = resolve(opt.out, cfg.output.summary_path);
  {
    std::ofstream csv(csv_path);
    if (!csv) throw InputError("cannot write '" + csv_path.string() + "'");
    write_csv(csv, result.trace);
  }
  {
    std::ofstream js(summary_path);
    if (!js) throw InputError("cannot write '" + summary_path.string() + "'");
    js << summary_json(cfg, result, analysis).dump(2) << '\n';
  }

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  const bool monitors_ok = analysis.monitors.all_pass();
  if (!opt.quiet) {
    std::cout << "rows " << result.trace.size() << ", psi " << result.trace.rows.front().psi << " -> "
              << result.trace.rows.back().psi << '\n';
    std::cout << "monitors " << (monitors_ok ? "pass" : "VIOLATED") << ", classification "
              << to_string(analysis.classification.kind) << '\n';
    std::cout << "wrote " << csv_path.string() << " and " << summary_path.string() << '\n';
  }
  if (!monitors_ok) {
    for (const auto* c : {&analysis.monitors.dissipation, &analysis.monitors.cross_bound, &analysis.monitors.lyapunov,
                          &analysis.monitors.rational}) {
      if (c->applicable && !c->pass) {
        std::cerr << "monitor violation: " << c->name << " (worst margin " << c->worst_margin << " at t = "
                  << c->worst_time << ")\n";
      }
    }
    if (opt.strict) return kExitViolation;
  }
  return kExitOk;
}

int check_kernel(const Options& opt) {
  const auto doc = read_json_file(opt.config);
  // a full experiment config or a bare kernel object
  const bool bare = doc.is_object() && doc.contains("family");
  if (!bare && !(doc.is_object() && doc.contains("kernel") && doc.at("kernel").is_object())) {
    throw ConfigError("config field 'kernel': required object is missing");
  }
  const KernelSpec kernel = bare ? parse_kernel(doc, "<root>") : parse_kernel(doc.at("kernel"));
  const auto report = check_admissibility(kernel, default_s_grid(kernel), default_omega_grid());
  nlohmann::json out = admissibility_json(report);
  out["kernel"] = kernel_to_json(kernel);
  std::cout << out.dump(2) << '\n';
  if (!report.well_posed()) {
    std::cerr << "kernel is not admissible: " << failed_hypothesis(report) << '\n';
    return kExitError;
  }
  return kExitOk;
}

int demo(const Options& opt) {
  const auto& table = experiments::demos();
  const auto it = table.find(opt.demo);
  if (it == table.end()) {
    std::cerr << "unknown demo '" << opt.demo << "'; available:";
    for (const auto& [name, fn] : table) std::cerr << ' ' << name;
    std::cerr << '\n';
    return kExitError;
  }
  const Verdict v = it->second();
  if (!opt.quiet) {
    for (const auto& line : v.details) std::cout << line << '\n';
  }
  std::cout << v.name << ": " << (v.pass ? "PASS" : "FAIL") << '\n';
  return v.pass ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clamped-free beam with boundary memory feedback: simulation and decay analysis"};
  app.require_subcommand(1);
  Options opt;

  auto* sim = app.add_subcommand("simulate", "run a configured simulation, write the CSV trace and JSON summary");
  sim->add_option("--config", opt.config, "experiment config (JSON)")->required();
  sim->add_option("--out", opt.out, "output directory")->capture_default_str();
  sim->add_flag("--strict", opt.strict, "exit 2 when a decay monitor is violated");
  sim->add_flag("--override-admissibility", opt.override_admissibility, "run kernels that fail the hypotheses");
  sim->add_option("--stride", opt.stride, "record every N-th step (overrides output.stride)")
      ->check(CLI::PositiveNumber);
  sim->add_flag("--quiet", opt.quiet, "suppress the run report");

  auto* ck = app.add_subcommand("check-kernel", "print the admissibility report of a kernel");
  ck->add_option("--config", opt.config, "config with a kernel object, or a bare kernel object")->required();
  ck->add_flag("--quiet", opt.quiet, "accepted for symmetry; the report is always printed");

  auto* dm = app.add_subcommand("demo", "run a pinned scenario and print its verdict");
  dm->add_option("name", opt.demo, "conservation | decay-exponential | decay-polynomial | observability | proposition1")
      ->required();
  dm->add_flag("--quiet", opt.quiet, "print the verdict only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*sim) return simulate(opt);
    if (*ck) return check_kernel(opt);
    if (*dm) return demo(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
