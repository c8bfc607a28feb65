#include <catch_amalgamated.hpp>

#include <cstring>
#include <sstream>

#include "beammem/config.hpp"
#include "beammem/csv.hpp"
#include "beammem/simulation.hpp"

using namespace beammem;
using Catch::Matchers::ContainsSubstring;

namespace {

ExperimentConfig parse(const std::string& text) { return parse_config(parse_json_text(text, "inline")); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("CSV round trip is bit identical", "[io]") {
  SimConfig c;
  c.n_elements = 10;
  c.dt = 0.01;
  c.T = 3.0;
  c.gamma0 = 1.0;
  c.kernel = KernelSpec::exponential_sum({{1.0, 1.0}});
  c.history = HistoryFunction::sine(0.3, 2.0);
  const auto trace = run(c).trace;

  std::stringstream buf;
  write_csv(buf, trace);
  const std::string text = buf.str();
  CHECK(text.rfind("t,psi_omega,psi_b,psi,u_tip,v_tip,F,cross,L\n", 0) == 0);
  CHECK(text.back() == '\n');

  const auto back = read_csv(buf);
  REQUIRE(back.size() == trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& a = trace.rows[i];
    const auto& b = back.rows[i];
    CHECK(same_bits(a.t, b.t));
    CHECK(same_bits(a.psi_omega, b.psi_omega));
    CHECK(same_bits(a.psi_b, b.psi_b));
    CHECK(same_bits(a.psi, b.psi));
    CHECK(same_bits(a.u_tip, b.u_tip));
    CHECK(same_bits(a.v_tip, b.v_tip));
    CHECK(same_bits(a.F, b.F));
    CHECK(same_bits(a.cross, b.cross));
    CHECK(same_bits(a.L, b.L));
  }
}

TEST_CASE("CSV reader rejects malformed input", "[io]") {
  std::istringstream bad_header("t,psi\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad_header), InputError);
  std::istringstream short_row("t,psi_omega,psi_b,psi,u_tip,v_tip,F,cross,L\n1,2,3\n");
  CHECK_THROWS_WITH(read_csv(short_row), ContainsSubstring("line 2"));
  std::istringstream junk("t,psi_omega,psi_b,psi,u_tip,v_tip,F,cross,L\n1,2,3,4,5,6,7,8,x\n");
  CHECK_THROWS_WITH(read_csv(junk), ContainsSubstring("bad number"));
}

TEST_CASE("config parsing fills defaults", "[io]") {
  const auto cfg = parse(R"({"time": {"T": 2}})");
  CHECK(cfg.sim.n_elements == 40);
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.sim.T == 2.0);
  CHECK(cfg.sim.gamma0 == 0.0);
  CHECK_FALSE(cfg.sim.kernel);
  CHECK_FALSE(cfg.sim.k0);
  CHECK(cfg.output.csv_path == "trace.csv");
  CHECK(cfg.analysis.windows.count == 9);
}

TEST_CASE("config parsing reads every block", "[io]") {
  const auto cfg = parse(R"({
    "beam": {"n_elements": 12},
    "time": {"dt": 0.002, "T": 4},
    "gamma0": 0.5,
    "kernel": {"family": "tabulated", "ds": 0.5, "values": [1.0, 0.6, 0.36, 0.2]},
    "memory": {"representation": "sampled", "S_hist": 1.5},
    "initial_condition": {"kind": "tip_load_shape", "amplitude": 0.2},
    "history": {"kind": "sine", "amplitude": 0.1, "rate": 3},
    "analysis": {"k0": 0.7, "t0": "auto", "override_admissibility": true,
                 "fit_windows": {"t_a": 1, "t_b": 3, "count": 4},
                 "classify_thresholds": {"spread": 0.2},
                 "tolerances": {"cross": 1e-9}},
    "output": {"csv_path": "a.csv", "summary_path": "b.json", "stride": 7}
  })");
  CHECK(cfg.sim.n_elements == 12);
  CHECK(cfg.sim.gamma0 == 0.5);
  REQUIRE(cfg.sim.kernel);
  CHECK(cfg.sim.kernel->family() == KernelFamily::tabulated);
  CHECK(cfg.sim.representation == MemoryRepresentation::sampled);
  CHECK(cfg.sim.s_hist == 1.5);
  CHECK(cfg.sim.initial.kind == InitialConditionSpec::Kind::tip_load_shape);
  CHECK(cfg.sim.history.type == HistoryFunction::Type::sine);
  REQUIRE(cfg.sim.k0);
  CHECK(*cfg.sim.k0 == 0.7);
  CHECK_FALSE(cfg.sim.t0);
  CHECK(cfg.sim.override_admissibility);
  CHECK(cfg.analysis.windows.t_b == 3.0);
  CHECK(cfg.analysis.windows.count == 4);
  CHECK(cfg.analysis.thresholds.spread == 0.2);
  CHECK(cfg.analysis.thresholds.drop == 0.5);
  CHECK(cfg.analysis.tolerances.cross == 1e-9);
  CHECK(cfg.sim.output_stride == 7);
  CHECK(cfg.output.summary_path == "b.json");
}

TEST_CASE("config errors name the field", "[io]") {
  CHECK_THROWS_WITH(parse(R"({"time": {"dt": "x", "T": 1}})"), ContainsSubstring("'time.dt'"));
  CHECK_THROWS_WITH(parse(R"({"time": {"dt": 0.1}})"), ContainsSubstring("'time.T'"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "beam": {"n_elements": 2.5}})"), ContainsSubstring("beam.n_elements"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "colour": 3})"), ContainsSubstring("'colour': unknown field"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "kernel": {"family": "exponential_sum", "modes": [{"c": 1, "mu": -1}]}})"),
                    ContainsSubstring("kernel.modes"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "kernel": {"family": "gaussian"}})"), ContainsSubstring("kernel.family"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "memory": {"representation": "ring"}})"),
                    ContainsSubstring("memory.representation"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "analysis": {"k0": "big"}})"), ContainsSubstring("analysis.k0"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "output": {"stride": 0}})"), ContainsSubstring("output.stride"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1, "dt": -1}})"), ContainsSubstring("time.dt"));
  CHECK_THROWS_WITH(parse(R"({"time": {"T": 1}, "kernel": {"family": "polynomial", "c": 1, "p": 2}})"),
                    ContainsSubstring("memory.representation"));
  CHECK_THROWS_AS(parse(R"({"time": {"T": 1}})" "x"), ConfigError);
  CHECK_THROWS_WITH(parse("{\n \"time\": {\n  \"T\": ,\n }\n}"), ContainsSubstring("inline:3:"));
}

TEST_CASE("kernel JSON round trip", "[io]") {
  for (const auto& k : {KernelSpec::exponential_sum({{2.0, 1.0}, {1.0, 3.0}}), KernelSpec::polynomial(1.5, 2.5),
                        KernelSpec::tabulated(0.5, {1.0, 0.6, 0.36})}) {
    const auto back = parse_kernel(kernel_to_json(k));
    CHECK(back.family() == k.family());
    for (double s : {0.0, 0.3, 0.9}) CHECK(back.eval(s) == k.eval(s));
  }
}
