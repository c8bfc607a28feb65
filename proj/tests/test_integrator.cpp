#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "beammem/simulation.hpp"
#include "beammem/spectrum.hpp"

using namespace beammem;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

KernelSpec exp1() { return KernelSpec::exponential_sum({{1.0, 1.0}}); }

SimConfig damped(double T) {
  SimConfig c;
  c.T = T;
  c.gamma0 = 1.0;
  c.kernel = exp1();
  return c;
}

// Root of cos(b) cosh(b) = -1 near 1.875 by Newton, independent of the library.
double omega1_oracle() {
  double b = 1.875;
  for (int i = 0; i < 50; ++i) {
    const double g = std::cos(b) * std::cosh(b) + 1.0;
    const double dg = -std::sin(b) * std::cosh(b) + std::cos(b) * std::sinh(b);
    b -= g / dg;
  }
  return b * b;
}

}  // namespace

TEST_CASE("initial condition builders", "[integrator]") {
  const auto a = assemble(20);
  const auto ic1 = initial_condition(InitialConditionSpec::eigenmode(1, 1.0), a);
  CHECK(ic1.compatible);
  CHECK(ic1.v.isZero());
  CHECK_THAT(evaluate_field(a, ic1.u, 0.0, 0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(evaluate_field(a, ic1.u, 0.0, 1), WithinAbs(0.0, 1e-15));

  const auto ic2 = initial_condition(InitialConditionSpec::eigenmode(1, 2.0), a);
  CHECK_THAT(interior_energy(a, ic2.u, ic2.v), WithinRel(4.0 * interior_energy(a, ic1.u, ic1.v), 1e-14));

  const auto tip = initial_condition(InitialConditionSpec::tip_load_shape(1.0), a);
  CHECK_FALSE(tip.compatible);
  CHECK_THAT(tip.u[a.tip_index], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(evaluate_field(a, tip.u, 1.0, 2), WithinAbs(0.0, 1e-12));

  InitialConditionSpec bad;
  bad.kind = InitialConditionSpec::Kind::custom;
  bad.deflection.assign(21, 0.0);
  bad.rotation.assign(21, 0.0);
  bad.deflection[0] = 0.1;
  CHECK_THROWS_AS(initial_condition(bad, a), InputError);
  bad.deflection[0] = 0.0;
  bad.rotation.resize(5);
  CHECK_THROWS_AS(initial_condition(bad, a), InputError);
}

TEST_CASE("zero state stays zero", "[integrator]") {
  const auto a = assemble(10);
  const Stepper st(a, exp1(), 1.0, 1e-3);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(a.dim());
  auto s = st.initial_state(z, z, zero_memory(exp1(), MemoryRepresentation::exp_modal));
  for (int i = 0; i < 100; ++i) st.step(s);
  CHECK(s.u.isZero());
  CHECK(s.v.isZero());
  CHECK(s.a.isZero());
  CHECK(boundary_energy(*s.memory, exp1()) == 0.0);
}

TEST_CASE("undamped conservation over 1e4 steps", "[integrator]") {
  SimConfig c;
  c.T = 10.0;
  const auto r = run(c);
  REQUIRE(r.trace.size() == 10001);
  const double e0 = r.trace.rows.front().psi_omega;
  double drift = 0.0;
  for (const auto& row : r.trace.rows) drift = std::max(drift, std::abs(row.psi_omega - e0) / e0);
  CHECK(drift <= 1e-10);
}

TEST_CASE("discrete work identity and residual hold every step", "[integrator]") {
  const auto a = assemble(40);
  const double dt = 1e-3;
  for (auto rep : {MemoryRepresentation::exp_modal, MemoryRepresentation::sampled}) {
    CAPTURE(to_string(rep));
    const auto k = exp1();
    const Stepper st(a, k, 1.0, dt);
    const auto ic = initial_condition(InitialConditionSpec::eigenmode(1, 1.0), a);
    auto mem = init_from_history(k, HistoryFunction::exp_approach(1.0, 1.0), rep, dt, 20.0, ic.u[a.tip_index]);
    auto s = st.initial_state(ic.u, ic.v, std::move(mem));
    const double e_ref = interior_energy(a, s.u, s.v);
    double worst_identity = 0.0, worst_residual = 0.0;
    for (int n = 0; n < 2000; ++n) {
      const double e_old = interior_energy(a, s.u, s.v);
      const double vb_old = s.v[a.tip_index];
      const double f_old = st.traction(s);
      st.step(s);
      const double e_new = interior_energy(a, s.u, s.v);
      const double work = -0.25 * dt * (vb_old + s.v[a.tip_index]) * (f_old + st.traction(s));
      worst_identity = std::max(worst_identity, std::abs((e_new - e_old) - work) / e_ref);
      worst_residual = std::max(worst_residual, st.residual(s));
    }
    CHECK(worst_identity <= 1e-11);
    CHECK(worst_residual <= 1e-12);
  }
}

TEST_CASE("run records the expected rows", "[integrator]") {
  SimConfig c;
  c.T = 1.0;
  c.dt = 0.1;
  c.n_elements = 8;
  CHECK(run(c).trace.size() == 11);
  c.output_stride = 3;
  const auto r = run(c);
  REQUIRE(r.trace.size() == 4);
  CHECK_THAT(r.trace.rows.back().t, WithinAbs(0.9, 1e-12));

  c.T = 1.0;
  c.dt = 2.0;
  CHECK_THROWS_AS(run(c), InputError);
}

TEST_CASE("run gates inadmissible kernels", "[integrator]") {
  SimConfig c;
  c.T = 0.1;
  c.gamma0 = 1.0;
  c.kernel = KernelSpec::polynomial(1.0, 2.0);
  c.representation = MemoryRepresentation::exp_modal;
  CHECK_THROWS_AS(run(c), InputError);

  c.representation = MemoryRepresentation::sampled;
  c.s_hist = 5.0;
  CHECK_THROWS_WITH(run(c), ContainsSubstring("lambda'' + k0 lambda'"));
  c.override_admissibility = true;
  const auto r = run(c);
  CHECK_FALSE(r.k0);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK_THAT(r.warnings.front(), ContainsSubstring("overridden"));
}

TEST_CASE("incompatible initial data warn", "[integrator]") {
  SimConfig c;
  c.T = 0.05;
  c.initial = InitialConditionSpec::tip_load_shape(1.0);
  const auto r = run(c);
  REQUIRE(r.warnings.size() == 1);
  CHECK_THAT(r.warnings.front(), ContainsSubstring("tip_load_shape"));
}

TEST_CASE("damped energy is nonincreasing", "[integrator]") {
  const auto r = run(damped(10.0));
  REQUIRE(r.k0);
  CHECK_THAT(*r.k0, WithinRel(1.0, 1e-9));
  CHECK(r.t0 == 1.0);
  const double psi0 = r.trace.rows.front().psi;
  double worst = -1.0;
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    worst = std::max(worst, r.trace.rows[i].psi - r.trace.rows[i - 1].psi);
  }
  CHECK(worst <= 1e-9 * psi0);
  CHECK(r.trace.rows.back().psi < 1e-3 * psi0);
}

TEST_CASE("tip spectrum reproduces the fundamental frequency", "[integrator]") {
  SimConfig c;
  c.T = 10.0;
  const auto r = run(c);
  const auto t = r.trace.times();
  const auto x = r.trace.column(&TraceRow::u_tip);
  const double w = dominant_frequency(t, x, 0.5, 20.0);
  const double w1 = omega1_oracle();
  CHECK_THAT(w1, WithinAbs(3.51602, 1e-5));
  CHECK_THAT(w, WithinRel(w1, 0.01));
}

TEST_CASE("time stepping converges at second order", "[integrator]") {
  // tip displacement at t = 1 against a fine-step reference
  auto tip_at = [](double dt) {
    SimConfig c = damped(1.0);
    c.n_elements = 10;
    c.dt = dt;
    c.initial = InitialConditionSpec::eigenmode(2, 1.0);
    return run(c).trace.rows.back().u_tip;
  };
  const double ref = tip_at(1e-2 / 256.0);
  const double e1 = std::abs(tip_at(1e-2) - ref);
  const double e2 = std::abs(tip_at(5e-3) - ref);
  const double e3 = std::abs(tip_at(2.5e-3) - ref);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("modal and sampled memory agree", "[integrator]") {
  SimConfig c = damped(20.0);
  c.output_stride = 100;
  const auto modal = run(c);
  c.representation = MemoryRepresentation::sampled;
  c.s_hist = 40.0;
  const auto sampled = run(c);
  REQUIRE(sampled.trace.meta.s_hist);
  CHECK_THAT(*sampled.trace.meta.s_hist, WithinAbs(40.0, 1e-9));
  REQUIRE(modal.trace.size() == sampled.trace.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < modal.trace.size(); ++i) {
    const double p = modal.trace.rows[i].psi;
    worst = std::max(worst, std::abs(sampled.trace.rows[i].psi - p) / p);
  }
  CHECK(worst <= 1e-3);
}
