#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "beammem/decay_analysis.hpp"
#include "beammem/simulation.hpp"

using namespace beammem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EnergyTrace synthetic(const std::function<double(double)>& psi, double t_end, double dt) {
  EnergyTrace tr;
  const auto n = static_cast<int>(std::lround(t_end / dt));
  for (int i = 0; i <= n; ++i) {
    TraceRow r;
    r.t = i * dt;
    r.psi = r.psi_omega = psi(r.t);
    tr.rows.push_back(r);
  }
  return tr;
}

// Least-squares slope of log psi on the rows with t in [a, b], via QR of the
// design matrix.
double ls_slope(const EnergyTrace& tr, double a, double b) {
  std::vector<double> ts, ys;
  for (const auto& r : tr.rows) {
    if (r.t >= a - 1e-12 && r.t <= b + 1e-12) {
      ts.push_back(r.t);
      ys.push_back(std::log(r.psi));
    }
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(ts.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = ts[i];
    y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return A.colPivHouseholderQr().solve(y)[1];
}

RunResult damped_reference() {
  SimConfig c;
  c.T = 60.0;
  c.gamma0 = 1.0;
  c.kernel = KernelSpec::exponential_sum({{1.0, 1.0}});
  c.output_stride = 10;
  return run(c);
}

RunResult conservative(int mode) {
  SimConfig c;
  c.T = 20.0;
  c.initial = InitialConditionSpec::eigenmode(mode, 1.0);
  return run(c);
}

}  // namespace

TEST_CASE("fit_rate examples", "[decay]") {
  SECTION("exact exponential") {
    const auto tr = synthetic([](double t) { return 5.0 * std::exp(-0.3 * t); }, 10.0, 0.1);
    const auto f = fit_rate(tr, 0.0, 10.0);
    CHECK_THAT(f.c1, WithinAbs(0.3, 1e-10));
    CHECK_THAT(f.c2, WithinRel(1.0, 1e-9));
    CHECK_THAT(f.r2, WithinAbs(1.0, 1e-12));
    CHECK(f.rows == 101);
    CHECK(f.floor_hits == 0);
  }
  SECTION("rational decay") {
    const auto tr = synthetic([](double t) { return 1.0 / (1.0 + t); }, 100.0, 0.1);
    const auto f = fit_rate(tr, 10.0, 100.0);
    CHECK_THAT(f.c1, WithinAbs(-ls_slope(tr, 10.0, 100.0), 1e-10));
    CHECK(f.c1 > 0.0);
    CHECK(f.c1 < 0.05);
    CHECK(f.r2 < 0.99);
  }
  SECTION("constant trace") {
    const auto tr = synthetic([](double) { return 2.0; }, 5.0, 0.1);
    const auto f = fit_rate(tr);
    CHECK(f.c1 == 0.0);
    CHECK(f.r2 == 1.0);
  }
  SECTION("too few rows") {
    const auto tr = synthetic([](double t) { return std::exp(-t); }, 10.0, 0.1);
    CHECK_THROWS_AS(fit_rate(tr, 0.0, 0.5), WindowError);
    CHECK_THROWS_AS(fit_rate(tr, 2.0, 1.0), WindowError);
  }
  SECTION("rows below the floor are skipped and counted") {
    const auto tr = synthetic([](double t) { return t < 5.0 ? std::exp(-t) : 0.0; }, 10.0, 0.1);
    const auto f = fit_rate(tr);
    CHECK_THAT(f.c1, WithinAbs(1.0, 1e-10));
    CHECK(f.floor_hits == 51);
  }
}

TEST_CASE("exponential data recover both constants", "[decay]") {
  for (double c1 : {0.05, 1.0, 7.5}) {
    for (double c2 : {0.2, 1.0, 3.0}) {
      const double psi0 = 4.0;
      auto tr = synthetic([&](double t) { return c2 * psi0 * std::exp(-c1 * t); }, 10.0, 0.05);
      tr.rows.front().psi = psi0;  // psi(0) is the reference energy
      const auto f = fit_rate(tr, 0.05, 10.0);
      CHECK_THAT(f.c1, WithinRel(c1, 1e-9));
      CHECK_THAT(f.c2, WithinRel(c2, 1e-9));
    }
  }
}

TEST_CASE("sliding rates", "[decay]") {
  SECTION("exact exponential: all windows agree") {
    const auto tr = synthetic([](double t) { return std::exp(-0.7 * t); }, 20.0, 0.1);
    const auto s = sliding_rates(tr, 40, 20);
    REQUIRE(s.fits.size() >= 3);
    for (const auto& f : s.fits) CHECK_THAT(f.c1, WithinAbs(0.7, 1e-10));
  }
  SECTION("inverse square: rates strictly decrease and bracket the local slope") {
    const auto tr = synthetic([](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }, 50.0, 0.1);
    const auto s = sliding_rates(tr, 50, 25);
    REQUIRE(s.fits.size() >= 3);
    for (std::size_t i = 0; i < s.fits.size(); ++i) {
      const auto& f = s.fits[i];
      // -log psi = 2 log(1 + t) is concave: its secant slopes lie between
      // the endpoint derivatives
      CHECK(f.c1 <= 2.0 / (1.0 + f.t_a));
      CHECK(f.c1 >= 2.0 / (1.0 + f.t_b));
      if (i > 0) CHECK(f.c1 < s.fits[i - 1].c1);
    }
  }
  SECTION("empty tail reports floor hits") {
    auto tr = synthetic([](double t) { return t < 1e-9 ? 1.0 : 0.0; }, 10.0, 0.1);
    const auto s = sliding_rates(tr, 20, 10);
    CHECK(s.fits.empty());
    CHECK(s.floor_hits > 0);
  }
  SECTION("bad window sizes") {
    const auto tr = synthetic([](double t) { return std::exp(-t); }, 10.0, 0.1);
    CHECK_THROWS_AS(sliding_rates(tr, 5, 2), WindowError);
  }
}

TEST_CASE("classification rules", "[decay]") {
  const auto e = classify(std::vector<double>{0.30, 0.31, 0.29});
  CHECK(e.kind == DecayClass::exponential);
  CHECK_THAT(e.c1_est, WithinAbs(0.30, 1e-15));
  CHECK(classify(std::vector<double>{0.30, 0.15, 0.05}).kind == DecayClass::subexponential);
  CHECK(classify(std::vector<double>{0.30, 0.24, 0.28}).kind == DecayClass::inconclusive);
  CHECK(classify(std::vector<double>{0.30, 0.30}).kind == DecayClass::inconclusive);
  CHECK(classify(std::vector<double>{1e-7, 1e-7, 1e-7}).kind == DecayClass::inconclusive);
  CHECK(std::string(to_string(DecayClass::subexponential)) == "subexponential");
}

TEST_CASE("classification is scale invariant", "[decay]") {
  for (double scale : {1e-30, 1.0, 1e30}) {
    const auto a = synthetic([&](double t) { return scale * std::exp(-0.4 * t); }, 30.0, 0.1);
    const auto b = synthetic([&](double t) { return scale / ((1.0 + t) * (1.0 + t)); }, 30.0, 0.1);
    const auto ca = classify(sliding_rates(a, 60, 30).fits);
    const auto cb = classify(sliding_rates(b, 60, 30).fits);
    CHECK(ca.kind == DecayClass::exponential);
    CHECK_THAT(ca.c1_est, WithinAbs(0.4, 1e-9));
    CHECK(cb.kind == DecayClass::subexponential);
  }
}

TEST_CASE("bound verification", "[decay]") {
  const auto tr = synthetic([](double t) { return 3.0 * std::exp(-0.5 * t); }, 20.0, 0.1);
  const auto f = fit_rate(tr);
  CHECK(verify_bound(tr, f.c1, f.c2, 1e-9).pass);
  const auto doubled = verify_bound(tr, 2.0 * f.c1, f.c2, 1e-9);
  CHECK_FALSE(doubled.pass);
  CHECK(doubled.worst_row == tr.size() - 1);
  CHECK_THROWS_AS(verify_bound(tr, 1.0, 0.0, 0.1), InputError);
}

TEST_CASE("bound verification on the damped reference run", "[decay][reference]") {
  const auto r = damped_reference();
  const auto f = fit_rate(r.trace);
  CAPTURE(f.c1, f.c2, f.r2);
  const auto at_5pct = verify_bound(r.trace, f.c1, f.c2, 0.05);
  CAPTURE(at_5pct.worst_ratio, r.trace.rows[at_5pct.worst_row].t);
  CHECK(at_5pct.pass);
  CHECK(verify_bound(r.trace, f.c1, f.c2, 3.0 * (1.0 - f.r2) + 1e-9).pass);
}

TEST_CASE("observability inequality on conservative runs", "[decay]") {
  for (int mode : {1, 2}) {
    CAPTURE(mode);
    const auto r = conservative(mode);
    const auto obs = observability_check(r.trace);
    CHECK(obs.pass);
    CHECK(obs.worst_margin >= -1e-6);
  }
  // vacuous while t <= 2
  auto early = conservative(1).trace;
  early.rows.resize(2001);
  CHECK(observability_check(early).pass);
}

TEST_CASE("observability rejects damped traces", "[decay]") {
  SimConfig c;
  c.T = 2.0;
  c.gamma0 = 1.0;
  CHECK_THROWS_AS(observability_check(run(c).trace), PreconditionError);
}
