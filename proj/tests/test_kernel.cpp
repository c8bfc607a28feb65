#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "beammem/kernel.hpp"

using namespace beammem;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
KernelSpec exp1() { return KernelSpec::exponential_sum({{1.0, 1.0}}); }
KernelSpec two_mode() { return KernelSpec::exponential_sum({{2.0, 1.0}, {1.0, 3.0}}); }
KernelSpec poly2() { return KernelSpec::polynomial(1.0, 2.0); }

std::vector<double> uniform(double a, double b, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}
}  // namespace

TEST_CASE("kernel evaluation", "[kernel]") {
  CHECK(eval(exp1(), 0.0, 0) == 1.0);
  CHECK(eval(exp1(), 0.0, 1) == -1.0);
  // (1+s)^-2: second derivative 6 (1+s)^-4
  CHECK_THAT(eval(poly2(), 1.0, 2), WithinRel(6.0 / 16.0, 1e-15));
  CHECK_THAT(eval(two_mode(), 0.5, 1), WithinRel(-2.0 * std::exp(-0.5) - 3.0 * std::exp(-1.5), 1e-15));
  CHECK_THROWS_AS(eval(exp1(), -0.1), DomainError);
  CHECK_THROWS_AS(eval(exp1(), 0.0, 3), InputError);
}

TEST_CASE("kernel construction validates parameters", "[kernel]") {
  CHECK_THROWS_AS(KernelSpec::exponential_sum({}), InputError);
  CHECK_THROWS_AS(KernelSpec::exponential_sum({{-1.0, 1.0}}), InputError);
  CHECK_THROWS_AS(KernelSpec::exponential_sum({{1.0, 0.0}}), InputError);
  CHECK_THROWS_AS(KernelSpec::polynomial(1.0, 1.0), InputError);
  CHECK_THROWS_AS(KernelSpec::tabulated(0.1, {1.0, 0.9}), InputError);
  CHECK_THROWS_AS(KernelSpec::tabulated(0.0, {1.0, 0.9, 0.8}), InputError);
}

TEST_CASE("tabulated kernel reproduces a smooth exponential", "[kernel]") {
  const double ds = 0.01;
  std::vector<double> v;
  for (int i = 0; i <= 1000; ++i) v.push_back(std::exp(-ds * i));
  const auto k = KernelSpec::tabulated(ds, v);
  for (double s : {0.005, 0.5, 1.234, 7.77}) {
    // monotone cubic interpolation: O(ds^2) near the ends
    CHECK_THAT(k.eval(s, 0), WithinAbs(std::exp(-s), 2e-5));
    CHECK_THAT(k.eval(s, 1), WithinAbs(-std::exp(-s), 1e-4));
    CHECK_THAT(k.eval(s, 2), WithinAbs(std::exp(-s), 1e-4));
  }
  CHECK_THROWS_AS(k.eval(10.5), DomainError);
}

TEST_CASE("admissibility of analytic kernels", "[kernel]") {
  const auto w = default_omega_grid();

  SECTION("exp(-2s) gives k0_max = 2") {
    const auto k = KernelSpec::exponential_sum({{1.0, 2.0}});
    const auto r = check_admissibility(k, default_s_grid(k), w);
    CHECK(r.bvk_ok);
    CHECK(r.fourier.ok);
    REQUIRE(r.k0_max);
    CHECK_THAT(*r.k0_max, WithinRel(2.0, 1e-12));
    REQUIRE(r.exp_decay);
    CHECK(*r.exp_decay == 2.0);
  }
  SECTION("(1+s)^-2 satisfies the sign conditions but has no uniform k0") {
    const auto k = poly2();
    const auto r = check_admissibility(k, default_s_grid(k), w);
    CHECK(r.bvk_ok);
    CHECK(r.fourier.ok);
    CHECK_FALSE(r.k0_max);
    CHECK_FALSE(r.exp_decay);
  }
  SECTION("two-mode kernel: k0_max is the slowest rate and satisfies the hypothesis on the grid") {
    const auto k = two_mode();
    const auto grid = default_s_grid(k);
    const auto r = check_admissibility(k, grid, w);
    REQUIRE(r.k0_max);
    CHECK_THAT(*r.k0_max, WithinRel(1.0, 1e-6));
    for (double s : grid) CHECK(k.eval(s, 2) + *r.k0_max * k.eval(s, 1) >= -1e-12);
  }
}

TEST_CASE("admissibility input errors", "[kernel]") {
  const auto k = exp1();
  const std::vector<double> w{1.0, 2.0};
  CHECK_THROWS_AS(check_admissibility(k, std::vector<double>{0.0, 2.0, 1.0}, w), InputError);
  CHECK_THROWS_AS(check_admissibility(k, uniform(0.0, 5.0, 11), w), InputError);
  CHECK_THROWS_AS(check_admissibility(k, uniform(0.0, 10.0, 11), std::vector<double>{2.0, 1.0}), InputError);
}

TEST_CASE("tabulated admissibility", "[kernel]") {
  const std::vector<double> w{0.5, 1.0, 5.0};
  SECTION("increasing samples fail the sign condition") {
    const auto k = KernelSpec::tabulated(0.1, {1.0, 1.05, 1.1, 1.15, 1.2});
    const auto r = check_admissibility(k, default_s_grid(k, 41), w);
    CHECK_FALSE(r.bvk_ok);
    CHECK(r.bvk_failure == "lambda' < 0");
  }
  SECTION("samples that halve between neighbours are under-resolved") {
    const auto k = KernelSpec::tabulated(1.0, {1.0, 0.3, 0.1, 0.05});
    CHECK_THROWS_AS(check_admissibility(k, default_s_grid(k, 31), w), ResolutionError);
  }
  SECTION("sampled exponential is admissible with k0 near 1") {
    std::vector<double> v;
    for (int i = 0; i <= 2000; ++i) v.push_back(std::exp(-0.01 * i));
    const auto k = KernelSpec::tabulated(0.01, v);
    const auto r = check_admissibility(k, default_s_grid(k), std::vector<double>{0.5, 1.0, 5.0});
    CHECK(r.bvk_ok);
    CHECK(r.fourier.ok);
    REQUIRE(r.k0_max);
    CHECK_THAT(*r.k0_max, WithinAbs(1.0, 1e-3));
    CHECK_FALSE(r.exp_decay);
  }
}

TEST_CASE("fourier value", "[kernel]") {
  // int_0^inf -e^{-s} sin(w s) ds = -w / (1 + w^2)
  for (double omega : {0.1, 1.0, 3.7, 25.0}) {
    const double expected = -omega * omega / (1.0 + omega * omega);
    CHECK_THAT(fourier_value(exp1(), omega), WithinAbs(expected, 1e-10));
    CHECK(fourier_value(exp1(), -omega) == Approx(fourier_value(exp1(), omega)));
  }
  CHECK_THAT(fourier_value(exp1(), 1.0), WithinAbs(-0.5, 1e-10));
  const double p = fourier_value(poly2(), 2.0);
  const double pm = fourier_value(poly2(), -2.0);
  CHECK(p < 0.0);
  CHECK(pm < 0.0);
}

TEST_CASE("laplace transform", "[kernel]") {
  using C = std::complex<double>;
  CHECK(laplace(exp1(), C{1.0, 0.0}) == C{0.5, 0.0});
  CHECK_THAT(std::abs(laplace_quadrature(exp1(), C{0.0, 0.0}) - 1.0), WithinAbs(0.0, 1e-10));
  const C z{0.0, 1.0};
  const C expected = 2.0 / (1.0 + z) + 1.0 / (3.0 + z);
  CHECK(std::abs(laplace(two_mode(), z) - expected) < 1e-15);
  CHECK_THROWS_AS(laplace(exp1(), C{-1.0, 0.0}), SingularityError);
  CHECK_THROWS_AS(laplace(exp1(), C{-2.0, 0.0}), DomainError);
  CHECK_THROWS_AS(laplace_quadrature(poly2(), C{-0.1, 0.0}), DomainError);

  // (1+s)^-2 at z = 0 integrates to 1
  CHECK_THAT(std::abs(laplace(poly2(), C{0.0, 0.0}) - 1.0), WithinAbs(0.0, 1e-10));
}

TEST_CASE("laplace quadrature matches the closed form for exponential sums", "[kernel]") {
  using C = std::complex<double>;
  const auto k = two_mode();
  int count = 0;
  for (double re : {0.0, 0.5, 2.0, 5.0}) {
    for (double im : {-8.0, -1.0, 0.0, 3.0, 6.0}) {
      const C z{re, im};
      if (std::abs(z) > 10.0) continue;
      ++count;
      CHECK(std::abs(laplace_quadrature(k, z) - laplace(k, z)) < 1e-8);
    }
  }
  CHECK(count == 20);
}

TEST_CASE("exponential decay classification", "[kernel]") {
  CHECK(is_exponentially_decaying(exp1()) == 1.0);
  CHECK(is_exponentially_decaying(two_mode()) == 1.0);
  CHECK_FALSE(is_exponentially_decaying(poly2()));
  CHECK_FALSE(is_exponentially_decaying(KernelSpec::tabulated(0.1, {1.0, 0.9, 0.82, 0.75})));
}

TEST_CASE("admissible kernels keep their derivative signs on the grid", "[kernel]") {
  for (const auto& k : {exp1(), two_mode(), poly2()}) {
    for (double s : default_s_grid(k, 501)) {
      CHECK(k.eval(s, 1) < 0.0);
      CHECK(k.eval(s, 2) >= 0.0);
    }
  }
}
