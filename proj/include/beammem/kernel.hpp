#pragma once

// Memory kernels lambda(s) for the boundary feedback, their derivatives,
// integral transforms and the structural hypotheses the decay theory needs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

// pchip.hpp in Boost 1.74 calls isnan unqualified; declare boost::math::isnan first.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "beammem/errors.hpp"
#include "beammem/quadrature.hpp"

namespace beammem {

struct ExpMode {
  double c;   ///< amplitude, > 0
  double mu;  ///< decay rate, > 0
};

enum class KernelFamily { exponential_sum, polynomial, tabulated };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::exponential_sum: return "exponential_sum";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::tabulated: return "tabulated";
  }
  return "?";
}

/// Immutable description of a memory kernel.
///
///   exponential_sum:  lambda(s) = sum_j c_j exp(-mu_j s)
///   polynomial:       lambda(s) = c (1 + s)^(-p),  p > 1
///   tabulated:        samples on s = 0, ds, 2 ds, ...; monotone cubic
///                     interpolation for the value, centered differences
///                     (linearly interpolated between nodes) for lambda'
///                     and lambda''.
class KernelSpec {
 public:
  static KernelSpec exponential_sum(std::vector<ExpMode> modes) {
    if (modes.empty()) throw InputError("exponential_sum kernel needs at least one mode");
    for (const auto& m : modes) {
      if (!(m.c > 0.0) || !std::isfinite(m.c)) throw InputError("exponential_sum: amplitude c must be > 0");
      if (!(m.mu > 0.0) || !std::isfinite(m.mu)) throw InputError("exponential_sum: rate mu must be > 0");
    }
    KernelSpec k;
    k.family_ = KernelFamily::exponential_sum;
    k.modes_ = std::move(modes);
    return k;
  }

  static KernelSpec polynomial(double c, double p) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("polynomial kernel: amplitude c must be > 0");
    if (!(p > 1.0) || !std::isfinite(p)) throw InputError("polynomial kernel: exponent p must be > 1");
    KernelSpec k;
    k.family_ = KernelFamily::polynomial;
    k.c_ = c;
    k.p_ = p;
    return k;
  }

  static KernelSpec tabulated(double ds, std::vector<double> values) {
    if (!(ds > 0.0) || !std::isfinite(ds)) throw InputError("tabulated kernel: ds must be > 0");
    if (values.size() < 3) throw InputError("tabulated kernel: need at least 3 samples");
    for (double v : values) {
      if (!std::isfinite(v)) throw InputError("tabulated kernel: non-finite sample");
    }
    KernelSpec k;
    k.family_ = KernelFamily::tabulated;
    k.ds_ = ds;
    k.values_ = std::move(values);
    k.build_table();
    return k;
  }

  KernelFamily family() const { return family_; }
  const std::vector<ExpMode>& modes() const { return modes_; }
  double amplitude() const { return c_; }
  double exponent() const { return p_; }
  double step() const { return ds_; }
  const std::vector<double>& values() const { return values_; }

  /// Right end of the domain where the kernel is defined.
  double support_end() const {
    if (family_ == KernelFamily::tabulated) return ds_ * static_cast<double>(values_.size() - 1);
    return std::numeric_limits<double>::infinity();
  }

  double mu_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& mode : modes_) m = std::min(m, mode.mu);
    return m;
  }

  /// lambda^(order)(s) for order 0, 1, 2.
  double eval(double s, int order = 0) const {
    if (!(s >= 0.0)) throw DomainError("kernel evaluation at negative age s");
    if (order < 0 || order > 2) throw InputError("kernel evaluation: derivative order > 2 unsupported");
    switch (family_) {
      case KernelFamily::exponential_sum: {
        double acc = 0.0;
        for (const auto& m : modes_) {
          const double e = m.c * std::exp(-m.mu * s);
          acc += order == 0 ? e : (order == 1 ? -m.mu * e : m.mu * m.mu * e);
        }
        return acc;
      }
      case KernelFamily::polynomial: {
        const double base = 1.0 + s;
        if (order == 0) return c_ * std::pow(base, -p_);
        if (order == 1) return -c_ * p_ * std::pow(base, -p_ - 1.0);
        return c_ * p_ * (p_ + 1.0) * std::pow(base, -p_ - 2.0);
      }
      case KernelFamily::tabulated:
        return eval_tabulated(s, order);
    }
    return 0.0;
  }

  /// -lambda''(s) / lambda'(s), evaluated without underflow for the
  /// analytic families.
  double curvature_ratio(double s) const {
    if (family_ == KernelFamily::exponential_sum) {
      const double mmin = mu_min();
      double num = 0.0, den = 0.0;
      for (const auto& m : modes_) {
        const double e = m.c * m.mu * std::exp(-(m.mu - mmin) * s);
        num += m.mu * e;
        den += e;
      }
      return num / den;
    }
    if (family_ == KernelFamily::polynomial) return (p_ + 1.0) / (1.0 + s);
    return -eval(s, 2) / eval(s, 1);
  }

  /// Integral of lambda over [s, inf) in closed form (analytic families).
  double tail_mass(double s) const {
    switch (family_) {
      case KernelFamily::exponential_sum: {
        double acc = 0.0;
        for (const auto& m : modes_) acc += m.c / m.mu * std::exp(-m.mu * s);
        return acc;
      }
      case KernelFamily::polynomial:
        return c_ * std::pow(1.0 + s, 1.0 - p_) / (p_ - 1.0);
      case KernelFamily::tabulated:
        return 0.0;
    }
    return 0.0;
  }

 private:
  KernelSpec() = default;

  void build_table() {
    const std::size_t n = values_.size();
    d1_.assign(n, 0.0);
    d2_.assign(n, 0.0);
    const double h = ds_;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      d1_[i] = (values_[i + 1] - values_[i - 1]) / (2.0 * h);
      d2_[i] = (values_[i + 1] - 2.0 * values_[i] + values_[i - 1]) / (h * h);
    }
    d1_[0] = (-3.0 * values_[0] + 4.0 * values_[1] - values_[2]) / (2.0 * h);
    d1_[n - 1] = (3.0 * values_[n - 1] - 4.0 * values_[n - 2] + values_[n - 3]) / (2.0 * h);
    if (n >= 4) {
      d2_[0] = 2.0 * d2_[1] - d2_[2];
      d2_[n - 1] = 2.0 * d2_[n - 2] - d2_[n - 3];
    } else {
      d2_[0] = d2_[1];
      d2_[n - 1] = d2_[n - 2];
    }
    if (n >= 4) {
      std::vector<double> x(n), y(values_);
      for (std::size_t i = 0; i < n; ++i) x[i] = h * static_cast<double>(i);
      interp_.emplace(std::move(x), std::move(y));
    }
  }

  double eval_tabulated(double s, int order) const {
    const double end = support_end();
    if (s > end * (1.0 + 1e-15)) {
      throw DomainError("tabulated kernel evaluated beyond its last sample");
    }
    const std::size_t n = values_.size();
    const double pos = std::min(s / ds_, static_cast<double>(n - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(pos), n - 2);
    const double frac = pos - static_cast<double>(i);
    if (order == 0) {
      if (interp_) return (*interp_)(std::min(s, end));
      return values_[i] + frac * (values_[i + 1] - values_[i]);
    }
    const auto& d = order == 1 ? d1_ : d2_;
    return d[i] + frac * (d[i + 1] - d[i]);
  }

  KernelFamily family_ = KernelFamily::exponential_sum;
  std::vector<ExpMode> modes_;
  double c_ = 0.0;
  double p_ = 0.0;
  double ds_ = 0.0;
  std::vector<double> values_;
  std::vector<double> d1_, d2_;
  std::optional<boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

inline double eval(const KernelSpec& kernel, double s, int order = 0) { return kernel.eval(s, order); }

/// Smallest S (found by doubling from 1) with lambda(S) < rel * lambda(0),
/// clipped to the tabulated support and to 1e12.
inline double horizon(const KernelSpec& kernel, double rel) {
  const double end = kernel.support_end();
  const double target = rel * kernel.eval(0.0);
  double s = 1.0;
  while (s < end && s < 1e12 && kernel.eval(s) >= target) s *= 2.0;
  return std::min({s, end, 1e12});
}

// ---------------------------------------------------------------------------
// Admissibility

struct FourierCheck {
  bool ok = true;
  double worst_omega = 0.0;
  double worst_value = -std::numeric_limits<double>::infinity();
};

struct AdmissibilityReport {
  bool bvk_ok = true;           ///< lambda > 0, lambda' < 0, lambda'' >= 0 on the s-grid
  std::string bvk_failure;      ///< first failed condition, empty when bvk_ok
  std::optional<double> bvk_failure_s;
  FourierCheck fourier;         ///< omega * int lambda'(s) sin(omega s) ds < 0 on the omega-grid
  std::optional<double> k0_max; ///< largest k0 with lambda'' + k0 lambda' >= 0
  std::optional<double> exp_decay;

  bool well_posed() const { return bvk_ok && fourier.ok; }
};

inline constexpr double kK0Floor = 1e-6;

/// omega * int_0^inf lambda'(s) sin(omega s) ds.
///
/// Analytic families: 10-point Gauss-Legendre panels no longer than half a
/// period or the local decay length of lambda', up to the first S where the
/// remainder of the integration-by-parts tail lambda'(S) cos(omega S)/omega,
/// bounded by |lambda''(S)|/omega^2, is negligible. Tabulated kernels are
/// integrated adaptively over their support.
inline double fourier_value(const KernelSpec& kernel, double omega) {
  if (omega == 0.0 || !std::isfinite(omega)) throw InputError("fourier check needs a finite nonzero omega");
  const double w = std::abs(omega);
  const double half_period = M_PI / w;
  auto integrand = [&](double s) { return kernel.eval(s, 1) * std::sin(w * s); };

  double integral = 0.0;
  if (kernel.family() == KernelFamily::tabulated) {
    const auto breaks = quad::graded_breakpoints(kernel.support_end(), std::min(half_period, 0.25),
                                                 std::min(half_period, 1.0));
    integral = quad::over_panels(integrand, breaks, 1e-12, 10);
  } else {
    using Rule = boost::math::quadrature::gauss<double, 10>;
    const double tol = 1e-13 * std::max(1.0, std::abs(kernel.eval(0.0, 1)));
    double a = 0.0;
    std::size_t panels = 0;
    while (true) {
      const double b = a + std::min(half_period, 1.0 / kernel.curvature_ratio(a));
      integral += Rule::integrate(integrand, a, b);
      a = b;
      if (++panels > 50'000'000) throw NumericError("fourier_value: panel budget exhausted");
      const double d2 = std::abs(kernel.eval(a, 2));
      if (d2 / w < tol) break;
    }
    integral += kernel.eval(a, 1) * std::cos(w * a) / w;
  }
  return w * integral;  // even in omega
}

inline std::vector<double> default_omega_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 500; ++i) g.push_back(0.1 * i);
  return g;
}

/// Uniform grid on [0, S_max] with S_max meeting the coverage requirement
/// of check_admissibility.
inline std::vector<double> default_s_grid(const KernelSpec& kernel, std::size_t points = 2001) {
  double smax = 50.0;
  if (kernel.family() == KernelFamily::exponential_sum) smax = std::max(10.0 / kernel.mu_min(), 1.0);
  if (kernel.family() == KernelFamily::tabulated) smax = kernel.support_end();
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = smax * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

namespace detail {
inline void require_increasing(std::span<const double> g, const char* name) {
  if (g.empty()) throw InputError(std::string(name) + " is empty");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw InputError(std::string(name) + " is not strictly increasing");
  }
}
}  // namespace detail

inline AdmissibilityReport check_admissibility(const KernelSpec& kernel, std::span<const double> s_grid,
                                               std::span<const double> omega_grid) {
  detail::require_increasing(s_grid, "s_grid");
  detail::require_increasing(omega_grid, "omega_grid");
  if (s_grid.front() < 0.0) throw InputError("s_grid has negative entries");

  const double smax = s_grid.back();
  if (kernel.family() == KernelFamily::exponential_sum && smax < 10.0 / kernel.mu_min() * (1 - 1e-12)) {
    throw InputError("s_grid must reach 10/mu_min for an exponential_sum kernel");
  }
  if (kernel.family() == KernelFamily::polynomial && smax < 50.0) {
    throw InputError("s_grid must reach 50 for a polynomial kernel");
  }

  double curvature_tol = 0.0;
  if (kernel.family() == KernelFamily::tabulated) {
    const auto& v = kernel.values();
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i - 1] > 0.0 && v[i] > 0.0 && v[i] < 0.5 * v[i - 1]) {
        std::ostringstream msg;
        msg << "tabulated kernel drops by more than half between s=" << kernel.step() * (i - 1) << " and s="
            << kernel.step() * i << "; ds too coarse for second differences";
        throw ResolutionError(msg.str());
      }
    }
    curvature_tol = 1e-12 * std::abs(v.front()) / (kernel.step() * kernel.step());
  }

  AdmissibilityReport report;
  double k0 = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (double s : s_grid) {
    if (s > kernel.support_end()) break;
    ++used;
    const double l0 = kernel.eval(s, 0), l1 = kernel.eval(s, 1), l2 = kernel.eval(s, 2);
    const char* failed = nullptr;
    if (!(l0 > 0.0)) failed = "lambda > 0";
    else if (!(l1 < 0.0)) failed = "lambda' < 0";
    else if (!(l2 >= -curvature_tol)) failed = "lambda'' >= 0";
    if (failed && report.bvk_ok) {
      report.bvk_ok = false;
      report.bvk_failure = failed;
      report.bvk_failure_s = s;
    }
    if (!failed) k0 = std::min(k0, kernel.curvature_ratio(s));
  }
  if (used == 0) throw InputError("s_grid lies outside the tabulated support");

  if (report.bvk_ok && kernel.family() != KernelFamily::tabulated) {
    // -lambda''/lambda' keeps shrinking beyond the sampled range for the
    // analytic families; probe the tail until it settles or vanishes.
    double s = std::max(smax, 1.0);
    double prev = kernel.curvature_ratio(s);
    k0 = std::min(k0, prev);
    for (int i = 0; i < 200 && k0 >= kK0Floor; ++i) {
      s *= 2.0;
      const double r = kernel.curvature_ratio(s);
      k0 = std::min(k0, r);
      if (std::abs(r - prev) <= 1e-13 * std::abs(prev)) break;
      prev = r;
    }
  }
  if (report.bvk_ok && std::isfinite(k0) && k0 >= kK0Floor) report.k0_max = k0;

  for (double omega : omega_grid) {
    const double value = fourier_value(kernel, omega);
    if (value > report.fourier.worst_value) {
      report.fourier.worst_value = value;
      report.fourier.worst_omega = omega;
    }
    if (!(value < 0.0)) report.fourier.ok = false;
  }

  if (kernel.family() == KernelFamily::exponential_sum) report.exp_decay = kernel.mu_min();
  return report;
}

// ---------------------------------------------------------------------------
// Transforms

/// sup of delta with int_0^inf exp(delta t) lambda(t) dt < inf, when the
/// kernel is known to decay exponentially. Tabulated kernels are never
/// classified.
inline std::optional<double> is_exponentially_decaying(const KernelSpec& kernel) {
  if (kernel.family() == KernelFamily::exponential_sum) return kernel.mu_min();
  return std::nullopt;
}

/// Laplace transform by quadrature, valid for Re z >= 0. Absolute accuracy
/// target 1e-10.
inline std::complex<double> laplace_quadrature(const KernelSpec& kernel, std::complex<double> z) {
  if (z.real() < 0.0) throw DomainError("laplace quadrature requires Re z >= 0");
  using C = std::complex<double>;
  auto f = [&](double s) -> C { return kernel.eval(s) * std::exp(-z * s); };
  const double max_len = z.imag() != 0.0 ? std::min(M_PI / std::abs(z.imag()), 1e6) : 1e6;

  if (kernel.family() == KernelFamily::tabulated) {
    return quad::over_panels(f, quad::graded_breakpoints(kernel.support_end(), std::min(0.5, max_len), max_len),
                             1e-12, 12);
  }

  constexpr double tol = 1e-12;
  const double az = std::abs(z);
  double S = 1.0;
  C tail{};
  while (true) {
    if (az == 0.0) {
      tail = kernel.tail_mass(S);
      break;
    }
    const double trunc_bound = kernel.tail_mass(S);
    if (trunc_bound < tol) break;
    const double damp = std::exp(-z.real() * S);
    const double parts_bound = std::abs(kernel.eval(S, 1)) / (az * az) * damp;
    if (parts_bound < tol) {
      tail = std::exp(-z * S) * (kernel.eval(S) / z + kernel.eval(S, 1) / (z * z));
      break;
    }
    S *= 2.0;
    if (S > 1e12) throw NumericError("laplace quadrature: truncation horizon exceeded 1e12");
  }
  return quad::over_panels(f, quad::graded_breakpoints(S, std::min(0.5, max_len), max_len), 1e-13, 12) + tail;
}

/// Laplace transform lambda_hat(z). Closed form sum c_j / (z + mu_j) for
/// exponential sums (any Re z > -mu_min), quadrature otherwise.
inline std::complex<double> laplace(const KernelSpec& kernel, std::complex<double> z) {
  if (kernel.family() == KernelFamily::exponential_sum) {
    std::complex<double> acc{};
    for (const auto& m : kernel.modes()) {
      if (z + m.mu == std::complex<double>{}) throw SingularityError("laplace transform evaluated at a pole z = -mu");
    }
    if (!(z.real() > -kernel.mu_min())) throw DomainError("laplace transform diverges for Re z <= -mu_min");
    for (const auto& m : kernel.modes()) acc += m.c / (z + m.mu);
    return acc;
  }
  return laplace_quadrature(kernel, z);
}

}  // namespace beammem
