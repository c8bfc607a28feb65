#pragma once

// Thin layer over Boost.Math quadrature: adaptive Gauss-Kronrod on finite
// intervals, graded panel partitions for long-range integrands, and fixed
// Gauss-Legendre node sets for integrals evaluated repeatedly.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "beammem/errors.hpp"

namespace beammem::quad {

inline constexpr double kDefaultRelTol = 1e-13;

/// Adaptive G7/K15 on [a, b]. Works for real and std::complex results.
template <class F>
auto adaptive(F&& f, double a, double b, double rel_tol = kDefaultRelTol, unsigned max_depth = 15) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &error);
}

/// Breakpoints 0 = b_0 < b_1 < ... < b_m = end. Panel lengths double from
/// `first` onwards and never exceed `max_len`.
inline std::vector<double> graded_breakpoints(double end, double first, double max_len) {
  if (!(end > 0.0) || !(first > 0.0) || !(max_len > 0.0)) {
    throw InputError("graded_breakpoints: end, first and max_len must be positive");
  }
  std::vector<double> b{0.0};
  double len = std::min(first, max_len);
  while (b.back() < end) {
    b.push_back(std::min(end, b.back() + len));
    len = std::min(2.0 * len, max_len);
    if (b.size() > 50'000'000) {
      throw NumericError("graded_breakpoints: panel budget exhausted");
    }
  }
  return b;
}

/// Sum of adaptive integrals over consecutive panels.
template <class F>
auto over_panels(F&& f, const std::vector<double>& breaks, double rel_tol = kDefaultRelTol,
                 unsigned max_depth = 12) {
  using R = decltype(f(0.0));
  R total{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += adaptive(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
  }
  return total;
}

/// Composite 10-point Gauss-Legendre rule on the given panels.
struct NodeSet {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline NodeSet gauss_legendre(const std::vector<double>& breaks) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  NodeSet out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    const double half = 0.5 * (breaks[i + 1] - breaks[i]);
    // Boost stores the nonnegative half of a symmetric rule.
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0.0) {
        out.nodes.push_back(mid);
        out.weights.push_back(half * w[k]);
        continue;
      }
      out.nodes.push_back(mid - half * x[k]);
      out.weights.push_back(half * w[k]);
      out.nodes.push_back(mid + half * x[k]);
      out.weights.push_back(half * w[k]);
    }
  }
  return out;
}

}  // namespace beammem::quad
