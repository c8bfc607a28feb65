#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "beammem/errors.hpp"

namespace beammem {

/// Relative past history of the tip at the initial instant,
/// w(tau) = u(1, -tau) - u(1, 0) for tau >= 0. Every built-in satisfies
/// w(0) = 0.
struct HistoryFunction {
  enum class Type { zero, exp_approach, sine, custom };

  Type type = Type::zero;
  double amplitude = 0.0;
  double rate = 0.0;  ///< nu for exp_approach, omega for sine
  std::function<double(double)> custom_value;
  std::function<double(double)> custom_derivative;

  static HistoryFunction zero() { return {}; }

  /// w(tau) = A (1 - exp(-nu tau))
  static HistoryFunction exp_approach(double A, double nu) {
    if (!std::isfinite(A)) throw InputError("history: amplitude must be finite");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw InputError("history: exp_approach rate nu must be > 0");
    return {Type::exp_approach, A, nu, {}, {}};
  }

  /// w(tau) = A sin(omega tau)
  static HistoryFunction sine(double A, double omega) {
    if (!std::isfinite(A) || !std::isfinite(omega)) throw InputError("history: parameters must be finite");
    return {Type::sine, A, omega, {}, {}};
  }

  /// Arbitrary w with its derivative; `bound` is sup |w| and `length` the
  /// scale on which w varies. w(0) = 0 is checked where the history is used.
  static HistoryFunction custom(std::function<double(double)> w, std::function<double(double)> dw, double bound,
                                double length = 1.0) {
    HistoryFunction h;
    h.type = Type::custom;
    h.amplitude = bound;
    h.rate = 1.0 / length;
    h.custom_value = std::move(w);
    h.custom_derivative = std::move(dw);
    return h;
  }

  double value(double tau) const {
    switch (type) {
      case Type::zero: return 0.0;
      case Type::exp_approach: return amplitude * -std::expm1(-rate * tau);
      case Type::sine: return amplitude * std::sin(rate * tau);
      case Type::custom: return custom_value(tau);
    }
    return 0.0;
  }

  /// dw/dtau; the tip velocity in the past is u_t(1, -tau) = -dw/dtau.
  double derivative(double tau) const {
    switch (type) {
      case Type::zero: return 0.0;
      case Type::exp_approach: return amplitude * rate * std::exp(-rate * tau);
      case Type::sine: return amplitude * rate * std::cos(rate * tau);
      case Type::custom: return custom_derivative(tau);
    }
    return 0.0;
  }

  double sup_abs() const { return std::abs(amplitude); }

  /// Length scale on which w varies; used to size quadrature panels.
  double scale() const {
    if (type == Type::exp_approach || type == Type::custom) return 1.0 / rate;
    if (type == Type::sine && rate != 0.0) return M_PI / std::abs(rate);
    return 1.0;
  }

  std::string name() const {
    switch (type) {
      case Type::zero: return "zero";
      case Type::exp_approach: return "exp_approach";
      case Type::sine: return "sine";
      case Type::custom: return "custom";
    }
    return "?";
  }
};

}  // namespace beammem
