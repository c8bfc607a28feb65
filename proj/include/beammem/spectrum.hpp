#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "beammem/errors.hpp"

namespace beammem {

namespace detail {
/// |sum_k w_k (x_k - mean) e^{-i omega t_k}| with a Hann taper.
inline double windowed_dtft(std::span<const double> t, std::span<const double> x, double mean, double omega) {
  const std::size_t n = t.size();
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n - 1));
    acc += w * (x[k] - mean) * std::polar(1.0, -omega * t[k]);
  }
  return std::abs(acc);
}
}  // namespace detail

/// Angular frequency of the largest spectral peak of a uniformly sampled
/// signal in [omega_min, omega_max]: coarse scan, then Brent refinement.
inline double dominant_frequency(std::span<const double> t, std::span<const double> x, double omega_min,
                                 double omega_max) {
  if (t.size() != x.size()) throw InputError("dominant_frequency: size mismatch");
  if (t.size() < 16) throw InputError("dominant_frequency: need at least 16 samples");
  if (!(omega_min >= 0.0 && omega_max > omega_min)) throw InputError("dominant_frequency: bad frequency band");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw InputError("dominant_frequency: zero time span");
  // resolution 2 pi / span; scan at a quarter of it
  const double d_omega = 0.25 * 2.0 * M_PI / span;
  const auto steps = static_cast<std::size_t>(std::ceil((omega_max - omega_min) / d_omega));
  double best = omega_min, best_val = -1.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double w = std::min(omega_max, omega_min + static_cast<double>(i) * d_omega);
    const double v = detail::windowed_dtft(t, x, mean, w);
    if (v > best_val) {
      best_val = v;
      best = w;
    }
  }
  const double lo = std::max(omega_min, best - d_omega);
  const double hi = std::min(omega_max, best + d_omega);
  const auto r = boost::math::tools::brent_find_minima(
      [&](double w) { return -detail::windowed_dtft(t, x, mean, w); }, lo, hi, 40);
  return r.first;
}

}  // namespace beammem
