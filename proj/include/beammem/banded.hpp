#pragma once

// Symmetric banded storage and an LL^T factorization that is computed once
// and reused for every right-hand side.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beammem/errors.hpp"

namespace beammem {

/// Lower band of a symmetric matrix: entry (i, j) with 0 <= i - j <= bw is
/// stored at data[i * (bw + 1) + (i - j)].
class BandedSymmetric {
 public:
  BandedSymmetric() = default;
  BandedSymmetric(std::size_t n, std::size_t half_bandwidth)
      : n_(n), bw_(half_bandwidth), data_(n * (half_bandwidth + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t half_bandwidth() const { return bw_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (i >= j ? i - j : j - i) <= bw_;
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return i - j <= bw_ ? data_[i * (bw_ + 1) + (i - j)] : 0.0;
  }

  double& at(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) throw InputError("banded entry outside the band");
    return data_[i * (bw_ + 1) + (i - j)];
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_) throw InputError("banded multiply: dimension mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= bw_ ? i - bw_ : 0;
      double acc = data_[i * (bw_ + 1)] * x[i];
      for (std::size_t j = j0; j < i; ++j) {
        const double a = data_[i * (bw_ + 1) + (i - j)];
        acc += a * x[j];
        y[j] += a * x[i];
      }
      y[i] += acc;
    }
    return y;
  }

  /// |A| |x| entrywise, the scale of the rounding error in A x.
  Eigen::VectorXd multiply_abs(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_) throw InputError("banded multiply: dimension mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= bw_ ? i - bw_ : 0;
      double acc = std::abs(data_[i * (bw_ + 1)] * x[i]);
      for (std::size_t j = j0; j < i; ++j) {
        const double a = std::abs(data_[i * (bw_ + 1) + (i - j)]);
        acc += a * std::abs(x[j]);
        y[j] += a * std::abs(x[i]);
      }
      y[i] += acc;
    }
    return y;
  }

  double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(multiply(x)); }

  /// this + scale * other (same shape).
  BandedSymmetric plus(const BandedSymmetric& other, double scale) const {
    if (other.n_ != n_ || other.bw_ != bw_) throw InputError("banded plus: shape mismatch");
    BandedSymmetric out = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] += scale * other.data_[k];
    return out;
  }

  Eigen::MatrixXd dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = (i >= bw_ ? i - bw_ : 0); j <= i; ++j) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (*this)(i, j);
      }
    }
    return a;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> data_;
};

/// Banded Cholesky A = L L^T; the factor keeps the band of A.
class BandedCholesky {
 public:
  explicit BandedCholesky(const BandedSymmetric& a) : factor_(a) {
    const std::size_t n = a.size(), bw = a.half_bandwidth();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k0 = j >= bw ? j - bw : 0;
      double d = factor_(j, j);
      for (std::size_t k = k0; k < j; ++k) d -= factor_(j, k) * factor_(j, k);
      if (!(d > 0.0)) {
        throw NumericError("banded Cholesky: matrix not positive definite at row " + std::to_string(j));
      }
      const double ljj = std::sqrt(d);
      factor_.at(j, j) = ljj;
      for (std::size_t i = j + 1; i < std::min(n, j + bw + 1); ++i) {
        double v = factor_(i, j);
        const std::size_t kk = i >= bw ? i - bw : 0;
        for (std::size_t k = std::max(k0, kk); k < j; ++k) v -= factor_(i, k) * factor_(j, k);
        factor_.at(i, j) = v / ljj;
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const std::size_t n = factor_.size(), bw = factor_.half_bandwidth();
    if (static_cast<std::size_t>(b.size()) != n) throw InputError("banded solve: dimension mismatch");
    Eigen::VectorXd y = b;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = (i >= bw ? i - bw : 0); k < i; ++k) y[i] -= factor_(i, k) * y[k];
      y[i] /= factor_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < std::min(n, ii + bw + 1); ++k) y[ii] -= factor_(k, ii) * y[k];
      y[ii] /= factor_(ii, ii);
    }
    return y;
  }

 private:
  BandedSymmetric factor_;
};

}  // namespace beammem
