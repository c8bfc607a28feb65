#pragma once

// Cubic Hermite finite elements for the clamped-free beam on (0, 1) with
// unit density and unit flexural rigidity.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "beammem/banded.hpp"
#include "beammem/errors.hpp"

namespace beammem {

/// Uniform mesh; node i sits at x = i h. Each node carries (deflection,
/// rotation); the pair at node 0 is removed by the clamp, so node i >= 1
/// owns free dofs 2(i-1) and 2(i-1)+1.
struct BeamMesh {
  int n_elements = 0;
  double h = 0.0;

  int free_dofs() const { return 2 * n_elements; }
  double node(int i) const { return h * i; }
};

struct BeamAssembly {
  BeamMesh mesh;
  BandedSymmetric mass;
  BandedSymmetric stiffness;
  int tip_index = 0;  ///< deflection dof at x = 1

  int dim() const { return mesh.free_dofs(); }
};

namespace hermite {

/// Shape functions on [0, h] in local coordinate xi in [0, 1], and their
/// derivatives with respect to x.
inline std::array<double, 4> shape(double xi, double h, int deriv) {
  const double x2 = xi * xi, x3 = x2 * xi;
  switch (deriv) {
    case 0: return {1 - 3 * x2 + 2 * x3, h * (xi - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (x3 - x2)};
    case 1: return {(-6 * xi + 6 * x2) / h, 1 - 4 * xi + 3 * x2, (6 * xi - 6 * x2) / h, 3 * x2 - 2 * xi};
    case 2: return {(-6 + 12 * xi) / (h * h), (-4 + 6 * xi) / h, (6 - 12 * xi) / (h * h), (6 * xi - 2) / h};
    case 3: return {12 / (h * h * h), 6 / (h * h), -12 / (h * h * h), 6 / (h * h)};
    default: throw InputError("hermite shape: derivative order > 3");
  }
}

/// Element dofs of element e; the clamped node-0 entries read as zero.
inline std::array<double, 4> element_dofs(const BeamMesh& mesh, const Eigen::VectorXd& d, int e) {
  std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
  if (e > 0) {
    out[0] = d[2 * (e - 1)];
    out[1] = d[2 * (e - 1) + 1];
  }
  out[2] = d[2 * e];
  out[3] = d[2 * e + 1];
  (void)mesh;
  return out;
}

}  // namespace hermite

inline BeamAssembly assemble(int n_elements) {
  if (n_elements < 2) throw InputError("beam mesh needs at least 2 elements");
  BeamAssembly a;
  a.mesh.n_elements = n_elements;
  a.mesh.h = 1.0 / n_elements;
  const int n = a.mesh.free_dofs();
  a.mass = BandedSymmetric(static_cast<std::size_t>(n), 3);
  a.stiffness = BandedSymmetric(static_cast<std::size_t>(n), 3);
  a.tip_index = n - 2;

  const double h = a.mesh.h;
  const double k[4][4] = {{12, 6 * h, -12, 6 * h},
                          {6 * h, 4 * h * h, -6 * h, 2 * h * h},
                          {-12, -6 * h, 12, -6 * h},
                          {6 * h, 2 * h * h, -6 * h, 4 * h * h}};
  const double m[4][4] = {{156, 22 * h, 54, -13 * h},
                          {22 * h, 4 * h * h, 13 * h, -3 * h * h},
                          {54, 13 * h, 156, -22 * h},
                          {-13 * h, -3 * h * h, -22 * h, 4 * h * h}};
  const double ks = 1.0 / (h * h * h), ms = h / 420.0;

  for (int e = 0; e < n_elements; ++e) {
    // global free dof of local dof l, or -1 when clamped
    int g[4] = {2 * (e - 1), 2 * (e - 1) + 1, 2 * e, 2 * e + 1};
    for (int r = 0; r < 4; ++r) {
      if (g[r] < 0) continue;
      for (int c = 0; c <= r; ++c) {
        if (g[c] < 0) continue;
        const auto gr = static_cast<std::size_t>(g[r]), gc = static_cast<std::size_t>(g[c]);
        a.stiffness.at(gr, gc) += ks * k[r][c];
        a.mass.at(gr, gc) += ms * m[r][c];
      }
    }
  }
  return a;
}

/// Value of the interpolated field (or its derivative up to order 3) at x.
inline double evaluate_field(const BeamAssembly& a, const Eigen::VectorXd& dofs, double x, int deriv = 0) {
  if (dofs.size() != a.dim()) throw InputError("evaluate_field: dimension mismatch");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("evaluate_field: x outside [0, 1]");
  const int ne = a.mesh.n_elements;
  const int e = std::min(static_cast<int>(x / a.mesh.h), ne - 1);
  const double xi = (x - a.mesh.node(e)) / a.mesh.h;
  const auto d = hermite::element_dofs(a.mesh, dofs, e);
  const auto n = hermite::shape(xi, a.mesh.h, deriv);
  return n[0] * d[0] + n[1] * d[1] + n[2] * d[2] + n[3] * d[3];
}

// ---------------------------------------------------------------------------
// Analytic cantilever modes

/// Root beta_k of cos(beta) cosh(beta) = -1, k = 1, 2, ...
inline double cantilever_beta(int k) {
  if (k < 1) throw InputError("cantilever_beta: k must be >= 1");
  // cos(b) + 1/cosh(b) changes sign exactly once on [(k-1) pi, k pi].
  auto f = [](double b) { return std::cos(b) + 1.0 / std::cosh(b); };
  auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 4e-16 * std::abs(hi); };
  const auto [lo, hi] = boost::math::tools::bisect(f, (k - 1) * M_PI, k * M_PI, tol);
  return 0.5 * (lo + hi);
}

/// Analytic clamped-free eigenfunction phi_k (or derivative up to 3) at x.
inline double mode_shape(int k, double x, int deriv = 0) {
  if (k < 1 || k > 5) throw InputError("mode_shape: k must be in 1..5");
  if (deriv < 0 || deriv > 3) throw InputError("mode_shape: derivative order must be 0..3");
  const double b = cantilever_beta(k);
  const double sigma = (std::cosh(b) + std::cos(b)) / (std::sinh(b) + std::sin(b));
  const double bx = b * x;
  const double ch = std::cosh(bx), c = std::cos(bx), sh = std::sinh(bx), s = std::sin(bx);
  switch (deriv) {
    case 0: return ch - c - sigma * (sh - s);
    case 1: return b * (sh + s - sigma * (ch - c));
    case 2: return b * b * (ch + c - sigma * (sh + s));
    default: return b * b * b * (sh - s - sigma * (ch + c));
  }
}

// ---------------------------------------------------------------------------
// Modal analysis

/// Angular frequencies of the first `count` modes, ascending.
///
/// Solves M x = mu K x with mu = 1 / omega^2: the low modes are the largest
/// mu and keep full relative accuracy, unlike the smallest eigenvalues of
/// (K, M) whose error scales with the stiffness condition number.
inline std::vector<double> natural_frequencies(const BeamAssembly& a, int count) {
  if (count < 1 || count > a.dim()) throw InputError("natural_frequencies: count out of range");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.mass.dense(), a.stiffness.dense(),
                                                                   Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("natural_frequencies: tridiagonal QR did not converge within " +
                       std::to_string(30 * a.dim()) + " iterations");
  }
  const auto& mu = solver.eigenvalues();  // ascending
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(1.0 / std::sqrt(mu[a.dim() - 1 - i]));
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic functionals

/// int_0^1 |u_xx|^2 dx, equal to u^T K u. u_xx is linear on each element, so
/// the integral is a sum of squares of end curvatures; this avoids the
/// cancellation between the O(h^-3) entries of K.
inline double bending_integral(const BeamAssembly& a, const Eigen::VectorXd& u) {
  if (u.size() != a.dim()) throw InputError("bending_integral: dimension mismatch");
  const double h = a.mesh.h;
  double total = 0.0;
  for (int e = 0; e < a.mesh.n_elements; ++e) {
    const auto d = hermite::element_dofs(a.mesh, u, e);
    const double chord = 6.0 * (d[2] - d[0]) / h;
    const double c0 = (chord - 4.0 * d[1] - 2.0 * d[3]) / h;
    const double c1 = (-chord + 2.0 * d[1] + 4.0 * d[3]) / h;
    const double mean = c0 + c1, diff = c0 - c1;
    total += h / 3.0 * (0.75 * mean * mean + 0.25 * diff * diff);
  }
  return total;
}

/// psi_Omega = 1/2 (v^T M v + int |u_xx|^2).
inline double interior_energy(const BeamAssembly& a, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != a.dim() || v.size() != a.dim()) throw InputError("interior_energy: dimension mismatch");
  return 0.5 * (a.mass.quadratic_form(v) + bending_integral(a, u));
}

/// int_0^1 x v(x) u_x(x) dx. The integrand is a degree-6 polynomial per
/// element, integrated exactly with 4-point Gauss-Legendre.
inline double cross_term(const BeamAssembly& a, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != a.dim() || v.size() != a.dim()) throw InputError("cross_term: dimension mismatch");
  using Rule = boost::math::quadrature::gauss<double, 4>;
  const auto& gx = Rule::abscissa();
  const auto& gw = Rule::weights();
  const double h = a.mesh.h;
  double total = 0.0;
  for (int e = 0; e < a.mesh.n_elements; ++e) {
    const auto du = hermite::element_dofs(a.mesh, u, e);
    const auto dv = hermite::element_dofs(a.mesh, v, e);
    for (std::size_t q = 0; q < gx.size(); ++q) {
      for (double sign : {-1.0, 1.0}) {
        const double xi = 0.5 * (1.0 + sign * gx[q]);
        const auto n0 = hermite::shape(xi, h, 0);
        const auto n1 = hermite::shape(xi, h, 1);
        double vv = 0.0, ux = 0.0;
        for (int l = 0; l < 4; ++l) {
          vv += n0[l] * dv[l];
          ux += n1[l] * du[l];
        }
        total += 0.5 * h * gw[q] * (a.mesh.node(e) + xi * h) * vv * ux;
      }
    }
  }
  return total;
}

}  // namespace beammem
