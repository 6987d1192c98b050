#pragma once

// Elementary symmetric polynomials of principal curvatures, their
// normalized roots, and small symmetric eigenvalue problems.

#include <algorithm>
#include <bit>
#include <initializer_list>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "translab/errors.hpp"

namespace translab {

/// Principal curvatures of a hypersurface at one point.
class CurvatureVector {
 public:
  CurvatureVector() = default;
  explicit CurvatureVector(std::vector<double> kappa) : kappa_(std::move(kappa)) {
    if (kappa_.empty()) throw ParameterError("CurvatureVector: need n >= 1 entries");
    for (double v : kappa_)
      if (!std::isfinite(v)) throw ParameterError("CurvatureVector: non-finite entry");
  }
  CurvatureVector(std::initializer_list<double> kappa)
      : CurvatureVector(std::vector<double>(kappa)) {}

  int n() const noexcept { return static_cast<int>(kappa_.size()); }
  std::span<const double> values() const noexcept { return kappa_; }
  double operator[](std::size_t i) const { return kappa_[i]; }
  auto begin() const noexcept { return kappa_.begin(); }
  auto end() const noexcept { return kappa_.end(); }

 private:
  std::vector<double> kappa_;
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

/// e_j(kappa) for 0 <= j <= n by the product-expansion recurrence; e_0 = 1.
/// Works for any field-like scalar (double, std::complex<double>).
template <typename T>
T elementary_symmetric(std::span<const T> kappa, int j) {
  const int n = static_cast<int>(kappa.size());
  if (j < 0 || j > n) return T(0);
  std::vector<T> e(static_cast<std::size_t>(j) + 1, T(0));
  e[0] = T(1);
  for (int i = 0; i < n; ++i) {
    const int top = std::min(i + 1, j);
    for (int m = top; m >= 1; --m) e[m] += kappa[i] * e[m - 1];
  }
  return e[j];
}

/// sigma_k over the k-subsets of kappa, 1 <= k <= n.
template <typename T>
T sigma_k(std::span<const T> kappa, int k) {
  const int n = static_cast<int>(kappa.size());
  if (k < 1 || k > n)
    throw ParameterError("sigma_k: k = " + std::to_string(k) + " outside 1.." +
                         std::to_string(n));
  return elementary_symmetric(kappa, k);
}

inline double sigma_k(const CurvatureVector& kappa, int k) {
  return sigma_k<double>(kappa.values(), k);
}

/// Direct sum over all k-subsets. Exponential in n; the reference the
/// recurrence is checked against.
inline double sigma_k_subsets(std::span<const double> kappa, int k) {
  const int n = static_cast<int>(kappa.size());
  if (k < 1 || k > n) throw ParameterError("sigma_k_subsets: k out of range");
  if (n > 24) throw ParameterError("sigma_k_subsets: n too large for enumeration");
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != static_cast<unsigned>(k)) continue;
    double prod = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= kappa[i];
    sum += prod;
  }
  return sum;
}

/// (sigma_k / C(n,k))^{1/k}; equals lambda on (lambda, ..., lambda).
inline double normalized_root(std::span<const double> kappa, int k) {
  const int n = static_cast<int>(kappa.size());
  const double s = sigma_k(kappa, k);
  if (s < 0.0) throw DomainError("normalized_root: sigma_k < 0 (not k-convex)");
  return std::pow(s / binomial(n, k), 1.0 / k);
}

inline double normalized_root(const CurvatureVector& kappa, int k) {
  return normalized_root(kappa.values(), k);
}

/// (sigma_n / sigma_{n-k})^{1/k} of the dual curvatures, sigma_0 = 1.
inline double dual_root(std::span<const double> kappa_star, int k) {
  const int n = static_cast<int>(kappa_star.size());
  if (k < 1 || k > n) throw ParameterError("dual_root: k out of range");
  const double top = elementary_symmetric(kappa_star, n);
  const double bottom = elementary_symmetric(kappa_star, n - k);
  if (!(bottom > 0.0)) throw DomainError("dual_root: sigma_{n-k} <= 0");
  if (top < 0.0) throw DomainError("dual_root: sigma_n < 0");
  return std::pow(top / bottom, 1.0 / k);
}

inline double dual_root(const CurvatureVector& kappa_star, int k) {
  return dual_root(kappa_star.values(), k);
}

/// Dense row-major symmetric matrix.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n < 1) throw ParameterError("SymMatrix: n must be >= 1");
  }
  SymMatrix(int n, std::initializer_list<double> rows) : SymMatrix(n) {
    if (rows.size() != a_.size()) throw ParameterError("SymMatrix: wrong entry count");
    std::copy(rows.begin(), rows.end(), a_.begin());
  }
  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int n() const noexcept { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }
  bool is_symmetric(double rel_tol = 1e-12) const {
    const double scale = std::max(max_abs(), 1e-300);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
    return true;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  SymMatrix vectors;           // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations. Rotations are skipped once the off-diagonal
/// entry falls below 1e-14 of the diagonal scale.
inline EigenDecomposition symmetric_eigen(const SymMatrix& input) {
  if (!input.is_symmetric()) throw ParameterError("symmetric_eigen: matrix is not symmetric");
  const int n = input.n();
  SymMatrix a = input;
  SymMatrix v = SymMatrix::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));

  constexpr double threshold = 1e-14;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off <= threshold * threshold * std::max(diag, 1e-300) || off == 0.0) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= threshold * std::sqrt(std::abs(a(p, p) * a(q, q))) ||
            apq == 0.0)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (int r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  EigenDecomposition out{std::vector<double>(static_cast<std::size_t>(n)), SymMatrix(n)};
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (int r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
  }
  return out;
}

namespace detail {

inline std::vector<double> eig2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

// Trigonometric solution of the depressed characteristic cubic.
inline std::vector<double> eig3(const SymMatrix& m) {
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
  if (p1 == 0.0) {
    std::vector<double> d{m(0, 0), m(1, 1), m(2, 2)};
    std::sort(d.begin(), d.end());
    return d;
  }
  const double d0 = m(0, 0) - q, d1 = m(1, 1) - q, d2 = m(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
  const double b01 = m(0, 1) / p, b02 = m(0, 2) / p, b12 = m(1, 2) / p;
  const double det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                     b02 * (b01 * b12 - b11 * b02);
  const double r = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double mid = 3.0 * q - hi - lo;
  std::vector<double> out{lo, mid, hi};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Ascending eigenvalues; closed form for n <= 3, Jacobi otherwise.
inline CurvatureVector symmetric_eigenvalues(const SymMatrix& a) {
  if (!a.is_symmetric()) throw ParameterError("symmetric_eigenvalues: matrix is not symmetric");
  switch (a.n()) {
    case 1:
      return CurvatureVector({a(0, 0)});
    case 2:
      return CurvatureVector(detail::eig2(a(0, 0), 0.5 * (a(0, 1) + a(1, 0)), a(1, 1)));
    case 3:
      return CurvatureVector(detail::eig3(a));
    default:
      return CurvatureVector(symmetric_eigen(a).values);
  }
}

}  // namespace translab
