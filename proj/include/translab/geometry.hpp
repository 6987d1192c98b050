#pragma once

// Discrete geometry of spacelike graphs x_{n+1} = u(x) in Minkowski space.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "translab/errors.hpp"
#include "translab/symfunc.hpp"

namespace translab {

/// Values of u on the uniform grid over [-L, L]^2 with N nodes per axis.
/// Node (i, j) sits at (x(i), x(j)) and is stored at j * N + i.
class GraphFunction {
 public:
  GraphFunction() = default;
  GraphFunction(double half_width, int nodes_per_axis)
      : L_(half_width), N_(nodes_per_axis),
        values_(static_cast<std::size_t>(nodes_per_axis) * nodes_per_axis, 0.0) {
    if (!(half_width > 0.0)) throw ParameterError("GraphFunction: L must be positive");
    if (nodes_per_axis < 5) throw ParameterError("GraphFunction: need at least 5 nodes per axis");
  }

  /// Grid with spacing as close to h as the box allows (2L/h rounded).
  static GraphFunction with_spacing(double half_width, double h) {
    const int cells = static_cast<int>(std::lround(2.0 * half_width / h));
    return GraphFunction(half_width, cells + 1);
  }

  template <typename F>
  static GraphFunction sample(double half_width, double h, F&& f) {
    auto g = with_spacing(half_width, h);
    for (int j = 0; j < g.N_; ++j)
      for (int i = 0; i < g.N_; ++i) g(i, j) = f(g.x(i), g.x(j));
    return g;
  }

  int n() const noexcept { return 2; }
  int nodes() const noexcept { return N_; }
  double half_width() const noexcept { return L_; }
  double h() const noexcept { return 2.0 * L_ / (N_ - 1); }
  double x(int i) const noexcept { return -L_ + i * h(); }

  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * N_ + static_cast<std::size_t>(i);
  }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool is_interior(int i, int j) const noexcept {
    return i >= 1 && j >= 1 && i <= N_ - 2 && j <= N_ - 2;
  }
  /// Interior minus a band of width 2h; curvature statistics use these.
  bool is_statistics_node(int i, int j) const noexcept {
    return i >= 2 && j >= 2 && i <= N_ - 3 && j <= N_ - 3;
  }

  /// 1 - max |Du| over interior nodes (central differences).
  double spacelike_margin() const;

 private:
  double L_ = 1.0;
  int N_ = 0;
  std::vector<double> values_;
};

struct GradientHessian {
  std::array<double, 2> du{};
  std::array<double, 3> d2u{};  // u_11, u_12, u_22
};

/// Second-order central differences at an interior node.
inline GradientHessian discrete_gradient_hessian(const GraphFunction& g, int i, int j) {
  if (!g.is_interior(i, j))
    throw BoundaryError("discrete_gradient_hessian: node (" + std::to_string(i) + ", " +
                        std::to_string(j) + ") has no full one-ring");
  const double h = g.h();
  GradientHessian out;
  out.du = {(g(i + 1, j) - g(i - 1, j)) / (2 * h), (g(i, j + 1) - g(i, j - 1)) / (2 * h)};
  out.d2u = {(g(i + 1, j) - 2 * g(i, j) + g(i - 1, j)) / (h * h),
             (g(i + 1, j + 1) - g(i + 1, j - 1) - g(i - 1, j + 1) + g(i - 1, j - 1)) / (4 * h * h),
             (g(i, j + 1) - 2 * g(i, j) + g(i, j - 1)) / (h * h)};
  return out;
}

inline double GraphFunction::spacelike_margin() const {
  double worst = 0.0;
  for (int j = 1; j <= N_ - 2; ++j)
    for (int i = 1; i <= N_ - 2; ++i) {
      const auto d = discrete_gradient_hessian(*this, i, j);
      worst = std::max(worst, std::hypot(d.du[0], d.du[1]));
    }
  return 1.0 - worst;
}

/// A = w^{-1} gamma D^2u gamma with gamma^{ik} = delta_ik + u_i u_k / (w (1 + w)),
/// w = sqrt(1 - |Du|^2). Its eigenvalues are the principal curvatures.
inline SymMatrix shape_operator(std::span<const double> du, const SymMatrix& d2u) {
  const int n = d2u.n();
  if (static_cast<int>(du.size()) != n) throw ParameterError("shape_operator: dimension mismatch");
  double p2 = 0.0;
  for (double v : du) p2 += v * v;
  if (!(p2 < 1.0)) throw SpacelikeViolation("shape_operator: |Du| >= 1");
  const double w = std::sqrt(1.0 - p2);
  SymMatrix gamma(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) gamma(i, k) = (i == k ? 1.0 : 0.0) + du[i] * du[k] / (w * (1 + w));
  SymMatrix gh(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += gamma(i, k) * d2u(k, l);
      gh(i, l) = s;
    }
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += gh(i, l) * gamma(l, j);
      a(i, j) = s / w;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  return a;
}

/// Two-dimensional shape operator entries (A11, A12, A22) and w, written for
/// any scalar type so the flow can differentiate it by complex steps.
template <typename T>
struct ShapeOperator2 {
  T a11, a12, a22, w;
};

/// Same, with w supplied by the caller (who may know 1 - |Du|^2 more
/// accurately than the cancellation 1 - p1^2 - p2^2 allows).
template <typename T>
ShapeOperator2<T> shape_operator_2d_w(T p1, T p2, T w, T h11, T h12, T h22) {
  const T c = T(1) / (w * (T(1) + w));
  const T g11 = T(1) + p1 * p1 * c, g12 = p1 * p2 * c, g22 = T(1) + p2 * p2 * c;
  // (gamma H)
  const T m11 = g11 * h11 + g12 * h12, m12 = g11 * h12 + g12 * h22;
  const T m21 = g12 * h11 + g22 * h12, m22 = g12 * h12 + g22 * h22;
  return {(m11 * g11 + m12 * g12) / w, (m11 * g12 + m12 * g22) / w, (m21 * g12 + m22 * g22) / w,
          w};
}

template <typename T>
ShapeOperator2<T> shape_operator_2d(T p1, T p2, T h11, T h12, T h22) {
  using std::sqrt;
  return shape_operator_2d_w(p1, p2, T(sqrt(T(1) - p1 * p1 - p2 * p2)), h11, h12, h22);
}

/// Per-node curvature data on the interior of a GraphFunction.
struct CurvatureField {
  int nodes = 0;
  double h = 0.0;
  double L = 0.0;
  int k = 1;
  std::vector<double> kappa1, kappa2;  // ascending principal curvatures
  std::vector<double> w, v, phi;
  std::vector<unsigned char> flagged;  // not k-convex
  std::vector<unsigned char> interior;
  std::size_t flagged_count = 0;
  std::size_t interior_count = 0;

  double flagged_fraction() const {
    return interior_count ? static_cast<double>(flagged_count) / interior_count : 0.0;
  }
};

/// (sigma_k / C(2,k))^{1/k} from the 2x2 shape operator, 0 where sigma_k <= 0.
template <typename T>
T normalized_root_2d(const ShapeOperator2<T>& s, int k) {
  using std::sqrt;
  if (k == 1) return (s.a11 + s.a22) / T(2);
  const T det = s.a11 * s.a22 - s.a12 * s.a12;
  return sqrt(det);
}

inline CurvatureField curvature_field(const GraphFunction& g, int k) {
  if (k < 1 || k > 2) throw ParameterError("curvature_field: k must be 1 or 2 on 2-D grids");
  const int N = g.nodes();
  const std::size_t total = static_cast<std::size_t>(N) * N;
  CurvatureField f;
  f.nodes = N;
  f.h = g.h();
  f.L = g.half_width();
  f.k = k;
  f.kappa1.assign(total, 0.0);
  f.kappa2.assign(total, 0.0);
  f.w.assign(total, 1.0);
  f.v.assign(total, 1.0);
  f.phi.assign(total, 0.0);
  f.flagged.assign(total, 0);
  f.interior.assign(total, 0);
  bool outside_closure = false;  // some sigma_j clearly negative
  for (int j = 1; j <= N - 2; ++j)
    for (int i = 1; i <= N - 2; ++i) {
      const auto d = discrete_gradient_hessian(g, i, j);
      const double p2 = d.du[0] * d.du[0] + d.du[1] * d.du[1];
      if (!(p2 < 1.0))
        throw SpacelikeViolation("curvature_field: |Du| >= 1 at node (" + std::to_string(i) +
                                 ", " + std::to_string(j) + ")");
      const auto s = shape_operator_2d(d.du[0], d.du[1], d.d2u[0], d.d2u[1], d.d2u[2]);
      const double mean = 0.5 * (s.a11 + s.a22);
      const double rad = std::hypot(0.5 * (s.a11 - s.a22), s.a12);
      const std::size_t idx = g.index(i, j);
      f.interior[idx] = 1;
      ++f.interior_count;
      f.kappa1[idx] = mean - rad;
      f.kappa2[idx] = mean + rad;
      f.w[idx] = s.w;
      f.v[idx] = 1.0 / s.w;
      const double s1 = s.a11 + s.a22;
      const double s2 = s.a11 * s.a22 - s.a12 * s.a12;
      const bool admissible = s1 > 0.0 && (k == 1 || s2 > 0.0);
      if (!admissible) {
        f.flagged[idx] = 1;
        ++f.flagged_count;
      }
      // affine data rounds to +-0 and stays in the closed cone
      if (s1 < -1e-12 || (k == 2 && s2 < -1e-12)) outside_closure = true;
      f.phi[idx] = admissible ? normalized_root_2d(s, k) : 0.0;
    }
  if (f.interior_count > 0 && f.flagged_count == f.interior_count && outside_closure)
    throw DegenerateError("curvature_field: no interior node is k-convex");
  return f;
}

/// sup over statistics nodes of |a / w - Phi|.
inline double translator_residual(const GraphFunction& g, int k, double a) {
  const auto f = curvature_field(g, k);
  double sup = 0.0;
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.nodes(); ++i) {
      if (!g.is_statistics_node(i, j)) continue;
      const std::size_t idx = g.index(i, j);
      sup = std::max(sup, std::abs(a / f.w[idx] - f.phi[idx]));
    }
  return sup;
}

}  // namespace translab
