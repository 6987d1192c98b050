#pragma once

// Legendre transform u*(xi) = sup_x (x.xi - u(x)) of sampled convex graphs
// and the residual of the dual translator equation
//   (sigma_n / sigma_{n-k})^{1/k}(w* gamma* D^2u* gamma*) = (1/a) C(n,k)^{-1/k} w*.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "translab/errors.hpp"
#include "translab/geometry.hpp"
#include "translab/symfunc.hpp"

namespace translab {

/// u* on the square grid [-r, r]^2; with `disc` set only |xi| <= r counts.
struct DualFunction {
  GraphFunction values;
  std::vector<unsigned char> resolved;
  std::vector<double> argmax1, argmax2;  // maximizing x per node
  double radius = 0.0;
  bool disc = true;

  double resolved_fraction() const {
    std::size_t in = 0, ok = 0;
    const auto& g = values;
    for (int j = 0; j < g.nodes(); ++j)
      for (int i = 0; i < g.nodes(); ++i) {
        if (disc && std::hypot(g.x(i), g.x(j)) > radius) continue;
        ++in;
        ok += resolved[g.index(i, j)];
      }
    return in ? static_cast<double>(ok) / in : 0.0;
  }
};

namespace detail {

// Weights of the 4-point Lagrange interpolant on nodes s, s+1, s+2, s+3
// (unit spacing) at offset t from node s, with first and second derivatives.
inline void lagrange4(double t, std::array<double, 4>& w0, std::array<double, 4>& w1,
                      std::array<double, 4>& w2) {
  for (int m = 0; m < 4; ++m) {
    double denom = 1.0;
    for (int l = 0; l < 4; ++l)
      if (l != m) denom *= (m - l);
    // Product over the three other nodes and its derivatives.
    std::array<double, 3> r{};
    int c = 0;
    for (int l = 0; l < 4; ++l)
      if (l != m) r[c++] = t - l;
    w0[m] = r[0] * r[1] * r[2] / denom;
    w1[m] = (r[1] * r[2] + r[0] * r[2] + r[0] * r[1]) / denom;
    w2[m] = 2.0 * (r[0] + r[1] + r[2]) / denom;
  }
}

inline int patch_start(double pos, int nodes) {
  return std::clamp(static_cast<int>(std::floor(pos)) - 1, 0, nodes - 4);
}

// Newton ascent of x.xi - P(x) on the bicubic Lagrange interpolant P,
// started at node (i0, j0). Returns the value; x1, x2 receive the argmax.
inline double polish_2d(const GraphFunction& g, int i0, int j0, double xi1, double xi2, double& x1,
                        double& x2) {
  const double h = g.h();
  const int N = g.nodes();
  double s1 = i0, s2 = j0;  // position in index units
  double value = g.x(i0) * xi1 + g.x(j0) * xi2 - g(i0, j0);
  x1 = g.x(i0);
  x2 = g.x(j0);
  for (int it = 0; it < 12; ++it) {
    const int a = patch_start(s1, N), b = patch_start(s2, N);
    std::array<double, 4> u0, u1, u2, v0, v1, v2;
    lagrange4(s1 - a, u0, u1, u2);
    lagrange4(s2 - b, v0, v1, v2);
    double P = 0, P1 = 0, P2 = 0, P11 = 0, P12 = 0, P22 = 0;
    for (int q = 0; q < 4; ++q)
      for (int p = 0; p < 4; ++p) {
        const double f = g(a + p, b + q);
        P += u0[p] * v0[q] * f;
        P1 += u1[p] * v0[q] * f;
        P2 += u0[p] * v1[q] * f;
        P11 += u2[p] * v0[q] * f;
        P12 += u1[p] * v1[q] * f;
        P22 += u0[p] * v2[q] * f;
      }
    // Derivatives in x: index units scale by h.
    P1 /= h;
    P2 /= h;
    P11 /= h * h;
    P12 /= h * h;
    P22 /= h * h;
    const double cx1 = g.x(0) + s1 * h, cx2 = g.x(0) + s2 * h;
    value = cx1 * xi1 + cx2 * xi2 - P;
    x1 = cx1;
    x2 = cx2;
    const double det = P11 * P22 - P12 * P12;
    if (!(P11 > 0.0 && det > 0.0)) break;
    const double r1 = xi1 - P1, r2 = xi2 - P2;
    const double d1 = (P22 * r1 - P12 * r2) / det, d2 = (P11 * r2 - P12 * r1) / det;
    // Stay within one cell of the discrete maximizer.
    const double n1 = std::clamp(s1 + d1 / h, i0 - 1.0, i0 + 1.0);
    const double n2 = std::clamp(s2 + d2 / h, j0 - 1.0, j0 + 1.0);
    const double moved = std::hypot(n1 - s1, n2 - s2);
    s1 = n1;
    s2 = n2;
    if (moved < 1e-13) break;
  }
  return value;
}

inline void require_convex_spacelike(const GraphFunction& g) {
  for (int j = 1; j < g.nodes() - 1; ++j)
    for (int i = 1; i < g.nodes() - 1; ++i) {
      const auto d = discrete_gradient_hessian(g, i, j);
      if (!(d.d2u[0] > 0.0 && d.d2u[0] * d.d2u[2] - d.d2u[1] * d.d2u[1] > 0.0))
        throw DomainError("legendre_transform: input is not strictly convex at node (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      if (!(std::hypot(d.du[0], d.du[1]) < 1.0))
        throw SpacelikeViolation("legendre_transform: input is not spacelike");
    }
}

}  // namespace detail

struct LegendreOptions {
  bool disc = true;
  bool polish = true;
  bool exhaustive = false;  // full scan per xi instead of warm-started ascent
  bool require_spacelike = true;
};

/// u* on the grid [-radius, radius]^2 with spacing h_xi. A node is
/// unresolved when the discrete maximizer lies on the primal boundary (the
/// primal domain is too small to reach that slope) or outside the disc.
inline DualFunction legendre_transform(const GraphFunction& g, double radius, double h_xi,
                                       const LegendreOptions& opt = {}) {
  if (!(radius > 0.0)) throw ParameterError("legendre_transform: radius must be positive");
  if (opt.disc && !(radius < 1.0)) throw ParameterError("legendre_transform: disc radius must be < 1");
  if (opt.require_spacelike) detail::require_convex_spacelike(g);
  DualFunction d;
  d.values = GraphFunction::with_spacing(radius, h_xi);
  d.radius = radius;
  d.disc = opt.disc;
  const int M = d.values.nodes();
  const std::size_t total = static_cast<std::size_t>(M) * M;
  d.resolved.assign(total, 0);
  d.argmax1.assign(total, 0.0);
  d.argmax2.assign(total, 0.0);
  const int N = g.nodes();
  auto objective = [&](int i, int j, double xi1, double xi2) {
    return g.x(i) * xi1 + g.x(j) * xi2 - g(i, j);
  };
  // Warm start: previous node in the row, or the first node of the previous row.
  int row_i = N / 2, row_j = N / 2, prev_i = row_i, prev_j = row_j;
  for (int q = 0; q < M; ++q) {
    for (int p = 0; p < M; ++p) {
      const double xi1 = d.values.x(p), xi2 = d.values.x(q);
      int bi = p == 0 ? row_i : prev_i, bj = p == 0 ? row_j : prev_j;
      double best = objective(bi, bj, xi1, xi2);
      if (opt.exhaustive) {
        for (int j = 0; j < N; ++j)
          for (int i = 0; i < N; ++i) {
            const double v = objective(i, j, xi1, xi2);
            if (v > best) {
              best = v;
              bi = i;
              bj = j;
            }
          }
      } else {
        for (bool moved = true; moved;) {
          moved = false;
          const int oi = bi, oj = bj;
          for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
              const int i = oi + di, j = oj + dj;
              if (i < 0 || j < 0 || i >= N || j >= N) continue;
              const double v = objective(i, j, xi1, xi2);
              if (v > best) {
                best = v;
                bi = i;
                bj = j;
                moved = true;
              }
            }
        }
      }
      prev_i = bi;
      prev_j = bj;
      if (p == 0) {
        row_i = bi;
        row_j = bj;
      }
      const std::size_t idx = d.values.index(p, q);
      double value = best, x1 = g.x(bi), x2 = g.x(bj);
      const bool interior = bi > 0 && bj > 0 && bi < N - 1 && bj < N - 1;
      if (interior && opt.polish) value = detail::polish_2d(g, bi, bj, xi1, xi2, x1, x2);
      d.values(p, q) = value;
      d.argmax1[idx] = x1;
      d.argmax2[idx] = x2;
      d.resolved[idx] = interior && (!opt.disc || std::hypot(xi1, xi2) <= radius);
    }
  }
  return d;
}

struct Dual1D {
  std::vector<double> value;
  std::vector<unsigned char> resolved;
};

/// One-dimensional u*(xi) = max_x (x xi - u(x)) on uniform x, polished on
/// the local cubic Lagrange interpolant.
inline Dual1D legendre_transform_1d(const std::vector<double>& x, const std::vector<double>& u,
                                    const std::vector<double>& xi) {
  const int N = static_cast<int>(x.size());
  if (N < 4 || u.size() != x.size()) throw ParameterError("legendre_transform_1d: need >= 4 matching samples");
  const double h = x[1] - x[0];
  Dual1D out;
  out.value.resize(xi.size());
  out.resolved.resize(xi.size());
  for (std::size_t q = 0; q < xi.size(); ++q) {
    int best = 0;
    for (int i = 1; i < N; ++i)
      if (x[i] * xi[q] - u[i] > x[best] * xi[q] - u[best]) best = i;
    double value = x[best] * xi[q] - u[best];
    const bool interior = best > 0 && best < N - 1;
    if (interior) {
      double s = best;
      for (int it = 0; it < 20; ++it) {
        const int a = detail::patch_start(s, N);
        std::array<double, 4> w0, w1, w2;
        detail::lagrange4(s - a, w0, w1, w2);
        double P = 0, P1 = 0, P2 = 0;
        for (int m = 0; m < 4; ++m) {
          P += w0[m] * u[a + m];
          P1 += w1[m] * u[a + m] / h;
          P2 += w2[m] * u[a + m] / (h * h);
        }
        value = (x[0] + s * h) * xi[q] - P;
        if (!(P2 > 0.0)) break;
        const double next = std::clamp(s + (xi[q] - P1) / P2 / h, best - 1.0, best + 1.0);
        const double moved = std::abs(next - s);
        s = next;
        if (moved < 1e-14) break;
      }
    }
    out.value[q] = value;
    out.resolved[q] = interior;
  }
  return out;
}

struct DualResidual {
  double sup = 0.0;
  std::size_t nodes = 0;       // nodes entering the sup
  double resolved_fraction = 0.0;
};

/// sup over resolved nodes (with a resolved 3x3 stencil) of
/// |(sigma_2 / sigma_{2-k})^{1/k}(kappa*) - (1/a) C(2,k)^{-1/k} w*|,
/// kappa* the eigenvalues of w* gamma* D^2u* gamma*, gamma* = I - xi xi / (1 + w*).
inline DualResidual dual_residual(const DualFunction& d, int k, double a) {
  if (k < 1 || k > 2) throw ParameterError("dual_residual: k must be 1 or 2 for n = 2");
  if (!(a > 0.0)) throw ParameterError("dual_residual: a must be positive");
  const auto& g = d.values;
  const int M = g.nodes();
  const double c = std::pow(binomial(2, k), -1.0 / k) / a;
  DualResidual out;
  out.resolved_fraction = d.resolved_fraction();
  for (int j = 1; j < M - 1; ++j)
    for (int i = 1; i < M - 1; ++i) {
      bool ok = true;
      for (int dj = -1; dj <= 1 && ok; ++dj)
        for (int di = -1; di <= 1 && ok; ++di) ok = d.resolved[g.index(i + di, j + dj)] != 0;
      if (!ok) continue;
      const double xi1 = g.x(i), xi2 = g.x(j);
      const double r2 = xi1 * xi1 + xi2 * xi2;
      if (!(r2 < 1.0)) continue;
      const double ws = std::sqrt(1.0 - r2);
      const auto dh = discrete_gradient_hessian(g, i, j);
      const double g11 = 1 - xi1 * xi1 / (1 + ws), g12 = -xi1 * xi2 / (1 + ws),
                   g22 = 1 - xi2 * xi2 / (1 + ws);
      const double h11 = dh.d2u[0], h12 = dh.d2u[1], h22 = dh.d2u[2];
      const double m11 = g11 * h11 + g12 * h12, m12 = g11 * h12 + g12 * h22;
      const double m21 = g12 * h11 + g22 * h12, m22 = g12 * h12 + g22 * h22;
      const double a11 = ws * (m11 * g11 + m12 * g12), a12 = ws * (m11 * g12 + m12 * g22),
                   a22 = ws * (m21 * g12 + m22 * g22);
      const auto kappa = detail::eig2(a11, a12, a22);
      if (!(kappa[0] > 0.0))
        throw DomainError("dual_residual: dual curvature not positive at node (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      const double lhs = dual_root(kappa, k);
      out.sup = std::max(out.sup, std::abs(lhs - c * ws));
      ++out.nodes;
    }
  return out;
}

/// max |L(L(u)) - u| over nodes of `back` resolved in the second transform.
inline double involution_error(const GraphFunction& u, const DualFunction& twice) {
  double worst = 0.0;
  const auto& g = twice.values;
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.nodes(); ++i) {
      const std::size_t idx = g.index(i, j);
      if (!twice.resolved[idx]) continue;
      // Exact at aligned nodes; elsewhere against the bicubic interpolant of u.
      const double h = u.h();
      const double fi = (g.x(i) - u.x(0)) / h, fj = (g.x(j) - u.x(0)) / h;
      const int a = detail::patch_start(fi, u.nodes()), b = detail::patch_start(fj, u.nodes());
      std::array<double, 4> u0, u1, u2, v0, v1, v2;
      detail::lagrange4(fi - a, u0, u1, u2);
      detail::lagrange4(fj - b, v0, v1, v2);
      double P = 0.0;
      for (int q = 0; q < 4; ++q)
        for (int p = 0; p < 4; ++p) P += u0[p] * v0[q] * u(a + p, b + q);
      worst = std::max(worst, std::abs(g(i, j) - P));
    }
  return worst;
}

}  // namespace translab
