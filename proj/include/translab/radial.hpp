#pragma once

// Radially symmetric translators: the slope ODE, its regularized family,
// the asymptotic constant C(r) and the height function.
//
// With a = 1 and z = y^k, y = u'(r), the translator equation reduces to
//   z' = (n r^{k-1} - (n-k) z / r) (1 - z^{2/k}),   z(0) = 0.
// A translator with velocity a is u_a(r) = u_1(a r) / a, so everything is
// integrated in the scaled radius rho = a r and mapped back.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "translab/errors.hpp"
#include "translab/interp.hpp"
#include "translab/ode.hpp"
#include "translab/symfunc.hpp"

namespace translab {

struct RadialParams {
  int n = 2;
  int k = 1;
  double a = 1.0;
  double r_max = 8.0;
  double tol = 1e-11;
  int samples = 2048;

  void validate() const {
    if (n < 1) throw ParameterError("RadialParams: n must be >= 1");
    if (k < 1 || k > n)
      throw ParameterError("RadialParams: k = " + std::to_string(k) + " must lie in 1.." +
                           std::to_string(n));
    if (!(a > 0.0)) throw ParameterError("RadialParams: velocity a must be positive");
    if (!(r_max > 0.0)) throw ParameterError("RadialParams: r_max must be positive");
    if (!(tol > 0.0 && tol < 1e-3)) throw ParameterError("RadialParams: tol must lie in (0, 1e-3)");
    if (samples < 16) throw ParameterError("RadialParams: need at least 16 samples");
  }

  /// Rate in exp(-beta rho^k).
  double beta() const { return 2.0 * n / (static_cast<double>(k) * k); }
  /// Power of r multiplying the slope deficit 1 - y.
  double slope_power() const { return 2.0 * (n - k) / k; }
  /// Power of r in the height remainder u - r - c0.
  double remainder_power() const { return (2.0 * n - static_cast<double>(k) * k - k) / k; }
};

/// Sampled radial translator on a uniform grid 0 = r_0 < ... < r_{N-1} = r_max.
struct RadialProfile {
  RadialParams params;
  std::vector<double> r;
  std::vector<double> z;            // y^k
  std::vector<double> log_one_minus_z;
  std::vector<double> y;            // u'(r)
  std::vector<double> one_minus_y;  // 1 - y without cancellation
  std::vector<double> dy;           // y'(r)
  std::vector<double> u;
  std::vector<double> tail;         // u(r) - r - c0 = int_r^inf (1 - y)
  std::vector<double> C_of_r;       // C evaluated at the scaled radius a r

  double u_at_zero = 0.0;
  double c0 = 0.0;
  double tail_beyond = 0.0;  // contribution of (r_max, inf) to the tail
  bool tail_converged = true;
  double c0_fit = 0.0;       // least-squares tail fit, cross-check of c0
  double amplitude_fit = 0.0;
  double C_asym = 0.0;
  double plateau_error = 0.0;
  bool plateau_ok = false;

  std::size_t size() const { return r.size(); }
  double spacing() const { return r[1] - r[0]; }

  double height(double x) const {
    const auto c = cell(x);
    const double h = spacing();
    return interp::quintic_hermite(u[c.i], y[c.i], dy[c.i], u[c.i + 1], y[c.i + 1], dy[c.i + 1],
                                   h, c.t);
  }
  double slope(double x) const {
    const auto c = cell(x);
    return interp::cubic_hermite(y[c.i], dy[c.i], y[c.i + 1], dy[c.i + 1], spacing(), c.t);
  }
  /// 1 - y(x) with full relative accuracy far out.
  double one_minus_slope(double x) const {
    const auto c = cell(x);
    const double l0 = std::log(one_minus_y[c.i]), l1 = std::log(one_minus_y[c.i + 1]);
    const double d0 = -dy[c.i] / one_minus_y[c.i], d1 = -dy[c.i + 1] / one_minus_y[c.i + 1];
    return std::exp(interp::cubic_hermite(l0, d0, l1, d1, spacing(), c.t));
  }
  /// u(x) - x - c0.
  double remainder(double x) const {
    const auto c = cell(x);
    const double l0 = std::log(tail[c.i]), l1 = std::log(tail[c.i + 1]);
    const double d0 = -one_minus_y[c.i] / tail[c.i], d1 = -one_minus_y[c.i + 1] / tail[c.i + 1];
    return std::exp(interp::cubic_hermite(l0, d0, l1, d1, spacing(), c.t));
  }

 private:
  interp::Cell cell(double x) const {
    if (x < 0.0 || x > r.back() * (1.0 + 1e-12))
      throw ExtrapolationError("RadialProfile: radius " + std::to_string(x) +
                               " outside [0, " + std::to_string(r.back()) + "]");
    return interp::locate_uniform(x, 0.0, spacing(), r.size());
  }
};

namespace radial {

namespace detail {

// Right-hand side of the regularized slope equation without range checks.
inline double rhs_regularized_unchecked(double r, double z, int n, int k, double eps) {
  const double s = r + eps;
  const double zp = std::max(z, 0.0);
  return (n * std::pow(s, k - 1) - (n - k) * zp / s) * (1.0 - std::pow(zp, 2.0 / k));
}

// log z from psi = log(1 - z), accurate at both ends.
inline double log_z_from_psi(double psi) {
  return psi < -std::numbers::ln2 ? std::log1p(-std::exp(psi)) : std::log(-std::expm1(psi));
}

// d/drho log(1 - z) for the unit-velocity limit equation.
inline double rhs_log_deficit(double rho, double psi, int n, int k) {
  if (!(psi < 0.0)) return -n * std::pow(rho, k - 1);
  const double e = std::exp(psi);
  const double z = -std::expm1(psi);
  const double logz = log_z_from_psi(psi);
  const double drive = n * std::pow(rho, k - 1) - (n - k) * z / rho;
  const double ratio = -std::expm1((2.0 / k) * logz) / e;  // (1 - z^{2/k}) / (1 - z)
  return -drive * ratio;
}

// Unit-velocity y' from the slope equation at (rho, y); the vertex limit is 1.
inline double unit_slope_derivative(double rho, double y, double one_minus_y, int n, int k) {
  if (rho == 0.0 || y == 0.0) return 1.0;
  const double drive = std::pow(rho / y, k - 1) - (static_cast<double>(n - k) / n) * y / rho;
  return (static_cast<double>(n) / k) * drive * one_minus_y * (1.0 + y);
}

// Vertex series z = rho^k (1 - k rho^2 / (n + 2)) + O(rho^{k+4}).
inline double vertex_series(double rho, int n, int k) {
  return std::pow(rho, k) * (1.0 - k * rho * rho / (n + 2.0));
}

// int_R^inf f(R) (s/R)^p exp(-beta (s^k - R^k)) ds by composite Simpson.
inline double asymptotic_tail(double R, double fR, const RadialParams& p) {
  if (fR == 0.0) return 0.0;
  const double beta = p.beta(), pw = p.slope_power();
  const double Rk = std::pow(R, p.k);
  const double s_end = std::pow(Rk + 60.0 / beta, 1.0 / p.k);
  const int panels = 4000;
  const double h = (s_end - R) / panels;
  auto f = [&](double s) {
    return fR * std::pow(s / R, pw) * std::exp(-beta * (std::pow(s, p.k) - Rk));
  };
  double sum = f(R) + f(s_end);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(R + i * h);
  return sum * h / 3.0;
}

}  // namespace detail

/// Right-hand side of the regularized problem, z in [0, 1).
inline double rhs_regularized(double r, double z, int n, int k, double eps) {
  if (!(z >= 0.0 && z < 1.0)) throw DomainError("rhs_regularized: z must lie in [0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("rhs_regularized: eps must lie in (0, 1)");
  if (r < 0.0) throw ParameterError("rhs_regularized: r must be >= 0");
  return detail::rhs_regularized_unchecked(r, z, n, k, eps);
}

struct RegularizedSolution {
  double eps = 0.0;
  std::vector<double> r;  // physical radius
  std::vector<double> z;
};

/// Solves the regularized problem z(0) = eps^k on the profile sample grid.
inline RegularizedSolution integrate_regularized(const RadialParams& params, double eps) {
  params.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("integrate_regularized: eps must lie in (0, 1)");
  const int N = params.samples;
  const double R = params.a * params.r_max;
  const double h = R / (N - 1);
  RegularizedSolution out;
  out.eps = eps;
  out.r.resize(N);
  out.z.resize(N);
  ode::State<1> s{std::pow(eps, params.k)};
  out.z[0] = s[0];
  ode::Stepper stepper;
  const ode::Options opt{params.tol, params.tol, 0.0, 10'000'000};
  auto rhs = [&](double rho, const ode::State<1>& v) {
    return ode::State<1>{detail::rhs_regularized_unchecked(rho, v[0], params.n, params.k, eps)};
  };
  for (int i = 1; i < N; ++i) {
    s = ode::integrate<1>(rhs, (i - 1) * h, s, i * h, opt, stepper);
    out.z[i] = s[0];
  }
  for (int i = 0; i < N; ++i) out.r[i] = i * h / params.a;
  return out;
}

struct AsymptoticConstant {
  double C_asym = 0.0;
  double plateau_error = 0.0;  // max relative deviation from the mean
  bool plateau_ok = false;     // plateau_error <= 1%
};

/// C(r) = (1 - y) r^{-2(n-k)/k} exp((2n/k^2) r^k) averaged over the last
/// unit interval of the scaled radius.
inline AsymptoticConstant asymptotic_constant(const RadialProfile& profile) {
  const auto& p = profile.params;
  const double R = p.a * p.r_max;
  if (R < 1.0) throw ParameterError("asymptotic_constant: need a * r_max >= 1");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (p.a * profile.r[i] < R - 1.0) continue;
    sum += profile.C_of_r[i];
    ++count;
  }
  AsymptoticConstant out;
  out.C_asym = sum / static_cast<double>(count);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (p.a * profile.r[i] < R - 1.0) continue;
    out.plateau_error =
        std::max(out.plateau_error, std::abs(profile.C_of_r[i] - out.C_asym) / out.C_asym);
  }
  out.plateau_ok = out.C_asym > 0.0 && out.plateau_error <= 0.01;
  return out;
}

struct HeightReconstruction {
  std::vector<double> u;
  double c0 = 0.0;
  double tail_beyond = 0.0;
  bool tail_converged = true;
};

/// u(r) = u(0) + int_0^r y. The integral is accumulated through the
/// deficit 1 - y so that u - r - c0 keeps its relative accuracy far out.
inline HeightReconstruction reconstruct_height(const RadialProfile& profile, double u_at_zero) {
  HeightReconstruction out;
  const std::size_t N = profile.size();
  if (N < 2 || profile.tail.size() != N)
    throw ParameterError("reconstruct_height: profile has no slope samples");
  const double total = profile.tail.front();  // int_0^inf (1 - y)
  out.u.resize(N);
  for (std::size_t i = 0; i < N; ++i)
    out.u[i] = u_at_zero + profile.r[i] - (total - profile.tail[i]);
  out.c0 = u_at_zero - total;
  out.tail_beyond = profile.tail_beyond;
  out.tail_converged = profile.tail_converged;
  return out;
}

/// Builds the slope deficit tail, the height and the least-squares c0 fit
/// for a profile whose slope arrays are filled.
inline void finish_profile(RadialProfile& pr, double u_at_zero) {
  const auto& p = pr.params;
  const std::size_t N = pr.size();
  const double h = pr.spacing();
  pr.tail.assign(N, 0.0);
  pr.tail_beyond = detail::asymptotic_tail(p.a * p.r_max, pr.one_minus_y.back(), p) / p.a;
  pr.tail_converged = pr.tail_beyond <= 10.0 * p.tol;
  pr.tail[N - 1] = pr.tail_beyond;
  // Hermite quadrature of f = 1 - y with f' = -y'.
  for (std::size_t i = N - 1; i-- > 0;) {
    const double f0 = pr.one_minus_y[i], f1 = pr.one_minus_y[i + 1];
    const double d0 = -pr.dy[i], d1 = -pr.dy[i + 1];
    pr.tail[i] = pr.tail[i + 1] + 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
  }
  auto hr = reconstruct_height(pr, u_at_zero);
  pr.u = std::move(hr.u);
  pr.c0 = hr.c0;
  pr.u_at_zero = u_at_zero;

  // u - r = c0 + A g(a r) / a over the last 20% of the samples.
  const std::size_t first = N - N / 5;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(N - first);
  for (std::size_t i = first; i < N; ++i) {
    const double rho = p.a * pr.r[i];
    const double g = std::pow(rho, p.remainder_power()) * std::exp(-p.beta() * std::pow(rho, p.k)) / p.a;
    const double v = pr.u[i] - pr.r[i];
    sx += g, sy += v, sxx += g * g, sxy += g * v;
  }
  const double var = sxx - sx * sx / m;
  pr.amplitude_fit = var > 0.0 ? (sxy - sx * sy / m) / var : 0.0;
  pr.c0_fit = (sy - pr.amplitude_fit * sx) / m;
}

/// The eps -> 0 limit by direct integration from a seeded vertex.
inline RadialProfile limit_profile(const RadialParams& params) {
  params.validate();
  const int n = params.n, k = params.k, N = params.samples;
  const double R = params.a * params.r_max;
  const double h = R / (N - 1);
  const double r0 = std::min(std::max(std::pow(params.tol, 1.0 / k), 1e-4), 0.5 * h);

  std::vector<double> psi(N, 0.0);
  ode::State<1> s{std::log1p(-detail::vertex_series(r0, n, k))};
  ode::Stepper stepper;
  const ode::Options opt{params.tol, 1e-2 * params.tol, 0.0, 10'000'000};
  auto rhs = [&](double rho, const ode::State<1>& v) {
    return ode::State<1>{detail::rhs_log_deficit(rho, v[0], n, k)};
  };
  double at = r0;
  for (int i = 1; i < N; ++i) {
    s = ode::integrate<1>(rhs, at, s, i * h, opt, stepper);
    at = i * h;
    psi[i] = s[0];
  }

  RadialProfile pr;
  pr.params = params;
  pr.r.resize(N);
  pr.z.resize(N);
  pr.log_one_minus_z = psi;
  pr.y.resize(N);
  pr.one_minus_y.resize(N);
  pr.dy.resize(N);
  pr.C_of_r.resize(N);
  const double beta = params.beta(), pw = params.slope_power();
  for (int i = 0; i < N; ++i) {
    const double rho = i * h;
    pr.r[i] = rho / params.a;
    if (i == 0) {
      pr.z[i] = 0.0;
      pr.y[i] = 0.0;
      pr.one_minus_y[i] = 1.0;
      pr.dy[i] = params.a;
      pr.C_of_r[i] = pw == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      continue;
    }
    const double logz = detail::log_z_from_psi(psi[i]);
    pr.z[i] = -std::expm1(psi[i]);
    pr.y[i] = std::exp(logz / k);
    pr.one_minus_y[i] = -std::expm1(logz / k);
    pr.dy[i] = params.a * detail::unit_slope_derivative(rho, pr.y[i], pr.one_minus_y[i], n, k);
    pr.C_of_r[i] = std::exp(std::log(pr.one_minus_y[i]) - pw * std::log(rho) + beta * std::pow(rho, k));
  }
  finish_profile(pr, 0.0);

  if (R >= 1.0) {
    const auto ac = asymptotic_constant(pr);
    pr.C_asym = ac.C_asym;
    pr.plateau_error = ac.plateau_error;
    pr.plateau_ok = ac.plateau_ok;
  }

  // Invariants, checked on log(1 - z) where z itself rounds to 1.
  for (int i = 1; i < N; ++i) {
    const double rho = i * h;
    if (!(psi[i] < 0.0) || !(psi[i] < psi[i - 1]))
      throw ConvergenceFailure("limit_profile: z not strictly increasing in (0, 1) at r = " +
                               std::to_string(pr.r[i]));
    if (detail::log_z_from_psi(psi[i]) > k * std::log(rho) + 10.0 * params.tol)
      throw ConvergenceFailure("limit_profile: z exceeds r^k at r = " + std::to_string(pr.r[i]));
  }
  return pr;
}

/// Three-level Richardson extrapolation of the regularized family
/// eps, eps/2, eps/4 (error model a eps + b eps^2).
struct EpsilonCrossCheck {
  std::vector<double> r;
  std::vector<double> z_extrapolated;
  double sup_difference = 0.0;  // against limit_profile
  std::vector<double> cauchy;   // sup |z_eps - z_{eps/2}| for successive pairs
};

inline EpsilonCrossCheck epsilon_crosscheck(const RadialParams& params, double eps = 1e-2) {
  const auto direct = limit_profile(params);
  const auto z1 = integrate_regularized(params, eps);
  const auto z2 = integrate_regularized(params, eps / 2);
  const auto z4 = integrate_regularized(params, eps / 4);
  EpsilonCrossCheck out;
  out.r = z1.r;
  out.z_extrapolated.resize(z1.z.size());
  double c12 = 0.0, c24 = 0.0;
  for (std::size_t i = 0; i < z1.z.size(); ++i) {
    const double zx = (z1.z[i] - 6.0 * z2.z[i] + 8.0 * z4.z[i]) / 3.0;
    out.z_extrapolated[i] = zx;
    out.sup_difference = std::max(out.sup_difference, std::abs(zx - direct.z[i]));
    c12 = std::max(c12, std::abs(z1.z[i] - z2.z[i]));
    c24 = std::max(c24, std::abs(z2.z[i] - z4.z[i]));
  }
  out.cauchy = {c12, c24};
  return out;
}

/// Velocity-a slope derivative y'(r) from the slope equation.
inline double slope_derivative(int n, int k, double a, double r, double y, double one_minus_y) {
  return a * detail::unit_slope_derivative(a * r, y, one_minus_y, n, k);
}

/// |a / w - (sigma_k(kappa)/C(n,k))^{1/k}| with the radial curvatures
/// kappa = w^{-1} (y' / (1 - y^2), y / r, ..., y / r).
inline double translator_residual_radial(int n, int k, double a, double r, double y,
                                         double one_minus_y, double dy) {
  if (!(one_minus_y > 0.0)) throw SpacelikeViolation("radial residual: |y| >= 1");
  const double w2 = one_minus_y * (1.0 + y);
  const double w = std::sqrt(w2);
  std::vector<double> kappa(static_cast<std::size_t>(n), r > 0.0 ? y / r / w : dy / w);
  kappa[0] = dy / (w2 * w);
  return std::abs(a / w - normalized_root(kappa, k));
}

inline double verify_residual(const RadialProfile& profile, double r) {
  const auto& p = profile.params;
  const double y = profile.slope(r);
  const double omy = profile.one_minus_slope(r);
  if (!(omy > 0.0)) throw SpacelikeViolation("verify_residual: slope reached 1");
  const double dy = slope_derivative(p.n, p.k, p.a, r, y, omy);
  return translator_residual_radial(p.n, p.k, p.a, r, y, omy, dy);
}

/// Shifts the height so that c0 = 0.
inline RadialProfile zero_offset(RadialProfile profile) {
  finish_profile(profile, profile.tail.front());
  return profile;
}

/// (1/a) u_base(a |x|) for a unit-velocity base with c0 = 0.
inline double scaled_translator(const RadialProfile& base, double a_new, double x_norm) {
  if (!(a_new > 0.0)) throw ParameterError("scaled_translator: velocity must be positive");
  if (base.params.a != 1.0) throw ParameterError("scaled_translator: base must have a = 1");
  if (std::abs(base.c0) > 1e-9) throw ParameterError("scaled_translator: base must have c0 = 0");
  return base.height(a_new * x_norm) / a_new;
}

/// (u - r - c0) / (rho^{(2n-k^2-k)/k} e^{-(2n/k^2) rho^k}) in the scaled
/// radius rho = a r; tends to C_asym k / (2n).
inline double remainder_ratio(const RadialProfile& profile, double r) {
  const auto& p = profile.params;
  const double rho = p.a * r;
  const double log_g = p.remainder_power() * std::log(rho) - p.beta() * std::pow(rho, p.k);
  return std::exp(std::log(p.a * profile.remainder(r)) - log_g);
}

}  // namespace radial
}  // namespace translab
