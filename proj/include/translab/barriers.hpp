#pragma once

// Envelope barriers q1 (sub) and q2 (super) for the translator equation
// with prescribed asymptotic data phi on the circle (n = 2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/FFT>

#include "translab/errors.hpp"
#include "translab/radial.hpp"

namespace translab {

/// phi sampled at theta_j = 2 pi j / m with spectral derivatives and
/// trigonometric interpolation in between.
class SphereFunction {
 public:
  SphereFunction() = default;
  explicit SphereFunction(std::vector<double> samples) : phi_(std::move(samples)) {
    const std::size_t m = phi_.size();
    if (m < 4 || (m & (m - 1)) != 0)
      throw ParameterError("SphereFunction: sample count must be a power of two >= 4");
    for (double v : phi_)
      if (!std::isfinite(v)) throw ParameterError("SphereFunction: non-finite sample");
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, phi_);
    coeff_.resize(m);
    for (std::size_t j = 0; j < m; ++j) coeff_[j] = spec[j] / static_cast<double>(m);
    dphi_ = derivative_samples(1);
    d2phi_ = derivative_samples(2);
  }

  template <typename F>
  static SphereFunction sample(std::size_t m, F&& f) {
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = f(2.0 * std::numbers::pi * j / m);
    return SphereFunction(std::move(v));
  }

  std::size_t m() const noexcept { return phi_.size(); }
  double theta(std::size_t j) const { return 2.0 * std::numbers::pi * j / m(); }
  const std::vector<double>& phi() const noexcept { return phi_; }
  const std::vector<double>& dphi() const noexcept { return dphi_; }
  const std::vector<double>& d2phi() const noexcept { return d2phi_; }

  /// d^order phi / d theta^order at any angle from the Fourier series; the
  /// Nyquist mode is split evenly so that real samples interpolate to reals.
  double eval(double theta, int order = 0) const {
    const std::size_t n = m();
    const long half = static_cast<long>(n / 2);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const long f = static_cast<long>(j) <= half ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
      std::complex<double> term;
      if (f == half) {
        // 0.5 (e^{i h th} + e^{-i h th}) carries the Nyquist coefficient.
        const double c = coeff_[j].real();
        const double arg = half * theta;
        double d = 0.0;
        switch (order % 4) {
          case 0: d = std::cos(arg); break;
          case 1: d = -std::sin(arg); break;
          case 2: d = -std::cos(arg); break;
          default: d = std::sin(arg); break;
        }
        sum += c * d * std::pow(static_cast<double>(half), order);
        continue;
      }
      term = coeff_[j] * std::polar(1.0, f * theta) * std::pow(std::complex<double>(0.0, f), order);
      sum += term.real();
    }
    return sum;
  }

  /// max_j (|phi| + |phi'| + |phi''|).
  double c2_norm() const {
    double best = 0.0;
    for (std::size_t j = 0; j < m(); ++j)
      best = std::max(best, std::abs(phi_[j]) + std::abs(dphi_[j]) + std::abs(d2phi_[j]));
    return best;
  }

 private:
  std::vector<double> derivative_samples(int order) const {
    const std::size_t n = m();
    const long half = static_cast<long>(n / 2);
    std::vector<std::complex<double>> spec(n);
    for (std::size_t j = 0; j < n; ++j) {
      const long f = static_cast<long>(j) <= half ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
      // Odd derivatives of the Nyquist mode vanish at the samples.
      if (f == half && order % 2 == 1) continue;
      spec[j] = coeff_[j] * static_cast<double>(n) * std::pow(std::complex<double>(0.0, f), order);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.inv(out, spec);
    std::vector<double> re(n);
    for (std::size_t j = 0; j < n; ++j) re[j] = out[j].real();
    return re;
  }

  std::vector<double> phi_, dphi_, d2phi_;
  std::vector<std::complex<double>> coeff_;
};

/// Reads `theta,phi` rows (header optional); theta must be 2 pi j / m.
inline SphereFunction read_sphere_csv(std::istream& in) {
  std::vector<double> theta, phi;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t, p;
    if (!(row >> t >> p)) {
      if (theta.empty()) continue;  // header
      throw ParameterError("read_sphere_csv: malformed row '" + line + "'");
    }
    theta.push_back(t);
    phi.push_back(p);
  }
  const std::size_t m = theta.size();
  if (m == 0) throw ParameterError("read_sphere_csv: no samples");
  for (std::size_t j = 0; j < m; ++j) {
    const double expect = 2.0 * std::numbers::pi * j / m;
    if (std::abs(theta[j] - expect) > 1e-9)
      throw ParameterError("read_sphere_csv: theta must be uniform, 2 pi j / m; row " +
                           std::to_string(j) + " has " + std::to_string(theta[j]));
  }
  return SphereFunction(std::move(phi));
}

inline SphereFunction read_sphere_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("read_sphere_csv: cannot open " + path);
  return read_sphere_csv(in);
}

enum class BarrierKind { sub, super };

/// q1 = sup_y [phi(y) - p1.y + z_a(|x + p1|)],  p1 = Dphi + 2 M y,
/// q2 = inf_y [phi(y) - p2.y + z_a(|x + p2|)],  p2 = Dphi - 2 M y,
/// with z_a the velocity-a translator normalized to z_a(r) - r -> 0.
struct BarrierPair {
  RadialProfile base;  // unit velocity, c0 = 0
  SphereFunction phi;
  double M = 0.0;
  double a = 1.0;

  double z(double r) const {
    return radial::scaled_translator(base, a, r);
  }
  double domain() const { return base.r.back() / a; }
};

/// Builds the pair; M < 0 selects M = c2_norm(phi).
inline BarrierPair make_barrier_pair(int k, double a, SphereFunction phi, double M = -1.0,
                                     double r_max = 16.0) {
  if (!(a > 0.0)) throw ParameterError("make_barrier_pair: a must be positive");
  RadialParams p;
  p.n = 2;
  p.k = k;
  p.r_max = r_max;
  p.validate();
  auto base = radial::zero_offset(radial::limit_profile(p));
  const double m_used = M < 0.0 ? phi.c2_norm() : M;
  return {std::move(base), std::move(phi), m_used, a};
}

namespace detail {

inline double envelope_term(const BarrierPair& pair, double x1, double x2, double theta,
                            double value, double slope, BarrierKind kind) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double sign = kind == BarrierKind::sub ? 1.0 : -1.0;
  const double p1 = -slope * s + sign * 2 * pair.M * c;
  const double p2 = slope * c + sign * 2 * pair.M * s;
  const double r = std::hypot(x1 + p1, x2 + p2);
  if (r > pair.domain() * (1 + 1e-12))
    throw ExtrapolationError("barrier_eval: |x + p| = " + std::to_string(r) +
                             " exceeds the profile domain " + std::to_string(pair.domain()));
  return value - sign * 2 * pair.M + pair.z(r);
}

}  // namespace detail

/// Envelope over the m samples, then Brent refinement in theta around the
/// best sample.
inline double barrier_eval(const BarrierPair& pair, double x1, double x2, BarrierKind kind) {
  const auto& phi = pair.phi;
  const std::size_t m = phi.m();
  const double sgn = kind == BarrierKind::sub ? 1.0 : -1.0;  // maximize sgn * term
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const double v = sgn * detail::envelope_term(pair, x1, x2, phi.theta(j), phi.phi()[j],
                                                 phi.dphi()[j], kind);
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  const double step = 2.0 * std::numbers::pi / m;
  const double th0 = phi.theta(best);
  auto neg = [&](double th) {
    return -sgn * detail::envelope_term(pair, x1, x2, th, phi.eval(th), phi.eval(th, 1), kind);
  };
  const auto [th, val] = boost::math::tools::brent_find_minima(neg, th0 - step, th0 + step, 40);
  (void)th;
  return sgn * std::max(best_val, -val);
}

inline double barrier_eval(const BarrierPair& pair, double x1, double x2, const char* which) {
  const std::string w = which;
  if (w == "sub") return barrier_eval(pair, x1, x2, BarrierKind::sub);
  if (w == "super") return barrier_eval(pair, x1, x2, BarrierKind::super);
  throw ParameterError("barrier_eval: which must be 'sub' or 'super'");
}

/// Envelope by brute force over `samples` equally spaced angles with phi
/// and phi' from the trigonometric interpolant. Reference for barrier_eval.
inline double barrier_enumerate(const BarrierPair& pair, double x1, double x2, BarrierKind kind,
                                std::size_t samples) {
  const double sgn = kind == BarrierKind::sub ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < samples; ++j) {
    const double th = 2.0 * std::numbers::pi * j / samples;
    best = std::max(best, sgn * detail::envelope_term(pair, x1, x2, th, pair.phi.eval(th),
                                                      pair.phi.eval(th, 1), kind));
  }
  return sgn * best;
}

/// Closed forms for phi = c: q1 = c - 2M + z(|x| + 2M), q2 = c + 2M + z(|x| - 2M)
/// (the latter for |x| >= 2M).
inline double constant_phi_sub(const BarrierPair& pair, double c, double r) {
  return c - 2 * pair.M + pair.z(r + 2 * pair.M);
}
inline double constant_phi_super(const BarrierPair& pair, double c, double r) {
  if (r < 2 * pair.M) throw DomainError("constant_phi_super: needs |x| >= 2M");
  return c + 2 * pair.M + pair.z(r - 2 * pair.M);
}

struct AsymptoticGap {
  double sub = 0.0;
  double super = 0.0;
  double max() const { return std::max(sub, super); }
};

/// max over directions of |q_i(R y) - R - phi(y)|.
inline AsymptoticGap asymptotic_gap(const BarrierPair& pair, double R, std::size_t directions = 0) {
  if (directions == 0) directions = std::max<std::size_t>(pair.phi.m(), 64);
  AsymptoticGap g;
  for (std::size_t j = 0; j < directions; ++j) {
    const double th = 2.0 * std::numbers::pi * j / directions;
    const double x1 = R * std::cos(th), x2 = R * std::sin(th);
    const double expect = R + pair.phi.eval(th);
    g.sub = std::max(g.sub, std::abs(barrier_eval(pair, x1, x2, BarrierKind::sub) - expect));
    g.super = std::max(g.super, std::abs(barrier_eval(pair, x1, x2, BarrierKind::super) - expect));
  }
  return g;
}

struct BarrierGrid {
  int nodes = 0;
  double half_width = 0.0;
  std::vector<double> x1, x2, q1, q2;
  double max_violation = -std::numeric_limits<double>::infinity();  // max (q1 - q2)
  bool ordered() const { return max_violation <= 0.0; }
};

/// q1, q2 on nodes x nodes points over [-L, L]^2.
inline BarrierGrid barrier_grid(const BarrierPair& pair, double L, int nodes) {
  if (nodes < 2) throw ParameterError("barrier_grid: need at least 2 nodes per axis");
  BarrierGrid g;
  g.nodes = nodes;
  g.half_width = L;
  const std::size_t total = static_cast<std::size_t>(nodes) * nodes;
  g.x1.reserve(total);
  g.x2.reserve(total);
  g.q1.reserve(total);
  g.q2.reserve(total);
  const double h = 2 * L / (nodes - 1);
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < nodes; ++i) {
      const double x1 = -L + i * h, x2 = -L + j * h;
      const double q1 = barrier_eval(pair, x1, x2, BarrierKind::sub);
      const double q2 = barrier_eval(pair, x1, x2, BarrierKind::super);
      g.x1.push_back(x1);
      g.x2.push_back(x2);
      g.q1.push_back(q1);
      g.q2.push_back(q2);
      g.max_violation = std::max(g.max_violation, q1 - q2);
    }
  return g;
}

}  // namespace translab
