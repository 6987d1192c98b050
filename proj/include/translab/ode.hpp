#pragma once

// Adaptive Dormand-Prince 5(4) integration for small autonomous-in-shape
// systems y' = f(t, y).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

#include "translab/errors.hpp"

namespace translab::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects a small fraction of the interval
  long max_steps = 10'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
};

/// Carries the adapted step size between consecutive calls.
struct Stepper {
  double h = 0.0;
  Stats stats;
};

namespace detail {

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (const auto& [c, k] : terms)
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  return out;
}

}  // namespace detail

/// Advances y from t0 to t1 (t1 > t0), landing exactly on t1.
template <std::size_t N, typename Rhs>
State<N> integrate(Rhs&& f, double t0, State<N> y, double t1, const Options& opt,
                   Stepper& stepper) {
  // Dormand-Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double span = t1 - t0;
  if (!(span > 0.0)) return y;
  double h = stepper.h > 0.0 ? stepper.h
                             : (opt.initial_step > 0.0 ? opt.initial_step : 1e-3 * span);
  double t = t0;
  State<N> k1 = f(t, y);
  long steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) throw IntegrationFailure("ODE step budget exhausted", t);
    const bool last = t + h >= t1;
    const double ht = last ? t1 - t : h;
    if (ht <= 1e-15 * std::max(1.0, std::abs(t)))
      throw IntegrationFailure("ODE step size underflow", t);

    const State<N> k2 = f(t + c2 * ht, detail::axpy<N>(y, ht, {{a21, &k1}}));
    const State<N> k3 = f(t + c3 * ht, detail::axpy<N>(y, ht, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 =
        f(t + c4 * ht, detail::axpy<N>(y, ht, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = f(t + c5 * ht, detail::axpy<N>(y, ht, {{a51, &k1}, {a52, &k2},
                                                               {a53, &k3}, {a54, &k4}}));
    const State<N> k6 = f(t + ht, detail::axpy<N>(y, ht, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                                           {a64, &k4}, {a65, &k5}}));
    const State<N> y5 = detail::axpy<N>(
        y, ht, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State<N> k7 = f(t + ht, y5);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double e =
          ht * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err += (e / sc) * (e / sc);
      finite = finite && std::isfinite(y5[i]) && std::isfinite(k7[i]);
    }
    err = finite ? std::sqrt(err / static_cast<double>(N)) : 1e10;

    if (err <= 1.0) {
      t = last ? t1 : t + ht;
      y = y5;
      k1 = k7;
      ++stepper.stats.accepted;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // A step shortened to hit t1 says little about the next one.
      if (!(last && ht < h)) h = ht * fac;
    } else {
      ++stepper.stats.rejected;
      h = ht * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
    }
  }
  stepper.h = h;
  return y;
}

}  // namespace translab::ode
