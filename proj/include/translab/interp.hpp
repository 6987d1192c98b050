#pragma once

// Piecewise Hermite interpolation on uniform samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace translab::interp {

/// Index of the cell [x_i, x_{i+1}] containing x on a uniform grid starting
/// at x0 with spacing h and count samples, plus the local coordinate in [0,1].
struct Cell {
  std::size_t i;
  double t;
};

inline Cell locate_uniform(double x, double x0, double h, std::size_t count) {
  const double s = (x - x0) / h;
  const auto last = static_cast<double>(count - 2);
  const double cell = std::clamp(std::floor(s), 0.0, last);
  return {static_cast<std::size_t>(cell), s - cell};
}

inline double cubic_hermite(double f0, double d0, double f1, double d1, double h, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

inline double cubic_hermite_derivative(double f0, double d0, double f1, double d1, double h,
                                       double t) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * f1 +
          (3 * t2 - 2 * t) * h * d1) /
         h;
}

/// Quintic Hermite from values, first and second derivatives at both ends.
inline double quintic_hermite(double f0, double d0, double s0, double f1, double d1, double s1,
                              double h, double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h3 = 0.5 * (t3 - 2 * t4 + t5);
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
  return h0 * f0 + h * h1 * d0 + h * h * h2 * s0 + h * h * h3 * s1 + h * h4 * d1 + h5 * f1;
}

}  // namespace translab::interp
