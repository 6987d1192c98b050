#include <catch_amalgamated.hpp>

#include <cmath>

#include "translab/radial.hpp"

using namespace translab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RadialProfile profile(int n, int k, double a = 1.0, double r_max = 8.0) {
  RadialParams p;
  p.n = n;
  p.k = k;
  p.a = a;
  p.r_max = r_max;
  return radial::limit_profile(p);
}

const std::vector<std::pair<int, int>> kPairs{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {4, 3}};

}  // namespace

TEST_CASE("n = k = 2: z = 1 - exp(-r^2)", "[radial][oracle]") {
  const auto pr = profile(2, 2);
  double e = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i)
    if (pr.r[i] <= 4.0) e = std::max(e, std::abs(pr.z[i] + std::expm1(-pr.r[i] * pr.r[i])));
  CHECK(e <= 1e-8);
}

TEST_CASE("n = k = 1: y = tanh r, u = log cosh r", "[radial][oracle]") {
  const auto pr = profile(1, 1);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    if (pr.r[i] > 4.0) break;
    CHECK_THAT(pr.y[i], WithinAbs(std::tanh(pr.r[i]), 1e-8));
    CHECK_THAT(pr.u[i], WithinAbs(std::log(std::cosh(pr.r[i])), 1e-8));
  }
  CHECK_THAT(pr.c0, WithinAbs(-std::log(2.0), 1e-8));
  CHECK_THAT(pr.C_asym, WithinAbs(2.0, 2e-3));
}

TEST_CASE("independent fixed-step RK4 on the slope equation", "[radial][oracle]") {
  for (const auto& [n, k] : kPairs) {
    const auto pr = profile(n, k, 1.0, 4.0);
    // y ~ r near the vertex; start the classical RK4 just off it
    const double h = 1e-3;
    double r = 1e-3, y = r;
    auto f = [&](double rr, double yy) { return radial::slope_derivative(n, k, 1.0, rr, yy, 1.0 - yy); };
    double worst = 0.0;
    while (r < 3.0 - 1e-12) {
      const double k1 = f(r, y), k2 = f(r + h / 2, y + h / 2 * k1), k3 = f(r + h / 2, y + h / 2 * k2),
                   k4 = f(r + h, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      r += h;
      worst = std::max(worst, std::abs(y - pr.slope(r)));
    }
    INFO("n=" << n << " k=" << k);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("two-sided exponential bounds on 1 - z", "[radial][property]") {
  for (const auto& [n, k] : kPairs) {
    const auto pr = profile(n, k, 1.0, 4.0);
    for (std::size_t i = 0; i < pr.size(); ++i) {
      const double r = pr.r[i];
      if (r < 0.1 || r > 3.0) continue;
      const double omz = std::exp(pr.log_one_minus_z[i]);
      CHECK(omz >= std::exp(-(2.0 * n / k) * std::pow(r, k)) - 1e-6);
      CHECK(omz <= std::exp(-std::pow(r, k) / n) + 1e-6);
    }
  }
}

TEST_CASE("profile invariants", "[radial][property]") {
  for (const auto& [n, k] : kPairs) {
    const auto pr = profile(n, k);
    for (std::size_t i = 1; i < pr.size(); ++i) {
      CHECK(pr.z[i] >= pr.z[i - 1]);
      CHECK(pr.y[i] > 0.0);
      CHECK(pr.one_minus_y[i] > 0.0);
      CHECK(pr.u[i] >= pr.u[i - 1]);
    }
    CHECK(pr.u[0] == 0.0);
    CHECK(pr.plateau_ok);
    CHECK(pr.tail_converged);
  }
}

TEST_CASE("asymptotic constant and remainder ratio", "[radial][oracle]") {
  const auto p22 = profile(2, 2);
  CHECK_THAT(p22.C_asym, WithinAbs(0.5, 1e-3));
  CHECK_THAT(radial::remainder_ratio(p22, 7.0), WithinRel(p22.C_asym * 2 / 4, 0.02));
  const auto p11 = profile(1, 1);
  CHECK_THAT(radial::remainder_ratio(p11, 7.0), WithinRel(p11.C_asym / 2, 0.02));
  CHECK_THAT(p22.c0_fit, WithinAbs(p22.c0, 1e-6));
}

TEST_CASE("relative residual of the ODE solution is small", "[radial][property]") {
  // |a/w - Phi| relative to a/w, which grows like exp(c r^k)
  for (const auto& [n, k] : kPairs) {
    const auto pr = profile(n, k);
    for (double r = 0.05; r < 6.0; r += 0.173) {
      const double omy = pr.one_minus_slope(r);
      const double w = std::sqrt(omy * (2.0 - omy));
      CHECK(radial::verify_residual(pr, r) * w <= 1e-8);
    }
  }
}

TEST_CASE("velocity scaling u_a(r) = u_1(a r) / a", "[radial][property]") {
  const auto base = radial::zero_offset(profile(2, 1, 1.0, 8.0));
  auto pa = radial::zero_offset(profile(2, 1, 2.0, 4.0));
  for (double r = 0.0; r <= 3.9; r += 0.31)
    CHECK_THAT(pa.height(r), WithinAbs(radial::scaled_translator(base, 2.0, r), 1e-9));
}

TEST_CASE("epsilon route agrees with the direct limit", "[radial][property]") {
  RadialParams p;
  p.n = 3;
  p.k = 2;
  p.r_max = 3;
  const auto cc = radial::epsilon_crosscheck(p);
  CHECK(cc.cauchy[1] < cc.cauchy[0]);
  CHECK(cc.sup_difference <= 1e-4);
}

TEST_CASE("parameter validation", "[radial]") {
  RadialParams p;
  p.n = 2;
  p.k = 3;
  CHECK_THROWS_AS(radial::limit_profile(p), ParameterError);
  p.k = 1;
  p.a = -1;
  CHECK_THROWS_AS(radial::limit_profile(p), ParameterError);
  const auto pr = profile(2, 1, 1.0, 2.0);
  CHECK_THROWS_AS(pr.height(2.5), ExtrapolationError);
}
