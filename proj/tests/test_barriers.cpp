#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "translab/barriers.hpp"

using namespace translab;
using Catch::Matchers::WithinAbs;

namespace {

SphereFunction constant(double c, std::size_t m = 32) {
  return SphereFunction::sample(m, [c](double) { return c; });
}
SphereFunction sin2(double amp, std::size_t m = 64) {
  return SphereFunction::sample(m, [amp](double t) { return amp * std::sin(2 * t); });
}

}  // namespace

TEST_CASE("spectral derivatives and interpolation are exact for trig data", "[barriers][oracle]") {
  const auto f = sin2(0.3);
  for (std::size_t j = 0; j < f.m(); ++j) {
    const double t = f.theta(j);
    CHECK_THAT(f.dphi()[j], WithinAbs(0.6 * std::cos(2 * t), 1e-12));
    CHECK_THAT(f.d2phi()[j], WithinAbs(-1.2 * std::sin(2 * t), 1e-12));
  }
  for (double t = 0.0; t < 6.3; t += 0.0713) {
    CHECK_THAT(f.eval(t), WithinAbs(0.3 * std::sin(2 * t), 1e-13));
    CHECK_THAT(f.eval(t, 1), WithinAbs(0.6 * std::cos(2 * t), 1e-12));
  }
  // max of 1.5 |sin 2t| + 0.6 |cos 2t| over the samples
  CHECK_THAT(f.c2_norm(), WithinAbs(0.3 * std::sqrt(29.0), 2e-3));
  CHECK_THROWS_AS(SphereFunction(std::vector<double>(12, 0.0)), ParameterError);
}

TEST_CASE("sphere CSV input", "[barriers]") {
  std::ostringstream good;
  good.precision(17);
  good << "theta,phi\n";
  for (int j = 0; j < 8; ++j) good << 2 * std::numbers::pi * j / 8 << "," << 0.5 << "\n";
  std::istringstream in(good.str());
  const auto f = read_sphere_csv(in);
  CHECK(f.m() == 8);
  CHECK_THAT(f.eval(1.234), WithinAbs(0.5, 1e-15));

  std::istringstream bad("theta,phi\n0,0\n0.5,0\n1.7,0\n3,0\n");
  CHECK_THROWS_AS(read_sphere_csv(bad), ParameterError);
  std::istringstream malformed("theta,phi\n0,0\n0.5\n");
  CHECK_THROWS_AS(read_sphere_csv(malformed), ParameterError);
}

TEST_CASE("phi = 0 and M = 0 collapse both barriers onto the translator", "[barriers][oracle]") {
  for (int k = 1; k <= 2; ++k) {
    const auto pair = make_barrier_pair(k, 1.0, constant(0.0, 16), 0.0);
    for (double x = -5; x <= 5; x += 1.7)
      for (double y = -5; y <= 5; y += 1.3) {
        const double z = pair.z(std::hypot(x, y));
        CHECK_THAT(barrier_eval(pair, x, y, BarrierKind::sub), WithinAbs(z, 1e-12));
        CHECK_THAT(barrier_eval(pair, x, y, "super"), WithinAbs(z, 1e-12));
      }
  }
}

TEST_CASE("constant phi closed form matches dense enumeration", "[barriers][oracle]") {
  for (int k = 1; k <= 2; ++k) {
    const auto pair = make_barrier_pair(k, 1.0, constant(0.7));
    CHECK_THAT(pair.M, WithinAbs(0.7, 1e-14));
    for (double x : {-4.0, -1.0, 0.5, 3.0})
      for (double y : {-3.5, 0.0, 2.2}) {
        const double r = std::hypot(x, y);
        CHECK_THAT(barrier_enumerate(pair, x, y, BarrierKind::sub, 1 << 16), WithinAbs(constant_phi_sub(pair, 0.7, r), 1e-8));
        CHECK_THAT(barrier_eval(pair, x, y, BarrierKind::sub), WithinAbs(constant_phi_sub(pair, 0.7, r), 1e-12));
        if (r >= 2 * pair.M) {
          CHECK_THAT(barrier_enumerate(pair, x, y, BarrierKind::super, 1 << 16), WithinAbs(constant_phi_super(pair, 0.7, r), 1e-8));
          CHECK_THAT(barrier_eval(pair, x, y, BarrierKind::super), WithinAbs(constant_phi_super(pair, 0.7, r), 1e-12));
        }
      }
    CHECK_THROWS_AS(constant_phi_super(pair, 0.7, 0.1), DomainError);
  }
}

TEST_CASE("barrier ordering q1 <= q2 on a grid", "[barriers][property]") {
  for (int k = 1; k <= 2; ++k) {
    const auto pair = make_barrier_pair(k, 1.0, sin2(0.3));
    const auto g = barrier_grid(pair, 6.0, 41);
    CHECK(g.max_violation <= 1e-12);
    CHECK(g.q1.size() == 41u * 41u);
  }
}

TEST_CASE("asymptotic gap decays with the radius", "[barriers][property]") {
  const auto pair = make_barrier_pair(1, 1.0, sin2(0.3));
  const auto g3 = asymptotic_gap(pair, 3.0), g5 = asymptotic_gap(pair, 5.0), g6 = asymptotic_gap(pair, 6.0);
  CHECK(g5.max() < g3.max());
  CHECK(g6.max() < g5.max());
}

TEST_CASE("barrier_eval agrees with enumeration for varying phi", "[barriers][property]") {
  const auto pair = make_barrier_pair(2, 1.0, sin2(0.3));
  for (double x : {-3.0, 1.5})
    for (double y : {-2.0, 0.7})
      for (auto kind : {BarrierKind::sub, BarrierKind::super})
        CHECK_THAT(barrier_eval(pair, x, y, kind), WithinAbs(barrier_enumerate(pair, x, y, kind, 1 << 14), 1e-6));
}

TEST_CASE("barrier errors", "[barriers]") {
  const auto pair = make_barrier_pair(1, 1.0, sin2(0.3), -1.0, 4.0);
  CHECK_THROWS_AS(barrier_eval(pair, 10.0, 0.0, BarrierKind::sub), ExtrapolationError);
  CHECK_THROWS_AS(barrier_eval(pair, 1.0, 0.0, "middle"), ParameterError);
  CHECK_THROWS_AS(make_barrier_pair(3, 1.0, sin2(0.3)), ParameterError);
  CHECK_THROWS_AS(make_barrier_pair(1, 0.0, sin2(0.3)), ParameterError);
}
