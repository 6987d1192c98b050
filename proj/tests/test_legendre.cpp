#include <catch_amalgamated.hpp>

#include <cmath>

#include "translab/legendre.hpp"
#include "translab/radial.hpp"

using namespace translab;
using Catch::Matchers::WithinAbs;

namespace {

GraphFunction quadratic(double L, double h) {
  return GraphFunction::sample(L, h, [](double x, double y) { return 0.5 * (x * x + y * y); });
}

const RadialProfile& translator22() {
  static const RadialProfile pr = [] {
    RadialParams p;
    p.n = p.k = 2;
    p.r_max = 4;
    return radial::limit_profile(p);
  }();
  return pr;
}

DualResidual translator_dual_residual(double h, double a = 1.0) {
  const auto g = GraphFunction::sample(2.0, h, [](double x, double y) { return translator22().height(std::hypot(x, y)); });
  return dual_residual(legendre_transform(g, 0.8, h), 2, a);
}

LegendreOptions square() {
  LegendreOptions o;
  o.disc = false;
  o.require_spacelike = false;
  return o;
}

}  // namespace

TEST_CASE("the quadratic is self-dual", "[legendre][oracle]") {
  const double h = 1.0 / 32;
  const auto d = legendre_transform(quadratic(0.6, h), 0.4, h, square());
  CHECK(d.resolved_fraction() == 1.0);
  for (int j = 0; j < d.values.nodes(); ++j)
    for (int i = 0; i < d.values.nodes(); ++i) {
      const double x = d.values.x(i), y = d.values.x(j);
      CHECK_THAT(d.values(i, j), WithinAbs(0.5 * (x * x + y * y), 1e-14));
      CHECK_THAT(d.argmax1[d.values.index(i, j)], WithinAbs(x, 1e-12));
    }
}

TEST_CASE("involution error on the quadratic", "[legendre][oracle]") {
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto q = quadratic(0.6, h);
    const auto twice = legendre_transform(legendre_transform(q, 0.4, h, square()).values, 0.2, h, square());
    CHECK(involution_error(q, twice) <= 10 * h * h);
  }
}

TEST_CASE("warm-started ascent agrees with the exhaustive scan", "[legendre][property]") {
  const double h = 1.0 / 32;
  const auto g = GraphFunction::sample(1.5, h, [](double x, double y) { return translator22().height(std::hypot(x, y)); });
  auto opt = LegendreOptions{};
  const auto fast = legendre_transform(g, 0.6, h, opt);
  opt.exhaustive = true;
  const auto slow = legendre_transform(g, 0.6, h, opt);
  CHECK(fast.values.values() == slow.values.values());
  CHECK(fast.resolved == slow.resolved);
}

TEST_CASE("one-dimensional conjugate of x^4 / 4", "[legendre][oracle]") {
  std::vector<double> x, u, xi;
  for (int i = 0; i <= 128; ++i) {
    x.push_back(i / 64.0 - 1.0);
    u.push_back(std::pow(x.back(), 4) / 4);
  }
  for (double s = -0.9; s <= 0.9; s += 0.05) xi.push_back(s);
  const auto d = legendre_transform_1d(x, u, xi);
  for (std::size_t q = 0; q < xi.size(); ++q) {
    REQUIRE(d.resolved[q]);
    CHECK_THAT(d.value[q], WithinAbs(0.75 * std::pow(std::abs(xi[q]), 4.0 / 3), 1e-7));
  }
}

TEST_CASE("dual translator equation residual converges", "[legendre][property]") {
  const auto r32 = translator_dual_residual(1.0 / 32), r64 = translator_dual_residual(1.0 / 64);
  INFO("residual " << r32.sup << " -> " << r64.sup);
  CHECK(r64.sup <= 5e-3);
  CHECK(std::log2(r32.sup / r64.sup) >= 1.7);
  CHECK(r64.resolved_fraction == 1.0);
  // a wrong velocity is not a solution
  CHECK(translator_dual_residual(1.0 / 32, 2.0).sup > 0.1);
}

TEST_CASE("hyperboloid dual is not a translator", "[legendre][property]") {
  const double h = 1.0 / 64, R = 0.7;
  DualFunction d{GraphFunction::sample(R, h, [](double x, double y) { return -std::sqrt(1 - x * x - y * y); })};
  d.radius = R;
  d.resolved.assign(d.values.values().size(), 0);
  for (int j = 0; j < d.values.nodes(); ++j)
    for (int i = 0; i < d.values.nodes(); ++i)
      d.resolved[d.values.index(i, j)] = std::hypot(d.values.x(i), d.values.x(j)) <= R;
  CHECK(dual_residual(d, 2, 1.0).sup > 0.1);
  CHECK(dual_residual(d, 1, 1.0).sup > 0.1);
}

TEST_CASE("small primal domains leave slopes unresolved", "[legendre][property]") {
  const double h = 1.0 / 16;
  const auto d = legendre_transform(quadratic(0.5, h), 0.9, h, square());
  CHECK(d.resolved_fraction() < 1.0);
  const auto mid = d.values.nodes() / 2;
  CHECK(d.resolved[d.values.index(mid, mid)]);
  CHECK_FALSE(d.resolved[d.values.index(0, 0)]);
}

TEST_CASE("legendre input errors", "[legendre]") {
  const double h = 1.0 / 16;
  const auto concave = GraphFunction::sample(1.0, h, [](double x, double y) { return -0.2 * (x * x + y * y); });
  CHECK_THROWS_AS(legendre_transform(concave, 0.5, h), DomainError);
  CHECK_THROWS_AS(legendre_transform(quadratic(1.0, h), 1.2, h), ParameterError);
  CHECK_THROWS_AS(legendre_transform(quadratic(2.0, h), 0.5, h), SpacelikeViolation);
  CHECK_THROWS_AS(legendre_transform_1d({0.0, 1.0}, {0.0, 1.0}, {0.5}), ParameterError);
}
