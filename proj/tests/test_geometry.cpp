#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "translab/geometry.hpp"
#include "translab/radial.hpp"

using namespace translab;
using Catch::Matchers::WithinAbs;

namespace {

// analytic Du, D^2u of the unit hyperboloid u = sqrt(1 + |x|^2)
void hyperboloid(double x1, double x2, std::vector<double>& du, SymMatrix& h) {
  const double s = std::sqrt(1 + x1 * x1 + x2 * x2), s3 = s * s * s;
  du = {x1 / s, x2 / s};
  h = SymMatrix(2);
  h(0, 0) = (1 + x2 * x2) / s3;
  h(1, 1) = (1 + x1 * x1) / s3;
  h(0, 1) = h(1, 0) = -x1 * x2 / s3;
}

double grid_residual(int k, double h) {
  RadialParams p;
  p.n = 2;
  p.k = k;
  p.r_max = 4;
  static RadialProfile pr[3];
  if (pr[k].r.empty()) pr[k] = radial::limit_profile(p);
  const auto g = GraphFunction::sample(1.0, h, [&](double x, double y) { return pr[k].height(std::hypot(x, y)); });
  return translator_residual(g, k, 1.0);
}

}  // namespace

TEST_CASE("central differences are exact on affine and quadratic data", "[geometry][oracle]") {
  const auto aff = GraphFunction::sample(1.0, 0.125, [](double x, double y) { return 0.25 * x - 0.5 * y + 0.1; });
  const auto quad = GraphFunction::sample(1.0, 0.125, [](double x, double y) { return 0.5 * (x * x + y * y); });
  for (int j = 1; j < aff.nodes() - 1; ++j)
    for (int i = 1; i < aff.nodes() - 1; ++i) {
      const auto a = discrete_gradient_hessian(aff, i, j);
      CHECK_THAT(a.du[0], WithinAbs(0.25, 1e-14));
      CHECK_THAT(a.du[1], WithinAbs(-0.5, 1e-14));
      for (double v : a.d2u) CHECK_THAT(v, WithinAbs(0.0, 1e-12));
      const auto q = discrete_gradient_hessian(quad, i, j);
      CHECK_THAT(q.d2u[0], WithinAbs(1.0, 1e-12));
      CHECK_THAT(q.d2u[1], WithinAbs(0.0, 1e-12));
      CHECK_THAT(q.d2u[2], WithinAbs(1.0, 1e-12));
    }
  CHECK_THROWS_AS(discrete_gradient_hessian(quad, 0, 3), BoundaryError);
}

TEST_CASE("x1^3 second derivative error is O(h^2)", "[geometry][oracle]") {
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto g = GraphFunction::sample(1.0, h, [](double x, double) { return x * x * x; });
    const int mid = g.nodes() / 2;
    CHECK_THAT(discrete_gradient_hessian(g, mid, mid).d2u[0], WithinAbs(0.0, 1e-12));
    // u_1 = 3x^2 has central-difference error h^2 exactly
    const int i = mid + static_cast<int>(std::lround(0.5 / h));
    const double err = std::abs(discrete_gradient_hessian(g, i, mid).du[0] - 3 * g.x(i) * g.x(i));
    CHECK_THAT(err, WithinAbs(h * h, 1e-12));
    if (prev > 0) CHECK_THAT(prev / err, WithinAbs(4.0, 1e-6));
    prev = err;
  }
}

TEST_CASE("shape operator of a flat umbilic point", "[geometry][oracle]") {
  const std::vector<double> du{0.0, 0.0};
  SymMatrix id(2, {1.0, 0.0, 0.0, 1.0});
  const auto a = shape_operator(du, id);
  CHECK(a(0, 0) == 1.0);
  CHECK(a(1, 1) == 1.0);
  CHECK(a(0, 1) == 0.0);
  const std::vector<double> fast{0.8, 0.7};
  CHECK_THROWS_AS(shape_operator(fast, id), SpacelikeViolation);
}

TEST_CASE("hyperboloid principal curvatures equal 1", "[geometry][oracle]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> du;
    SymMatrix h;
    hyperboloid(d(rng), d(rng), du, h);
    const auto kappa = symmetric_eigenvalues(shape_operator(du, h));
    CHECK_THAT(kappa[0], WithinAbs(1.0, 1e-6));
    CHECK_THAT(kappa[1], WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("scaling law: u(lambda x) / lambda scales curvatures by lambda", "[geometry][property]") {
  for (double lambda : {0.5, 2.0, 3.0})
    for (double x : {-0.7, 0.2, 1.1}) {
      // D(u_l)(x) = Du(l x), D^2(u_l)(x) = l D^2u(l x)
      std::vector<double> du;
      SymMatrix h;
      hyperboloid(lambda * x, 0.3, du, h);
      SymMatrix hl(2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) hl(i, j) = lambda * h(i, j);
      const auto kappa = symmetric_eigenvalues(shape_operator(du, hl));
      CHECK_THAT(kappa[0], WithinAbs(lambda, 1e-6));
      CHECK_THAT(kappa[1], WithinAbs(lambda, 1e-6));
    }
}

TEST_CASE("eigenvalue path matches radial curvatures of the (2,2) translator", "[geometry][oracle]") {
  RadialParams p;
  p.n = p.k = 2;
  p.r_max = 4;
  const auto pr = radial::limit_profile(p);
  const double r = 1.0, y = pr.slope(r), omy = pr.one_minus_slope(r);
  const double dy = radial::slope_derivative(2, 2, 1.0, r, y, omy);
  const double w = std::sqrt(1 - y * y);
  for (double ang : {0.0, 0.4, 2.0}) {
    const double e1 = std::cos(ang), e2 = std::sin(ang);
    const std::vector<double> du{y * e1, y * e2};
    SymMatrix h(2);
    h(0, 0) = dy * e1 * e1 + y / r * e2 * e2;
    h(1, 1) = dy * e2 * e2 + y / r * e1 * e1;
    h(0, 1) = h(1, 0) = (dy - y / r) * e1 * e2;
    auto kappa = symmetric_eigenvalues(shape_operator(du, h));
    std::vector<double> expect{dy / (w * w * w), y / (r * w)};
    std::sort(expect.begin(), expect.end());
    CHECK_THAT(kappa[0], WithinAbs(expect[0], 1e-6));
    CHECK_THAT(kappa[1], WithinAbs(expect[1], 1e-6));
  }
}

TEST_CASE("curvature field of special graphs", "[geometry][oracle]") {
  // dyadic data: samples and differences are exact
  const auto aff = GraphFunction::sample(1.0, 0.125, [](double x, double y) { return 0.25 * x + 0.125 * y; });
  for (int k = 1; k <= 2; ++k) {
    const auto f = curvature_field(aff, k);
    CHECK(f.flagged_fraction() == 1.0);
    for (double v : f.phi) CHECK(v == 0.0);
    const double w = std::sqrt(1 - 0.078125);
    CHECK_THAT(translator_residual(aff, k, 1.0), WithinAbs(1.0 / w, 1e-12));
  }
  const auto hyp = GraphFunction::sample(1.0, 1.0 / 64, [](double x, double y) { return std::sqrt(1 + x * x + y * y); });
  for (int k = 1; k <= 2; ++k) {
    const auto f = curvature_field(hyp, k);
    CHECK(f.flagged_count == 0);
    for (std::size_t i = 0; i < f.phi.size(); ++i) {
      if (!f.interior[i]) continue;
      CHECK_THAT(f.phi[i], WithinAbs(1.0, 1e-3));
      CHECK_THAT(f.v[i] * f.w[i], WithinAbs(1.0, 1e-15));
      CHECK(f.w[i] > 0.0);
      CHECK(f.w[i] <= 1.0);
    }
    // a self-expander, not a translator
    CHECK(translator_residual(hyp, k, 1.0) > 0.01);
  }
  const auto concave = GraphFunction::sample(1.0, 0.1, [](double x, double y) { return -std::sqrt(1 + x * x + y * y); });
  CHECK_THROWS_AS(curvature_field(concave, 1), DegenerateError);
  CHECK_THROWS_AS(curvature_field(concave, 2), DegenerateError);
  const auto steep = GraphFunction::sample(1.0, 0.1, [](double x, double) { return 1.2 * x; });
  CHECK_THROWS_AS(curvature_field(steep, 1), SpacelikeViolation);
}

TEST_CASE("grid translator residual converges at second order", "[geometry][property]") {
  for (int k = 1; k <= 2; ++k) {
    const double r64 = grid_residual(k, 1.0 / 64), r128 = grid_residual(k, 1.0 / 128);
    INFO("k=" << k << " residual(1/64)=" << r64 << " residual(1/128)=" << r128);
    CHECK(r64 <= 5e-3);
    CHECK(std::log2(r64 / r128) >= 1.8);
  }
}

TEST_CASE("rotation invariance of radial data", "[geometry][property]") {
  RadialParams p;
  p.n = 2;
  p.k = 1;
  p.r_max = 4;
  const auto pr = radial::limit_profile(p);
  const double h = 1.0 / 32;
  const auto g = GraphFunction::sample(1.0, h, [&](double x, double y) { return pr.height(std::hypot(x, y)); });
  // quarter turn maps nodes to nodes: (i, j) -> (N-1-j, i)
  const auto f = curvature_field(g, 1);
  const int N = g.nodes();
  double worst = 0.0;
  for (int j = 1; j < N - 1; ++j)
    for (int i = 1; i < N - 1; ++i) {
      const auto a = g.index(i, j), b = g.index(N - 1 - j, i);
      worst = std::max({worst, std::abs(f.kappa1[a] - f.kappa1[b]), std::abs(f.kappa2[a] - f.kappa2[b])});
    }
  CHECK(worst <= 10 * h * h);
  // diagonal samples against axis samples at equal radius
  const int c = N / 2, s = 8;
  const auto on_axis = g.index(c + s, c);
  const auto rotated = GraphFunction::sample(1.0, h, [&](double x, double y) {
    const double t = std::numbers::pi / 7, xr = std::cos(t) * x - std::sin(t) * y, yr = std::sin(t) * x + std::cos(t) * y;
    return pr.height(std::hypot(xr, yr));
  });
  const auto fr = curvature_field(rotated, 1);
  CHECK_THAT(fr.phi[on_axis], WithinAbs(f.phi[on_axis], 10 * h * h));
}
