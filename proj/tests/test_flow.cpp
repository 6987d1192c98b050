#include <catch_amalgamated.hpp>

#include <cmath>

#include "translab/flow.hpp"

using namespace translab;
using Catch::Matchers::WithinAbs;

namespace {

const RadialProfile& target(int k) {
  static RadialProfile cache[3];
  if (cache[k].r.empty()) {
    RadialParams p;
    p.n = 2;
    p.k = k;
    p.r_max = 8;
    cache[k] = radial::limit_profile(p);
  }
  return cache[k];
}

flow::FlowState bump_state(double dr, double amp = 0.3) {
  const auto ref = flow::radial_reference(target(1), 6.0, dr);
  std::vector<double> v0(ref.size());
  for (std::size_t i = 0; i < v0.size(); ++i) v0[i] = amp * std::exp(-ref.radius(i) * ref.radius(i));
  return flow::make_state(ref, v0, 1.0, 1);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("translator data is a fixed point of the normalized flow", "[flow][oracle]") {
  for (int k = 1; k <= 2; ++k) {
    const auto ref = flow::radial_reference(target(k), 4.0, 1.0 / 128);
    const auto st = flow::make_state(ref, std::vector<double>(ref.size(), 0.0), 1.0, k);
    for (double s : flow::node_speeds(st)) CHECK_THAT(s, WithinAbs(1.0, 1e-6));
    CHECK_THAT(flow::speed_support_ratio(st), WithinAbs(1.0, 1e-6));
    flow::FlowConfig cfg;
    cfg.t_end = 1.0;
    cfg.stop_on_convergence = false;
    const auto res = flow::run_normalized(st, cfg);
    CHECK(res.state.t == Catch::Approx(1.0));
    for (const auto& h : res.state.history) CHECK(h.sup_dist <= 1e-6);
    CHECK(res.converged);
  }
}

TEST_CASE("grid translator is a fixed point", "[flow][oracle]") {
  const auto ref = flow::grid_reference(target(1), 1.5, 1.0 / 16);
  const auto st = flow::make_state(ref, std::vector<double>(ref.size(), 0.0), 1.0, 1);
  for (double s : flow::node_speeds(st)) CHECK_THAT(s, WithinAbs(1.0, 1e-6));
  flow::FlowConfig cfg;
  cfg.t_end = 0.5;
  cfg.stop_on_convergence = false;
  const auto res = flow::run_normalized(st, cfg);
  CHECK(flow::sup_distance(res.state) <= 1e-6);
}

TEST_CASE("one step decreases the distance to the translator", "[flow][property]") {
  auto st = bump_state(1.0 / 64);
  flow::FlowConfig cfg;
  cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  const double before = flow::sup_distance(st);
  flow::step(st, cfg, 0.01);
  CHECK(flow::sup_distance(st) < before);
}

TEST_CASE("two half steps against one step: second-order local agreement", "[flow][property]") {
  // asymptotic regime needs dt |lambda_max| << 1; a small domain keeps w away from 0
  const auto ref = flow::radial_reference(target(1), 2.0, 1.0 / 16);
  std::vector<double> v0(ref.size());
  for (std::size_t i = 0; i < v0.size(); ++i) v0[i] = 0.3 * std::exp(-ref.radius(i) * ref.radius(i));
  const auto st = flow::make_state(ref, v0, 1.0, 1);
  for (auto scheme : {flow::Scheme::linearly_implicit, flow::Scheme::explicit_euler}) {
    flow::FlowConfig cfg;
    cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
    cfg.scheme = scheme;
    cfg.dt_safety = 0.5;
    const double limit = flow::detail::with_ops(st, [&](const auto& ops) { return flow::detail::explicit_dt(ops, st, cfg); });
    std::vector<double> diff;
    for (double dt : {limit / 4, limit / 8, limit / 16}) {
      auto one = st, two = st;
      flow::advance(one, cfg, dt);
      flow::advance(two, cfg, dt / 2);
      flow::advance(two, cfg, dt / 2);
      diff.push_back(max_abs_diff(one.deviation, two.deviation));
    }
    INFO("diffs " << diff[0] << " " << diff[1] << " " << diff[2]);
    CHECK(std::log2(diff[1] / diff[2]) >= 1.9);
  }
}

TEST_CASE("bump initial data converges monotonically", "[flow][property]") {
  flow::FlowConfig cfg;
  cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  const auto res = flow::run_normalized(bump_state(1.0 / 64), cfg);
  CHECK(res.converged);
  CHECK(res.monotone);
  CHECK(res.final_sup_dist <= 1e-3);
  CHECK(res.max_flagged_fraction == 0.0);
  CHECK(res.max_phi_over_v <= res.initial_max_phi_over_v + 1e-3);
  for (std::size_t i = 1; i < res.state.history.size(); ++i)
    CHECK(res.state.history[i].t > res.state.history[i - 1].t);
}

TEST_CASE("supersolution data moves down toward the translator", "[flow][property]") {
  // q2 with phi = 0, M = 0.2: 2M + U(| |x| - 2M |), an infimum of translators
  const double M = 0.2;
  const auto& pr = target(1);
  const auto ref = flow::radial_reference(pr, 6.0, 1.0 / 64);
  std::vector<double> v0(ref.size());
  for (std::size_t i = 0; i < v0.size(); ++i) {
    const double r = ref.radius(i);
    v0[i] = 2 * M + pr.height(std::abs(r - 2 * M)) - ref.height[i];
  }
  const auto st = flow::make_state(ref, v0, 1.0, 1);
  CHECK(flow::speed_support_ratio(st) < 1.0);
  flow::FlowConfig cfg;
  cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  cfg.t_end = 3.0;
  cfg.output_interval = 0.1;
  // here the comparison hypotheses hold: translator <= u <= u0 + a t
  const auto bounds = flow::initial_sandwich(st, 10.0 / (64.0 * 64.0));
  const auto res = flow::run_normalized(st, cfg, &bounds);
  CHECK(res.monotone);
  CHECK(res.sandwich_ok);
  CHECK(res.final_sup_dist < 0.1 * flow::sup_distance(st));
}

TEST_CASE("sandwich holds for shifted translator data and catches injected errors", "[flow][property]") {
  const double dr = 1.0 / 64;
  const auto ref = flow::radial_reference(target(1), 6.0, dr);
  const auto st = flow::make_state(ref, std::vector<double>(ref.size(), 0.05), 1.0, 1);
  const auto bounds = flow::initial_sandwich(st, 10 * dr * dr);
  CHECK(flow::sandwich_check(st, bounds.lower, bounds.upper, bounds.slack).ok);
  flow::FlowConfig cfg;
  cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  cfg.t_end = 1.0;
  cfg.stop_on_convergence = false;
  const auto res = flow::run_normalized(st, cfg, &bounds);
  CHECK(res.sandwich_ok);

  auto bad = res.state;
  bad.deviation[ref.size() / 2] += 1e-2;
  CHECK_FALSE(flow::sandwich_check(bad, bounds.lower, bounds.upper, bounds.slack).ok);
  CHECK_THROWS_AS(flow::require_sandwich(bad, bounds.lower, bounds.upper, bounds.slack), ComparisonFailure);
  bad.deviation[ref.size() / 2] -= 2e-2 + 0.05;
  CHECK_FALSE(flow::sandwich_check(bad, bounds.lower, bounds.upper, bounds.slack).ok);
}

TEST_CASE("initial admissibility report", "[flow][oracle]") {
  for (double a : {1.0, 1.5}) {
    // sigma_1 / v = a C(2,1) on the translator
    const auto ref = flow::radial_reference(radial::limit_profile({2, 1, a, 8.0, 1e-11, 2048}), 4.0, 1.0 / 64);
    const auto st = flow::make_state(ref, std::vector<double>(ref.size(), 0.0), a, 1);
    const auto rep = flow::check_initial_admissible(st, 2 * a);
    CHECK_THAT(rep.max_ratio, WithinAbs(2 * a, 1e-6));
    CHECK(rep.strictly_convex);
    CHECK_THAT(rep.velocity_bound, WithinAbs(a, 1e-12));
    CHECK_FALSE(flow::check_initial_admissible(st, 1.9 * a).admissible);
  }
  const auto bump = bump_state(1.0 / 64, 0.2);
  const auto rb = flow::check_initial_admissible(bump, 10.0);
  CHECK(std::isfinite(rb.max_ratio));
  CHECK(rb.max_ratio > 2.0);

  // affine graph: sigma_k = 0 is not strictly convex
  const auto gref = flow::grid_reference(target(1), 1.0, 0.125);
  std::vector<double> v0(gref.size());
  const auto& g = gref.height;
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.nodes(); ++i) v0[g.index(i, j)] = 0.25 * g.x(i) - g(i, j);
  const auto affine = flow::make_state(gref, v0, 1.0, 1);
  const auto ra = flow::check_initial_admissible(affine, 10.0);
  CHECK_FALSE(ra.strictly_convex);
  CHECK_FALSE(ra.admissible);
}

TEST_CASE("flagged nodes have zero speed", "[flow][property]") {
  // u = -U is concave
  const auto gref = flow::grid_reference(target(1), 1.0, 0.125);
  std::vector<double> v0(gref.size());
  for (std::size_t i = 0; i < v0.size(); ++i) v0[i] = -2 * gref.height.values()[i];
  const auto st = flow::make_state(gref, v0, 1.0, 1);
  for (double s : flow::node_speeds(st)) CHECK_THAT(s, WithinAbs(0.0, 1e-12));
  CHECK(flow::checkpoint(st).flagged_fraction == 1.0);
}

TEST_CASE("step rejection and configuration errors", "[flow]") {
  auto st = bump_state(1.0 / 32);
  flow::FlowConfig cfg;
  cfg.max_halvings = 0;
  cfg.max_change = 1e-9;
  CHECK_THROWS_AS(flow::step(st, cfg, 0.1), StiffnessFailure);
  CHECK_THROWS_AS(flow::advance(st, cfg, 0.1), StiffnessFailure);
  CHECK(st.t == 0.0);

  flow::FlowConfig bad;
  bad.t_end = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = {};
  bad.tol_converged = -1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = {};
  bad.dt_safety = 1.5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  const auto ref = flow::radial_reference(target(1), 2.0, 0.25);
  CHECK_THROWS_AS(flow::make_state(ref, std::vector<double>(3, 0.0), 1.0, 1), ParameterError);
  CHECK_THROWS_AS(flow::make_state(ref, std::vector<double>(ref.size(), 0.0), 1.0, 3), ParameterError);
  CHECK_THROWS_AS(flow::radial_reference(target(1), 9.0, 0.1), ExtrapolationError);
  CHECK_THROWS_AS(flow::grid_reference(target(1), 6.0, 0.1), ExtrapolationError);
}

TEST_CASE("runs are deterministic", "[flow]") {
  flow::FlowConfig cfg;
  cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  cfg.t_end = 1.0;
  const auto a = flow::run_normalized(bump_state(1.0 / 32), cfg);
  const auto b = flow::run_normalized(bump_state(1.0 / 32), cfg);
  CHECK(a.state.deviation == b.state.deviation);
  CHECK(a.steps == b.steps);
}
