#pragma once

// Quick invariant suites behind `translab check`.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "translab/barriers.hpp"
#include "translab/flow.hpp"
#include "translab/geometry.hpp"
#include "translab/legendre.hpp"
#include "translab/radial.hpp"
#include "translab/symfunc.hpp"

namespace translab::suite {

struct Check {
  std::string suite, name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

// value <= threshold passes
inline Check at_most(std::string suite, std::string name, double value, double threshold) {
  return {std::move(suite), std::move(name), value, threshold, value <= threshold};
}

inline void symfunc_checks(std::mt19937_64& rng, std::vector<Check>& out) {
  std::uniform_real_distribution<double> pos(0.1, 3.0), any(-2.0, 2.0);
  double worst_sigma = 0.0, worst_eig = 0.0, worst_root = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<double> kappa(n);
    for (double& v : kappa) v = any(rng);
    for (int k = 1; k <= n; ++k) {
      const double fast = sigma_k(std::span<const double>(kappa), k);
      const double slow = sigma_k_subsets(kappa, k);
      worst_sigma = std::max(worst_sigma, std::abs(fast - slow) / std::max(1.0, std::abs(slow)));
    }
    const double c = pos(rng);
    std::vector<double> equal(n, c);
    const int k = 1 + static_cast<int>(rng() % n);
    worst_root = std::max(worst_root, std::abs(normalized_root(equal, k) - c) / c);

    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a(i, j) = a(j, i) = any(rng);
    const auto ed = symmetric_eigen(a);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ed.vectors(i, l) * ed.values[l] * ed.vectors(j, l);
        err = std::max(err, std::abs(s - a(i, j)));
      }
    worst_eig = std::max(worst_eig, err / std::max(1e-300, a.max_abs()));
  }
  out.push_back(at_most("symfunc", "sigma_k recursion vs subsets", worst_sigma, 1e-12));
  out.push_back(at_most("symfunc", "normalized root of equal curvatures", worst_root, 1e-12));
  out.push_back(at_most("symfunc", "eigen reconstruction", worst_eig, 1e-10));
}

inline void radial_checks(std::vector<Check>& out) {
  RadialParams p;
  p.n = p.k = 2;
  p.r_max = 6;
  auto pr = radial::limit_profile(p);
  double e = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i)
    if (pr.r[i] <= 4.0) e = std::max(e, std::abs(pr.z[i] + std::expm1(-pr.r[i] * pr.r[i])));
  out.push_back(at_most("radial", "n=k=2 closed form z = 1 - exp(-r^2)", e, 1e-8));
  out.push_back(at_most("radial", "n=k=2 C_asym = 1/2", std::abs(pr.C_asym - 0.5), 1e-3));
  p.n = p.k = 1;
  pr = radial::limit_profile(p);
  e = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i)
    if (pr.r[i] <= 4.0) e = std::max(e, std::abs(pr.y[i] - std::tanh(pr.r[i])));
  out.push_back(at_most("radial", "n=k=1 closed form y = tanh r", e, 1e-8));
  out.push_back(at_most("radial", "n=k=1 c0 = -log 2", std::abs(pr.c0 + std::log(2.0)), 1e-8));
  p.n = 3;
  p.k = 2;
  p.r_max = 4;
  pr = radial::limit_profile(p);
  double viol = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double r = pr.r[i];
    if (r < 0.1 || r > 3.0) continue;
    const double omz = std::exp(pr.log_one_minus_z[i]);
    viol = std::max({viol, std::exp(-(2.0 * p.n / p.k) * std::pow(r, p.k)) - omz,
                     omz - std::exp(-std::pow(r, p.k) / p.n)});
  }
  out.push_back(at_most("radial", "(3,2) two-sided bounds on 1 - z", viol, 1e-6));
}

inline void geometry_checks(std::mt19937_64& rng, std::vector<Check>& out) {
  // hyperboloid u = sqrt(1 + |x|^2): every principal curvature is 1
  std::uniform_real_distribution<double> any(-2.0, 2.0);
  double e = 0.0;
  for (int t = 0; t < 50; ++t) {
    const double x1 = any(rng), x2 = any(rng), s = std::sqrt(1 + x1 * x1 + x2 * x2);
    const double p1 = x1 / s, p2 = x2 / s;
    const double s3 = s * s * s;
    SymMatrix h(2);
    h(0, 0) = (1 + x2 * x2) / s3;
    h(1, 1) = (1 + x1 * x1) / s3;
    h(0, 1) = h(1, 0) = -x1 * x2 / s3;
    const std::vector<double> du{p1, p2};
    const auto kappa = symmetric_eigenvalues(shape_operator(du, h));
    for (double kv : kappa) e = std::max(e, std::abs(kv - 1.0));
  }
  out.push_back(at_most("geometry", "hyperboloid curvatures equal 1", e, 1e-6));
  for (int k = 1; k <= 2; ++k) {
    RadialParams p;
    p.n = 2;
    p.k = k;
    p.r_max = 4;
    const auto pr = radial::limit_profile(p);
    const auto g = GraphFunction::sample(1.0, 1.0 / 32, [&](double x, double y) {
      return pr.height(std::hypot(x, y));
    });
    out.push_back(at_most("geometry", "grid translator residual k=" + std::to_string(k) + ", h=1/32",
                          translator_residual(g, k, 1.0), 5e-3));
  }
}

inline void barrier_checks(std::vector<Check>& out) {
  const auto zero = make_barrier_pair(1, 1.0, SphereFunction::sample(16, [](double) { return 0.0; }), 0.0);
  double e = 0.0;
  for (double x = -4; x <= 4; x += 1.3)
    for (double y = -4; y <= 4; y += 1.1) {
      const double z = zero.z(std::hypot(x, y));
      e = std::max({e, std::abs(barrier_eval(zero, x, y, BarrierKind::sub) - z),
                    std::abs(barrier_eval(zero, x, y, BarrierKind::super) - z)});
    }
  out.push_back(at_most("barriers", "phi = 0, M = 0 collapses to the translator", e, 1e-12));

  const auto cst = make_barrier_pair(2, 1.0, SphereFunction::sample(32, [](double) { return 0.7; }));
  e = 0.0;
  for (double x : {-3.0, 0.4, 2.5})
    for (double y : {-2.0, 0.0, 3.5}) {
      const double r = std::hypot(x, y);
      e = std::max(e, std::abs(barrier_enumerate(cst, x, y, BarrierKind::sub, 1 << 14) -
                               constant_phi_sub(cst, 0.7, r)));
      if (r >= 2 * cst.M)
        e = std::max(e, std::abs(barrier_enumerate(cst, x, y, BarrierKind::super, 1 << 14) -
                                 constant_phi_super(cst, 0.7, r)));
    }
  out.push_back(at_most("barriers", "constant phi closed form vs enumeration", e, 1e-7));

  const auto sn = make_barrier_pair(1, 1.0, SphereFunction::sample(64, [](double t) { return 0.3 * std::sin(2 * t); }));
  out.push_back(at_most("barriers", "sin 2theta ordering q1 - q2 on 21x21", barrier_grid(sn, 6.0, 21).max_violation, 1e-12));
  const double g3 = asymptotic_gap(sn, 3.0).max(), g5 = asymptotic_gap(sn, 5.0).max();
  out.push_back(at_most("barriers", "asymptotic gap decays: gap(5) - gap(3)", g5 - g3, 0.0));
}

inline void flow_checks(std::vector<Check>& out) {
  RadialParams p;
  p.n = 2;
  p.k = 1;
  p.r_max = 8;
  const auto pr = radial::limit_profile(p);
  const auto ref = flow::radial_reference(pr, 6.0, 1.0 / 64);

  auto st = flow::make_state(ref, std::vector<double>(ref.size(), 0.0), 1.0, 1);
  flow::FlowConfig cfg;
  cfg.t_end = 0.5;
  cfg.stop_on_convergence = false;
  auto fixed = flow::run_normalized(st, cfg);
  double drift = 0.0;
  for (const auto& h : fixed.state.history) drift = std::max(drift, h.sup_dist);
  out.push_back(at_most("flow", "translator fixed point drift on [0, 0.5]", drift, 1e-6));

  std::vector<double> bump(ref.size());
  for (std::size_t i = 0; i < bump.size(); ++i) bump[i] = 0.3 * std::exp(-ref.radius(i) * ref.radius(i));
  auto b = flow::make_state(ref, bump, 1.0, 1);
  flow::FlowConfig bc;
  bc.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  bc.t_end = 1.0;
  const auto run = flow::run_normalized(b, bc);
  out.push_back(at_most("flow", "bump run monotone (0 = yes)", run.monotone ? 0.0 : 1.0, 0.0));
  out.push_back(at_most("flow", "bump decays: final / initial sup distance",
                        run.final_sup_dist / flow::sup_distance(b), 0.5));

  // Shifted translator satisfies the comparison hypotheses; injected error must be caught.
  auto shifted = flow::make_state(ref, std::vector<double>(ref.size(), 0.1), 1.0, 1);
  const auto bounds = flow::initial_sandwich(shifted, 10.0 / (64.0 * 64.0));
  flow::FlowConfig sc = bc;
  sc.t_end = 0.5;
  sc.stop_on_convergence = false;
  const auto srun = flow::run_normalized(shifted, sc, &bounds);
  out.push_back(at_most("flow", "sandwich worst violation, shifted translator", srun.sandwich_worst, bounds.slack));
  auto bad = srun.state;
  bad.deviation[ref.size() / 3] += 1e-2;
  const auto rep = flow::sandwich_check(bad, bounds.lower, bounds.upper, bounds.slack);
  out.push_back(at_most("flow", "injected 1e-2 error detected (0 = yes)", rep.ok ? 1.0 : 0.0, 0.0));
}

inline void legendre_checks(std::vector<Check>& out) {
  const double h = 1.0 / 32;
  const auto q = GraphFunction::sample(0.6, h, [](double x, double y) { return 0.5 * (x * x + y * y); });
  LegendreOptions o;
  o.disc = false;
  const auto d = legendre_transform(q, 0.4, h, o);
  double e = 0.0;
  for (int j = 0; j < d.values.nodes(); ++j)
    for (int i = 0; i < d.values.nodes(); ++i) {
      const double x = d.values.x(i), y = d.values.x(j);
      e = std::max(e, std::abs(d.values(i, j) - 0.5 * (x * x + y * y)));
    }
  out.push_back(at_most("legendre", "quadratic is self-dual", e, 1e-12));
  const auto dd = legendre_transform(d.values, 0.2, h, o);
  out.push_back(at_most("legendre", "involution error", involution_error(q, dd), 10 * h * h));

  RadialParams p;
  p.n = p.k = 2;
  p.r_max = 4;
  const auto pr = radial::limit_profile(p);
  const auto g = GraphFunction::sample(2.0, h, [&](double x, double y) { return pr.height(std::hypot(x, y)); });
  const auto dual = legendre_transform(g, 0.8, h);
  out.push_back(at_most("legendre", "(2,2) translator dual residual, h=1/32", dual_residual(dual, 2, 1.0).sup, 5e-3));
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"symfunc", "radial", "geometry", "barriers", "flow", "legendre", "all"};
  return names;
}

inline std::vector<Check> run(const std::string& suite, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::vector<Check> out;
  const bool all = suite == "all";
  if (all || suite == "symfunc") symfunc_checks(rng, out);
  if (all || suite == "radial") radial_checks(out);
  if (all || suite == "geometry") geometry_checks(rng, out);
  if (all || suite == "barriers") barrier_checks(out);
  if (all || suite == "flow") flow_checks(out);
  if (all || suite == "legendre") legendre_checks(out);
  return out;
}

}  // namespace translab::suite
