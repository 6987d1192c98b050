#pragma once

// Graphical sigma_k^{1/k} curvature flow
//   u_t = sqrt(1 - |Du|^2) (sigma_k(kappa) / C(n,k))^{1/k}
// on a truncated domain, radially for any (n, k) and on 2-D grids.
//
// The unknown is the deviation v = u - a t - U from a reference translator U
// whose derivatives are known in closed form; only v is differenced. Near
// the light cone 1 - |DU| is far below the resolution of u itself, so
// differencing u directly loses the far field to rounding.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "translab/errors.hpp"
#include "translab/geometry.hpp"
#include "translab/radial.hpp"
#include "translab/symfunc.hpp"

namespace translab::flow {

/// Translator data at r_i = i dr, i = 0..M (node M is the boundary).
struct RadialReference {
  int n = 2;
  double dr = 1.0 / 256;
  std::vector<double> height, y, one_minus_y, dy;

  std::size_t size() const { return height.size(); }
  double radius(std::size_t i) const { return static_cast<double>(i) * dr; }
};

/// Translator data at the nodes of a 2-D grid.
struct GridReference {
  GraphFunction height;
  std::vector<double> p1, p2, w2, h11, h12, h22;

  std::size_t size() const { return height.values().size(); }
};

using Reference = std::variant<RadialReference, GridReference>;

namespace detail {

struct TranslatorPoint {
  double y, one_minus_y, dy;
};

inline TranslatorPoint translator_point(const RadialProfile& pr, double r) {
  const auto& p = pr.params;
  const double y = pr.slope(r);
  const double omy = pr.one_minus_slope(r);
  return {y, omy, radial::slope_derivative(p.n, p.k, p.a, r, y, omy)};
}

}  // namespace detail

inline RadialReference radial_reference(const RadialProfile& pr, double R, double dr) {
  if (!(R > 0.0 && dr > 0.0 && dr < R)) throw ParameterError("radial_reference: bad R or dr");
  if (R > pr.r.back() * (1 + 1e-12))
    throw ExtrapolationError("radial_reference: domain exceeds the profile's r_max");
  const int cells = static_cast<int>(std::lround(R / dr));
  RadialReference ref;
  ref.n = pr.params.n;
  ref.dr = R / cells;
  const std::size_t size = static_cast<std::size_t>(cells) + 1;
  ref.height.resize(size);
  ref.y.resize(size);
  ref.one_minus_y.resize(size);
  ref.dy.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double r = std::min(ref.radius(i), pr.r.back());
    const auto t = detail::translator_point(pr, r);
    ref.height[i] = pr.height(r);
    ref.y[i] = t.y;
    ref.one_minus_y[i] = t.one_minus_y;
    ref.dy[i] = t.dy;
  }
  return ref;
}

inline GridReference grid_reference(const RadialProfile& pr, double L, double h) {
  if (std::sqrt(2.0) * L > pr.r.back() * (1 + 1e-12))
    throw ExtrapolationError("grid_reference: grid corners exceed the profile's r_max");
  GridReference ref;
  ref.height = GraphFunction::sample(L, h, [&](double x1, double x2) {
    return pr.height(std::hypot(x1, x2));
  });
  const auto size = ref.size();
  for (auto* v : {&ref.p1, &ref.p2, &ref.w2, &ref.h11, &ref.h12, &ref.h22}) v->assign(size, 0.0);
  const auto& g = ref.height;
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.nodes(); ++i) {
      const std::size_t idx = g.index(i, j);
      const double x1 = g.x(i), x2 = g.x(j), r = std::hypot(x1, x2);
      const auto t = detail::translator_point(pr, r);
      if (r == 0.0) {
        ref.w2[idx] = 1.0;
        ref.h11[idx] = ref.h22[idx] = t.dy;
        continue;
      }
      const double e1 = x1 / r, e2 = x2 / r, tang = t.y / r;
      ref.p1[idx] = t.y * e1;
      ref.p2[idx] = t.y * e2;
      ref.w2[idx] = t.one_minus_y * (1.0 + t.y);
      ref.h11[idx] = t.dy * e1 * e1 + tang * (1 - e1 * e1);
      ref.h12[idx] = (t.dy - tang) * e1 * e2;
      ref.h22[idx] = t.dy * e2 * e2 + tang * (1 - e2 * e2);
    }
  return ref;
}

enum class BoundaryMode { translator_dirichlet, barrier_dirichlet };
enum class Scheme { linearly_implicit, explicit_euler };

struct HistoryRecord {
  double t = 0.0;
  double sup_dist = 0.0;
  double min_margin = 0.0;
  double max_phi_over_v = 0.0;
  double flagged_fraction = 0.0;
};

struct FlowConfig {
  double dt_safety = 0.4;
  double t_end = 50.0;
  BoundaryMode bc_mode = BoundaryMode::translator_dirichlet;
  double tol_converged = 1e-3;
  Scheme scheme = Scheme::linearly_implicit;
  double dt_initial = 1e-3;
  double dt_max = 0.25;
  double max_change = 0.05;       // largest accepted |v' - v| per implicit step
  double output_interval = 0.25;  // checkpoint spacing in t
  int max_halvings = 20;
  bool stop_on_convergence = true;
  double monotone_slack = 1e-6;

  void validate() const {
    if (!(t_end > 0.0)) throw ParameterError("FlowConfig: t_end must be positive");
    if (!(tol_converged > 0.0)) throw ParameterError("FlowConfig: tol_converged must be positive");
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw ParameterError("FlowConfig: dt_safety must lie in (0, 1]");
    if (!(output_interval > 0.0)) throw ParameterError("FlowConfig: output_interval must be positive");
    if (!(dt_initial > 0.0 && dt_max >= dt_initial)) throw ParameterError("FlowConfig: need 0 < dt_initial <= dt_max");
    if (!(max_change > 0.0)) throw ParameterError("FlowConfig: max_change must be positive");
    if (max_halvings < 0) throw ParameterError("FlowConfig: max_halvings must be >= 0");
  }
};

struct FlowState {
  Reference reference;
  std::vector<double> deviation;  // v = u - a t - U
  std::vector<double> initial;    // v at t = 0; barrier_dirichlet boundary data
  double t = 0.0;
  double a = 1.0;
  int k = 1;
  std::vector<HistoryRecord> history;

  bool is_radial() const { return std::holds_alternative<RadialReference>(reference); }
  const std::vector<double>& target() const {
    return is_radial() ? std::get<RadialReference>(reference).height
                       : std::get<GridReference>(reference).height.values();
  }
  /// u - a t.
  std::vector<double> normalized() const {
    std::vector<double> out = target();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += deviation[i];
    return out;
  }
  /// u itself.
  std::vector<double> values() const {
    auto out = normalized();
    for (double& v : out) v += a * t;
    return out;
  }
  double spacing() const {
    return is_radial() ? std::get<RadialReference>(reference).dr
                       : std::get<GridReference>(reference).height.h();
  }
};

/// State with u(0) = U + v0; v0 is given per node.
inline FlowState make_state(Reference ref, std::vector<double> v0, double a, int k) {
  FlowState s;
  s.reference = std::move(ref);
  if (v0.size() != s.target().size()) throw ParameterError("make_state: deviation size mismatch");
  for (double v : v0)
    if (!std::isfinite(v)) throw ParameterError("make_state: non-finite initial data");
  if (!(a > 0.0)) throw ParameterError("make_state: velocity must be positive");
  if (s.is_radial()) {
    const int n = std::get<RadialReference>(s.reference).n;
    if (k < 1 || k > n) throw ParameterError("make_state: k out of range");
    if (n > 16) throw ParameterError("make_state: radial flow supports n <= 16");
  } else if (k < 1 || k > 2) {
    throw ParameterError("make_state: grid flow needs k in 1..2");
  }
  s.deviation = v0;
  s.initial = std::move(v0);
  s.a = a;
  s.k = k;
  return s;
}

namespace detail {

template <typename T>
double re(const T& v) {
  if constexpr (std::is_same_v<T, double>) return v;
  else return v.real();
}

template <typename T>
struct NodeSpeed {
  T speed{0};
  double phi = 0.0;
  bool flagged = false;
  bool spacelike = true;
};

// w Phi from sigma_1..sigma_k of the curvatures; Phi = 0 outside the
// Garding cone, where the node is flagged.
template <typename T>
NodeSpeed<T> speed_from_kappa(std::span<const T> kappa, int k, T w) {
  using std::sqrt;
  NodeSpeed<T> out;
  for (int j = 1; j <= k; ++j)
    if (!(re(elementary_symmetric(kappa, j)) > 0.0)) out.flagged = true;
  if (out.flagged) return out;
  const T sk = elementary_symmetric(kappa, k) / T(binomial(static_cast<int>(kappa.size()), k));
  T phi;
  if (k == 1) phi = sk;
  else if (k == 2) phi = sqrt(sk);
  else phi = std::pow(sk, 1.0 / k);
  out.phi = re(phi);
  out.speed = w * phi;
  return out;
}

struct RadialOps {
  const RadialReference& ref;
  int k;

  std::size_t unknowns() const { return ref.size() - 1; }
  std::size_t node(std::size_t q) const { return q; }

  // Curvatures at node i; false outside the spacelike cone.
  template <typename T>
  bool kappa_at(const std::vector<T>& v, std::size_t i, std::array<T, 16>& kappa, T& w) const {
    using std::sqrt;
    const double dr = ref.dr;
    const int n = ref.n;
    if (i == 0) {
      const T urr = T(ref.dy[0]) + T(2) * (v[1] - v[0]) / T(dr * dr);
      for (int m = 0; m < n; ++m) kappa[m] = urr;
      w = T(1);
      return true;
    }
    const T dv = (v[i + 1] - v[i - 1]) / T(2 * dr);
    const T d2v = (v[i + 1] - T(2) * v[i] + v[i - 1]) / T(dr * dr);
    const T p = T(ref.y[i]) + dv;
    const T w2 = (T(ref.one_minus_y[i]) - dv) * (T(1) + p);
    if (!(re(w2) > 0.0)) return false;
    w = sqrt(w2);
    const T urr = T(ref.dy[i]) + d2v;
    kappa[0] = urr / (w2 * w);
    for (int m = 1; m < n; ++m) kappa[m] = p / (T(ref.radius(i)) * w);
    return true;
  }
  template <typename T>
  NodeSpeed<T> speed_at(const std::vector<T>& v, std::size_t q) const {
    std::array<T, 16> kappa{};
    T w;
    if (!kappa_at(v, q, kappa, w)) return {T(0), 0.0, true, false};
    return speed_from_kappa(std::span<const T>(kappa.data(), static_cast<std::size_t>(ref.n)), k, w);
  }
  double margin_at(const std::vector<double>& v, std::size_t i) const {
    if (i == 0) return 1.0;
    const double dv = (v[i + 1] - v[i - 1]) / (2 * ref.dr);
    const double p = ref.y[i] + dv;
    return p >= 0.0 ? ref.one_minus_y[i] - dv : 1.0 + p;
  }
  template <typename Fn>
  void for_each_dependent(std::size_t col, Fn&& fn) const {
    const std::size_t M = unknowns();
    for (std::size_t r = (col == 0 ? 0 : col - 1); r <= col + 1 && r < M; ++r) fn(r);
  }
  std::size_t colors() const { return 3; }
  std::size_t color(std::size_t q) const { return q % 3; }
  bool in_statistics(std::size_t q) const { return q + 2 < unknowns(); }
  template <typename Fn>
  void for_each_boundary(Fn&& fn) const { fn(unknowns()); }
};

struct GridOps {
  const GridReference& ref;
  int k;

  int N() const { return ref.height.nodes(); }
  double h() const { return ref.height.h(); }
  std::size_t unknowns() const { return static_cast<std::size_t>(N() - 2) * (N() - 2); }
  std::pair<int, int> ij(std::size_t q) const {
    return {1 + static_cast<int>(q % (N() - 2)), 1 + static_cast<int>(q / (N() - 2))};
  }
  std::size_t node(std::size_t q) const {
    const auto [i, j] = ij(q);
    return static_cast<std::size_t>(j) * N() + i;
  }
  std::size_t unknown_of(int i, int j) const {
    return static_cast<std::size_t>(j - 1) * (N() - 2) + static_cast<std::size_t>(i - 1);
  }

  template <typename T>
  bool shape_at(const std::vector<T>& v, std::size_t q, ShapeOperator2<T>& s) const {
    using std::sqrt;
    const std::size_t c = node(q);
    const std::size_t Ns = static_cast<std::size_t>(N());
    const double hh = h();
    const T ve = v[c + 1], vw = v[c - 1], vn = v[c + Ns], vs = v[c - Ns];
    const T d1 = (ve - vw) / T(2 * hh), d2 = (vn - vs) / T(2 * hh);
    const T p1 = T(ref.p1[c]) + d1;
    const T p2 = T(ref.p2[c]) + d2;
    const T w2 = T(ref.w2[c]) - T(2) * (T(ref.p1[c]) * d1 + T(ref.p2[c]) * d2) - (d1 * d1 + d2 * d2);
    if (!(re(w2) > 0.0)) return false;
    const T h11 = T(ref.h11[c]) + (ve - T(2) * v[c] + vw) / T(hh * hh);
    const T h22 = T(ref.h22[c]) + (vn - T(2) * v[c] + vs) / T(hh * hh);
    const T h12 = T(ref.h12[c]) +
                  (v[c + Ns + 1] - v[c - Ns + 1] - v[c + Ns - 1] + v[c - Ns - 1]) / T(4 * hh * hh);
    s = shape_operator_2d_w(p1, p2, T(sqrt(w2)), h11, h12, h22);
    return true;
  }
  template <typename T>
  NodeSpeed<T> speed_at(const std::vector<T>& v, std::size_t q) const {
    ShapeOperator2<T> s;
    if (!shape_at(v, q, s)) return {T(0), 0.0, true, false};
    NodeSpeed<T> out;
    const T s1 = s.a11 + s.a22;
    const T s2 = s.a11 * s.a22 - s.a12 * s.a12;
    if (!(re(s1) > 0.0) || (k == 2 && !(re(s2) > 0.0))) {
      out.flagged = true;
      return out;
    }
    const T phi = normalized_root_2d(s, k);
    out.phi = re(phi);
    out.speed = s.w * phi;
    return out;
  }
  double margin_at(const std::vector<double>& v, std::size_t q) const {
    const std::size_t c = node(q);
    const std::size_t Ns = static_cast<std::size_t>(N());
    const double d1 = (v[c + 1] - v[c - 1]) / (2 * h()), d2 = (v[c + Ns] - v[c - Ns]) / (2 * h());
    const double p1 = ref.p1[c] + d1, p2 = ref.p2[c] + d2;
    const double w2 = ref.w2[c] - 2 * (ref.p1[c] * d1 + ref.p2[c] * d2) - (d1 * d1 + d2 * d2);
    return w2 / (1.0 + std::hypot(p1, p2));
  }
  template <typename Fn>
  void for_each_dependent(std::size_t col, Fn&& fn) const {
    const auto [i, j] = ij(col);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di, jj = j + dj;
        if (ii >= 1 && jj >= 1 && ii <= N() - 2 && jj <= N() - 2) fn(unknown_of(ii, jj));
      }
  }
  std::size_t colors() const { return 9; }
  std::size_t color(std::size_t q) const {
    const auto [i, j] = ij(q);
    return static_cast<std::size_t>((i % 3) + 3 * (j % 3));
  }
  bool in_statistics(std::size_t q) const {
    const auto [i, j] = ij(q);
    return ref.height.is_statistics_node(i, j);
  }
  template <typename Fn>
  void for_each_boundary(Fn&& fn) const {
    const int n = N();
    for (int i = 0; i < n; ++i) {
      fn(static_cast<std::size_t>(i));
      fn(static_cast<std::size_t>(n - 1) * n + i);
    }
    for (int j = 1; j < n - 1; ++j) {
      fn(static_cast<std::size_t>(j) * n);
      fn(static_cast<std::size_t>(j) * n + n - 1);
    }
  }
};

struct SpeedSummary {
  std::vector<double> speed;  // per unknown
  double max_phi_over_v = 0.0;
  double min_margin = 1.0;
  double flagged_fraction = 0.0;
  bool spacelike = true;
};

template <typename Ops>
SpeedSummary evaluate(const Ops& ops, const std::vector<double>& v) {
  SpeedSummary s;
  const std::size_t m = ops.unknowns();
  s.speed.resize(m);
  std::size_t flagged = 0, counted = 0;
  for (std::size_t q = 0; q < m; ++q) {
    const auto ns = ops.speed_at(v, q);
    s.speed[q] = ns.speed;
    if (!ns.spacelike) s.spacelike = false;
    s.min_margin = std::min(s.min_margin, ops.margin_at(v, q));
    if (ops.in_statistics(q)) {
      ++counted;
      if (ns.flagged) ++flagged;
      s.max_phi_over_v = std::max(s.max_phi_over_v, ns.speed);
    }
  }
  s.flagged_fraction = counted ? static_cast<double>(flagged) / counted : 0.0;
  return s;
}

// d speed / d v by complex steps, one colour class at a time.
template <typename Ops>
std::vector<Eigen::Triplet<double>> jacobian(const Ops& ops, const std::vector<double>& v) {
  using C = std::complex<double>;
  constexpr double step = 1e-30;
  const std::size_t m = ops.unknowns();
  std::vector<C> vc(v.begin(), v.end());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m * ops.colors());
  std::vector<std::size_t> cols;
  for (std::size_t color = 0; color < ops.colors(); ++color) {
    cols.clear();
    for (std::size_t q = 0; q < m; ++q)
      if (ops.color(q) == color) {
        cols.push_back(q);
        vc[ops.node(q)] = C(v[ops.node(q)], step);
      }
    for (std::size_t col : cols)
      ops.for_each_dependent(col, [&](std::size_t row) {
        const double d = ops.speed_at(vc, row).speed.imag() / step;
        if (d != 0.0) triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), d);
      });
    for (std::size_t col : cols) vc[ops.node(col)] = C(v[ops.node(col)], 0.0);
  }
  return triplets;
}

template <typename Fn>
decltype(auto) with_ops(const FlowState& s, Fn&& fn) {
  if (s.is_radial()) return fn(RadialOps{std::get<RadialReference>(s.reference), s.k});
  return fn(GridOps{std::get<GridReference>(s.reference), s.k});
}

// One step of size dt; returns false (state untouched) if the result leaves
// the spacelike cone or an implicit step moves v by more than max_change.
template <typename Ops>
bool try_step(const Ops& ops, FlowState& s, const FlowConfig& cfg, double dt) {
  const std::size_t m = ops.unknowns();
  const auto now = evaluate(ops, s.deviation);
  if (!now.spacelike) return false;

  std::vector<double> delta(m);
  if (cfg.scheme == Scheme::explicit_euler) {
    for (std::size_t q = 0; q < m; ++q) delta[q] = dt * (now.speed[q] - s.a);
  } else {
    auto trip = jacobian(ops, s.deviation);
    for (auto& t : trip) t = Eigen::Triplet<double>(t.row(), t.col(), -dt * t.value());
    for (std::size_t q = 0; q < m; ++q) trip.emplace_back(static_cast<int>(q), static_cast<int>(q), 1.0);
    const auto size = static_cast<Eigen::Index>(m);
    Eigen::SparseMatrix<double> A(size, size);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) return false;
    Eigen::VectorXd rhs(size);
    for (std::size_t q = 0; q < m; ++q) rhs[static_cast<Eigen::Index>(q)] = dt * (now.speed[q] - s.a);
    const Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return false;
    for (std::size_t q = 0; q < m; ++q) delta[q] = x[static_cast<Eigen::Index>(q)];
  }
  std::vector<double> v = s.deviation;
  double biggest = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    if (!std::isfinite(delta[q])) return false;
    biggest = std::max(biggest, std::abs(delta[q]));
    v[ops.node(q)] += delta[q];
  }
  ops.for_each_boundary([&](std::size_t b) {
    v[b] = cfg.bc_mode == BoundaryMode::translator_dirichlet ? 0.0 : s.initial[b];
  });
  if (cfg.scheme == Scheme::linearly_implicit && biggest > cfg.max_change) return false;
  for (std::size_t q = 0; q < m; ++q)
    if (!(ops.margin_at(v, q) > 0.0)) return false;
  s.deviation = std::move(v);
  s.t += dt;
  return true;
}

template <typename Ops>
double explicit_dt(const Ops& ops, const FlowState& s, const FlowConfig& cfg) {
  const auto trip = jacobian(ops, s.deviation);
  double diag = 0.0;
  for (const auto& t : trip)
    if (t.row() == t.col()) diag = std::max(diag, std::abs(t.value()));
  return diag > 0.0 ? cfg.dt_safety / diag : cfg.dt_max;
}

}  // namespace detail

/// sup |u - a t - U| over all nodes.
inline double sup_distance(const FlowState& s) {
  double d = 0.0;
  for (double v : s.deviation) d = std::max(d, std::abs(v));
  return d;
}

/// max over statistics nodes of Phi / v = w Phi (v = 1/w).
inline double speed_support_ratio(const FlowState& s) {
  return detail::with_ops(s, [&](const auto& ops) {
    return detail::evaluate(ops, s.deviation).max_phi_over_v;
  });
}

/// Per-node speed w Phi at the unknowns (boundary excluded).
inline std::vector<double> node_speeds(const FlowState& s) {
  return detail::with_ops(s, [&](const auto& ops) { return detail::evaluate(ops, s.deviation).speed; });
}

inline HistoryRecord checkpoint(const FlowState& s) {
  return detail::with_ops(s, [&](const auto& ops) {
    const auto ev = detail::evaluate(ops, s.deviation);
    return HistoryRecord{s.t, sup_distance(s), ev.min_margin, ev.max_phi_over_v, ev.flagged_fraction};
  });
}

/// Advances by exactly dt in one step. Throws StiffnessFailure if rejected.
inline void advance(FlowState& s, const FlowConfig& cfg, double dt) {
  const bool ok = detail::with_ops(s, [&](const auto& ops) { return detail::try_step(ops, s, cfg, dt); });
  if (!ok) throw StiffnessFailure("advance: step of size " + std::to_string(dt) + " rejected");
}

/// One accepted step. The explicit scheme uses dt = dt_safety / max_i |dF_i/dv_i|,
/// i.e. h^2 / (2n D_eff) for the largest effective diffusion D_eff; the
/// implicit one starts from dt_proposed. Rejected steps are retried with dt
/// halved, at most max_halvings times. Returns the step taken.
inline double step(FlowState& s, const FlowConfig& cfg, double dt_proposed) {
  return detail::with_ops(s, [&](const auto& ops) {
    double dt = cfg.scheme == Scheme::explicit_euler
                    ? std::min(dt_proposed, detail::explicit_dt(ops, s, cfg))
                    : dt_proposed;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
      if (detail::try_step(ops, s, cfg, dt)) return dt;
      dt *= 0.5;
    }
    const auto rec = checkpoint(s);
    throw StiffnessFailure("step: " + std::to_string(cfg.max_halvings) +
                           " halvings exhausted at t = " + std::to_string(s.t) +
                           "; min margin " + std::to_string(rec.min_margin) + ", max Phi/v " +
                           std::to_string(rec.max_phi_over_v));
  });
}

struct SandwichReport {
  bool ok = true;
  double worst = 0.0;  // largest violation of the ordering (negative when strict)
  std::size_t node = 0;
};

/// lower <= v <= upper at every node, up to slack; bounds are deviations
/// from the target translator.
inline SandwichReport sandwich_check(const FlowState& s, const std::vector<double>& lower,
                                     const std::vector<double>& upper, double slack) {
  const auto& v = s.deviation;
  if (lower.size() != v.size() || upper.size() != v.size())
    throw ParameterError("sandwich_check: size mismatch");
  SandwichReport rep;
  rep.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double viol = std::max(lower[i] - v[i], v[i] - upper[i]);
    if (viol > rep.worst) {
      rep.worst = viol;
      rep.node = i;
    }
  }
  rep.ok = rep.worst <= slack;
  return rep;
}

inline void require_sandwich(const FlowState& s, const std::vector<double>& lower,
                             const std::vector<double>& upper, double slack) {
  const auto rep = sandwich_check(s, lower, upper, slack);
  if (!rep.ok)
    throw ComparisonFailure("sandwich violated by " + std::to_string(rep.worst) + " at node " +
                            std::to_string(rep.node) + ", t = " + std::to_string(s.t));
}

struct AdmissibilityReport {
  bool strictly_convex = true;
  double max_ratio = 0.0;       // max sigma_k / v over statistics nodes
  double velocity_bound = 0.0;  // C C(n,k)^{-1/k}
  bool admissible = true;       // convex, max_ratio <= C and a <= velocity_bound
};

/// Checks 0 < sigma_k(kappa) <= C v on the initial graph.
inline AdmissibilityReport check_initial_admissible(const FlowState& s, double C) {
  AdmissibilityReport rep;
  int n = 2;
  auto account = [&](std::span<const double> kappa, double w) {
    for (double kv : kappa)
      if (!(kv > 0.0)) rep.strictly_convex = false;
    rep.max_ratio = std::max(rep.max_ratio, sigma_k(kappa, s.k) * w);
  };
  bool spacelike = true;
  detail::with_ops(s, [&](const auto& ops) {
    using Ops = std::decay_t<decltype(ops)>;
    for (std::size_t q = 0; q < ops.unknowns(); ++q) {
      if (!ops.in_statistics(q)) continue;
      if constexpr (std::is_same_v<Ops, detail::RadialOps>) {
        n = ops.ref.n;
        std::array<double, 16> kappa{};
        double w;
        if (!ops.kappa_at(s.deviation, q, kappa, w)) {
          spacelike = false;
          continue;
        }
        account(std::span<const double>(kappa.data(), static_cast<std::size_t>(n)), w);
      } else {
        ShapeOperator2<double> sh;
        if (!ops.shape_at(s.deviation, q, sh)) {
          spacelike = false;
          continue;
        }
        const auto ev = translab::detail::eig2(sh.a11, sh.a12, sh.a22);
        account(ev, sh.w);
      }
    }
    return 0;
  });
  if (!spacelike) throw SpacelikeViolation("check_initial_admissible: initial graph is not spacelike");
  rep.velocity_bound = C * std::pow(binomial(n, s.k), -1.0 / s.k);
  rep.admissible = rep.strictly_convex && rep.max_ratio <= C && s.a <= rep.velocity_bound;
  return rep;
}

struct SandwichBounds {
  std::vector<double> lower;  // deviations
  std::vector<double> upper;
  double slack = 0.0;
};

/// Bounds for a barrier_dirichlet run started above the translator: the
/// translator below, the initial graph above.
inline SandwichBounds initial_sandwich(const FlowState& s, double slack) {
  return {std::vector<double>(s.initial.size(), 0.0), s.initial, slack};
}

struct RunResult {
  FlowState state;
  bool converged = false;
  bool monotone = true;
  bool sandwich_ok = true;
  double sandwich_worst = -std::numeric_limits<double>::infinity();
  double initial_max_phi_over_v = 0.0;
  double max_phi_over_v = 0.0;
  double final_sup_dist = 0.0;
  double max_flagged_fraction = 0.0;
  double final_flagged_fraction = 0.0;
  double min_margin = 1.0;
  long steps = 0;
};

/// Iterates step() until sup |u - a t - U| <= tol_converged or t >= t_end,
/// recording a checkpoint every output_interval.
inline RunResult run_normalized(FlowState state, const FlowConfig& cfg,
                                const SandwichBounds* bounds = nullptr) {
  cfg.validate();
  RunResult res;
  auto record = [&](const FlowState& s) {
    const auto rec = checkpoint(s);
    if (!s.history.empty() && rec.sup_dist > s.history.back().sup_dist + cfg.monotone_slack)
      res.monotone = false;
    res.max_phi_over_v = std::max(res.max_phi_over_v, rec.max_phi_over_v);
    res.max_flagged_fraction = std::max(res.max_flagged_fraction, rec.flagged_fraction);
    res.final_flagged_fraction = rec.flagged_fraction;
    res.min_margin = std::min(res.min_margin, rec.min_margin);
    if (bounds) {
      const auto sw = sandwich_check(s, bounds->lower, bounds->upper, bounds->slack);
      res.sandwich_worst = std::max(res.sandwich_worst, sw.worst);
      if (!sw.ok) res.sandwich_ok = false;
    }
    return rec;
  };
  state.history.push_back(record(state));
  res.initial_max_phi_over_v = state.history.back().max_phi_over_v;
  res.converged = state.history.back().sup_dist <= cfg.tol_converged;

  double dt = cfg.dt_initial;
  double next_output = state.t + cfg.output_interval;
  while (!(res.converged && cfg.stop_on_convergence) && state.t < cfg.t_end - 1e-12) {
    const double proposal = std::min(dt, std::min(next_output, cfg.t_end) - state.t);
    const double taken = step(state, cfg, proposal);
    ++res.steps;
    if (cfg.scheme == Scheme::linearly_implicit)
      dt = taken < proposal ? taken : std::min(cfg.dt_max, std::max(dt, taken) * 1.5);
    if (state.t >= next_output - 1e-12 || state.t >= cfg.t_end - 1e-12) {
      state.history.push_back(record(state));
      next_output += cfg.output_interval;
      if (state.history.back().sup_dist <= cfg.tol_converged) res.converged = true;
    }
  }
  res.final_sup_dist = sup_distance(state);
  res.state = std::move(state);
  return res;
}

}  // namespace translab::flow
