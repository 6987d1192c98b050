// translab: translators, barriers, flows and Legendre duals from the command line.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "check_suite.hpp"
#include "translab/barriers.hpp"
#include "translab/flow.hpp"
#include "translab/io.hpp"
#include "translab/legendre.hpp"
#include "translab/radial.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace translab;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumerical = 2;
constexpr const char* kRootEnv = "TRANSLAB_OUTPUT_ROOT";

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex << b;
  }
  return hex.str();
}

struct ParamSpec {
  std::string key, def, help;
};

struct Command {
  std::string name;
  std::vector<ParamSpec> params;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"translator",
       {{"n", "2", "dimension"},
        {"k", "1", "Hessian order, 1 <= k <= n"},
        {"a", "1", "translation velocity"},
        {"r_max", "8", "outer radius"},
        {"tol", "1e-11", "integration tolerance"},
        {"samples", "2048", "stored samples"}}},
      {"flow",
       {{"n", "2", "dimension (grid flows need 2)"},
        {"k", "1", "Hessian order"},
        {"a", "1", "velocity"},
        {"geometry", "radial", "radial | grid"},
        {"L", "6", "domain radius (radial) or half-width (grid)"},
        {"h", "0.00390625", "mesh spacing"},
        {"dt_safety", "0.4", "explicit step safety factor"},
        {"t_end", "50", "final time"},
        {"bc_mode", "barrier_dirichlet", "translator_dirichlet | barrier_dirichlet"},
        {"tol_converged", "1e-3", "sup-distance treated as converged"},
        {"scheme", "linearly_implicit", "linearly_implicit | explicit_euler"},
        {"initial", "bump", "translator | bump | shift"},
        {"amplitude", "0.3", "bump amplitude or shift size"},
        {"width", "1", "bump width"},
        {"output_interval", "0.25", "checkpoint spacing"},
        {"admissible_C", "4", "constant C in 0 < sigma_k <= C v"},
        {"sandwich_slack", "auto", "slack of the comparison check; auto = 10 h^2"},
        {"target", "builtin", "builtin, or a translator run directory"},
        {"r_max", "8", "radius of the computed target profile"}}},
      {"barriers",
       {{"phi", "builtin:sin2:0.3", "theta,phi CSV, or builtin:zero | builtin:const:<c> | builtin:sin2:<amp>"},
        {"k", "1", "Hessian order (n = 2)"},
        {"a", "1", "velocity"},
        {"M", "auto", "envelope constant; auto = C^2 norm of phi"},
        {"L", "6", "grid half-width"},
        {"nodes", "101", "grid nodes per axis"},
        {"R1", "3", "first radius of the asymptotic gap"},
        {"R2", "6", "second radius of the asymptotic gap"},
        {"r_max", "16", "radius of the base profile"}}},
      {"legendre",
       {{"source", "translator", "translator | quadratic"},
        {"k", "2", "Hessian order (n = 2)"},
        {"a", "1", "velocity"},
        {"L", "2", "primal half-width"},
        {"h", "0.015625", "primal and dual spacing"},
        {"radius", "0.8", "dual disc radius"}}},
      {"check", {{"suite", "all", "symfunc | radial | geometry | barriers | flow | legendre | all"}, {"seed", "0", "seed of the randomized checks"}}},
  };
  return list;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw ParameterError("unknown command '" + name + "'");
}

io::ParamSet make_params(const Command& c) {
  io::ParamSet p;
  for (const auto& s : c.params) p.define(s.key, s.def);
  return p;
}

class Run {
 public:
  Run(std::string command, io::ParamSet params, fs::path dir)
      : command_(std::move(command)), params_(std::move(params)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  const io::ParamSet& params() const { return params_; }
  const fs::path& dir() const { return dir_; }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void write_json(const std::string& name, const json& j) {
    std::ofstream(output(name), std::ios::binary) << j.dump(2) << '\n';
  }
  void table(const std::string& name, const io::Table& t) { io::write_csv(output(name), t); }

  void finish(int exit_code) const {
    json m;
    m["command"] = command_;
    json params = json::object();
    for (const auto& [k, e] : params_.entries())
      params[k] = {{"value", e.value}, {"source", io::source_name(e.source)}};
    m["parameters"] = params;
    m["seed"] = params_.known("seed") ? params_.integer("seed") : 0;
    json in = json::array();
    for (const auto& p : inputs_) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    m["inputs"] = in;
    json out = json::array();
    for (const auto& o : outputs_) out.push_back({{"path", o}, {"sha256", sha256_file(dir_ / o)}});
    m["outputs"] = out;
    m["exit_code"] = exit_code;
    std::ofstream(dir_ / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  io::ParamSet params_;
  fs::path dir_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
};

fs::path output_root() {
  if (const char* env = std::getenv(kRootEnv); env && *env) return env;
  return "runs";
}

double num_or_auto(const io::ParamSet& p, const std::string& key, double fallback) {
  return p.str(key) == "auto" ? fallback : p.num(key);
}

// ---------------------------------------------------------------- translator

RadialParams radial_params(const io::ParamSet& p) {
  RadialParams rp;
  rp.n = p.integer("n");
  rp.k = p.integer("k");
  rp.a = p.num("a");
  rp.r_max = p.num("r_max");
  rp.tol = p.num("tol");
  rp.samples = p.integer("samples");
  rp.validate();
  return rp;
}

int cmd_translator(Run& run) {
  const auto& p = run.params();
  const auto rp = radial_params(p);
  const auto pr = radial::limit_profile(rp);

  io::Table t;
  t.add("r", pr.r);
  t.add("z", pr.z);
  t.add("y", pr.y);
  t.add("u", pr.u);
  t.add("C_of_r", pr.C_of_r);
  run.table("profile.csv", t);

  double residual = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i)
    if (pr.one_minus_y[i] > 1e-8) residual = std::max(residual, radial::verify_residual(pr, pr.r[i]));
  double bound_violation = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double rho = rp.a * pr.r[i];
    if (rho < 0.1 || rho > 3.0) continue;
    const double omz = std::exp(pr.log_one_minus_z[i]);
    bound_violation = std::max({bound_violation, std::exp(-(2.0 * rp.n / rp.k) * std::pow(rho, rp.k)) - omz,
                                omz - std::exp(-std::pow(rho, rp.k) / rp.n)});
  }

  json s;
  s["n"] = rp.n;
  s["k"] = rp.k;
  s["a"] = rp.a;
  s["c0"] = pr.c0;
  s["C_asym"] = pr.C_asym;
  s["plateau_error"] = pr.plateau_error;
  s["plateau_ok"] = pr.plateau_ok;
  s["tol"] = rp.tol;
  s["residual_sup"] = residual;
  s["bounds_ok"] = bound_violation <= 1e-6;
  s["bounds_worst_violation"] = bound_violation;
  s["tail_converged"] = pr.tail_converged;
  run.write_json("summary.json", s);
  std::cout << s.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------- flow

flow::FlowConfig flow_config(const io::ParamSet& p) {
  flow::FlowConfig cfg;
  cfg.dt_safety = p.num("dt_safety");
  cfg.t_end = p.num("t_end");
  cfg.tol_converged = p.num("tol_converged");
  cfg.output_interval = p.num("output_interval");
  const auto& bc = p.str("bc_mode");
  if (bc == "translator_dirichlet") cfg.bc_mode = flow::BoundaryMode::translator_dirichlet;
  else if (bc == "barrier_dirichlet") cfg.bc_mode = flow::BoundaryMode::barrier_dirichlet;
  else throw ParameterError("bc_mode must be translator_dirichlet or barrier_dirichlet");
  const auto& sc = p.str("scheme");
  if (sc == "linearly_implicit") cfg.scheme = flow::Scheme::linearly_implicit;
  else if (sc == "explicit_euler") cfg.scheme = flow::Scheme::explicit_euler;
  else throw ParameterError("scheme must be linearly_implicit or explicit_euler");
  cfg.validate();
  return cfg;
}

// Target translator: computed here, or recomputed from a translator run's manifest.
RadialProfile flow_target(Run& run, int n, int k, double a, double r_max) {
  const auto& target = run.params().str("target");
  RadialParams rp;
  rp.n = n;
  rp.k = k;
  rp.a = a;
  rp.r_max = r_max;
  if (target != "builtin") {
    const fs::path manifest = fs::path(target) / "manifest.json";
    if (!fs::exists(manifest)) throw ParameterError("target profile not found: " + manifest.string());
    run.input(manifest);
    std::ifstream in(manifest);
    const auto m = json::parse(in);
    if (m.value("command", "") != "translator")
      throw ParameterError("target " + target + " is not a translator run");
    const auto& tp = m["parameters"];
    auto get = [&](const char* key) { return std::stod(tp[key]["value"].get<std::string>()); };
    rp.n = static_cast<int>(get("n"));
    rp.k = static_cast<int>(get("k"));
    rp.a = get("a");
    rp.r_max = get("r_max");
    rp.tol = get("tol");
    rp.samples = static_cast<int>(get("samples"));
    if (rp.n != n || rp.k != k || rp.a != a)
      throw ParameterError("target profile has (n, k, a) different from the flow's");
  }
  rp.validate();
  return radial::limit_profile(rp);
}

int cmd_flow(Run& run) {
  const auto& p = run.params();
  const int n = p.integer("n"), k = p.integer("k");
  const double a = p.num("a"), L = p.num("L"), h = p.num("h");
  const auto cfg = flow_config(p);
  const auto& geometry = p.str("geometry");
  if (geometry != "radial" && geometry != "grid") throw ParameterError("geometry must be radial or grid");
  if (geometry == "grid" && n != 2) throw ParameterError("grid flows need n = 2");
  if (k < 1 || k > n) throw ParameterError("k must lie in 1..n");
  if (!(L > 0.0 && h > 0.0 && h < L)) throw ParameterError("need 0 < h < L");

  const auto pr = flow_target(run, n, k, a, p.num("r_max"));
  flow::Reference ref;
  try {
    if (geometry == "radial") ref = flow::radial_reference(pr, L, h);
    else ref = flow::grid_reference(pr, L, h);
  } catch (const ExtrapolationError& e) {
    throw ParameterError(std::string("target profile does not cover the domain: ") + e.what());
  }

  // radius of each node
  std::vector<double> radius;
  if (geometry == "radial") {
    const auto& rr = std::get<flow::RadialReference>(ref);
    for (std::size_t i = 0; i < rr.size(); ++i) radius.push_back(rr.radius(i));
  } else {
    const auto& g = std::get<flow::GridReference>(ref).height;
    for (int j = 0; j < g.nodes(); ++j)
      for (int i = 0; i < g.nodes(); ++i) radius.push_back(std::hypot(g.x(i), g.x(j)));
  }
  const auto& init = p.str("initial");
  const double amp = p.num("amplitude"), width = p.num("width");
  std::vector<double> v0(radius.size(), 0.0);
  if (init == "bump") {
    if (!(width > 0.0)) throw ParameterError("width must be positive");
    for (std::size_t i = 0; i < v0.size(); ++i) v0[i] = amp * std::exp(-std::pow(radius[i] / width, 2));
  } else if (init == "shift") {
    std::fill(v0.begin(), v0.end(), amp);
  } else if (init != "translator") {
    throw ParameterError("initial must be translator, bump or shift");
  }

  const auto state = flow::make_state(std::move(ref), v0, a, k);
  const double spacing = state.spacing();
  const double slack = num_or_auto(p, "sandwich_slack", 10 * spacing * spacing);
  const auto bounds = flow::initial_sandwich(state, slack);

  flow::AdmissibilityReport adm;
  bool adm_ok = true;
  try {
    adm = flow::check_initial_admissible(state, p.num("admissible_C"));
  } catch (const SpacelikeViolation&) {
    adm_ok = false;
  }
  if (!adm_ok) throw ParameterError("initial data is not spacelike");

  auto snapshot = [&](const flow::FlowState& s, const std::string& name) {
    io::Table t;
    const auto u = s.normalized();
    if (s.is_radial()) {
      t.add("r", radius);
      t.add("u", u);
    } else {
      const auto& g = std::get<flow::GridReference>(s.reference).height;
      std::vector<double> x1, x2;
      for (int j = 0; j < g.nodes(); ++j)
        for (int i = 0; i < g.nodes(); ++i) {
          x1.push_back(g.x(i));
          x2.push_back(g.x(j));
        }
      t.add("x1", x1);
      t.add("x2", x2);
      t.add("u", u);
    }
    run.table(name, t);
  };
  snapshot(state, "snapshot_initial.csv");

  flow::RunResult res;
  bool stiff = false;
  std::string failure;
  try {
    res = flow::run_normalized(state, cfg, &bounds);
  } catch (const StiffnessFailure& e) {
    stiff = true;
    failure = e.what();
  }
  if (stiff) {
    json s{{"converged", false}, {"failure", failure}};
    run.write_json("summary.json", s);
    std::cerr << "flow: " << failure << '\n';
    return kNumerical;
  }

  io::Table hist;
  std::vector<double> c[5];
  for (const auto& r : res.state.history) {
    c[0].push_back(r.t);
    c[1].push_back(r.sup_dist);
    c[2].push_back(r.min_margin);
    c[3].push_back(r.max_phi_over_v);
    c[4].push_back(r.flagged_fraction);
  }
  const char* names[] = {"t", "sup_dist", "min_margin", "max_phi_over_v", "flagged_fraction"};
  for (int i = 0; i < 5; ++i) hist.add(names[i], c[i]);
  run.table("history.csv", hist);
  snapshot(res.state, "snapshot_final.csv");

  json s;
  s["converged"] = res.converged;
  s["t_final"] = res.state.t;
  s["final_sup_dist"] = res.final_sup_dist;
  s["monotone"] = res.monotone;
  s["sandwich_ok"] = res.sandwich_ok;
  s["sandwich_worst"] = res.sandwich_worst;
  s["sandwich_slack"] = slack;
  s["initial_max_phi_over_v"] = res.initial_max_phi_over_v;
  s["max_phi_over_v"] = res.max_phi_over_v;
  s["max_flagged_fraction"] = res.max_flagged_fraction;
  s["final_flagged_fraction"] = res.final_flagged_fraction;
  s["min_margin"] = res.min_margin;
  s["steps"] = res.steps;
  s["admissible"] = adm.admissible;
  s["strictly_convex"] = adm.strictly_convex;
  s["max_sigma_k_over_v"] = adm.max_ratio;
  s["velocity_bound"] = adm.velocity_bound;
  run.write_json("summary.json", s);
  std::cout << s.dump(2) << '\n';
  return res.converged ? kOk : kNumerical;
}

// ------------------------------------------------------------------ barriers

SphereFunction load_phi(Run& run, const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto parts = io::split(spec.substr(prefix.size()), ':');
    const std::size_t m = 64;
    auto value = [&] {
      if (parts.size() != 2) throw ParameterError("builtin phi '" + spec + "' needs a value");
      return std::stod(parts[1]);
    };
    if (parts[0] == "zero") return SphereFunction::sample(m, [](double) { return 0.0; });
    if (parts[0] == "const") {
      const double c = value();
      return SphereFunction::sample(m, [c](double) { return c; });
    }
    if (parts[0] == "sin2") {
      const double amp = value();
      return SphereFunction::sample(m, [amp](double t) { return amp * std::sin(2 * t); });
    }
    throw ParameterError("unknown builtin phi '" + spec + "'");
  }
  if (!fs::exists(spec)) throw ParameterError("phi file not found: " + spec);
  run.input(spec);
  return read_sphere_csv(spec);
}

int cmd_barriers(Run& run) {
  const auto& p = run.params();
  auto phi = load_phi(run, p.str("phi"));
  const double M = num_or_auto(p, "M", -1.0);
  if (p.str("M") != "auto" && !(M >= 0.0)) throw ParameterError("M must be >= 0");
  const auto pair = make_barrier_pair(p.integer("k"), p.num("a"), std::move(phi), M, p.num("r_max"));
  const int nodes = p.integer("nodes");
  const double L = p.num("L");
  if (!(L > 0.0)) throw ParameterError("L must be positive");
  BarrierGrid g;
  try {
    g = barrier_grid(pair, L, nodes);
  } catch (const ExtrapolationError& e) {
    throw ParameterError(std::string("grid exceeds the profile; raise r_max: ") + e.what());
  }
  io::Table t;
  t.add("x1", g.x1);
  t.add("x2", g.x2);
  t.add("q1", g.q1);
  t.add("q2", g.q2);
  run.table("barriers.csv", t);

  constexpr double ordering_tol = 1e-12;
  const double R1 = p.num("R1"), R2 = p.num("R2");
  const auto g1 = asymptotic_gap(pair, R1), g2 = asymptotic_gap(pair, R2);
  json s;
  s["M"] = pair.M;
  s["ordered"] = g.max_violation <= ordering_tol;
  s["max_q1_minus_q2"] = g.max_violation;
  s["ordering_tolerance"] = ordering_tol;
  s["gap"] = json::array({{{"R", R1}, {"sub", g1.sub}, {"super", g1.super}},
                          {{"R", R2}, {"sub", g2.sub}, {"super", g2.super}}});
  run.write_json("summary.json", s);
  std::cout << s.dump(2) << '\n';
  return g.max_violation <= ordering_tol ? kOk : kNumerical;
}

// ------------------------------------------------------------------ legendre

int cmd_legendre(Run& run) {
  const auto& p = run.params();
  const int k = p.integer("k");
  const double a = p.num("a"), L = p.num("L"), h = p.num("h"), radius = p.num("radius");
  if (k < 1 || k > 2) throw ParameterError("k must be 1 or 2");
  if (!(h > 0.0 && h < L)) throw ParameterError("need 0 < h < L");
  const auto& source = p.str("source");
  json s;
  DualFunction d;
  if (source == "translator") {
    RadialParams rp;
    rp.n = 2;
    rp.k = k;
    rp.a = a;
    rp.r_max = std::max(8.0, 1.5 * L);
    const auto pr = radial::limit_profile(rp);
    const auto g = GraphFunction::sample(L, h, [&](double x, double y) { return pr.height(std::hypot(x, y)); });
    d = legendre_transform(g, radius, h);
    const auto res = dual_residual(d, k, a);
    s["dual_residual"] = res.sup;
    s["residual_nodes"] = res.nodes;
  } else if (source == "quadratic") {
    const auto g = GraphFunction::sample(L, h, [](double x, double y) { return 0.5 * (x * x + y * y); });
    LegendreOptions o;
    o.require_spacelike = false;
    d = legendre_transform(g, radius, h, o);
    double e = 0.0;
    for (int j = 0; j < d.values.nodes(); ++j)
      for (int i = 0; i < d.values.nodes(); ++i)
        if (d.resolved[d.values.index(i, j)]) {
          const double x = d.values.x(i), y = d.values.x(j);
          e = std::max(e, std::abs(d.values(i, j) - 0.5 * (x * x + y * y)));
        }
    s["max_error_vs_exact"] = e;
  } else {
    throw ParameterError("source must be translator or quadratic");
  }
  s["resolved_fraction"] = d.resolved_fraction();

  io::Table t;
  std::vector<double> x1, x2, flag;
  const auto& g = d.values;
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.nodes(); ++i) {
      x1.push_back(g.x(i));
      x2.push_back(g.x(j));
      flag.push_back(d.resolved[g.index(i, j)]);
    }
  t.add("xi1", x1);
  t.add("xi2", x2);
  t.add("ustar", g.values());
  t.add("resolved", flag);
  run.table("dual.csv", t);
  run.write_json("summary.json", s);
  std::cout << s.dump(2) << '\n';
  return kOk;
}

// --------------------------------------------------------------------- check

int cmd_check(Run& run) {
  const auto& p = run.params();
  const auto& suite = p.str("suite");
  const auto& names = suite::suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw ParameterError("unknown suite '" + suite + "'");
  const auto seed = static_cast<unsigned long long>(p.integer("seed"));
  const auto checks = suite::run(suite, seed);
  json report;
  report["suite"] = suite;
  report["seed"] = seed;
  json list = json::array();
  int failures = 0;
  for (const auto& c : checks) {
    list.push_back({{"suite", c.suite}, {"name", c.name}, {"value", c.value},
                    {"threshold", c.threshold}, {"passed", c.passed}});
    failures += !c.passed;
  }
  report["checks"] = list;
  report["failures"] = failures;
  run.write_json("report.json", report);
  std::cout << report.dump(2) << '\n';
  return failures;
}

int dispatch(Run& run, const std::string& name) {
  if (name == "translator") return cmd_translator(run);
  if (name == "flow") return cmd_flow(run);
  if (name == "barriers") return cmd_barriers(run);
  if (name == "legendre") return cmd_legendre(run);
  return cmd_check(run);
}

// Runs a command and maps library errors onto the exit-code contract.
int execute(const std::string& name, const io::ParamSet& params, const fs::path& explicit_dir,
            const fs::path& config = {}) {
  const fs::path dir = explicit_dir.empty()
                           ? output_root() / (name + "-" + io::params_digest(params))
                           : explicit_dir;
  int code = kOk;
  try {
    Run run(name, params, dir);
    if (!config.empty()) run.input(config);
    try {
      code = dispatch(run, name);
    } catch (const ParameterError& e) {
      std::cerr << name << ": " << e.what() << '\n';
      code = kUsage;
    } catch (const IntegrationFailure& e) {
      std::cerr << name << ": " << e.what() << '\n';
      code = kNumerical;
    } catch (const ConvergenceFailure& e) {
      std::cerr << name << ": " << e.what() << '\n';
      code = kNumerical;
    } catch (const StiffnessFailure& e) {
      std::cerr << name << ": " << e.what() << '\n';
      code = kNumerical;
    } catch (const Error& e) {
      std::cerr << name << ": " << e.what() << '\n';
      code = kUsage;
    }
    run.finish(code);
    std::cerr << "run directory: " << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return kUsage;
  }
  return code;
}

// Re-executes a manifest and compares output checksums.
int replay(const fs::path& manifest_path, const fs::path& explicit_dir) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::cerr << "replay: cannot read " << manifest_path << '\n';
    return kUsage;
  }
  json m;
  try {
    m = json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "replay: " << e.what() << '\n';
    return kUsage;
  }
  const auto name = m.value("command", "");
  io::ParamSet params;
  try {
    params = make_params(find_command(name));
    std::map<std::string, std::string> values;
    for (const auto& [k, v] : m["parameters"].items()) values[k] = v["value"].get<std::string>();
    params.apply(values, io::Source::file);
  } catch (const std::exception& e) {
    std::cerr << "replay: " << e.what() << '\n';
    return kUsage;
  }
  const fs::path dir = explicit_dir.empty()
                           ? output_root() / ("replay-" + name + "-" + io::params_digest(params))
                           : explicit_dir;
  execute(name, params, dir);
  int mismatches = 0;
  for (const auto& o : m["outputs"]) {
    const auto path = o["path"].get<std::string>();
    const fs::path produced = dir / path;
    const bool same = fs::exists(produced) && sha256_file(produced) == o["sha256"].get<std::string>();
    std::cout << (same ? "identical " : "DIFFERENT ") << path << '\n';
    mismatches += !same;
  }
  return mismatches ? kNumerical : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"translab: spacelike translating solitons in Minkowski space"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all", "Expand all help");

  std::map<std::string, std::map<std::string, std::string>> cli_values;
  std::map<std::string, std::string> config_paths, out_dirs;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name);
    subs[c.name] = sub;
    for (const auto& s : c.params) {
      std::string flags = "--" + s.key;
      if (s.key.find('_') != std::string::npos) {
        std::string dashed = s.key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        flags += ",--" + dashed;
      }
      sub->add_option_function<std::string>(
          flags, [&cli_values, name = c.name, key = s.key](const std::string& v) { cli_values[name][key] = v; },
          s.help + " [default " + s.def + "]");
    }
    if (c.name == "check")
      sub->add_option_function<std::string>(
          "suite_name", [&cli_values](const std::string& v) { cli_values["check"]["suite"] = v; },
          "suite to run");
    sub->add_option("--config", config_paths[c.name], "flat key = value file");
    sub->add_option("--out-dir", out_dirs[c.name], "run directory (default: $" + std::string(kRootEnv) + " or ./runs, plus a parameter digest)");
  }
  std::string manifest, replay_dir;
  auto* rp = app.add_subcommand("replay", "re-run a manifest.json and compare checksums");
  rp->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
  rp->add_option("--out-dir", replay_dir, "run directory for the replay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (rp->parsed()) return replay(manifest, replay_dir);
  for (const auto& c : commands()) {
    if (!subs[c.name]->parsed()) continue;
    auto params = make_params(c);
    try {
      if (!config_paths[c.name].empty()) params.apply(io::read_config(config_paths[c.name]), io::Source::file);
      params.apply(cli_values[c.name], io::Source::cli);
    } catch (const std::exception& e) {
      std::cerr << c.name << ": " << e.what() << '\n';
      return kUsage;
    }
    return execute(c.name, params, out_dirs[c.name], config_paths[c.name]);
  }
  return kUsage;
}
