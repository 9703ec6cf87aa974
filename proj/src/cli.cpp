#include "heunlock/cli.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "heunlock/errors.hpp"
#include "heunlock/matching.hpp"
#include "heunlock/oracle.hpp"
#include "heunlock/scan.hpp"
#include "heunlock/solutions.hpp"

namespace heunlock {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct Flags {
  std::optional<double> A, B, omega, tol, t_end;
  std::optional<int> parity, grid, parallel;
  std::optional<std::string> out, config, axis1, axis2, outputs;
};

// Values from the command line win over the JSON config, which wins over
// the built-in default.
struct Settings {
  const Flags& f;
  json cfg;

  template <class T>
  T get(const std::optional<T>& flag, const char* key, T fallback) const {
    if (flag) return *flag;
    if (cfg.contains(key)) return cfg.at(key).get<T>();
    return fallback;
  }
  template <class T>
  std::optional<T> get_opt(const std::optional<T>& flag, const char* key) const {
    if (flag) return flag;
    if (cfg.contains(key)) return cfg.at(key).get<T>();
    return std::nullopt;
  }
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--A", f.A, "drive amplitude A >= 0");
  sub->add_option("--B", f.B, "bias B");
  sub->add_option("--omega", f.omega, "drive frequency omega > 0");
  sub->add_option("--parity", f.parity, "restrict to parity 0 or 1")->check(CLI::Range(0, 1));
  sub->add_option("--tol", f.tol, "product truncation tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--grid", f.grid, "discriminant grid points")->check(CLI::Range(16, 1 << 20));
  sub->add_option("--out", f.out, "output file (default: stdout)");
  sub->add_option("--config", f.config, "JSON file with default values for the flags");
}

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }

void emit(const Settings& s, std::ostream& out, const std::string& text) {
  if (auto path = s.get_opt(s.f.out, "out")) {
    std::ofstream file(*path, std::ios::binary);
    if (!file) throw InvalidParameterError("cannot open output file '" + *path + "'");
    file << text;
    if (!file) throw InvalidParameterError("cannot write output file '" + *path + "'");
  } else {
    out << text;
  }
}

ProblemParams point_params(const Settings& s) {
  const auto A = s.get_opt(s.f.A, "A");
  const auto B = s.get_opt(s.f.B, "B");
  const auto w = s.get_opt(s.f.omega, "omega");
  if (!A || !B || !w) throw InvalidParameterError("--A, --B and --omega are required");
  return ProblemParams(*A, *B, *w);
}

LaurentOptions laurent_options(const Settings& s) {
  LaurentOptions lo;
  lo.products.tol = s.get(s.f.tol, "tol", lo.products.tol);
  return lo;
}

// Lock decision, optionally restricted to one parity.
LockDecision decide(const ProblemParams& params, const Settings& s) {
  const int grid = s.get(s.f.grid, "grid", 256);
  const auto parity = s.get_opt(s.f.parity, "parity");
  if (!parity) return lock_decision(params, grid);
  LockDecision d;
  d.profiles[*parity] = find_roots(params, *parity, grid);
  d.xi0_score = d.profiles[*parity].xi_at_zero.real();
  d.critical = d.profiles[*parity].critical;
  d.parity = *parity;
  d.locked = d.profiles[*parity].lock;
  if (d.locked) d.kappa = d.profiles[*parity].roots.back();
  d.note = "parity fixed on the command line";
  return d;
}

struct AnalyticReport {
  json j;
  double dche = 0.0, monodromy = 0.0, cc_modulus = 0.0, ojje = 0.0, unit = 0.0;
  bool monodromy_ok = true;
  long winding = 0;
  std::shared_ptr<const LaurentSolution> sol;
};

AnalyticReport analyse(const ProblemParams& params, const LockDecision& d, const Settings& s) {
  AnalyticReport r;
  r.sol = matched_solution(params, d.parity, d.kappa, laurent_options(s));
  const PhaseSolution at = PhaseSolution::attractor(r.sol);
  const WindingResult w = winding_number(at);
  r.winding = w.k;
  for (int m = 0; m < 64; ++m)
    r.dche = std::max(r.dche, dche_residual(*r.sol, std::polar(1.0, 2.0 * kPi * m / 64)));
  for (int m = 0; m < 1024; ++m)
    r.unit = std::max(r.unit, std::abs(std::abs(exp_i_phi(at, at.period() * m / 1024)) - 1.0));
  r.ojje = ojje_residual(at);
  json mono;
  try {
    const MonodromyConstant mc = monodromy_constant(*r.sol);
    r.monodromy = mc.residual;
    r.cc_modulus = std::abs(mc.C_C) * 2.0 * params.omega();
    mono = {{"C_C", cplx_json(mc.C_C)}, {"C_c", mc.C_c}, {"residual", mc.residual}};
  } catch (const MonodromyMismatchError& e) {
    r.monodromy_ok = false;
    mono = {{"error", e.what()}};
  }
  r.j = {{"parity", d.parity},
         {"kappa", d.kappa},
         {"winding", {{"k", w.k}, {"raw_integral", w.raw_integral}, {"residual", w.residual},
                      {"n_samples", w.n_samples}}},
         {"monodromy", mono},
         {"residuals", {{"dche", r.dche}, {"ojje", r.ojje}, {"unit_modulus", r.unit},
                        {"coefficient_tail", r.sol->trunc().tail_value}}},
         {"truncation", {{"k_plus", r.sol->trunc().k_plus}, {"k_minus", r.sol->trunc().k_minus},
                         {"product_index", r.sol->trunc().product_index}}}};
  return r;
}

json decision_json(const ProblemParams& params, const LockDecision& d) {
  json j = {{"params", d.locked ? params.with_parity(d.parity) : params},
            {"locked", d.locked},
            {"note", d.note},
            {"critical", d.critical},
            {"xi_at_zero", json::array()}};
  for (const DiscriminantProfile& p : d.profiles) {
    if (p.samples.empty()) continue;
    j["xi_at_zero"].push_back({{"parity", p.parity}, {"value", cplx_json(p.xi_at_zero)},
                               {"roots", p.roots}});
  }
  return j;
}

int cmd_solve(const Settings& s, std::ostream& out) {
  const ProblemParams params = point_params(s);
  const LockDecision d = decide(params, s);
  json j = decision_json(params, d);
  if (d.locked) j["solution"] = analyse(params, d, s).j;
  emit(s, out, j.dump(2) + "\n");
  return d.locked ? kExitOk : kExitNoLock;
}

int cmd_verify(const Settings& s, std::ostream& out) {
  const ProblemParams params = point_params(s);
  TrajectoryConfig cfg;
  cfg.t_end = s.get(s.f.t_end, "t_end", 100.0);
  cfg.validate();
  const LockReport rep = detect_lock(params, cfg);
  const LockDecision d = decide(params, s);

  json j = decision_json(params, d);
  j["oracle"] = {{"locked", to_string(rep.locked)},
                 {"rotation_number", rep.rotation_number},
                 {"periods", rep.periods},
                 {"final_spread", rep.final_spread}};
  if (rep.locked == LockVerdict::yes) j["oracle"]["contraction_factor"] = rep.convergence_rate;
  if (!d.locked) {
    j["analytic"] = "NoLock";
    j["pass"] = rep.locked != LockVerdict::yes;
    emit(s, out, j.dump(2) + "\n");
    return kExitNoLock;
  }

  const AnalyticReport a = analyse(params, d, s);
  j["solution"] = a.j;
  const PhaseSolution at = PhaseSolution::attractor(a.sol);

  // Analytic attractor against the oracle's period-map fixed point, and
  // against a direct integration started on the attractor.
  double fixed_dev = std::numeric_limits<double>::infinity();
  if (rep.locked == LockVerdict::yes) {
    fixed_dev = 0.0;
    for (const PhaseSample& p : rep.attractor_samples)
      fixed_dev = std::max(fixed_dev, std::abs(p.exp_i_phi - exp_i_phi(at, p.t)));
  }
  cfg.initial_phi = std::arg(exp_i_phi(at, 0.0));
  const OracleTrajectory traj = integrate_ojje(params, cfg);
  double traj_dev = 0.0;
  for (std::size_t i = 0; i < traj.t.size(); ++i)
    traj_dev = std::max(traj_dev, std::abs(std::polar(1.0, traj.phi[i]) - exp_i_phi(at, traj.t[i])));

  const bool winding_ok = rep.locked == LockVerdict::yes &&
                          std::lround(rep.rotation_number) == a.winding;
  const bool pass = rep.locked == LockVerdict::yes && fixed_dev < 1e-5 && traj_dev < 1e-5 &&
                    a.ojje < 1e-6 && a.dche < 1e-8 && a.monodromy_ok && a.monodromy < 1e-6 &&
                    std::abs(a.cc_modulus - 1.0) < 1e-6 && winding_ok;
  j["comparison"] = {{"fixed_point_deviation", fixed_dev},
                     {"trajectory_deviation", traj_dev},
                     {"winding_matches_rotation", winding_ok}};
  j["pass"] = pass;
  emit(s, out, j.dump(2) + "\n");
  return pass ? kExitOk : kExitVerifyFailed;
}

int cmd_scan(const Settings& s, std::ostream& out) {
  ScanSpec spec;
  const auto a1 = s.get_opt(s.f.axis1, "axis1");
  const auto a2 = s.get_opt(s.f.axis2, "axis2");
  if (!a1 || !a2) throw InvalidParameterError("--axis1 and --axis2 are required");
  spec.axis1 = parse_axis(*a1);
  spec.axis2 = parse_axis(*a2);
  spec.A = s.get(s.f.A, "A", 0.0);
  spec.B = s.get(s.f.B, "B", 0.0);
  spec.omega = s.get(s.f.omega, "omega", 1.0);
  spec.grid_n = s.get(s.f.grid, "grid", 256);
  spec.tol = s.get(s.f.tol, "tol", spec.tol);
  if (auto o = s.get_opt(s.f.outputs, "outputs")) spec.outputs = parse_outputs(*o);
  const int parallel = s.get(s.f.parallel, "parallel", 1);
  const auto cells = run_scan(spec, parallel);
  std::ostringstream csv;
  write_scan_csv(csv, spec, cells);
  emit(s, out, csv.str());
  return kExitOk;
}

int cmd_xi(const Settings& s, std::ostream& out) {
  const ProblemParams params = point_params(s);
  const int grid = s.get(s.f.grid, "grid", 256);
  json profiles = json::array();
  const auto parity = s.get_opt(s.f.parity, "parity");
  for (int p = 0; p < 2; ++p)
    if (!parity || *parity == p) profiles.push_back(find_roots(params, p, grid));
  emit(s, out, json{{"params", params}, {"profiles", profiles}}.dump(2) + "\n");
  return kExitOk;
}

void report_error(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-lock solutions of the overdamped Josephson junction equation", "heunlock"};
  app.require_subcommand(1);
  Flags f;
  auto* solve = app.add_subcommand("solve", "find the lock branch and build the attractor");
  auto* verify = app.add_subcommand("verify", "compare the analytic attractor with direct integration");
  auto* scan = app.add_subcommand("scan", "lock / winding map over a parameter plane");
  auto* xi = app.add_subcommand("xi", "dump discriminant samples and roots");
  for (auto* sub : {solve, verify, scan, xi}) add_common(sub, f);
  verify->add_option("--t-end", f.t_end, "integration time for the trajectory check")
      ->check(CLI::PositiveNumber);
  scan->add_option("--axis1", f.axis1, "slow axis name:lo:hi:n, e.g. B:0:2:21");
  scan->add_option("--axis2", f.axis2, "fast axis name:lo:hi:n, e.g. A:0:2:21");
  scan->add_option("--outputs", f.outputs, "columns among lock,kappa,winding,xi0");
  scan->add_option("--parallel", f.parallel, "worker threads")->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    err << app.help();
    return kExitError;
  }

  try {
    Settings s{f, json::object()};
    if (f.config) {
      std::ifstream in(*f.config);
      if (!in) throw InvalidParameterError("cannot open config file '" + *f.config + "'");
      s.cfg = json::parse(in);
      if (!s.cfg.is_object()) throw InvalidParameterError("config file must hold a JSON object");
    }
    if (solve->parsed()) return cmd_solve(s, out);
    if (verify->parsed()) return cmd_verify(s, out);
    if (scan->parsed()) return cmd_scan(s, out);
    return cmd_xi(s, out);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
  } catch (const json::exception& e) {
    report_error(err, "ConfigError", e.what());
  } catch (const std::exception& e) {
    report_error(err, "Error", e.what());
  }
  return kExitError;
}

}  // namespace heunlock
