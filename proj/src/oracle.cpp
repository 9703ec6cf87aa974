#include "heunlock/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "heunlock/errors.hpp"

namespace heunlock {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Dopri = odeint::runge_kutta_dopri5<State>;

constexpr double kPi = std::numbers::pi;

// Step cap that keeps the phase change per step well below pi, so that
// continuous argument tracking from step observations is safe.
double max_step(const ProblemParams& p) {
  return 0.25 / (1.0 + std::abs(p.B()) + p.A());
}

std::vector<double> resolve_times(const TrajectoryConfig& cfg, std::vector<double> times) {
  if (times.empty()) {
    times.resize(cfg.n_samples);
    for (int i = 0; i < cfg.n_samples; ++i) times[i] = cfg.t_end * i / (cfg.n_samples - 1);
  }
  if (times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
    throw InvalidParameterError("sample times must be ascending and non-negative");
  return times;
}

// Integrates from t = 0 and reports the state at every requested time.
template <class System, class Observer>
void run_dense(System sys, State x, const TrajectoryConfig& cfg, double dt_max,
               const std::vector<double>& times, Observer obs) {
  std::vector<double> all;
  all.reserve(times.size() + 1);
  if (times.front() > 0.0) all.push_back(0.0);
  all.insert(all.end(), times.begin(), times.end());
  std::size_t offset = all.size() - times.size();
  std::size_t seen = 0;
  try {
    auto stepper = odeint::make_dense_output(cfg.atol, cfg.rtol, dt_max, Dopri());
    odeint::integrate_times(stepper, sys, x, all.begin(), all.end(), std::min(0.01, dt_max),
                            [&](const State& s, double t) {
                              if (seen++ >= offset) obs(s, t);
                            });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("integration failed: ") + e.what());
  }
}

}  // namespace

void TrajectoryConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidParameterError("rtol and atol must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameterError("t_end must be positive");
  if (n_samples < 2) throw InvalidParameterError("n_samples must be at least 2");
  if (!std::isfinite(initial_phi)) throw InvalidParameterError("initial_phi must be finite");
}

std::vector<PhaseSample> OracleTrajectory::samples() const {
  std::vector<PhaseSample> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = {t[i], std::polar(1.0, phi[i]), phi[i]};
  return out;
}

std::vector<PhaseSample> LinearTrajectory::samples() const {
  std::vector<PhaseSample> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = {t[i], std::polar(1.0, phi[i]), phi[i]};
  return out;
}

OracleTrajectory integrate_ojje(const ProblemParams& params, const TrajectoryConfig& cfg,
                                std::vector<double> times) {
  cfg.validate();
  times = resolve_times(cfg, std::move(times));
  const double A = params.A(), B = params.B(), w = params.omega();
  auto sys = [=](const State& x, State& dx, double t) {
    dx[0] = B + A * std::cos(w * t) - std::sin(x[0]);
  };
  OracleTrajectory out;
  out.t.reserve(times.size());
  out.phi.reserve(times.size());
  run_dense(sys, State{cfg.initial_phi}, cfg, max_step(params), times,
            [&](const State& s, double t) {
              out.t.push_back(t);
              out.phi.push_back(s[0]);
            });
  return out;
}

LinearTrajectory integrate_linear(const ProblemParams& params, double x0, double y0,
                                  const TrajectoryConfig& cfg, std::vector<double> times) {
  cfg.validate();
  if (x0 == 0.0 && y0 == 0.0) throw InvalidParameterError("(x0, y0) must be nonzero");
  times = resolve_times(cfg, std::move(times));
  const double A = params.A(), B = params.B(), w = params.omega();
  auto sys = [=](const State& s, State& ds, double t) {
    const double q = B + A * std::cos(w * t);
    ds[0] = 0.5 * (s[0] + q * s[1]);
    ds[1] = -0.5 * (q * s[0] + s[1]);
  };

  // The phase is -2 arg(x + i y); it is unwrapped on a grid fine enough that
  // consecutive values differ by less than pi.
  const double h = max_step(params);
  std::vector<double> fine;
  std::vector<char> wanted;
  {
    double t = 0.0;
    std::size_t i = 0;
    while (i < times.size()) {
      const double next = times[i];
      if (next - t > h) {
        t += h;
        fine.push_back(t);
        wanted.push_back(0);
      } else {
        t = next;
        fine.push_back(next);
        wanted.push_back(1);
        ++i;
      }
    }
  }

  LinearTrajectory out;
  const double phi0 = -2.0 * std::atan2(y0, x0);
  double phi = phi0;
  std::size_t k = 0;
  run_dense(sys, State{x0, y0}, cfg, h, fine, [&](const State& s, double t) {
    const double raw = -2.0 * std::atan2(s[1], s[0]);
    phi += std::remainder(raw - phi, 2.0 * kPi);
    if (wanted[k++]) {
      out.t.push_back(t);
      out.x.push_back(s[0]);
      out.y.push_back(s[1]);
      out.phi.push_back(phi);
    }
  });
  return out;
}

const char* to_string(LockVerdict v) {
  switch (v) {
    case LockVerdict::yes:
      return "yes";
    case LockVerdict::no:
      return "no";
    case LockVerdict::boundary_suspect:
      return "boundary-suspect";
  }
  return "?";
}

LockReport detect_lock(const ProblemParams& params, const TrajectoryConfig& cfg,
                       const DetectLockOptions& opts) {
  cfg.validate();
  if (opts.n_orbits < 2 || opts.burn_in < 0 || opts.max_periods <= opts.burn_in ||
      opts.rotation_periods < 1)
    throw InvalidParameterError("invalid lock-detection options");

  const double A = params.A(), B = params.B(), w = params.omega();
  const double T = 2.0 * kPi / w;
  const int n = opts.n_orbits;
  auto sys = [=](const State& x, State& dx, double t) {
    const double q = B + A * std::cos(w * t);
    for (int i = 0; i < n; ++i) dx[i] = q - std::sin(x[i]);
  };
  auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol, max_step(params), Dopri());
  auto advance = [&](auto& s, State& x, double t0, double t1) {
    try {
      odeint::integrate_adaptive(stepper, s, x, t0, t1, std::min(0.01, max_step(params)));
    } catch (const std::exception& e) {
      throw IntegrationError(std::string("integration failed: ") + e.what());
    }
  };

  State x(n);
  for (int i = 0; i < n; ++i) x[i] = cfg.initial_phi + 2.0 * kPi * i / n;

  auto spread_of = [&](const State& s) {
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        worst = std::max(worst, std::abs(std::polar(1.0, s[a]) - std::polar(1.0, s[b])));
    return worst;
  };

  LockReport rep;
  constexpr int kSpreadWindow = 10;
  std::vector<double> spreads;
  double phi_start = 0.0;  // orbit 0 at the start of the rotation window
  int lock_period = -1;
  int m = 0;
  std::complex<double> prev_e0 = std::polar(1.0, x[0]);
  while (m < opts.max_periods) {
    advance(sys, x, m * T, (m + 1) * T);
    ++m;
    if (m == opts.burn_in) phi_start = x[0];
    const std::complex<double> e0 = std::polar(1.0, x[0]);
    const double drift = std::abs(e0 - prev_e0);
    prev_e0 = e0;
    spreads.push_back(spread_of(x));
    if (m >= opts.burn_in && lock_period < 0 && spreads.back() < opts.lock_tol &&
        drift < opts.lock_tol)
      lock_period = m;
    if (lock_period >= 0 && m >= opts.burn_in + opts.rotation_periods) break;
  }
  rep.periods = m;
  const int window = std::min<int>(kSpreadWindow, static_cast<int>(spreads.size()));
  rep.final_spread = *std::max_element(spreads.end() - window, spreads.end());
  rep.rotation_number = (x[0] - phi_start) / ((m - opts.burn_in) * T * w);

  if (lock_period >= 0) {
    rep.locked = LockVerdict::yes;
    // One more period of orbit 0 together with the variational equation
    // (log delta)' = -cos(phi) gives the period-map derivative.
    auto var = [=](const State& s, State& ds, double t) {
      ds[0] = B + A * std::cos(w * t) - std::sin(s[0]);
      ds[1] = -std::cos(s[0]);
    };
    State y{x[0], 0.0};
    const double t0 = m * T;
    rep.attractor_samples.reserve(opts.attractor_samples);
    for (int j = 0; j < opts.attractor_samples; ++j) {
      const double tau = T * j / opts.attractor_samples;
      if (j > 0) advance(var, y, t0 + T * (j - 1) / opts.attractor_samples, t0 + tau);
      rep.attractor_samples.push_back({tau, std::polar(1.0, y[0]), y[0]});
    }
    advance(var, y, t0 + T * (opts.attractor_samples - 1) / opts.attractor_samples, t0 + T);
    rep.convergence_rate = std::exp(y[1]);
  } else {
    rep.convergence_rate = std::numeric_limits<double>::quiet_NaN();
    rep.locked = (rep.final_spread > opts.lock_tol && rep.final_spread < opts.ambiguous_tol)
                     ? LockVerdict::boundary_suspect
                     : LockVerdict::no;
  }
  return rep;
}

}  // namespace heunlock
