#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "heunlock/csv.hpp"
#include "heunlock/params.hpp"

// Brute-force reference: direct integration of the phase equation and its
// linear companion system. Deliberately independent of the series machinery.

namespace heunlock {

struct TrajectoryConfig {
  double t_end = 100.0;
  double rtol = 1e-11;
  double atol = 1e-11;
  double initial_phi = 0.0;
  /// Uniform output grid over [0, t_end] when no sample times are given.
  int n_samples = 1001;
  std::string method = "Dormand-Prince 5(4), dense output";

  void validate() const;
};

struct OracleTrajectory {
  std::vector<double> t;
  std::vector<double> phi;

  std::vector<PhaseSample> samples() const;
};

/// phi' = B + A cos(omega t) - sin(phi) from phi(0) = cfg.initial_phi.
/// `times` must be ascending and start at or after 0; empty means the
/// uniform grid of cfg.n_samples points.
OracleTrajectory integrate_ojje(const ProblemParams& params, const TrajectoryConfig& cfg,
                                std::vector<double> times = {});

struct LinearTrajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> y;
  /// exp(i phi) = (x - i y)/(x + i y), tracked continuously.
  std::vector<double> phi;

  std::vector<PhaseSample> samples() const;
};

/// 2x' = x + q y, 2y' = -(q x + y).
LinearTrajectory integrate_linear(const ProblemParams& params, double x0, double y0,
                                  const TrajectoryConfig& cfg, std::vector<double> times = {});

enum class LockVerdict { yes, no, boundary_suspect };
const char* to_string(LockVerdict v);

struct DetectLockOptions {
  int n_orbits = 8;
  int burn_in = 50;
  int max_periods = 500;
  int rotation_periods = 100;
  double lock_tol = 1e-8;
  double ambiguous_tol = 1e-3;
  int attractor_samples = 64;
};

struct LockReport {
  LockVerdict locked = LockVerdict::no;
  /// <phi'> / omega.
  double rotation_number = 0.0;
  /// (t mod 2 pi/omega, exp(i phi)) along the fixed point; present iff locked.
  std::vector<PhaseSample> attractor_samples;
  /// Derivative of the period map at its fixed point (per-period contraction
  /// factor); NaN when not locked.
  double convergence_rate = 0.0;
  int periods = 0;
  /// Largest pairwise distance of the orbits over the last periods.
  double final_spread = 0.0;
};

/// Iterates the period map exp(i phi(t)) -> exp(i phi(t + 2 pi/omega)) from
/// n_orbits equally spaced phases.
LockReport detect_lock(const ProblemParams& params, const TrajectoryConfig& cfg = {},
                       const DetectLockOptions& opts = {});

/// Initial (x, y) whose phase is phi0.
inline std::pair<double, double> linear_initial_state(double phi0) {
  return {std::cos(0.5 * phi0), -std::sin(0.5 * phi0)};
}

}  // namespace heunlock
