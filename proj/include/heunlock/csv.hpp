#pragma once

#include <complex>
#include <ostream>
#include <span>
#include <string>

namespace heunlock {

/// Shortest-round-trip-safe decimal with 17 significant digits, '.' separator,
/// independent of the global locale.
std::string format_double(double v);

/// One point of a phase trajectory, shared by the analytic and oracle exports.
struct PhaseSample {
  double t = 0.0;
  std::complex<double> exp_i_phi;
  double phi_unwrapped = 0.0;
};

/// Writes the header `t,re_exp_i_phi,im_exp_i_phi,phi_unwrapped` followed by
/// one row per sample.
void write_phase_csv(std::ostream& out, std::span<const PhaseSample> samples);

}  // namespace heunlock
