#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "heunlock/matching.hpp"

namespace heunlock {

struct ScanAxis {
  std::string name;  // "A", "B" or "omega"
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;

  double value(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

/// Parses "name:lo:hi:n".
ScanAxis parse_axis(const std::string& text);

struct ScanOutputs {
  bool lock = true;
  bool kappa = true;
  bool winding = true;
  bool xi0 = true;
};

/// Parses a comma-separated subset of "lock,kappa,winding,xi0".
ScanOutputs parse_outputs(const std::string& text);

struct ScanSpec {
  ScanAxis axis1;
  ScanAxis axis2;
  /// Values of the parameters not swept.
  double A = 0.0;
  double B = 0.0;
  double omega = 1.0;
  ScanOutputs outputs;
  int grid_n = 256;
  /// Tolerance of the coefficient products used for the winding number.
  double tol = 1e-14;

  void validate() const;
};

struct ScanCell {
  double v1 = 0.0;
  double v2 = 0.0;
  bool lock = false;
  int parity = -1;
  double kappa = 0.0;
  std::optional<long> winding;
  double xi0 = 0.0;
  std::string error;
};

/// Cells in row-major order: axis1 is the slow index, axis2 the fast one.
/// The result does not depend on `parallel` (number of worker threads).
std::vector<ScanCell> run_scan(const ScanSpec& spec, int parallel = 1);

/// One header line plus one row per cell; fixed 17-digit formatting.
void write_scan_csv(std::ostream& out, const ScanSpec& spec, const std::vector<ScanCell>& cells);

}  // namespace heunlock
