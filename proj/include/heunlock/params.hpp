#pragma once

#include <json.hpp>

namespace heunlock {

/// Constants of the reduced equation: n = -(B/omega + 1), mu = A/(2 omega),
/// lambda = (2 omega)^-2 - mu^2.
struct DerivedParams {
  double n = 0.0;
  double mu = 0.0;
  double lambda = 0.0;

  bool operator==(const DerivedParams&) const = default;
};

/// Bias q(t) = B + A cos(omega t) together with the parity branch (0 or 1)
/// of the Floquet ansatz. The derived constants are recomputed on demand and
/// never stored separately.
class ProblemParams {
 public:
  ProblemParams(double A, double B, double omega, int parity = 1);

  double A() const noexcept { return A_; }
  double B() const noexcept { return B_; }
  double omega() const noexcept { return omega_; }
  int parity() const noexcept { return parity_; }

  ProblemParams with_parity(int parity) const { return {A_, B_, omega_, parity}; }

  /// Bias q(t).
  double bias(double t) const noexcept;

  bool operator==(const ProblemParams&) const = default;

 private:
  double A_;
  double B_;
  double omega_;
  int parity_;
};

DerivedParams derive(const ProblemParams& params);

/// Inverse of derive() for a given omega; the parity defaults to 1.
ProblemParams invert_derived(const DerivedParams& d, double omega, int parity = 1);

void to_json(nlohmann::json& j, const ProblemParams& p);
ProblemParams problem_params_from_json(const nlohmann::json& j);

}  // namespace heunlock
