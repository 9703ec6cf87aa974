#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heunlock/params.hpp"
#include "heunlock/recurrence.hpp"

namespace heunlock {

struct XiOptions {
  /// Ξ only needs the products up to a common scale factor, so a looser
  /// tolerance than the coefficient path is enough.
  TruncationOptions products = [] {
    TruncationOptions o;
    o.tol = 1e-12;
    return o;
  }();
  /// Within this distance (in the complex kappa plane) of a cancelled pole
  /// the value is taken as the mean over a circle instead.
  double switch_distance = 0.05;
  double contour_radius = 0.1;
  int contour_points = 32;
};

/// Kappa values (complex in general) where a factor 1/Z_j or 1/Z~_j of the
/// products blows up; the prefactor cancels each of them.
std::vector<cplx> cancelled_poles(const DerivedParams& d, int parity);

/// Discriminant straight from the products; throws NearPoleError at a pole.
cplx xi_direct(const RecurrenceContext& ctx, const TruncationOptions& opts = XiOptions{}.products);

/// Discriminant
///   prefactor * (mu^2 gamma1 alpha~1 + (Z_0 + lambda) alpha~1 alpha1 + mu^2 gamma~1 alpha1).
/// Near a cancelled pole the analytic continuation is evaluated as the mean
/// of Ξ over a circle around kappa (exact for analytic functions).
cplx xi(const RecurrenceContext& ctx, const XiOptions& opts = {});

struct BracketMeta {
  int sign_changes = 0;
  /// Cells where Re Ξ touches zero without changing sign (merged
  /// attractor/repeller boundary).
  std::vector<double> critical_kappas;
  /// Sign changes found by the probe beyond (2 omega)^-1.
  std::vector<double> outside_roots;
  /// More than one positive root on this branch.
  bool multiple_roots = false;
  double max_imag_ratio = 0.0;
  int imag_violations = 0;
  int refined_cells = 0;
  /// |Ξ| at each stored root.
  std::vector<double> root_residuals;
};

struct XiSample {
  double kappa;
  cplx xi;
};

struct DiscriminantProfile {
  int parity = 1;
  std::vector<XiSample> samples;
  std::vector<double> roots;
  cplx xi_at_zero;
  bool lock = false;
  /// Re Ξ(0) > 0, the closed-form lock criterion.
  bool criterion_lock = false;
  bool critical = false;
  BracketMeta meta;
};

struct FindRootsOptions {
  XiOptions xi;
  double imag_tol = 1e-8;
  int outside_probe = 32;
  /// Root beyond (2 omega)^-1 raises ConjectureViolationError.
  bool strict = true;
  double critical_tol = 1e-7;
  /// Product tolerance for the coarse grid samples; only their signs are
  /// used, bisection and Ξ(0) use `xi.products`.
  double sample_tol = 1e-10;
};

DiscriminantProfile find_roots(const ProblemParams& params, int parity, int grid_n = 256,
                               const FindRootsOptions& opts = {});

struct LockDecision {
  bool locked = false;
  int parity = 1;
  double kappa = 0.0;
  DiscriminantProfile profiles[2];
  /// How the branch was chosen.
  std::string note;
  /// Re Ξ(0) of the branch with the larger value, the lock criterion score.
  double xi0_score = 0.0;
  bool critical = false;
};

/// Runs find_roots on both parities and keeps the branch with a positive
/// root. If both branches have one, the branch whose attractor satisfies the
/// phase equation best wins.
LockDecision lock_decision(const ProblemParams& params, int grid_n = 256,
                           const FindRootsOptions& opts = {});

void to_json(nlohmann::json& j, const DiscriminantProfile& p);

}  // namespace heunlock
