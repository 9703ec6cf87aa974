#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "heunlock/recurrence.hpp"

namespace heunlock {

/// Gamma(1+nu)/Gamma(k+1+nu) as the finite product prod_{j=1}^{k} 1/(nu+j).
cplx gamma_ratio(cplx nu, std::int64_t k);

struct LaurentOptions {
  /// Annulus on which the truncated series is certified.
  double r_min = 0.1;
  double r_max = 10.0;
  /// Hard cap on the number of coefficients per side.
  int k_cap = 4096;
  TruncationOptions products;
};

/// Where the series were cut and what the cut costs.
struct LaurentTruncation {
  int k_plus = 0;
  int k_minus = 0;
  /// Absolute bounds on the dropped tails of E and E' anywhere in the annulus.
  double tail_value = 0.0;
  double tail_derivative = 0.0;
  double r_min = 0.1;
  double r_max = 10.0;
  std::int64_t product_index = 0;
  double product_error = 0.0;
};

/// E and its first three z-derivatives at one point.
struct EValue {
  cplx e;
  cplx d1;
  cplx d2;
  cplx d3;
};

/// Floquet solution E(z) = prefactor * (E_+(z) + E_-(z) - 1) of the reduced
/// equation, stored as the raw edge-normalizable coefficients a~_k, a~_{-k}.
///
/// E_+ is normalized by a~_0 and E_- by a~_{-0}. When an edge coefficient is
/// negligible against the rest of its side the series on that side is
/// normalized by a~_{+-1} instead and the matching flag is set.
class LaurentSolution {
 public:
  LaurentSolution(DerivedParams derived, int parity, double kappa, cplx prefactor,
                  std::vector<cplx> a_plus, std::vector<cplx> a_minus, LaurentTruncation trunc);

  const DerivedParams& derived() const noexcept { return derived_; }
  int parity() const noexcept { return parity_; }
  double kappa() const noexcept { return kappa_; }
  double omega() const noexcept { return omega_of(derived_); }
  cplx prefactor() const noexcept { return prefactor_; }
  const std::vector<cplx>& a_plus() const noexcept { return a_plus_; }
  const std::vector<cplx>& a_minus() const noexcept { return a_minus_; }
  const LaurentTruncation& trunc() const noexcept { return trunc_; }
  bool fallback_plus() const noexcept { return fallback_plus_; }
  bool fallback_minus() const noexcept { return fallback_minus_; }

  /// Normalized series coefficient of z^k, k of either sign.
  cplx coefficient(std::int64_t k) const;

  /// (n+p)/2 - i kappa, the shift that recurs in every derived formula.
  cplx nu() const noexcept;

  EValue evaluate(cplx z) const;

 private:
  DerivedParams derived_;
  int parity_;
  double kappa_;
  cplx prefactor_;
  std::vector<cplx> a_plus_;
  std::vector<cplx> a_minus_;
  LaurentTruncation trunc_;
  bool fallback_plus_ = false;
  bool fallback_minus_ = false;
  // Normalized coefficients; plus_[0] carries the constant term.
  std::vector<cplx> plus_;
  std::vector<cplx> minus_;
};

/// Builds the coefficients from the converged matrix products. K_plus and
/// K_minus are lower bounds; both sides grow until the factorial tail bound
/// on the annulus falls below tol relative to the largest term.
LaurentSolution coefficients(const RecurrenceContext& ctx, int K_plus, int K_minus,
                             double tol = 1e-15, const LaurentOptions& opts = {});

/// (E, E') at z; z must lie in the certified annulus.
EValue evaluate_E(const LaurentSolution& sol, cplx z);

/// Relative residual of the reduced equation for a candidate g with
/// derivatives g1, g2 at z. Normalized by the sum of the moduli of the
/// individual terms.
double dche_residual(const DerivedParams& d, int parity, double kappa, cplx z, cplx g, cplx g1,
                     cplx g2);
double dche_residual(const LaurentSolution& sol, cplx z);

struct CompanionValue {
  cplx value;
  cplx d1;
  cplx d2;
  /// z sits within 1e-8 of the branch cut of z^(2 i kappa - p).
  bool branch_warning = false;
};

/// Companion solution E#(z) = z^(2i kappa - p) [E'(1/z) + ((nu) z - mu) E(1/z)]
/// on the principal branch.
CompanionValue companion_E_sharp(const LaurentSolution& sol, cplx z);

/// Same, with the power evaluated as exp((2i kappa - p) * log_z) so that
/// callers can follow a continuous argument.
CompanionValue companion_E_sharp_at_log(const LaurentSolution& sol, cplx log_z);

/// The companion map applied to E#; equals (2 omega)^-2 E(z).
cplx double_companion(const LaurentSolution& sol, cplx z);

/// Matrix taking (E'(1/z), E(1/z)) to (E#(z), E#'(z)); the second row uses
/// the differential equation to eliminate E''.
Mat2 companion_transform(const LaurentSolution& sol, cplx z);

/// Conjugate-symmetric solution
///   E^(z) = z^-p [conj E'(conj(1/z)) + (((n+p)/2 + i kappa) z - mu) conj E(conj(1/z))].
cplx conjugate_symmetric_E(const LaurentSolution& sol, cplx z);

struct MonodromyConstant {
  cplx C_C;
  /// Phase of C_C.
  double C_c = 0.0;
  /// max_z |E^(z) - C_C E(z)| / |C_C E(z)| on the sample circle.
  double residual = 0.0;
  /// Standard deviation of the point-wise ratios E^/E.
  double spread = 0.0;
};

/// Throws MonodromyMismatchError when residual > 1e-6 or |C_C| misses
/// (2 omega)^-1 by more than 1e-6 relative.
MonodromyConstant monodromy_constant(const LaurentSolution& sol, int n_points = 64);

void to_json(nlohmann::json& j, const LaurentSolution& sol);
LaurentSolution laurent_from_json(const nlohmann::json& j);

}  // namespace heunlock
