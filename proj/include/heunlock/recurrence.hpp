#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "heunlock/params.hpp"

namespace heunlock {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

/// Truncation control for the infinite matrix products.
struct TruncationOptions {
  double tol = 1e-14;
  /// Upper bound on the truncation index j0. Defaults to 2^20, or to the
  /// value of the HEUNLOCK_J_MAX environment variable when set.
  std::int64_t j_max = default_j_max();
  /// First truncation index tried; later levels double it.
  std::int64_t j_start = 64;

  static std::int64_t default_j_max();
};

/// Fixed parameters, parity and Floquet parameter kappa for the recurrence.
///
/// kappa is real for every physical use. The discriminant regularization
/// evaluates the (analytic in kappa) products at complex kappa, so the field
/// is stored as a complex number.
struct RecurrenceContext {
  DerivedParams derived;
  int parity = 1;
  cplx kappa = 0.0;

  RecurrenceContext(const DerivedParams& d, int p, double k);
  RecurrenceContext(const DerivedParams& d, int p, cplx k);

  /// Denominators below this modulus raise NearPoleError.
  double singularity_floor() const noexcept;
};

cplx Z(const RecurrenceContext& ctx, std::int64_t k);
cplx Z_tilde(const RecurrenceContext& ctx, std::int64_t k);

Mat2 M(const RecurrenceContext& ctx, std::int64_t j);
Mat2 M_tilde(const RecurrenceContext& ctx, std::int64_t j);

/// The idempotent limit [[1,0],[1,0]] of M_j as j grows.
Mat2 M_infinity();

/// prod_{j=k}^{j0} M_j * seed, accumulated left to right starting from M_k.
Mat2 truncated_product(const RecurrenceContext& ctx, std::int64_t k, std::int64_t j0, bool tilde,
                       const Mat2& seed = M_infinity());

/// First column (alpha, gamma) of the converged product R_k; the second
/// column vanishes in the limit.
struct ProductResult {
  cplx alpha;
  cplx gamma;
  std::int64_t truncation_index = 0;
  double est_error = 0.0;
};

ProductResult product(const RecurrenceContext& ctx, std::int64_t k, bool tilde,
                      const TruncationOptions& opts = {});

/// First columns of R_k for every k in [k_min, k_max] from one sweep per
/// truncation level.
struct ProductTable {
  std::int64_t k_min = 0;
  std::vector<cplx> alpha;
  std::vector<cplx> gamma;
  std::int64_t truncation_index = 0;
  double est_error = 0.0;

  ProductResult at(std::int64_t k) const;
};

ProductTable product_table(const RecurrenceContext& ctx, std::int64_t k_min, std::int64_t k_max,
                           bool tilde, const TruncationOptions& opts = {});

}  // namespace heunlock

namespace heunlock {

/// The z-independent factor
///   (4/pi^2) sin(pi/2 (n+p-2i kappa)) sin(pi/2 (n+p+2i kappa))
///     / ((n+p-2i kappa)(n+2-p+2i kappa)),
/// evaluated through sinc factors so that it stays finite where its linear
/// denominators vanish.
cplx regularizing_prefactor(const RecurrenceContext& ctx);

/// omega recovered from lambda + mu^2 = (2 omega)^-2.
double omega_of(const DerivedParams& d);

}  // namespace heunlock
