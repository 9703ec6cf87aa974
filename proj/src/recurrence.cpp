#include "heunlock/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "heunlock/csv.hpp"
#include "heunlock/errors.hpp"

namespace heunlock {

namespace {

constexpr int kMaxRichardsonOrder = 6;
// Relative change below which further doublings only resample roundoff.
constexpr double kRoundoffFloor = 256.0 * 2.220446049250313e-16;
constexpr double kPlateauCeiling = 1e-11;

struct Column {
  cplx a;
  cplx g;
};

Column operator-(const Column& x, const Column& y) { return {x.a - y.a, x.g - y.g}; }
Column operator+(const Column& x, const Column& y) { return {x.a + y.a, x.g + y.g}; }
Column operator*(double s, const Column& x) { return {s * x.a, s * x.g}; }
double norm(const Column& x) { return std::sqrt(std::norm(x.a) + std::norm(x.g)); }

// One descending sweep v_j = M_j v_{j+1} from v_{j0+1} = (1, 1), the first
// column of M_infinity. Returns v_k for k in [k_min, k_max].
std::vector<Column> sweep(const RecurrenceContext& ctx, std::int64_t k_min, std::int64_t k_max,
                          std::int64_t j0, bool tilde) {
  const double lambda = ctx.derived.lambda;
  const double mu2 = ctx.derived.mu * ctx.derived.mu;
  const double floor = ctx.singularity_floor();
  std::vector<Column> out(static_cast<std::size_t>(k_max - k_min + 1));
  cplx a = 1.0;
  cplx g = 1.0;
  for (std::int64_t j = j0; j >= k_min; --j) {
    const cplx zj = tilde ? Z_tilde(ctx, j) : Z(ctx, j);
    if (std::abs(zj) < floor) throw NearPoleError(j, std::abs(zj));
    const cplx inv = 1.0 / zj;
    const cplx lower = tilde ? Z_tilde(ctx, j - 1) * inv : cplx(1.0);
    const cplx next_a = (1.0 + lambda * inv) * a + mu2 * inv * g;
    g = lower * a;
    a = next_a;
    if (j <= k_max) out[static_cast<std::size_t>(j - k_min)] = {a, g};
  }
  return out;
}

}  // namespace

std::int64_t TruncationOptions::default_j_max() {
  constexpr std::int64_t kDefault = std::int64_t{1} << 20;
  const char* env = std::getenv("HEUNLOCK_J_MAX");
  if (env == nullptr || *env == '\0') return kDefault;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0' || v < 16) {
    throw InvalidParameterError(std::string("HEUNLOCK_J_MAX must be an integer >= 16, got '") +
                                env + "'");
  }
  return static_cast<std::int64_t>(v);
}

RecurrenceContext::RecurrenceContext(const DerivedParams& d, int p, double k)
    : RecurrenceContext(d, p, cplx(k)) {}

RecurrenceContext::RecurrenceContext(const DerivedParams& d, int p, cplx k)
    : derived(d), parity(p), kappa(k) {
  if (p != 0 && p != 1) throw InvalidParameterError("parity must be 0 or 1");
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) {
    throw InvalidParameterError("kappa must be finite");
  }
}

double RecurrenceContext::singularity_floor() const noexcept {
  const double mu2 = derived.mu * derived.mu;
  return 1e-12 * std::max({1.0, std::abs(derived.lambda), mu2});
}

cplx Z(const RecurrenceContext& ctx, std::int64_t k) {
  const cplx base = static_cast<double>(k) + 0.5 * (ctx.parity - 1) - cplx(0, 1) * ctx.kappa;
  const double c = 0.5 * (ctx.derived.n + 1.0);
  return base * base - c * c;
}

cplx Z_tilde(const RecurrenceContext& ctx, std::int64_t k) {
  const cplx base = static_cast<double>(k) + 0.5 * (1 - ctx.parity) + cplx(0, 1) * ctx.kappa;
  const double c = 0.5 * (ctx.derived.n + 1.0);
  return base * base - c * c;
}

Mat2 M(const RecurrenceContext& ctx, std::int64_t j) {
  const cplx zj = Z(ctx, j);
  if (std::abs(zj) < ctx.singularity_floor()) throw NearPoleError(j, std::abs(zj));
  Mat2 m;
  m << 1.0 + ctx.derived.lambda / zj, ctx.derived.mu * ctx.derived.mu / zj, 1.0, 0.0;
  return m;
}

Mat2 M_tilde(const RecurrenceContext& ctx, std::int64_t j) {
  const cplx zj = Z_tilde(ctx, j);
  if (std::abs(zj) < ctx.singularity_floor()) throw NearPoleError(j, std::abs(zj));
  Mat2 m;
  m << 1.0 + ctx.derived.lambda / zj, ctx.derived.mu * ctx.derived.mu / zj,
      Z_tilde(ctx, j - 1) / zj, 0.0;
  return m;
}

Mat2 M_infinity() {
  Mat2 m;
  m << 1.0, 0.0, 1.0, 0.0;
  return m;
}

Mat2 truncated_product(const RecurrenceContext& ctx, std::int64_t k, std::int64_t j0, bool tilde,
                       const Mat2& seed) {
  Mat2 acc = Mat2::Identity();
  for (std::int64_t j = k; j <= j0; ++j) acc = acc * (tilde ? M_tilde(ctx, j) : M(ctx, j));
  return acc * seed;
}

ProductResult ProductTable::at(std::int64_t k) const {
  const auto i = static_cast<std::size_t>(k - k_min);
  return {alpha.at(i), gamma.at(i), truncation_index, est_error};
}

ProductTable product_table(const RecurrenceContext& ctx, std::int64_t k_min, std::int64_t k_max,
                           bool tilde, const TruncationOptions& opts) {
  if (k_min < 0 || k_max < k_min) throw InvalidParameterError("invalid product index range");
  if (!(opts.tol > 0.0)) throw InvalidParameterError("tol must be positive");

  // Truncating at j0 perturbs the products by a smooth expansion in 1/j0, so
  // successive doublings of j0 are combined by Richardson extrapolation.
  const std::size_t width = static_cast<std::size_t>(k_max - k_min + 1);
  std::int64_t j0 = std::max<std::int64_t>(opts.j_start, 2 * k_max + 16);
  std::vector<std::vector<Column>> prev_row;  // extrapolation row of the previous level

  double last_diff = 0.0;
  for (int level = 0;; ++level, j0 *= 2) {
    if (j0 > opts.j_max) {
      throw TruncationLimitError("product did not converge to tol " + format_double(opts.tol) +
                                 " before j0 exceeded " + std::to_string(opts.j_max) +
                                 " (last change " + format_double(last_diff) + ")");
    }
    const std::vector<Column> raw = sweep(ctx, k_min, k_max, j0, tilde);
    const int order = std::min(level, kMaxRichardsonOrder);
    std::vector<std::vector<Column>> row(width, std::vector<Column>(order + 1));
    for (std::size_t i = 0; i < width; ++i) {
      row[i][0] = raw[i];
      for (int m = 1; m <= order; ++m) {
        const double factor = 1.0 / (std::ldexp(1.0, m) - 1.0);
        row[i][m] = row[i][m - 1] + factor * (row[i][m - 1] - prev_row[i][m - 1]);
      }
    }
    if (level > 0) {
      double diff = 0.0;
      for (std::size_t i = 0; i < width; ++i) {
        const Column& best = row[i][order];
        const Column& before = prev_row[i].back();
        const double scale = std::max(norm(best), 1e-300);
        diff = std::max(diff, norm(best - before) / scale);
      }
      // Once the change is this small and stops shrinking, rounding noise
      // dominates and further doublings cannot improve the result.
      const bool plateau = level >= 3 && diff < kPlateauCeiling && diff > 0.25 * last_diff;
      const double prev_diff = last_diff;
      last_diff = diff;
      if (diff < std::max(opts.tol, kRoundoffFloor) || plateau) {
        ProductTable t;
        t.k_min = k_min;
        t.alpha.reserve(width);
        t.gamma.reserve(width);
        for (std::size_t i = 0; i < width; ++i) {
          t.alpha.push_back(row[i][order].a);
          t.gamma.push_back(row[i][order].g);
        }
        t.truncation_index = j0;
        t.est_error = plateau ? std::max(diff, prev_diff) : diff;
        return t;
      }
    }
    prev_row = std::move(row);
  }
}

ProductResult product(const RecurrenceContext& ctx, std::int64_t k, bool tilde,
                      const TruncationOptions& opts) {
  return product_table(ctx, k, k, tilde, opts).at(k);
}

}  // namespace heunlock

namespace heunlock {

namespace {

cplx sinc(cplx x) {
  if (std::abs(x) < 1e-4) {
    const cplx x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace

cplx regularizing_prefactor(const RecurrenceContext& ctx) {
  constexpr double kHalfPi = 1.5707963267948966;
  const cplx i(0, 1);
  const double n = ctx.derived.n;
  const int p = ctx.parity;
  // sin(pi/2 (n+p+2ik)) = (-1)^(1-p) sin(pi/2 (n+2-p+2ik)), which pairs each
  // sine with one linear denominator.
  const cplx x1 = kHalfPi * (n + p - 2.0 * i * ctx.kappa);
  const cplx x2 = kHalfPi * (n + 2 - p + 2.0 * i * ctx.kappa);
  const double sign = p == 1 ? 1.0 : -1.0;
  return sign * sinc(x1) * sinc(x2);
}

double omega_of(const DerivedParams& d) {
  return 0.5 / std::sqrt(d.lambda + d.mu * d.mu);
}

}  // namespace heunlock
