#include "heunlock/laurent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "heunlock/errors.hpp"

namespace heunlock {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kEdgeFloor = 1e-10;

// Value and first three derivatives of sum_k c[k] x^k. With skip_constant
// the k = 0 term is treated as zero.
struct Horner {
  cplx p0, p1, p2, p3;
};

Horner horner(const std::vector<cplx>& c, cplx x, bool skip_constant) {
  Horner h{};
  if (c.empty()) return h;
  h.p0 = c.size() == 1 && skip_constant ? cplx{} : c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    h.p3 = h.p3 * x + h.p2;
    h.p2 = h.p2 * x + h.p1;
    h.p1 = h.p1 * x + h.p0;
    h.p0 = h.p0 * x + (k == 0 && skip_constant ? cplx{} : c[k]);
  }
  return {h.p0, h.p1, 2.0 * h.p2, 6.0 * h.p3};
}

struct SideCut {
  bool ok = false;
  int k_end = 0;
  double tail = 0.0;        // normalized units, value
  double tail_deriv = 0.0;  // normalized units, derivative
};

// Smallest K such that the factorial tail of sum |c_k| R^k beyond K is below
// tol relative to the largest retained term. For negative powers R is the
// inverse of the inner radius.
SideCut cut_side(const std::vector<cplx>& c, double R, double tol, bool negative_powers) {
  const int last = static_cast<int>(c.size()) - 1;
  const double logR = std::log(R);
  std::vector<double> log_t(c.size());
  double log_scale = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= last; ++k) {
    const double m = std::abs(c[k]);
    log_t[k] = m > 0.0 ? std::log(m) + k * logR : -std::numeric_limits<double>::infinity();
    log_scale = std::max(log_scale, log_t[k]);
  }
  if (!std::isfinite(log_scale)) return {true, 1, 0.0, 0.0};
  constexpr int kWindow = 4;
  for (int K = kWindow; K <= last; ++K) {
    bool all_zero = true;
    bool broken = false;
    double zeta = 0.0;
    for (int k = K - kWindow + 1; k <= K; ++k) {
      const double a = std::abs(c[k]);
      const double b = std::abs(c[k - 1]);
      if (a > 0.0) all_zero = false;
      if (b == 0.0) {
        if (a > 0.0) broken = true;
        continue;
      }
      zeta = std::max(zeta, k * a / b);
    }
    if (all_zero) return {true, std::max(1, K - kWindow), 0.0, 0.0};
    if (broken) continue;
    zeta *= 1.25;
    const double q = zeta * R / (K + 1);
    if (q >= 0.5) continue;
    const double geo = q / (1.0 - q);
    const double rel = std::exp(log_t[K] - log_scale) * geo;
    if (rel < tol) {
      const double tK = std::exp(log_t[K]);
      const double sum_kq = K * geo + q / ((1.0 - q) * (1.0 - q));
      const double deriv = negative_powers ? tK * R * sum_kq : tK / R * sum_kq;
      return {true, K, tK * geo, deriv};
    }
  }
  return {};
}

}  // namespace

cplx gamma_ratio(cplx nu, std::int64_t k) {
  if (k < 0) throw InvalidParameterError("gamma_ratio needs k >= 0");
  const double floor = 1e-12 * std::max(1.0, std::abs(nu));
  cplx r = 1.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    const cplx d = nu + static_cast<double>(j);
    if (std::abs(d) < floor) throw NearPoleError(j, std::abs(d));
    r /= d;
  }
  return r;
}

LaurentSolution::LaurentSolution(DerivedParams derived, int parity, double kappa, cplx prefactor,
                                 std::vector<cplx> a_plus, std::vector<cplx> a_minus,
                                 LaurentTruncation trunc)
    : derived_(derived),
      parity_(parity),
      kappa_(kappa),
      prefactor_(prefactor),
      a_plus_(std::move(a_plus)),
      a_minus_(std::move(a_minus)),
      trunc_(trunc) {
  if (a_plus_.size() < 2 || a_minus_.size() < 2) {
    throw InvalidParameterError("Laurent solution needs at least a~_{0,1} on both sides");
  }
  auto normalize = [](const std::vector<cplx>& raw, bool& fallback) {
    double largest = 0.0;
    for (const cplx& a : raw) largest = std::max(largest, std::abs(a));
    cplx edge = raw[0];
    fallback = std::abs(raw[0]) < kEdgeFloor * largest;
    if (fallback) edge = raw[1];
    if (std::abs(edge) == 0.0) throw InvalidParameterError("both edge coefficients vanish");
    std::vector<cplx> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] / edge;
    return out;
  };
  plus_ = normalize(a_plus_, fallback_plus_);
  minus_ = normalize(a_minus_, fallback_minus_);
}

cplx LaurentSolution::coefficient(std::int64_t k) const {
  const auto idx = static_cast<std::size_t>(k >= 0 ? k : -k);
  if (k >= 0) return idx < plus_.size() ? plus_[idx] : cplx{};
  return idx < minus_.size() ? minus_[idx] : cplx{};
}

cplx LaurentSolution::nu() const noexcept {
  return 0.5 * (derived_.n + parity_) - kI * kappa_;
}

EValue LaurentSolution::evaluate(cplx z) const {
  const double r = std::abs(z);
  constexpr double kSlack = 1e-12;
  if (!(r >= trunc_.r_min * (1.0 - kSlack) && r <= trunc_.r_max * (1.0 + kSlack))) {
    throw DomainError("|z| = " + std::to_string(r) + " outside certified annulus [" +
                      std::to_string(trunc_.r_min) + ", " + std::to_string(trunc_.r_max) + "]");
  }
  const Horner p = horner(plus_, z, false);
  const cplx w = 1.0 / z;
  const Horner q = horner(minus_, w, true);
  // Chain rule for w = 1/z: w' = -w^2, w'' = 2 w^3, w''' = -6 w^4.
  const cplx w2 = w * w;
  const cplx dw = -w2;
  const cplx ddw = 2.0 * w2 * w;
  const cplx dddw = -6.0 * w2 * w2;
  EValue v;
  v.e = prefactor_ * (p.p0 + q.p0);
  v.d1 = prefactor_ * (p.p1 + q.p1 * dw);
  v.d2 = prefactor_ * (p.p2 + q.p2 * dw * dw + q.p1 * ddw);
  v.d3 = prefactor_ * (p.p3 + q.p3 * dw * dw * dw + 3.0 * q.p2 * dw * ddw + q.p1 * dddw);
  return v;
}

LaurentSolution coefficients(const RecurrenceContext& ctx, int K_plus, int K_minus, double tol,
                             const LaurentOptions& opts) {
  if (K_plus < 1 || K_minus < 1) throw InvalidParameterError("K_plus and K_minus must be >= 1");
  if (ctx.kappa.imag() != 0.0) throw InvalidParameterError("coefficients need a real kappa");
  if (!(tol > 0.0)) throw InvalidParameterError("tol must be positive");
  if (!(opts.r_min > 0.0 && opts.r_min <= 1.0 && opts.r_max >= 1.0)) {
    throw InvalidParameterError("annulus must satisfy 0 < r_min <= 1 <= r_max");
  }
  const double kappa = ctx.kappa.real();
  const double mu = ctx.derived.mu;
  const int p = ctx.parity;
  const cplx nu = 0.5 * (ctx.derived.n + p) - kI * kappa;
  const cplx nu_t = 0.5 * (ctx.derived.n - p) + kI * kappa;
  const double floor = ctx.singularity_floor();

  int K = std::max({K_plus, K_minus, 16});
  for (;;) {
    if (K > opts.k_cap) {
      throw TruncationLimitError("Laurent tail bound not reached within " +
                                 std::to_string(opts.k_cap) + " coefficients");
    }
    const ProductTable tab = product_table(ctx, 0, K, false, opts.products);
    const ProductTable tab_t = product_table(ctx, 0, K, true, opts.products);

    std::vector<cplx> raw_plus(static_cast<std::size_t>(K) + 1);
    std::vector<cplx> raw_minus(static_cast<std::size_t>(K) + 1);
    cplx g = 1.0;
    cplx g_t = 1.0;
    double mu_pow = 1.0;
    for (int k = 0; k <= K; ++k) {
      if (k > 0) {
        const cplx d = nu + static_cast<double>(k);
        const cplx d_t = nu_t + static_cast<double>(k);
        if (std::abs(d) < floor) throw NearPoleError(k, std::abs(d));
        if (std::abs(d_t) < floor) throw NearPoleError(-k, std::abs(d_t));
        g /= d;
        g_t /= d_t;
        mu_pow *= mu;
      }
      const cplx zt = Z_tilde(ctx, k - 1);
      if (std::abs(zt) < floor) throw NearPoleError(k - 1, std::abs(zt));
      raw_plus[k] = mu_pow * tab.gamma[k] * g;
      raw_minus[k] = mu_pow * tab_t.gamma[k] / zt * g_t;
    }

    // Normalize exactly as LaurentSolution will, to size the cut.
    LaurentSolution probe(ctx.derived, p, kappa, 1.0, raw_plus, raw_minus, {});
    std::vector<cplx> c_plus(raw_plus.size());
    std::vector<cplx> c_minus(raw_minus.size());
    for (int k = 0; k <= K; ++k) {
      c_plus[k] = probe.coefficient(k);
      c_minus[k] = probe.coefficient(-k);
    }
    const SideCut cp = cut_side(c_plus, opts.r_max, tol, false);
    const SideCut cm = cut_side(c_minus, 1.0 / opts.r_min, tol, true);
    if (cp.ok && cm.ok) {
      raw_plus.resize(static_cast<std::size_t>(std::max(cp.k_end, 1)) + 1);
      raw_minus.resize(static_cast<std::size_t>(std::max(cm.k_end, 1)) + 1);
      const cplx pref = regularizing_prefactor(ctx);
      LaurentTruncation tr;
      tr.k_plus = static_cast<int>(raw_plus.size()) - 1;
      tr.k_minus = static_cast<int>(raw_minus.size()) - 1;
      tr.tail_value = std::abs(pref) * (cp.tail + cm.tail);
      tr.tail_derivative = std::abs(pref) * (cp.tail_deriv + cm.tail_deriv);
      tr.r_min = opts.r_min;
      tr.r_max = opts.r_max;
      tr.product_index = std::max(tab.truncation_index, tab_t.truncation_index);
      tr.product_error = std::max(tab.est_error, tab_t.est_error);
      return {ctx.derived, p, kappa, pref, std::move(raw_plus), std::move(raw_minus), tr};
    }
    K *= 2;
  }
}

EValue evaluate_E(const LaurentSolution& sol, cplx z) { return sol.evaluate(z); }

double dche_residual(const DerivedParams& d, int parity, double kappa, cplx z, cplx g, cplx g1,
                     cplx g2) {
  const double mu = d.mu;
  const double c = 0.5 * (d.n + 1.0);
  const int p = parity;
  const cplx nu = 0.5 * (d.n + p) - kI * kappa;
  const cplx nu_t = 0.5 * (d.n - p) + kI * kappa;
  const cplx constant = (1.0 - p) * (0.25 + kI * kappa) - kappa * kappa - c * c + d.lambda;
  const cplx z2 = z * z;
  const cplx terms[] = {
      z2 * z * g2,
      (static_cast<double>(p) - 2.0 * kI * kappa) * z2 * g1,
      -mu * (z2 - 1.0) * z * g1,
      mu * nu_t * z2 * g,
      constant * z * g,
      mu * nu * g,
  };
  cplx sum = 0.0;
  double scale = 0.0;
  for (const cplx& t : terms) sum += t;
  // Moduli of the monomials before cancellation; the constant is split so
  // that a matched kappa at mu = 0 still sees a nonzero scale.
  const double constant_scale =
      std::abs(1.0 - p) * std::abs(0.25 + kI * kappa) + kappa * kappa + c * c + std::abs(d.lambda);
  scale = std::abs(terms[0]) + std::abs(terms[1]) + std::abs(terms[2]) + std::abs(terms[3]) +
          constant_scale * std::abs(z * g) + std::abs(terms[5]);
  return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

double dche_residual(const LaurentSolution& sol, cplx z) {
  const EValue v = sol.evaluate(z);
  return dche_residual(sol.derived(), sol.parity(), sol.kappa(), z, v.e, v.d1, v.d2);
}

CompanionValue companion_E_sharp_at_log(const LaurentSolution& sol, cplx log_z) {
  const double mu = sol.derived().mu;
  const cplx nu = sol.nu();
  const cplx s = 2.0 * kI * sol.kappa() - static_cast<double>(sol.parity());
  const cplx z = std::exp(log_z);
  const cplx zs = std::exp(s * log_z);
  const cplx w = 1.0 / z;
  const EValue e = sol.evaluate(w);
  const cplx lin = nu * z - mu;
  const cplx z2 = z * z;
  const cplx z3 = z2 * z;
  const cplx F = e.d1 + lin * e.e;
  const cplx F1 = -e.d2 / z2 + nu * e.e - lin * e.d1 / z2;
  const cplx F2 = e.d3 / (z2 * z2) + 2.0 * e.d2 / z3 - 2.0 * nu * e.d1 / z2 +
                  lin * e.d2 / (z2 * z2) + 2.0 * lin * e.d1 / z3;
  CompanionValue out;
  out.value = zs * F;
  out.d1 = zs * (s * F / z + F1);
  out.d2 = zs * (s * (s - 1.0) * F / z2 + 2.0 * s * F1 / z + F2);
  out.branch_warning = std::abs(std::abs(log_z.imag()) - std::numbers::pi) < 1e-8;
  return out;
}

CompanionValue companion_E_sharp(const LaurentSolution& sol, cplx z) {
  if (z == 0.0) throw DomainError("companion solution undefined at z = 0");
  return companion_E_sharp_at_log(sol, std::log(z));
}

cplx double_companion(const LaurentSolution& sol, cplx z) {
  if (z == 0.0) throw DomainError("companion solution undefined at z = 0");
  const cplx log_z = std::log(z);
  const cplx s = 2.0 * kI * sol.kappa() - static_cast<double>(sol.parity());
  const CompanionValue inner = companion_E_sharp_at_log(sol, -log_z);
  return std::exp(s * log_z) * (inner.d1 + (sol.nu() * z - sol.derived().mu) * inner.value);
}

Mat2 companion_transform(const LaurentSolution& sol, cplx z) {
  const double mu = sol.derived().mu;
  const double lambda = sol.derived().lambda;
  const cplx nu = sol.nu();
  const cplx s = 2.0 * kI * sol.kappa() - static_cast<double>(sol.parity());
  const cplx zs = std::exp(s * std::log(z));
  Mat2 t;
  t << zs, zs * (nu * z - mu), zs / z * (mu * z - nu),
      zs / z * (mu * nu * (z * z + 1.0) + (lambda - nu * nu) * z);
  return t;
}

cplx conjugate_symmetric_E(const LaurentSolution& sol, cplx z) {
  const EValue e = sol.evaluate(std::conj(1.0 / z));
  const cplx shift = 0.5 * (sol.derived().n + sol.parity()) + kI * sol.kappa();
  const cplx zp = sol.parity() == 1 ? 1.0 / z : cplx(1.0);
  return zp * (std::conj(e.d1) + (shift * z - sol.derived().mu) * std::conj(e.e));
}

MonodromyConstant monodromy_constant(const LaurentSolution& sol, int n_points) {
  if (n_points < 4) throw InvalidParameterError("monodromy_constant needs >= 4 points");
  std::vector<cplx> e(static_cast<std::size_t>(n_points));
  std::vector<cplx> e_hat(e.size());
  cplx mean = 0.0;
  for (int j = 0; j < n_points; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / n_points);
    e[j] = sol.evaluate(z).e;
    e_hat[j] = conjugate_symmetric_E(sol, z);
    mean += e_hat[j] / e[j];
  }
  mean /= static_cast<double>(n_points);
  MonodromyConstant mc;
  mc.C_C = mean;
  mc.C_c = std::arg(mean);
  double var = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    mc.residual = std::max(mc.residual, std::abs(e_hat[j] - mean * e[j]) / std::abs(mean * e[j]));
    var += std::norm(e_hat[j] / e[j] - mean);
  }
  mc.spread = std::sqrt(var / n_points);
  const double modulus_error = std::abs(std::abs(mean) * 2.0 * sol.omega() - 1.0);
  if (mc.residual > 1e-6 || modulus_error > 1e-6) {
    throw MonodromyMismatchError("E^ != C_C E: residual " + std::to_string(mc.residual) +
                                 ", | |C_C| 2 omega - 1 | = " + std::to_string(modulus_error));
  }
  return mc;
}

namespace {

nlohmann::json complex_array(const std::vector<cplx>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const cplx& c : v) a.push_back({c.real(), c.imag()});
  return a;
}

std::vector<cplx> complex_vector(const nlohmann::json& a) {
  std::vector<cplx> v;
  for (const auto& e : a) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const LaurentSolution& sol) {
  const LaurentTruncation& t = sol.trunc();
  j = nlohmann::json{
      {"kappa", sol.kappa()},
      {"parity", sol.parity()},
      {"derived", {{"n", sol.derived().n}, {"mu", sol.derived().mu}, {"lambda", sol.derived().lambda}}},
      {"prefactor", {sol.prefactor().real(), sol.prefactor().imag()}},
      {"a_plus", complex_array(sol.a_plus())},
      {"a_minus", complex_array(sol.a_minus())},
      {"trunc",
       {{"k_plus", t.k_plus},
        {"k_minus", t.k_minus},
        {"tail_value", t.tail_value},
        {"tail_derivative", t.tail_derivative},
        {"r_min", t.r_min},
        {"r_max", t.r_max},
        {"product_index", t.product_index},
        {"product_error", t.product_error},
        {"fallback_plus", sol.fallback_plus()},
        {"fallback_minus", sol.fallback_minus()}}},
  };
}

LaurentSolution laurent_from_json(const nlohmann::json& j) {
  try {
    DerivedParams d;
    d.n = j.at("derived").at("n").get<double>();
    d.mu = j.at("derived").at("mu").get<double>();
    d.lambda = j.at("derived").at("lambda").get<double>();
    const auto& jt = j.at("trunc");
    LaurentTruncation t;
    t.k_plus = jt.at("k_plus").get<int>();
    t.k_minus = jt.at("k_minus").get<int>();
    t.tail_value = jt.at("tail_value").get<double>();
    t.tail_derivative = jt.at("tail_derivative").get<double>();
    t.r_min = jt.at("r_min").get<double>();
    t.r_max = jt.at("r_max").get<double>();
    t.product_index = jt.at("product_index").get<std::int64_t>();
    t.product_error = jt.at("product_error").get<double>();
    const auto& pf = j.at("prefactor");
    return {d,
            j.at("parity").get<int>(),
            j.at("kappa").get<double>(),
            cplx(pf.at(0).get<double>(), pf.at(1).get<double>()),
            complex_vector(j.at("a_plus")),
            complex_vector(j.at("a_minus")),
            t};
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameterError(std::string("bad Laurent JSON: ") + e.what());
  }
}

}  // namespace heunlock
