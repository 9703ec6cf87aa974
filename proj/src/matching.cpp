#include "heunlock/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heunlock/errors.hpp"
#include "heunlock/laurent.hpp"

namespace heunlock {

namespace {

constexpr double kPi = std::numbers::pi;

double distance_to_poles(cplx kappa, const std::vector<cplx>& poles) {
  double best = std::numeric_limits<double>::infinity();
  for (const cplx& q : poles) best = std::min(best, std::abs(kappa - q));
  return best;
}

// Mean of Ξ over a circle of radius r around kappa; r grows until no pole
// sits close to the circle itself.
cplx contour_mean(const RecurrenceContext& ctx, const std::vector<cplx>& poles,
                  const XiOptions& opts) {
  double r = opts.contour_radius;
  for (int attempt = 0; attempt < 8; ++attempt, r *= 1.3) {
    bool clear = true;
    for (const cplx& q : poles) {
      if (std::abs(std::abs(q - ctx.kappa) - r) < 0.3 * r) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    cplx sum = 0.0;
    try {
      for (int m = 0; m < opts.contour_points; ++m) {
        const double th = 2.0 * kPi * (m + 0.5) / opts.contour_points;
        RecurrenceContext c(ctx.derived, ctx.parity, ctx.kappa + r * std::polar(1.0, th));
        sum += xi_direct(c, opts.products);
      }
    } catch (const NearPoleError&) {
      continue;
    }
    return sum / static_cast<double>(opts.contour_points);
  }
  throw NearPoleError(0, 0.0);
}

double re_xi(const DerivedParams& d, int parity, double kappa, const XiOptions& opts) {
  return xi(RecurrenceContext(d, parity, kappa), opts).real();
}

double bisect(const DerivedParams& d, int parity, double lo, double hi, double flo,
              const XiOptions& opts, double xtol) {
  while (hi - lo > xtol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = re_xi(d, parity, mid, opts);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// max ||exp(i phi)| - 1| of the attractor built from a branch root; a root
// of the wrong branch does not give a real phase.
double attractor_unit_defect(const DerivedParams& d, int parity, double kappa) {
  const RecurrenceContext ctx(d, parity, kappa);
  const LaurentSolution sol = coefficients(ctx, 16, 16);
  const double omega = omega_of(d);
  double worst = 0.0;
  for (int m = 0; m < 64; ++m) {
    const cplx z = std::polar(1.0, 2.0 * kPi * m / 64.0);
    const EValue v = sol.evaluate(z);
    const cplx h = z * v.d1 / v.e + sol.nu() - d.mu * z;
    const cplx e = 1.0 / (cplx(0.0, 2.0 * omega) * h);
    worst = std::max(worst, std::abs(std::abs(e) - 1.0));
  }
  return worst;
}

}  // namespace

std::vector<cplx> cancelled_poles(const DerivedParams& d, int parity) {
  const double c = 0.5 * (d.n + 1.0);
  const int jmax = static_cast<int>(std::ceil(std::abs(c))) + 3;
  std::vector<cplx> out;
  const cplx I(0.0, 1.0);
  for (int j = 0; j <= jmax; ++j) {
    const double u = j + 0.5 * (parity - 1);
    const double ut = j + 0.5 * (1 - parity);
    if (j >= 1) {
      // Z_j = (u - i kappa)^2 - c^2
      out.push_back(-I * (u - c));
      out.push_back(-I * (u + c));
    }
    // Z~_j = (ut + i kappa)^2 - c^2, j >= 0 (Z~_{k-1} enters at k = 1)
    out.push_back(I * (c - ut));
    out.push_back(I * (-c - ut));
  }
  return out;
}

cplx xi_direct(const RecurrenceContext& ctx, const TruncationOptions& opts) {
  const DerivedParams& d = ctx.derived;
  const ProductResult a = product(ctx, 1, false, opts);
  const ProductResult t = product(ctx, 1, true, opts);
  const double mu2 = d.mu * d.mu;
  const cplx inner = mu2 * a.gamma * t.alpha + (Z(ctx, 0) + d.lambda) * t.alpha * a.alpha +
                     mu2 * t.gamma * a.alpha;
  return regularizing_prefactor(ctx) * inner;
}

cplx xi(const RecurrenceContext& ctx, const XiOptions& opts) {
  const std::vector<cplx> poles = cancelled_poles(ctx.derived, ctx.parity);
  if (distance_to_poles(ctx.kappa, poles) < opts.switch_distance)
    return contour_mean(ctx, poles, opts);
  try {
    return xi_direct(ctx, opts.products);
  } catch (const NearPoleError&) {
    return contour_mean(ctx, poles, opts);
  }
}

DiscriminantProfile find_roots(const ProblemParams& params, int parity, int grid_n,
                               const FindRootsOptions& opts) {
  if (grid_n < 16) throw InvalidParameterError("grid_n must be at least 16");
  const DerivedParams d = derive(params);
  const double kmax = 0.5 / params.omega();
  const double h = kmax / grid_n;
  const double xtol = 1e-12 * kmax;

  DiscriminantProfile prof;
  prof.parity = parity;
  prof.xi_at_zero = xi(RecurrenceContext(d, parity, 0.0), opts.xi);
  prof.criterion_lock = prof.xi_at_zero.real() > 0.0;

  XiOptions coarse = opts.xi;
  coarse.products.tol = std::max(opts.sample_tol, opts.xi.products.tol);

  prof.samples.reserve(grid_n + 1);
  prof.samples.push_back({0.0, prof.xi_at_zero});
  double scale = std::abs(prof.xi_at_zero);
  for (int i = 1; i <= grid_n; ++i) {
    const double k = i * h;
    const cplx v = xi(RecurrenceContext(d, parity, k), coarse);
    prof.samples.push_back({k, v});
    scale = std::max(scale, std::abs(v));
  }
  for (const XiSample& s : prof.samples) {
    const double ratio = std::abs(s.xi.imag()) / (std::abs(s.xi) + 1e-300);
    prof.meta.max_imag_ratio = std::max(prof.meta.max_imag_ratio, ratio);
    if (std::abs(s.xi.imag()) > opts.imag_tol * (std::abs(s.xi) + scale * 1e-6))
      ++prof.meta.imag_violations;
  }

  auto add_root = [&](double lo, double hi, double flo) {
    const double r = bisect(d, parity, lo, hi, flo, opts.xi, xtol);
    if (r > 0.0) prof.roots.push_back(r);
  };

  const auto& S = prof.samples;
  for (int i = 0; i + 1 < static_cast<int>(S.size()); ++i) {
    const double f0 = S[i].xi.real(), f1 = S[i + 1].xi.real();
    if (f1 == 0.0) {
      if (S[i + 1].kappa > 0.0) prof.roots.push_back(S[i + 1].kappa);
      ++prof.meta.sign_changes;
    } else if (f0 != 0.0 && (f0 < 0) != (f1 < 0)) {
      ++prof.meta.sign_changes;
      add_root(S[i].kappa, S[i + 1].kappa, f0);
    }
  }

  // A pair of close roots, or a tangential one, hides inside a cell where
  // |Re Ξ| has a local minimum without a sign change.
  for (int i = 1; i + 1 < static_cast<int>(S.size()); ++i) {
    const double fm = S[i - 1].xi.real(), f0 = S[i].xi.real(), fp = S[i + 1].xi.real();
    if (f0 == 0.0 || (fm < 0) != (f0 < 0) || (fp < 0) != (f0 < 0)) continue;
    if (!(std::abs(f0) < std::abs(fm) && std::abs(f0) <= std::abs(fp))) continue;
    ++prof.meta.refined_cells;
    constexpr int kSub = 16;
    const double a = S[i - 1].kappa, b = S[i + 1].kappa;
    double prev_k = a, prev_f = fm, min_abs = std::abs(f0), min_k = S[i].kappa;
    for (int m = 1; m <= kSub; ++m) {
      const double k = a + (b - a) * m / kSub;
      const double f = (m == kSub) ? fp : re_xi(d, parity, k, coarse);
      if (std::abs(f) < min_abs) {
        min_abs = std::abs(f);
        min_k = k;
      }
      if (f != 0.0 && prev_f != 0.0 && (f < 0) != (prev_f < 0)) {
        ++prof.meta.sign_changes;
        add_root(prev_k, k, prev_f);
      }
      prev_k = k;
      prev_f = f;
    }
    if (min_abs < opts.critical_tol * scale) {
      prof.meta.critical_kappas.push_back(min_k);
      prof.critical = true;
    }
  }

  std::sort(prof.roots.begin(), prof.roots.end());
  prof.roots.erase(std::unique(prof.roots.begin(), prof.roots.end(),
                               [&](double x, double y) { return std::abs(x - y) < 10 * xtol; }),
                   prof.roots.end());
  prof.meta.multiple_roots = prof.roots.size() > 1;
  for (double r : prof.roots)
    prof.meta.root_residuals.push_back(std::abs(xi(RecurrenceContext(d, parity, r), opts.xi)));
  prof.lock = !prof.roots.empty();

  // Probe beyond the expected interval.
  if (opts.outside_probe > 0) {
    double prev_f = S.back().xi.real();
    double prev_k = kmax;
    for (int m = 1; m <= opts.outside_probe; ++m) {
      const double k = kmax + kmax * m / opts.outside_probe;
      const double f = re_xi(d, parity, k, coarse);
      if (f != 0.0 && prev_f != 0.0 && (f < 0) != (prev_f < 0))
        prof.meta.outside_roots.push_back(bisect(d, parity, prev_k, k, prev_f, opts.xi, xtol));
      prev_k = k;
      prev_f = f;
    }
    if (opts.strict && !prof.meta.outside_roots.empty()) {
      throw ConjectureViolationError("discriminant root at kappa = " +
                                     std::to_string(prof.meta.outside_roots.front()) +
                                     " beyond 1/(2 omega) = " + std::to_string(kmax) +
                                     " (A=" + std::to_string(params.A()) +
                                     ", B=" + std::to_string(params.B()) +
                                     ", omega=" + std::to_string(params.omega()) +
                                     ", parity=" + std::to_string(parity) + ")");
    }
  }
  return prof;
}

LockDecision lock_decision(const ProblemParams& params, int grid_n, const FindRootsOptions& opts) {
  LockDecision out;
  for (int p = 0; p < 2; ++p) out.profiles[p] = find_roots(params, p, grid_n, opts);
  out.xi0_score =
      std::max(out.profiles[0].xi_at_zero.real(), out.profiles[1].xi_at_zero.real());
  out.critical = out.profiles[0].critical || out.profiles[1].critical;

  const bool l0 = out.profiles[0].lock, l1 = out.profiles[1].lock;
  if (!l0 && !l1) {
    out.note = "no positive root on either parity";
    return out;
  }
  out.locked = true;
  if (l0 != l1) {
    out.parity = l0 ? 0 : 1;
    out.kappa = out.profiles[out.parity].roots.back();
    out.note = "single branch with a root";
    return out;
  }
  const DerivedParams d = derive(params);
  double defect[2];
  for (int p = 0; p < 2; ++p) {
    try {
      defect[p] = attractor_unit_defect(d, p, out.profiles[p].roots.back());
    } catch (const Error&) {
      defect[p] = std::numeric_limits<double>::infinity();
    }
  }
  out.parity = defect[0] <= defect[1] ? 0 : 1;
  out.kappa = out.profiles[out.parity].roots.back();
  out.note = "both parities have roots; kept the branch with the smaller attractor unit-modulus "
             "defect (" + std::to_string(defect[0]) + " vs " + std::to_string(defect[1]) + ")";
  return out;
}

void to_json(nlohmann::json& j, const DiscriminantProfile& p) {
  nlohmann::json samples = nlohmann::json::array();
  for (const XiSample& s : p.samples) samples.push_back({s.kappa, s.xi.real(), s.xi.imag()});
  j = nlohmann::json{{"samples", std::move(samples)},
                     {"root_residuals", p.meta.root_residuals},{"parity", p.parity},
                     {"roots", p.roots},
                     {"xi_at_zero", {p.xi_at_zero.real(), p.xi_at_zero.imag()}},
                     {"lock", p.lock},
                     {"criterion_lock", p.criterion_lock},
                     {"critical", p.critical},
                     {"sign_changes", p.meta.sign_changes},
                     {"critical_kappas", p.meta.critical_kappas},
                     {"outside_roots", p.meta.outside_roots},
                     {"multiple_roots", p.meta.multiple_roots},
                     {"max_imag_ratio", p.meta.max_imag_ratio},
                     {"imag_violations", p.meta.imag_violations}};
}

}  // namespace heunlock
