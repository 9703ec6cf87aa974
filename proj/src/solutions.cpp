#include "heunlock/solutions.hpp"

#include <cmath>
#include <numbers>

#include "heunlock/errors.hpp"

namespace heunlock {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleTol = 1e-12;

// zE'/E + nu - mu z, the attractor's logarithmic-derivative combination.
cplx attractor_h(const LaurentSolution& sol, const EValue& v, cplx z) {
  return z * v.d1 / v.e + sol.nu() - sol.derived().mu * z;
}

void require_attractor(const PhaseSolution& ps, const char* what) {
  if (ps.kind() != SolutionKind::attractor)
    throw InvalidParameterError(std::string(what) + " is defined for the attractor only");
}

}  // namespace

PhaseSolution::PhaseSolution(SolutionKind kind, double psi,
                             std::shared_ptr<const LaurentSolution> sol)
    : kind_(kind), psi_(psi), sol_(std::move(sol)) {
  if (!sol_) throw InvalidParameterError("PhaseSolution needs a Laurent solution");
  if (!std::isfinite(psi_)) throw InvalidParameterError("psi must be finite");
}

PhaseSolution PhaseSolution::attractor(std::shared_ptr<const LaurentSolution> sol) {
  return {SolutionKind::attractor, 0.0, std::move(sol)};
}

PhaseSolution PhaseSolution::repeller(std::shared_ptr<const LaurentSolution> sol) {
  return {SolutionKind::repeller, kPi / 2, std::move(sol)};
}

PhaseSolution PhaseSolution::general(std::shared_ptr<const LaurentSolution> sol, double psi) {
  return {SolutionKind::general, psi, std::move(sol)};
}

double PhaseSolution::A() const noexcept { return 2.0 * omega() * sol_->derived().mu; }
double PhaseSolution::B() const noexcept { return -(sol_->derived().n + 1.0) * omega(); }
double PhaseSolution::period() const noexcept { return 2.0 * kPi / omega(); }

cplx exp_i_phi(const PhaseSolution& ps, double t) {
  const LaurentSolution& sol = ps.sol();
  const double w = ps.omega();
  const double theta = w * t;
  const cplx z = std::polar(1.0, theta);
  const cplx two_i_omega(0.0, 2.0 * w);

  switch (ps.kind()) {
    case SolutionKind::attractor: {
      const EValue v = sol.evaluate(z);
      const cplx h = attractor_h(sol, v, z);
      if (std::abs(v.e) < 1e-300 || std::abs(h) < kPoleTol * (std::abs(sol.nu()) + 1.0))
        throw SolutionPoleError(t, "attractor denominator vanishes");
      return 1.0 / (two_i_omega * h);
    }
    case SolutionKind::repeller: {
      const cplx zi = std::conj(z);
      const EValue v = sol.evaluate(zi);
      if (std::abs(v.e) < 1e-300) throw SolutionPoleError(t, "repeller denominator vanishes");
      return -two_i_omega * attractor_h(sol, v, zi);
    }
    case SolutionKind::general:
      break;
  }

  const double c = std::cos(ps.psi()), s = std::sin(ps.psi());
  const cplx nu = sol.nu();
  const double mu = sol.derived().mu;
  const cplx expo(-static_cast<double>(sol.parity()), 2.0 * sol.kappa());
  const cplx zs = std::exp(expo * cplx(0.0, theta));
  const EValue v = sol.evaluate(z);
  const EValue r = sol.evaluate(std::conj(z));
  const cplx num = cplx(0.0, -0.5) * (c * v.e + s * zs * (r.d1 + (nu * z - mu) * r.e));
  const cplx den_a = w * c * (z * v.d1 + (nu - mu * z) * v.e);
  const cplx den_b = s * zs * z * r.e / (4.0 * w);
  const cplx den = den_a + den_b;
  const double scale = std::abs(den_a) + std::abs(den_b);
  if (std::abs(den) < kPoleTol * scale || scale == 0.0)
    throw SolutionPoleError(t, "general-solution denominator vanishes");
  return num / den;
}

cplx dphi_dz(const PhaseSolution& ps, cplx z) {
  require_attractor(ps, "dphi_dz");
  const LaurentSolution& sol = ps.sol();
  const EValue v = sol.evaluate(z);
  if (std::abs(v.e) < 1e-300)
    throw SolutionPoleError(std::arg(z) / ps.omega(), "E vanishes on the contour");
  const cplx l = v.d1 / v.e;
  const cplx h = z * l + sol.nu() - sol.derived().mu * z;
  if (std::abs(h) < kPoleTol * (std::abs(sol.nu()) + 1.0))
    throw SolutionPoleError(std::arg(z) / ps.omega(), "attractor denominator vanishes");
  // exp(-i phi) = 2 i omega h  =>  phi' = i h'/h
  const cplx dh = l + z * v.d2 / v.e - z * l * l - sol.derived().mu;
  return cplx(0.0, 1.0) * dh / h;
}

WindingResult winding_number(const PhaseSolution& ps, int n_samples) {
  require_attractor(ps, "winding_number");
  if (n_samples < 256) throw InvalidParameterError("winding_number needs n_samples >= 256");
  constexpr int kMaxSamples = 1 << 16;

  auto integrand = [&](int j, int n) {
    const cplx z = std::polar(1.0, 2.0 * kPi * j / n);
    return dphi_dz(ps, z) * cplx(0.0, 1.0) * z;
  };
  int n = n_samples;
  cplx sum = 0.0;
  for (int j = 0; j < n; ++j) sum += integrand(j, n);
  cplx raw = sum / static_cast<double>(n);

  WindingResult out;
  for (;;) {
    // Nested grids: doubling only adds the odd points.
    const int n2 = 2 * n;
    for (int j = 1; j < n2; j += 2) sum += integrand(j, n2);
    const cplx raw2 = sum / static_cast<double>(n2);
    const double k = std::round(raw2.real());
    out.k = static_cast<long>(k);
    out.raw_integral = raw2.real();
    out.residual = std::abs(raw2 - k);
    out.n_samples = n2;
    const bool stable = std::abs(raw2 - raw) < 1e-10;
    n = n2;
    raw = raw2;
    if ((stable && out.residual < 1e-6) || n >= kMaxSamples) break;
  }
  if (out.residual > 1e-3)
    throw WindingUnresolvedError("winding integral " + format_double(out.raw_integral) +
                                 " is not close to an integer after " +
                                 std::to_string(out.n_samples) + " samples");
  return out;
}

std::vector<PhaseSample> trajectory(const PhaseSolution& ps, double t0, double t1, int n) {
  if (n < 2 || !(t1 > t0)) throw InvalidParameterError("trajectory needs n >= 2 and t1 > t0");
  std::vector<PhaseSample> out;
  out.reserve(n);
  cplx e = exp_i_phi(ps, t0);
  double phi = std::arg(e);
  double t = t0;
  out.push_back({t0, e, phi});

  // Advance from (t, e) to target, halving the step while the phase jump is
  // not safely below pi/2.
  auto advance = [&](double target, int depth, auto&& self) -> void {
    const cplx e1 = exp_i_phi(ps, target);
    const double d = std::arg(e1 / e);
    if (std::abs(d) >= kPi / 2 && depth < 40) {
      self(0.5 * (t + target), depth + 1, self);
      self(target, depth + 1, self);
      return;
    }
    phi += d;
    e = e1;
    t = target;
  };
  for (int i = 1; i < n; ++i) {
    const double target = t0 + (t1 - t0) * i / (n - 1);
    advance(target, 0, advance);
    out.push_back({target, e, phi});
  }
  return out;
}

double ojje_residual(const PhaseSolution& ps, int n_points) {
  const double T = ps.period();
  const double h = 1e-4 * T;
  const double A = ps.A(), B = ps.B(), w = ps.omega();
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double t = T * i / n_points;
    const cplx e0 = exp_i_phi(ps, t);
    auto d = [&](int k) { return std::arg(exp_i_phi(ps, t + k * h) / e0); };
    const double dphi = (8.0 * (d(1) - d(-1)) - (d(2) - d(-2))) / (12.0 * h);
    const double sin_phi = e0.imag() / std::abs(e0);
    worst = std::max(worst, std::abs(dphi + sin_phi - B - A * std::cos(w * t)));
  }
  return worst;
}

std::shared_ptr<const LaurentSolution> matched_solution(const ProblemParams& params, int parity,
                                                        double kappa, const LaurentOptions& opts) {
  const RecurrenceContext ctx(derive(params), parity, kappa);
  return std::make_shared<const LaurentSolution>(coefficients(ctx, 16, 16, 1e-15, opts));
}

}  // namespace heunlock
