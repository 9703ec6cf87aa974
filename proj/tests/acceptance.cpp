// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "heunlock/errors.hpp"
#include "heunlock/laurent.hpp"
#include "heunlock/matching.hpp"
#include "heunlock/oracle.hpp"
#include "heunlock/scan.hpp"
#include "heunlock/solutions.hpp"

using namespace heunlock;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct LockedPoint {
  ProblemParams params;
  LockDecision decision;
  LockReport oracle;
  std::shared_ptr<const LaurentSolution> sol;
};

// Points inside the main tongues, each confirmed locked by the oracle below.
std::vector<LockedPoint>& locked_points() {
  static std::vector<LockedPoint> pts = [] {
    std::vector<LockedPoint> out;
    const double raw[][3] = {{2.0, 1.0, 1.0}, {1.0, 0.7, 0.6}, {2.0, 1.3, 0.6},
                             {2.0, 1.9, 0.6}, {1.0, 0.0, 0.6}};
    for (const auto& r : raw) {
      const ProblemParams p(r[0], r[1], r[2]);
      LockedPoint lp{p, lock_decision(p), detect_lock(p), nullptr};
      if (lp.decision.locked)
        lp.sol = matched_solution(p, lp.decision.parity, lp.decision.kappa);
      out.push_back(std::move(lp));
    }
    return out;
  }();
  return pts;
}

// Every point must be locked on both sides before a per-point check runs.
bool points_ready(Outcome& o) {
  for (const LockedPoint& lp : locked_points()) {
    if (!lp.decision.locked || lp.oracle.locked != LockVerdict::yes || !lp.sol) {
      o.pass = false;
      o.detail = "point A=" + fmt("%g", lp.params.A()) + " B=" + fmt("%g", lp.params.B()) +
                 " is not locked on both sides";
      return false;
    }
  }
  return true;
}

std::complex<double> unit(double th) { return std::polar(1.0, th); }

Outcome criterion1() {
  Outcome o;
  double worst = 0.0;
  for (double B : {0.0, 0.25, 0.5, 0.75, 0.9})
    for (double w : {0.5, 1.0, 2.0}) {
      const DiscriminantProfile prof = find_roots(ProblemParams(0.0, B, w), 1, 256);
      const double expect = std::sqrt(1.0 - B * B) / (2.0 * w);
      if (prof.roots.size() != 1) {
        o.pass = false;
        o.detail += " no unique root at B=" + fmt("%g", B) + " omega=" + fmt("%g", w) + ";";
        continue;
      }
      worst = std::max(worst, std::abs(prof.roots[0] - expect));
    }
  if (worst >= 1e-9) o.pass = false;
  o.detail = "max |kappa - sqrt(1-B^2)/(2 omega)| = " + fmt("%.2e", worst) + o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  if (!points_ready(o)) return o;
  double worst = 0.0, weakest_perturbed = 1e300;
  for (const LockedPoint& lp : locked_points()) {
    const RecurrenceContext off(derive(lp.params), lp.decision.parity, lp.decision.kappa + 1e-2);
    const LaurentSolution pert = coefficients(off, 16, 16);
    double pmax = 0.0;
    for (int m = 0; m < 64; ++m) {
      const cplx z = unit(2 * kPi * m / 64);
      worst = std::max(worst, dche_residual(*lp.sol, z));
      pmax = std::max(pmax, dche_residual(pert, z));
    }
    weakest_perturbed = std::min(weakest_perturbed, pmax);
  }
  o.pass = worst < 1e-8 && weakest_perturbed > 1e-4;
  o.detail = "max residual " + fmt("%.2e", worst) + ", min perturbed residual " +
             fmt("%.2e", weakest_perturbed);
  return o;
}

Outcome criterion3() {
  Outcome o;
  if (!points_ready(o)) return o;
  double mod = 0.0, res = 0.0;
  for (const LockedPoint& lp : locked_points()) {
    try {
      const MonodromyConstant mc = monodromy_constant(*lp.sol);
      mod = std::max(mod, std::abs(std::abs(mc.C_C) * 2 * lp.params.omega() - 1.0));
      res = std::max(res, mc.residual);
    } catch (const MonodromyMismatchError& e) {
      o.pass = false;
      o.detail = e.what();
      return o;
    }
  }
  o.pass = mod < 1e-6 && res < 1e-6;
  o.detail = "max ||C_C| 2 omega - 1| " + fmt("%.2e", mod) + ", max point-wise residual " +
             fmt("%.2e", res);
  return o;
}

Outcome criterion4() {
  Outcome o;
  if (!points_ready(o)) return o;
  double worst = 0.0;
  for (const LockedPoint& lp : locked_points())
    worst = std::max(worst, ojje_residual(PhaseSolution::attractor(lp.sol), 256));
  o.pass = worst < 1e-6;
  o.detail = "max |phi' + sin phi - q| over 256 times = " + fmt("%.2e", worst);
  return o;
}

Outcome criterion5() {
  Outcome o;
  if (!points_ready(o)) return o;
  double worst = 0.0, rate_dev = 0.0;
  for (const LockedPoint& lp : locked_points()) {
    const PhaseSolution at = PhaseSolution::attractor(lp.sol);
    for (const PhaseSample& s : lp.oracle.attractor_samples)
      worst = std::max(worst, std::abs(s.exp_i_phi - exp_i_phi(at, s.t)));
    const double expect = std::exp(-4 * kPi * lp.decision.kappa);
    rate_dev = std::max(rate_dev, std::abs(lp.oracle.convergence_rate / expect - 1.0));
  }
  o.pass = worst < 1e-5;
  o.detail = "max |exp(i phi) - oracle fixed point| = " + fmt("%.2e", worst) +
             " (period-map contraction vs exp(-4 pi kappa): rel. dev " + fmt("%.1e", rate_dev) + ")";
  return o;
}

// Shared 21 x 21 grid for criteria 6 and 7.
struct GridCell {
  double A = 0.0, B = 0.0;
  LockDecision decision;
  LockReport oracle;
  bool winding_ok = true;
  long winding = 0;
  std::string error;
};

constexpr int kGridN = 21;

std::vector<GridCell>& grid() {
  static std::vector<GridCell> cells = [] {
    std::vector<GridCell> out(kGridN * kGridN);
    for (int i = 0; i < kGridN; ++i)
      for (int j = 0; j < kGridN; ++j) {
        GridCell& c = out[i * kGridN + j];
        c.B = 2.0 * i / (kGridN - 1);
        c.A = 2.0 * j / (kGridN - 1);
        const ProblemParams p(c.A, c.B, 0.6);
        try {
          c.oracle = detect_lock(p);
          c.decision = lock_decision(p, 128);
          if (c.decision.locked) {
            const PhaseSolution at =
                PhaseSolution::attractor(matched_solution(p, c.decision.parity, c.decision.kappa));
            const WindingResult a = winding_number(at, 512);
            const WindingResult b = winding_number(at, 1024);
            c.winding = a.k;
            c.winding_ok = a.k == b.k && a.residual < 1e-6 && b.residual < 1e-6;
          }
        } catch (const Error& e) {
          c.error = std::string(e.kind()) + ": " + e.what();
        }
      }
    return out;
  }();
  return cells;
}

bool oracle_boundary(int i, int j) {
  const auto& g = grid();
  const GridCell& c = g[i * kGridN + j];
  if (c.oracle.locked == LockVerdict::boundary_suspect) return true;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      const int a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= kGridN || b >= kGridN) continue;
      const LockVerdict v = g[a * kGridN + b].oracle.locked;
      if (v != c.oracle.locked) return true;
    }
  return false;
}

Outcome criterion6() {
  Outcome o;
  int checked = 0, mismatched = 0, unstable = 0, errors = 0;
  std::ostringstream bad;
  for (int i = 0; i < kGridN; ++i)
    for (int j = 0; j < kGridN; ++j) {
      const GridCell& c = grid()[i * kGridN + j];
      if (!c.error.empty()) {
        ++errors;
        bad << " error at A=" << c.A << " B=" << c.B << " (" << c.error << ");";
        continue;
      }
      if (c.oracle.locked != LockVerdict::yes || !c.decision.locked) continue;
      ++checked;
      if (!c.winding_ok) ++unstable;
      if (std::lround(c.oracle.rotation_number) != c.winding) {
        ++mismatched;
        bad << " k=" << c.winding << " vs rotation " << c.oracle.rotation_number << " at A=" << c.A
            << " B=" << c.B << ";";
      }
    }
  o.pass = mismatched == 0 && unstable == 0 && errors == 0 && checked > 0;
  o.detail = std::to_string(checked) + " locked cells, " + std::to_string(mismatched) +
             " winding mismatches, " + std::to_string(unstable) + " unstable, " +
             std::to_string(errors) + " errors" + bad.str();
  return o;
}

Outcome criterion7() {
  Outcome o;
  int agree = 0, total = 0, far_disagree = 0, imag_bad = 0;
  std::ostringstream bad;
  for (int i = 0; i < kGridN; ++i)
    for (int j = 0; j < kGridN; ++j) {
      const GridCell& c = grid()[i * kGridN + j];
      ++total;
      if (!c.error.empty()) continue;
      for (const DiscriminantProfile& p : c.decision.profiles)
        for (const XiSample& s : p.samples)
          if (std::abs(s.xi.imag()) >= 1e-8 * (std::abs(s.xi) + 1.0)) ++imag_bad;
      const bool predicted = c.decision.xi0_score > 0.0;
      const bool oracle = c.oracle.locked == LockVerdict::yes;
      if (c.oracle.locked != LockVerdict::boundary_suspect && predicted == oracle) {
        ++agree;
        continue;
      }
      bool near_boundary = false;
      for (int di = -1; di <= 1 && !near_boundary; ++di)
        for (int dj = -1; dj <= 1 && !near_boundary; ++dj) {
          const int a = i + di, b = j + dj;
          if (a >= 0 && b >= 0 && a < kGridN && b < kGridN && oracle_boundary(a, b))
            near_boundary = true;
        }
      if (!near_boundary) {
        ++far_disagree;
        bad << " A=" << c.A << " B=" << c.B << ";";
      }
    }
  const double frac = static_cast<double>(agree) / total;
  o.pass = frac >= 0.95 && far_disagree == 0 && imag_bad == 0;
  o.detail = "agreement " + fmt("%.4f", frac) + " (" + std::to_string(agree) + "/" +
             std::to_string(total) + "), " + std::to_string(far_disagree) +
             " disagreements away from the boundary, " + std::to_string(imag_bad) +
             " samples with |Im Xi| >= 1e-8 (|Xi|+1)" + bad.str();
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> uA(0.0, 2.0), uB(-2.0, 2.0), uw(0.5, 2.0), u01(0.05, 1.0);
  std::uniform_int_distribution<int> up(0, 1);
  double worst = -1e300;
  for (int draw = 0; draw < 20; ++draw) {
    const double w = uw(rng);
    const ProblemParams p(uA(rng), uB(rng), w);
    const int parity = up(rng);
    const RecurrenceContext ctx(derive(p), parity, u01(rng) * 0.5 / w);
    std::vector<double> xs, ys;
    for (std::int64_t j0 : {10, 20, 40, 80, 160}) {
      const Mat2 a = truncated_product(ctx, 1, j0, false);
      const Mat2 b = truncated_product(ctx, 1, 2 * j0, false);
      xs.push_back(std::log(static_cast<double>(j0)));
      ys.push_back(std::log((a - b).norm()));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    worst = std::max(worst, sxy / sxx);
  }
  o.pass = worst <= -0.8;
  o.detail = "largest fitted slope over 20 draws = " + fmt("%.3f", worst);
  return o;
}

// |a_k| k! ~ mu^k asymptotically, so the consecutive ratios of the scaled
// coefficients must settle at |mu|: bounded by 1.5 |mu| over the second half
// of each side and within 10% of |mu| at the cut.
Outcome criterion9() {
  Outcome o;
  if (!points_ready(o)) return o;
  double worst_tail = 0.0, worst_end = 0.0;
  for (const LockedPoint& lp : locked_points()) {
    const double mu = std::abs(lp.params.A() / (2 * lp.params.omega()));
    const auto side = [&](const std::vector<cplx>& a, bool minus) {
      std::vector<double> ratios;
      double lf = 0.0, prev = 0.0;
      for (std::size_t k = 1; k < a.size(); ++k) {
        lf += std::log(static_cast<double>(k));
        double s = std::log(std::abs(a[k])) + lf;
        if (minus) s += 2 * std::log(static_cast<double>(k));
        if (k > 1) ratios.push_back(std::exp(s - prev));
        prev = s;
      }
      for (std::size_t i = ratios.size() / 2; i < ratios.size(); ++i)
        worst_tail = std::max(worst_tail, ratios[i] / (1.5 * mu));
      worst_end = std::max(worst_end, std::abs(ratios.back() / mu - 1.0));
    };
    side(lp.sol->a_plus(), false);
    side(lp.sol->a_minus(), true);
  }
  o.pass = worst_tail <= 1.0 && worst_end < 0.1;
  o.detail = "max tail ratio / (1.5 |mu|) = " + fmt("%.3f", worst_tail) +
             ", max |last ratio / |mu| - 1| = " + fmt("%.3f", worst_end);
  return o;
}

Outcome criterion10() {
  Outcome o;
  if (!points_ready(o)) return o;
  double inv = 0.0, det = 0.0;
  for (const LockedPoint& lp : locked_points()) {
    const double w = lp.params.omega();
    for (int m = 0; m < 16; ++m) {
      const cplx z = unit(2 * kPi * (m + 0.25) / 16);
      const cplx expect = lp.sol->evaluate(z).e / (4 * w * w);
      inv = std::max(inv, std::abs(double_companion(*lp.sol, z) - expect) / std::abs(expect));
    }
    const Mat2 t = companion_transform(*lp.sol, 1.0);
    det = std::max(det, std::abs(t.determinant() * (4 * w * w) - 1.0));
  }
  o.pass = inv < 1e-8 && det < 1e-8;
  o.detail = "max relative #o# defect " + fmt("%.2e", inv) + ", determinant defect at z=1 " +
             fmt("%.2e", det);
  return o;
}

Outcome criterion11() {
  Outcome o;
  if (!points_ready(o)) return o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> upsi(-kPi, kPi);
  double worst_fast = 0.0, worst_slow = 0.0, worst_back = 0.0;
  int fast = 0;
  for (const LockedPoint& lp : locked_points()) {
    const PhaseSolution at = PhaseSolution::attractor(lp.sol);
    const PhaseSolution rep = PhaseSolution::repeller(lp.sol);
    const double w = lp.params.omega();
    const bool strong = lp.decision.kappa * w * 40 > 10;
    fast += strong;
    for (int i = 0; i < 5; ++i) {
      const PhaseSolution g = PhaseSolution::general(lp.sol, upsi(rng));
      const double d0 = std::abs(exp_i_phi(g, 0) - exp_i_phi(at, 0));
      const double d40 = std::abs(exp_i_phi(g, 40 / w) - exp_i_phi(at, 40 / w));
      // Repulsion: followed backwards in time the solution settles on the repeller.
      const double r0 = std::abs(exp_i_phi(g, 0) - exp_i_phi(rep, 0));
      const double rb = std::abs(exp_i_phi(g, -40 / w) - exp_i_phi(rep, -40 / w));
      if (strong) worst_fast = std::max(worst_fast, d40 / d0);
      else worst_slow = std::max(worst_slow, d40 / d0);
      worst_back = std::max(worst_back, rb / r0);
    }
  }
  o.pass = worst_fast < 1e-3 && worst_slow < 1.0 && worst_back < 1.0 && fast > 0;
  o.detail = "attractor distance ratio t=40/omega: " + fmt("%.2e", worst_fast) + " (" +
             std::to_string(fast) + " points with kappa omega 40 > 10), " + fmt("%.2e", worst_slow) +
             " elsewhere; repeller distance ratio at t=-40/omega " + fmt("%.2e", worst_back);
  return o;
}

Outcome criterion12() {
  Outcome o;
  ScanSpec s;
  s.axis1 = parse_axis("B:0:2:6");
  s.axis2 = parse_axis("A:0:2:5");
  s.omega = 0.6;
  s.grid_n = 64;
  std::vector<std::string> outs;
  for (int parallel : {1, 2, 4, 1}) {
    std::ostringstream os;
    write_scan_csv(os, s, run_scan(s, parallel));
    outs.push_back(os.str());
  }
  for (const std::string& x : outs)
    if (x != outs[0]) o.pass = false;
  o.detail = std::to_string(outs[0].size()) + " bytes, runs with 1, 2, 4, 1 workers " +
             (o.pass ? "identical" : "differ");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"degenerate closed form", criterion1},
      {"reduced-equation residual", criterion2},
      {"monodromy constant", criterion3},
      {"phase-equation residual", criterion4},
      {"analytic vs oracle attractor", criterion5},
      {"winding number vs rotation number", criterion6},
      {"lock criterion vs oracle", criterion7},
      {"product convergence rate", criterion8},
      {"coefficient decay", criterion9},
      {"involution and determinant", criterion10},
      {"attraction and repulsion", criterion11},
      {"scan determinism", criterion12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s — %s [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
