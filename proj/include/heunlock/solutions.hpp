#pragma once

#include <memory>
#include <vector>

#include "heunlock/csv.hpp"
#include "heunlock/laurent.hpp"

namespace heunlock {

enum class SolutionKind { attractor, repeller, general };

/// Essentially periodic (attractor, repeller) or general phase solution of
/// phi' + sin(phi) = B + A cos(omega t), built from a matched Floquet solution.
class PhaseSolution {
 public:
  static PhaseSolution attractor(std::shared_ptr<const LaurentSolution> sol);
  static PhaseSolution repeller(std::shared_ptr<const LaurentSolution> sol);
  /// psi = 0 is the attractor, psi = pi/2 the repeller.
  static PhaseSolution general(std::shared_ptr<const LaurentSolution> sol, double psi);

  SolutionKind kind() const noexcept { return kind_; }
  double psi() const noexcept { return psi_; }
  const LaurentSolution& sol() const noexcept { return *sol_; }
  double kappa() const noexcept { return sol_->kappa(); }
  int parity() const noexcept { return sol_->parity(); }
  double omega() const noexcept { return sol_->omega(); }
  double A() const noexcept;
  double B() const noexcept;
  double period() const noexcept;

 private:
  PhaseSolution(SolutionKind kind, double psi, std::shared_ptr<const LaurentSolution> sol);
  SolutionKind kind_;
  double psi_;
  std::shared_ptr<const LaurentSolution> sol_;
};

/// exp(i phi(t)). Branch powers of z = exp(i omega t) are taken along the
/// unwrapped argument omega t. Throws SolutionPoleError where the
/// denominator vanishes.
cplx exp_i_phi(const PhaseSolution& ps, double t);

/// d phi / dz of the attractor as an analytic function of z.
cplx dphi_dz(const PhaseSolution& ps, cplx z);

struct WindingResult {
  long k = 0;
  double raw_integral = 0.0;
  double residual = 0.0;
  int n_samples = 0;
};

/// (1/2 pi) times the contour integral of d phi/dz over |z| = 1, by the
/// trapezoidal rule with doubling until stable.
WindingResult winding_number(const PhaseSolution& ps, int n_samples = 256);

/// Samples on a uniform grid of n points over [t0, t1] with phi tracked
/// continuously; extra evaluations are inserted wherever the phase would
/// jump by pi/2 or more between grid points.
std::vector<PhaseSample> trajectory(const PhaseSolution& ps, double t0, double t1, int n);

/// max |phi' + sin(phi) - B - A cos(omega t)| over n points of one period,
/// phi' from a 4th-order central stencil with step h = 1e-4 * period.
double ojje_residual(const PhaseSolution& ps, int n_points = 256);

/// Builds the matched attractor for (params, parity, kappa).
std::shared_ptr<const LaurentSolution> matched_solution(const ProblemParams& params, int parity,
                                                        double kappa,
                                                        const LaurentOptions& opts = {});

}  // namespace heunlock
