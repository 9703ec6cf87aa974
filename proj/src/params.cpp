#include "heunlock/params.hpp"

#include <cmath>
#include <string>

#include "heunlock/errors.hpp"

namespace heunlock {

NearPoleError::NearPoleError(std::int64_t index, double modulus)
    : Error("denominator below singularity floor at index " + std::to_string(index) +
            " (modulus " + std::to_string(modulus) + ")"),
      index_(index),
      modulus_(modulus) {}

SolutionPoleError::SolutionPoleError(double t, const std::string& what)
    : Error(what + " at t=" + std::to_string(t)), t_(t) {}

ProblemParams::ProblemParams(double A, double B, double omega, int parity)
    : A_(A), B_(B), omega_(omega), parity_(parity) {
  if (!std::isfinite(A) || !std::isfinite(B) || !std::isfinite(omega)) {
    throw InvalidParameterError("A, B and omega must be finite");
  }
  if (!(omega > 0.0)) throw InvalidParameterError("omega must be positive");
  if (A < 0.0) throw InvalidParameterError("A must be non-negative");
  if (parity != 0 && parity != 1) throw InvalidParameterError("parity must be 0 or 1");
}

double ProblemParams::bias(double t) const noexcept { return B_ + A_ * std::cos(omega_ * t); }

DerivedParams derive(const ProblemParams& params) {
  const double w = params.omega();
  DerivedParams d;
  d.n = -(params.B() / w + 1.0);
  d.mu = params.A() / (2.0 * w);
  d.lambda = 1.0 / (4.0 * w * w) - d.mu * d.mu;
  return d;
}

ProblemParams invert_derived(const DerivedParams& d, double omega, int parity) {
  if (!std::isfinite(omega) || !(omega > 0.0)) {
    throw InvalidParameterError("omega must be positive and finite");
  }
  if (!std::isfinite(d.n) || !std::isfinite(d.mu)) {
    throw InvalidParameterError("derived constants must be finite");
  }
  return {2.0 * omega * d.mu, -(d.n + 1.0) * omega, omega, parity};
}

void to_json(nlohmann::json& j, const ProblemParams& p) {
  j = nlohmann::json{{"A", p.A()}, {"B", p.B()}, {"omega", p.omega()}, {"parity", p.parity()}};
}

ProblemParams problem_params_from_json(const nlohmann::json& j) {
  try {
    return {j.at("A").get<double>(), j.at("B").get<double>(), j.at("omega").get<double>(),
            j.value("parity", 1)};
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameterError(std::string("bad parameter JSON: ") + e.what());
  }
}

}  // namespace heunlock
