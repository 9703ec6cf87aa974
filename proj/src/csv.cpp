#include "heunlock/csv.hpp"

#include <charconv>
#include <cmath>

namespace heunlock {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

void write_phase_csv(std::ostream& out, std::span<const PhaseSample> samples) {
  out << "t,re_exp_i_phi,im_exp_i_phi,phi_unwrapped\n";
  for (const PhaseSample& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.exp_i_phi.real()) << ','
        << format_double(s.exp_i_phi.imag()) << ',' << format_double(s.phi_unwrapped) << '\n';
  }
}

}  // namespace heunlock
