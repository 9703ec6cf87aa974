#include "heunlock/scan.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "heunlock/csv.hpp"
#include "heunlock/errors.hpp"
#include "heunlock/solutions.hpp"

namespace heunlock {

namespace {

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw InvalidParameterError("cannot parse " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

// Commas and line breaks would break the CSV row.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

ScanCell run_cell(const ScanSpec& spec, int i1, int i2) {
  ScanCell cell;
  cell.v1 = spec.axis1.value(i1);
  cell.v2 = spec.axis2.value(i2);
  double A = spec.A, B = spec.B, omega = spec.omega;
  for (const auto& [axis, v] : {std::pair{&spec.axis1, cell.v1}, std::pair{&spec.axis2, cell.v2}}) {
    if (axis->name == "A") A = v;
    else if (axis->name == "B") B = v;
    else omega = v;
  }
  try {
    const ProblemParams params(A, B, omega);
    const LockDecision dec = lock_decision(params, spec.grid_n);
    cell.lock = dec.locked;
    cell.xi0 = dec.xi0_score;
    if (dec.locked) {
      cell.parity = dec.parity;
      cell.kappa = dec.kappa;
      if (spec.outputs.winding) {
        LaurentOptions lo;
        lo.products.tol = spec.tol;
        const auto ps = PhaseSolution::attractor(matched_solution(params, dec.parity, dec.kappa, lo));
        cell.winding = winding_number(ps).k;
      }
    }
  } catch (const Error& e) {
    cell.error = csv_safe(std::string(e.kind()) + ": " + e.what());
  } catch (const std::exception& e) {
    cell.error = csv_safe(std::string("Error: ") + e.what());
  }
  return cell;
}

}  // namespace

ScanAxis parse_axis(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw InvalidParameterError("axis must be name:lo:hi:n, got '" + text + "'");
  ScanAxis a;
  a.name = parts[0];
  a.lo = parse_number(parts[1], "axis lower bound");
  a.hi = parse_number(parts[2], "axis upper bound");
  const double n = parse_number(parts[3], "axis point count");
  if (n != std::floor(n) || n < 2 || n > 1e6)
    throw InvalidParameterError("axis point count must be an integer >= 2");
  a.n = static_cast<int>(n);
  return a;
}

ScanOutputs parse_outputs(const std::string& text) {
  ScanOutputs o{false, false, false, false};
  for (const std::string& item : split(text, ',')) {
    if (item == "lock") o.lock = true;
    else if (item == "kappa") o.kappa = true;
    else if (item == "winding") o.winding = true;
    else if (item == "xi0") o.xi0 = true;
    else throw InvalidParameterError("unknown scan output '" + item + "'");
  }
  return o;
}

void ScanSpec::validate() const {
  for (const ScanAxis* a : {&axis1, &axis2}) {
    if (a->name != "A" && a->name != "B" && a->name != "omega")
      throw InvalidParameterError("axis name must be A, B or omega, got '" + a->name + "'");
    if (a->n < 2) throw InvalidParameterError("each axis needs at least 2 points");
    if (!(a->lo < a->hi)) throw InvalidParameterError("axis " + a->name + " needs lo < hi");
  }
  if (axis1.name == axis2.name) throw InvalidParameterError("scan axes must differ");
  if (grid_n < 16) throw InvalidParameterError("grid must be at least 16");
}

std::vector<ScanCell> run_scan(const ScanSpec& spec, int parallel) {
  spec.validate();
  if (parallel < 1) throw InvalidParameterError("parallel must be at least 1");
  const int total = spec.axis1.n * spec.axis2.n;
  std::vector<ScanCell> cells(total);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int idx = next++; idx < total; idx = next++)
      cells[idx] = run_cell(spec, idx / spec.axis2.n, idx % spec.axis2.n);
  };
  const int n_threads = std::min(parallel, total);
  std::vector<std::jthread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  return cells;
}

void write_scan_csv(std::ostream& out, const ScanSpec& spec, const std::vector<ScanCell>& cells) {
  const ScanOutputs& o = spec.outputs;
  out << spec.axis1.name << ',' << spec.axis2.name;
  if (o.lock) out << ",lock,parity";
  if (o.kappa) out << ",kappa";
  if (o.winding) out << ",winding";
  if (o.xi0) out << ",re_xi0";
  out << ",error\n";
  for (const ScanCell& c : cells) {
    out << format_double(c.v1) << ',' << format_double(c.v2);
    if (o.lock) {
      out << ',' << (c.lock ? 1 : 0) << ',';
      if (c.lock) out << c.parity;
    }
    if (o.kappa) {
      out << ',';
      if (c.lock) out << format_double(c.kappa);
    }
    if (o.winding) {
      out << ',';
      if (c.winding) out << *c.winding;
    }
    if (o.xi0) {
      out << ',';
      if (c.error.empty()) out << format_double(c.xi0);
    }
    out << ',' << c.error << '\n';
  }
}

}  // namespace heunlock
