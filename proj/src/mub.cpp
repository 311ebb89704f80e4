#include "tkp/mub.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tkp {

namespace {

constexpr std::array<int, 5> kSupportedPrimes = {2, 3, 5, 7, 11};

long long mod_reduce(long long value, long long modulus) {
  long long r = value % modulus;
  return r < 0 ? r + modulus : r;
}

long long pow_mod(long long base, long long exponent, long long modulus) {
  long long result = 1;
  base = mod_reduce(base, modulus);
  while (exponent > 0) {
    if (exponent & 1) result = (result * base) % modulus;
    base = (base * base) % modulus;
    exponent >>= 1;
  }
  return result;
}

void check_residue(int x, PrimeDim d, const char* what) {
  if (x < 0 || x >= d.value()) {
    throw std::invalid_argument(std::string(what) + " out of range [0, d-1]");
  }
}

}  // namespace

PrimeDim::PrimeDim(int d) : d_(d) {
  for (int p : kSupportedPrimes) {
    if (p == d) return;
  }
  throw std::invalid_argument("dimension " + std::to_string(d) +
                              " is not a supported prime (2, 3, 5, 7, 11)");
}

BasisLabel BasisLabel::phase(int b) {
  if (b < 0) throw std::invalid_argument("phase basis index must be non-negative");
  return BasisLabel(b + 1);
}

int BasisLabel::phase_index() const {
  if (is_computational()) {
    throw std::logic_error("computational basis label has no phase index");
  }
  return code_ - 1;
}

BasisLabel BasisLabel::from_code(int code) {
  if (code < 0) throw std::invalid_argument("basis label code must be non-negative");
  return BasisLabel(code);
}

PhaseRoot phase_root(PrimeDim d) {
  if (d.value() == 2) {
    return PhaseRoot{Complex(0.0, 1.0), 4};
  }
  const double angle = 2.0 * std::numbers::pi / d.value();
  return PhaseRoot{std::polar(1.0, angle), d.value()};
}

Complex omega_power(const PhaseRoot& root, long long exponent) {
  const long long k = mod_reduce(exponent, root.exponent_modulus);
  if (root.exponent_modulus == 4) {
    // Exact powers of i.
    switch (k) {
      case 0: return Complex(1.0, 0.0);
      case 1: return Complex(0.0, 1.0);
      case 2: return Complex(-1.0, 0.0);
      default: return Complex(0.0, -1.0);
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                             root.exponent_modulus);
}

StateVector mub_state(PrimeDim d, BasisLabel b, int m) {
  check_residue(m, d, "basis vector index m");
  const int dim = d.value();
  Vector amps = Vector::Zero(dim);
  if (b.is_computational()) {
    amps(m) = Complex(1.0, 0.0);
    return StateVector(std::move(amps));
  }
  check_residue(b.phase_index(), d, "phase basis index b");
  const PhaseRoot root = phase_root(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (long long n = 0; n < dim; ++n) {
    const long long exponent = b.phase_index() * n * n - 2LL * m * n;
    amps(static_cast<int>(n)) = scale * omega_power(root, exponent);
  }
  return StateVector(std::move(amps));
}

StateVector entangled_state(PrimeDim d, const EntangledLabel& label) {
  check_residue(label.c, d, "label c");
  check_residue(label.r, d, "label r");
  check_residue(label.s, d, "label s");
  const int dim = d.value();
  const PhaseRoot root = phase_root(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Vector amps = Vector::Zero(dim * dim);
  for (long long n = 0; n < dim; ++n) {
    const long long partner = mod_reduce(label.c - n, dim);
    const long long exponent = label.s * n * n - 2LL * label.r * n;
    amps(static_cast<int>(n * dim + partner)) = scale * omega_power(root, exponent);
  }
  return StateVector(std::move(amps));
}

int gf_inverse(int x, PrimeDim d) {
  const int p = d.value();
  const int reduced = static_cast<int>(mod_reduce(x, p));
  if (reduced == 0) {
    throw std::domain_error("no inverse: " + std::to_string(x) +
                            " is 0 mod " + std::to_string(p));
  }
  return static_cast<int>(pow_mod(reduced, p - 2, p));
}

const std::array<BellDictionaryEntry, 4>& bell_coincidence_dictionary() {
  static const std::array<BellDictionaryEntry, 4> table = {{
      {0, 0, "phi+", "DV"},
      {0, 1, "phi-", "AV"},
      {1, 0, "psi+", "DH"},
      {1, 1, "psi-", "AH"},
  }};
  return table;
}

std::string coincidence_for_cell(int c, int r) {
  for (const auto& entry : bell_coincidence_dictionary()) {
    if (entry.c == c && entry.r == r) return entry.coincidence;
  }
  throw std::invalid_argument("cell outside the d=2 dictionary");
}

std::string bell_name_for_cell(int c, int r) {
  for (const auto& entry : bell_coincidence_dictionary()) {
    if (entry.c == c && entry.r == r) return entry.bell_name;
  }
  throw std::invalid_argument("cell outside the d=2 dictionary");
}

std::pair<int, int> cell_for_coincidence(const std::string& coincidence) {
  for (const auto& entry : bell_coincidence_dictionary()) {
    if (entry.coincidence == coincidence) return {entry.c, entry.r};
  }
  throw std::invalid_argument("unknown coincidence label " + coincidence);
}

}  // namespace tkp
