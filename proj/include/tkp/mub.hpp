#pragma once

#include <array>
#include <compare>
#include <string>

#include "tkp/numerics.hpp"

namespace tkp {

/// Prime qudit dimension, restricted to 2..11.
class PrimeDim {
 public:
  explicit PrimeDim(int d);
  int value() const { return d_; }
  friend bool operator==(PrimeDim a, PrimeDim b) { return a.d_ == b.d_; }

 private:
  int d_;
};

/// Measurement-basis label: the computational basis or one of the d phase bases.
class BasisLabel {
 public:
  static BasisLabel computational() { return BasisLabel(0); }
  static BasisLabel phase(int b);

  bool is_computational() const { return code_ == 0; }
  /// Valid only for phase labels.
  int phase_index() const;

  /// Total order used for tie-breaking: computational first, then phase 0, 1, ...
  int code() const { return code_; }
  static BasisLabel from_code(int code);

  friend auto operator<=>(BasisLabel a, BasisLabel b) = default;

 private:
  explicit BasisLabel(int code) : code_(code) {}
  int code_;
};

/// Coordinates (c, r, s) of one maximally entangled basis state.
struct EntangledLabel {
  int c = 0;
  int r = 0;
  int s = 0;
  friend bool operator==(const EntangledLabel&, const EntangledLabel&) = default;
};

/// Primitive root of unity used in the basis constructions, together with the
/// modulus its exponents are reduced by.
struct PhaseRoot {
  Complex omega;
  int exponent_modulus;
};

/// d = 2 uses omega = i with exponents mod 4; odd primes use exp(2*pi*i/d) mod d.
PhaseRoot phase_root(PrimeDim d);

/// omega^exponent with exact integer reduction of the exponent.
Complex omega_power(const PhaseRoot& root, long long exponent);

/// m-th vector of the basis labeled b.
StateVector mub_state(PrimeDim d, BasisLabel b, int m);

/// |c,r;s> = (1/sqrt(d)) sum_n omega^(s n^2 - 2 r n) |n>|c-n mod d>.
StateVector entangled_state(PrimeDim d, const EntangledLabel& label);

/// Multiplicative inverse of x mod d; throws for x = 0 mod d.
int gf_inverse(int x, PrimeDim d);

/// One row of the frozen d=2 correspondence between entangled labels (s = 0),
/// Bell-state names and coincidence detector labels.
struct BellDictionaryEntry {
  int c;
  int r;
  const char* bell_name;
  const char* coincidence;
};

/// The four-entry bijection (0,0)-phi+-DV, (0,1)-phi--AV, (1,0)-psi+-DH, (1,1)-psi--AH.
const std::array<BellDictionaryEntry, 4>& bell_coincidence_dictionary();

/// Helpers over the dictionary. Cell index is c*2 + r.
std::string coincidence_for_cell(int c, int r);
std::string bell_name_for_cell(int c, int r);
std::pair<int, int> cell_for_coincidence(const std::string& coincidence);

}  // namespace tkp
