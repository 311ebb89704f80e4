#pragma once

#include <array>
#include <variant>
#include <vector>

#include "tkp/mub.hpp"
#include "tkp/numerics.hpp"

namespace tkp {
namespace optics {

// Spatial modes: the two detected arms plus one discard port per arm.
enum class Port { Control = 0, Target = 1, AuxControl = 2, AuxTarget = 3 };
enum class Pol { H = 0, V = 1 };

inline constexpr int kPorts = 4;
inline constexpr int kPols = 2;
inline constexpr int kInternals = 2;  // orthogonal internal wavepacket states
inline constexpr int kModes = kPorts * kPols * kInternals;

inline int mode_index(Port port, Pol pol, int internal) {
  return (static_cast<int>(port) * kPols + static_cast<int>(pol)) * kInternals +
         internal;
}

/// Intensity reflectivities of a partial polarization beam splitter.
struct PpbsSpec {
  double reflectivity_h;
  double reflectivity_v;
};

inline PpbsSpec ppbs_one() { return {1.0 / 3.0, 1.0}; }
inline PpbsSpec ppbs_two() { return {0.0, 2.0 / 3.0}; }

/// Two photons over (port, polarization, internal) modes, stored as the
/// symmetric coefficient matrix of a_m^dag a_n^dag |vac>. Amplitudes are
/// indexed by unordered mode pairs with bosonic normalization for m = n.
class TwoPhotonState {
 public:
  TwoPhotonState();

  /// Adds `amp` to the amplitude of unordered pair {m, n}.
  void add_pair(int m, int n, Complex amp);
  Complex pair_amplitude(int m, int n) const;

  /// Sum of |amplitude|^2 over all unordered pairs. 1 for lossless circuits.
  double total_probability() const;

  void apply_mode_unitary(const Matrix& u);

 private:
  Matrix coeff_;  // kModes x kModes, symmetric
};

/// Two-port beam-splitter action, polarization by polarization: reflection
/// keeps the port (amplitude i*sqrt(r)), transmission crosses (sqrt(1-r)).
/// Both internal modes transform identically.
TwoPhotonState ppbs_apply(const TwoPhotonState& state, const PpbsSpec& spec,
                          Port a, Port b);

/// Relabels two spatial ports (used to keep the transmitted beam in its arm).
TwoPhotonState swap_ports(const TwoPhotonState& state, Port a, Port b);

/// Single-photon polarization rotation applied inside one spatial port.
TwoPhotonState apply_polarization(const TwoPhotonState& state, Port port,
                                  const Eigen::Matrix2cd& u);

struct PpbsElement {
  PpbsSpec spec;
  Port a;
  Port b;
};
struct SwapElement {
  Port a;
  Port b;
};
struct PolElement {
  Port port;
  Eigen::Matrix2cd u;
};
using CircuitElement = std::variant<PpbsElement, SwapElement, PolElement>;

struct OpticalCircuit {
  std::vector<CircuitElement> elements;
  TwoPhotonState apply(TwoPhotonState state) const;
};

/// The post-selected gate: target-basis rotation, central PPBS, one loss
/// compensator per arm, inverse rotation and the fixed control phase. At full
/// mode match the coincidence action is the controlled-not with success
/// amplitude 1/3.
OpticalCircuit build_cnot_circuit();

struct CnotResult {
  DensityOperator state;  // post-selected two-qubit state, |0> = V, |1> = H
  double success_probability;
};

/// Propagates a two-qubit polarization state through the gate with partial
/// mode match and post-selects one photon per detected arm.
CnotResult run_cnot(const DensityOperator& input, double mode_match);
CnotResult run_cnot(const StateVector& input, double mode_match);

struct HomCurve {
  std::vector<double> delays;
  std::vector<double> coincidences;
  double visibility;
};

/// Coincidence rate of two H photons versus relative delay; the overlap decays
/// as a Gaussian of the given width around full match M0.
HomCurve hom_scan(const std::vector<double>& delays, double m0, double width,
                  const PpbsSpec& spec);

struct GateTruthTable {
  // probabilities(input, outcome) over computational two-qubit labels
  Eigen::Matrix4d probabilities;
  double average_fidelity;
};

GateTruthTable truth_table(double mode_match);

/// Coincidence outcomes in detection order DV, AV, DH, AH.
inline constexpr std::array<const char*, 4> kCoincidenceLabels = {"DV", "AV",
                                                                  "DH", "AH"};

/// Alice's four coincidence probabilities for a given pre-measurement state:
/// the gate runs at the given mode match, then the control arm is read in
/// {D, A} and the target arm in {H, V}.
std::array<double, 4> effective_control_measurement(const DensityOperator& rho,
                                                    double mode_match);

/// Coincidence distribution for each of the four Bell inputs (rows in
/// dictionary order phi+, phi-, psi+, psi-).
std::array<std::array<double, 4>, 4> bell_table(double mode_match);

}  // namespace optics
}  // namespace tkp
