#include "tkp/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace tkp {
namespace optics {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::Matrix2cd hadamard_pol() {
  Eigen::Matrix2cd h;
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

Eigen::Matrix2cd z_pol() {
  Eigen::Matrix2cd z;
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

void check_fraction(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

Matrix element_unitary(const CircuitElement& element) {
  Matrix u = Matrix::Identity(kModes, kModes);
  if (const auto* ppbs = std::get_if<PpbsElement>(&element)) {
    if (ppbs->a == ppbs->b) throw std::invalid_argument("ppbs ports must differ");
    const std::array<double, 2> refl = {ppbs->spec.reflectivity_h,
                                        ppbs->spec.reflectivity_v};
    for (int pol = 0; pol < kPols; ++pol) {
      const double r = refl[pol];
      check_fraction(r, "reflectivity");
      const Complex reflect = kI * std::sqrt(r);
      const Complex transmit = std::sqrt(1.0 - r);
      for (int internal = 0; internal < kInternals; ++internal) {
        const int ma = mode_index(ppbs->a, static_cast<Pol>(pol), internal);
        const int mb = mode_index(ppbs->b, static_cast<Pol>(pol), internal);
        u(ma, ma) = reflect;
        u(mb, mb) = reflect;
        u(ma, mb) = transmit;
        u(mb, ma) = transmit;
      }
    }
  } else if (const auto* swap = std::get_if<SwapElement>(&element)) {
    for (int pol = 0; pol < kPols; ++pol) {
      for (int internal = 0; internal < kInternals; ++internal) {
        const int ma = mode_index(swap->a, static_cast<Pol>(pol), internal);
        const int mb = mode_index(swap->b, static_cast<Pol>(pol), internal);
        u(ma, ma) = 0.0;
        u(mb, mb) = 0.0;
        u(ma, mb) = 1.0;
        u(mb, ma) = 1.0;
      }
    }
  } else {
    const auto& rot = std::get<PolElement>(element);
    for (int internal = 0; internal < kInternals; ++internal) {
      const int mh = mode_index(rot.port, Pol::H, internal);
      const int mv = mode_index(rot.port, Pol::V, internal);
      u(mh, mh) = rot.u(0, 0);
      u(mh, mv) = rot.u(0, 1);
      u(mv, mh) = rot.u(1, 0);
      u(mv, mv) = rot.u(1, 1);
    }
  }
  return u;
}

Pol pol_of_qubit(int q) { return q == 1 ? Pol::H : Pol::V; }

/// Embeds a two-qubit amplitude matrix into the photonic input state. The
/// control photon defines the internal reference axis; the target photon
/// overlaps it by sqrt(mode_match).
TwoPhotonState embed_pure(const Vector& qubit_amps, double mode_match) {
  TwoPhotonState state;
  const double match = std::sqrt(mode_match);
  const double mismatch = std::sqrt(1.0 - mode_match);
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Complex amp = qubit_amps(j * 2 + k);
      if (amp == Complex(0.0, 0.0)) continue;
      const int control = mode_index(Port::Control, pol_of_qubit(j), 0);
      state.add_pair(control, mode_index(Port::Target, pol_of_qubit(k), 0),
                     amp * match);
      if (mismatch > 0.0) {
        state.add_pair(control, mode_index(Port::Target, pol_of_qubit(k), 1),
                       amp * mismatch);
      }
    }
  }
  return state;
}

}  // namespace

TwoPhotonState::TwoPhotonState() : coeff_(Matrix::Zero(kModes, kModes)) {}

void TwoPhotonState::add_pair(int m, int n, Complex amp) {
  if (m < 0 || m >= kModes || n < 0 || n >= kModes) {
    throw std::invalid_argument("mode index out of range");
  }
  if (m == n) {
    coeff_(m, m) += amp / std::sqrt(2.0);
  } else {
    coeff_(m, n) += amp * 0.5;
    coeff_(n, m) += amp * 0.5;
  }
}

Complex TwoPhotonState::pair_amplitude(int m, int n) const {
  if (m == n) return std::sqrt(2.0) * coeff_(m, m);
  return coeff_(m, n) + coeff_(n, m);
}

double TwoPhotonState::total_probability() const {
  return 2.0 * coeff_.squaredNorm();
}

void TwoPhotonState::apply_mode_unitary(const Matrix& u) {
  coeff_ = u * coeff_ * u.transpose();
}

TwoPhotonState ppbs_apply(const TwoPhotonState& state, const PpbsSpec& spec,
                          Port a, Port b) {
  TwoPhotonState out = state;
  out.apply_mode_unitary(element_unitary(PpbsElement{spec, a, b}));
  return out;
}

TwoPhotonState swap_ports(const TwoPhotonState& state, Port a, Port b) {
  TwoPhotonState out = state;
  out.apply_mode_unitary(element_unitary(SwapElement{a, b}));
  return out;
}

TwoPhotonState apply_polarization(const TwoPhotonState& state, Port port,
                                  const Eigen::Matrix2cd& u) {
  TwoPhotonState out = state;
  out.apply_mode_unitary(element_unitary(PolElement{port, u}));
  return out;
}

TwoPhotonState OpticalCircuit::apply(TwoPhotonState state) const {
  for (const auto& element : elements) {
    state.apply_mode_unitary(element_unitary(element));
  }
  return state;
}

OpticalCircuit build_cnot_circuit() {
  OpticalCircuit circuit;
  circuit.elements = {
      PolElement{Port::Target, hadamard_pol()},
      PpbsElement{ppbs_one(), Port::Control, Port::Target},
      // Loss compensators: the transmitted beam continues in its arm, the
      // reflected V fraction leaves through the aux port.
      PpbsElement{ppbs_two(), Port::Control, Port::AuxControl},
      SwapElement{Port::Control, Port::AuxControl},
      PpbsElement{ppbs_two(), Port::Target, Port::AuxTarget},
      SwapElement{Port::Target, Port::AuxTarget},
      PolElement{Port::Target, hadamard_pol()},
      PolElement{Port::Control, z_pol()},
  };
  return circuit;
}

CnotResult run_cnot(const DensityOperator& input, double mode_match) {
  check_fraction(mode_match, "mode match");
  if (input.dim() != 4) {
    throw std::invalid_argument("gate input must be a two-qubit state");
  }
  const OpticalCircuit circuit = build_cnot_circuit();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(input.matrix());
  Matrix unnormalized = Matrix::Zero(4, 4);
  for (int e = 0; e < 4; ++e) {
    const double weight = solver.eigenvalues()(e);
    if (weight < 1e-14) continue;
    const TwoPhotonState out =
        circuit.apply(embed_pure(solver.eigenvectors().col(e), mode_match));

    // Coincidence block: one photon in each detected arm, internal modes kept.
    Eigen::Matrix<Complex, 4, 4> psi;  // (pol_c, pol_t) x (i1, i2)
    for (int pc = 0; pc < 2; ++pc) {
      for (int pt = 0; pt < 2; ++pt) {
        for (int i1 = 0; i1 < 2; ++i1) {
          for (int i2 = 0; i2 < 2; ++i2) {
            psi(pc * 2 + pt, i1 * 2 + i2) = out.pair_amplitude(
                mode_index(Port::Control, static_cast<Pol>(pc), i1),
                mode_index(Port::Target, static_cast<Pol>(pt), i2));
          }
        }
      }
    }
    // Trace out the internal modes; map polarization (H, V) to qubits (1, 0).
    auto qubit_index = [](int pc, int pt) {
      return (pc == 0 ? 1 : 0) * 2 + (pt == 0 ? 1 : 0);
    };
    for (int pc = 0; pc < 2; ++pc) {
      for (int pt = 0; pt < 2; ++pt) {
        for (int pc2 = 0; pc2 < 2; ++pc2) {
          for (int pt2 = 0; pt2 < 2; ++pt2) {
            Complex sum = 0.0;
            for (int internal = 0; internal < 4; ++internal) {
              sum += psi(pc * 2 + pt, internal) *
                     std::conj(psi(pc2 * 2 + pt2, internal));
            }
            unnormalized(qubit_index(pc, pt), qubit_index(pc2, pt2)) +=
                weight * sum;
          }
        }
      }
    }
  }

  const double success = std::real(unnormalized.trace());
  if (success <= kZeroBranchTol) {
    throw std::runtime_error("gate output has no coincidence support");
  }
  return CnotResult{DensityOperator::from_matrix(unnormalized / success),
                    success};
}

CnotResult run_cnot(const StateVector& input, double mode_match) {
  return run_cnot(DensityOperator::from_pure(input), mode_match);
}

HomCurve hom_scan(const std::vector<double>& delays, double m0, double width,
                  const PpbsSpec& spec) {
  check_fraction(m0, "mode match");
  if (!(width > 0.0)) throw std::invalid_argument("width must be positive");

  HomCurve curve;
  curve.delays = delays;
  curve.coincidences.reserve(delays.size());
  const int c_ref = mode_index(Port::Control, Pol::H, 0);
  for (double delay : delays) {
    const double match = m0 * std::exp(-delay * delay / (2.0 * width * width));
    TwoPhotonState state;
    state.add_pair(c_ref, mode_index(Port::Target, Pol::H, 0), std::sqrt(match));
    if (match < 1.0) {
      state.add_pair(c_ref, mode_index(Port::Target, Pol::H, 1),
                     std::sqrt(1.0 - match));
    }
    state = ppbs_apply(state, spec, Port::Control, Port::Target);

    double coincidence = 0.0;
    for (int pc = 0; pc < 2; ++pc) {
      for (int pt = 0; pt < 2; ++pt) {
        for (int i1 = 0; i1 < 2; ++i1) {
          for (int i2 = 0; i2 < 2; ++i2) {
            coincidence += std::norm(state.pair_amplitude(
                mode_index(Port::Control, static_cast<Pol>(pc), i1),
                mode_index(Port::Target, static_cast<Pol>(pt), i2)));
          }
        }
      }
    }
    curve.coincidences.push_back(coincidence);
  }

  double lo = 0.0;
  double hi = 0.0;
  if (!curve.coincidences.empty()) {
    lo = *std::min_element(curve.coincidences.begin(), curve.coincidences.end());
    hi = *std::max_element(curve.coincidences.begin(), curve.coincidences.end());
  }
  curve.visibility = hi > 0.0 ? (hi - lo) / hi : 0.0;
  return curve;
}

GateTruthTable truth_table(double mode_match) {
  GateTruthTable table;
  double fidelity_sum = 0.0;
  for (int input = 0; input < 4; ++input) {
    Vector amps = Vector::Zero(4);
    amps(input) = 1.0;
    const CnotResult result = run_cnot(StateVector(std::move(amps)), mode_match);
    for (int outcome = 0; outcome < 4; ++outcome) {
      table.probabilities(input, outcome) =
          std::real(result.state.matrix()(outcome, outcome));
    }
    const int expected = (input & 2) ? input ^ 1 : input;  // flip target on control 1
    fidelity_sum += table.probabilities(input, expected);
  }
  table.average_fidelity = fidelity_sum / 4.0;
  return table;
}

std::array<double, 4> effective_control_measurement(const DensityOperator& rho,
                                                    double mode_match) {
  const CnotResult result = run_cnot(rho, mode_match);

  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd d_state(s, s);    // (|0> + |1>)/sqrt(2)
  Eigen::Vector2cd a_state(s, -s);   // (|0> - |1>)/sqrt(2)
  Eigen::Vector2cd v_state(1.0, 0.0);
  Eigen::Vector2cd h_state(0.0, 1.0);

  auto probability = [&](const Eigen::Vector2cd& control,
                         const Eigen::Vector2cd& target) {
    Vector joint(4);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) joint(j * 2 + k) = control(j) * target(k);
    const Complex value = joint.dot(result.state.matrix() * joint);
    return std::clamp(std::real(value), 0.0, 1.0);
  };

  // Order matches kCoincidenceLabels: DV, AV, DH, AH.
  return {probability(d_state, v_state), probability(a_state, v_state),
          probability(d_state, h_state), probability(a_state, h_state)};
}

std::array<std::array<double, 4>, 4> bell_table(double mode_match) {
  std::array<std::array<double, 4>, 4> rows;
  const PrimeDim two(2);
  int row = 0;
  for (const auto& entry : bell_coincidence_dictionary()) {
    const StateVector bell = entangled_state(two, {entry.c, entry.r, 0});
    rows[row++] = effective_control_measurement(DensityOperator::from_pure(bell),
                                                mode_match);
  }
  return rows;
}

}  // namespace optics
}  // namespace tkp
