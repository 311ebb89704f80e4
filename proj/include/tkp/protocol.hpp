#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tkp/mub.hpp"
#include "tkp/numerics.hpp"

namespace tkp {

// ---------------------------------------------------------------------------
// Noise models

struct IdealNoise {};
struct WernerShared {
  double lambda;  // weight of the prepared state in the mix with I/d^2
};
struct OutcomeWhiteNoise {
  double p;  // weight of the uniform outcome distribution
};
struct OpticsBackend {
  double mode_match;  // photon indistinguishability of the gate, d = 2 only
};
using NoiseModel =
    std::variant<IdealNoise, WernerShared, OutcomeWhiteNoise, OpticsBackend>;

enum class NoiseStage { SharedState, ControlGate, OutcomeDistribution };

std::string noise_name(const NoiseModel& noise);
double noise_parameter(const NoiseModel& noise);
NoiseModel make_noise(const std::string& name, double parameter);
void validate_noise(const NoiseModel& noise);

// ---------------------------------------------------------------------------
// Analytic protocol steps

/// The King's nonselective measurement: projects one register onto the basis
/// labeled b and discards the outcome, leaving the dephased two-qudit state.
DensityOperator king_channel(const DensityOperator& rho, BasisLabel b, PrimeDim d);

/// Probabilities over Alice's outcome labels (c', r'), flattened as c'*d + r'.
struct OutcomeDistribution {
  int d = 0;
  std::vector<double> p;  // size d*d

  double cell(int c, int r) const { return p[c * d + r]; }
  int cells() const { return d * d; }
};

/// Distribution of Alice's control measurement in the basis {|c',r';s>}.
OutcomeDistribution alice_outcome_distribution(const DensityOperator& rho, int s,
                                               PrimeDim d);

struct DecodeResult {
  std::optional<BasisLabel> b;  // empty means inconclusive
  bool conclusive() const { return b.has_value(); }
  friend bool operator==(const DecodeResult&, const DecodeResult&) = default;
};

/// Maps an outcome (c', r') back to the King's basis choice.
DecodeResult decode(const EntangledLabel& initial, std::pair<int, int> outcome,
                    PrimeDim d);

/// Noiseless outcome distribution for every choice of b, indexed by b.code().
struct TheoreticalTable {
  PrimeDim d;
  EntangledLabel initial;
  std::vector<OutcomeDistribution> per_basis;  // size d + 1

  const OutcomeDistribution& for_basis(BasisLabel b) const {
    return per_basis[b.code()];
  }
  /// Cells carrying probability above kZeroBranchTol under the given b.
  std::vector<int> allowed_cells(BasisLabel b) const;
};

TheoreticalTable theoretical_table(PrimeDim d, const EntangledLabel& initial);

// ---------------------------------------------------------------------------
// Noise application

/// Shared-state stage: Werner mixing with the maximally mixed state.
DensityOperator apply_noise(NoiseStage stage, const NoiseModel& noise,
                            const DensityOperator& rho);
/// Outcome stage: mixing with the uniform distribution.
OutcomeDistribution apply_noise(NoiseStage stage, const NoiseModel& noise,
                                const OutcomeDistribution& q);

using ControlMeasurement = std::function<OutcomeDistribution(const DensityOperator&)>;

/// Control-gate stage: the optics backend swaps Alice's ideal readout for the
/// simulated coincidence analyzer (d = 2, s = 0 labels).
ControlMeasurement apply_noise(NoiseStage stage, const NoiseModel& noise,
                               ControlMeasurement ideal);

/// Full pipeline: prepare, mix, measure nonselectively, measure control
/// (ideal basis or optics backend), mix outcomes.
OutcomeDistribution noisy_outcome_distribution(PrimeDim d,
                                               const EntangledLabel& initial,
                                               BasisLabel b,
                                               const NoiseModel& noise);

// ---------------------------------------------------------------------------
// Monte Carlo trials

struct Scenario {
  PrimeDim d = PrimeDim(2);
  EntangledLabel initial;
  NoiseModel noise = IdealNoise{};
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;
};

struct UniformRandomSchedule {};
using BSchedule = std::variant<std::vector<BasisLabel>, UniformRandomSchedule>;

/// Decoded-basis key in confusion counts: b.code() when conclusive, -1 otherwise.
inline constexpr int kInconclusiveCode = -1;

struct TrialStats {
  int d = 0;
  std::uint64_t total_trials = 0;
  std::map<std::pair<int, int>, std::uint64_t> counts;     // (b code, cell)
  std::map<std::pair<int, int>, std::uint64_t> confusion;  // (b code, decode code)
  double conclusive_rate = 0.0;
  double reliability_expected_mass = 0.0;
  double reliability_conclusive_accuracy = 0.0;
  friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

/// Samples `scenario.shots` outcomes per schedule entry (or per trial with a
/// uniformly random b). Batch k draws from a generator seeded with
/// derive_seed(scenario.seed, k), so batches can run on any worker layout
/// without changing the result.
TrialStats run_trials(const Scenario& scenario, const BSchedule& schedule);

// ---------------------------------------------------------------------------
// Calibration

/// Mean over all d+1 choices of b of the probability mass that falls in
/// outcome cells allowed by the noiseless table.
double analytic_reliability(PrimeDim d, const EntangledLabel& initial,
                            const NoiseModel& noise);

class CalibrationRangeError : public std::domain_error {
 public:
  CalibrationRangeError(double lo, double hi);
  double achievable_low;
  double achievable_high;
};

struct CalibrationResult {
  NoiseModel noise;   // family with the calibrated parameter filled in
  double parameter;
  double achieved;
};

/// Bisects the family's parameter until the analytic reliability is within
/// 1e-3 of the target. `family` selects the noise variant; its parameter is
/// ignored. Throws CalibrationRangeError for unreachable targets.
CalibrationResult calibrate_noise(double target_reliability,
                                  const NoiseModel& family, PrimeDim d,
                                  const EntangledLabel& initial);

// ---------------------------------------------------------------------------
// Game mode

struct RoundDecision {
  DecodeResult guess;
  double confidence = 0.0;
};

/// Majority vote over decoded conclusive outcome cells. Ties go to the lowest
/// basis label; all-inconclusive counts yield an inconclusive guess.
RoundDecision decide_round(const std::vector<std::uint64_t>& cell_counts,
                           const EntangledLabel& initial, PrimeDim d);

struct RoundRecord {
  BasisLabel b_true;
  DecodeResult guess;
  double confidence;
  bool hit;
};

struct GameResult {
  std::vector<RoundRecord> rounds;
  double hit_rate = 0.0;
};

/// The King's input: a scripted list of choices or a per-round callback.
using KingInput =
    std::variant<std::vector<BasisLabel>, std::function<BasisLabel(int)>>;

/// Round k samples from a generator seeded with derive_seed(scenario.seed, k),
/// so transcripts depend only on the scenario and the King's choices. The
/// optional observer fires after each round (used for live game output).
GameResult run_game(int rounds, std::uint64_t shots_per_round,
                    const Scenario& scenario, const KingInput& king_input,
                    const std::function<void(const RoundRecord&)>& on_round = {});

}  // namespace tkp
