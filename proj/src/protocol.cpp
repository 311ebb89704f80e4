#include "tkp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "tkp/optics.hpp"
#include "tkp/rng.hpp"

namespace tkp {

namespace {

void check_fraction(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

std::vector<StateVector> alice_basis(PrimeDim d, int s) {
  std::vector<StateVector> basis;
  basis.reserve(d.value() * d.value());
  for (int c = 0; c < d.value(); ++c) {
    for (int r = 0; r < d.value(); ++r) {
      basis.push_back(entangled_state(d, {c, r, s}));
    }
  }
  return basis;
}

/// Outcome distribution of the four-coincidence optics measurement, mapped to
/// Alice's (c', r') cells through the frozen dictionary. Requires d = 2.
OutcomeDistribution optics_outcome_distribution(const DensityOperator& rho,
                                                double mode_match) {
  const auto coincidences = optics::effective_control_measurement(rho, mode_match);
  OutcomeDistribution dist;
  dist.d = 2;
  dist.p.assign(4, 0.0);
  for (size_t i = 0; i < coincidences.size(); ++i) {
    const auto [c, r] = cell_for_coincidence(optics::kCoincidenceLabels[i]);
    dist.p[c * 2 + r] = coincidences[i];
  }
  return dist;
}

struct BatchAccumulator {
  std::map<std::pair<int, int>, std::uint64_t> counts;
  std::map<std::pair<int, int>, std::uint64_t> confusion;
  std::uint64_t conclusive = 0;
  std::uint64_t expected_mass_hits = 0;
  std::uint64_t conclusive_correct = 0;
  std::uint64_t trials = 0;

  void merge(const BatchAccumulator& other) {
    for (const auto& [key, value] : other.counts) counts[key] += value;
    for (const auto& [key, value] : other.confusion) confusion[key] += value;
    conclusive += other.conclusive;
    expected_mass_hits += other.expected_mass_hits;
    conclusive_correct += other.conclusive_correct;
    trials += other.trials;
  }
};

struct TrialContext {
  PrimeDim d;
  EntangledLabel initial;
  std::vector<OutcomeDistribution> noisy;        // per b code
  std::vector<std::vector<bool>> allowed;        // per b code, per cell
  std::vector<DecodeResult> decoded;             // per cell
};

TrialContext make_trial_context(const Scenario& scenario) {
  const int d = scenario.d.value();
  TrialContext ctx{scenario.d, scenario.initial, {}, {}, {}};
  const TheoreticalTable ideal = theoretical_table(scenario.d, scenario.initial);
  ctx.noisy.reserve(d + 1);
  ctx.allowed.reserve(d + 1);
  for (int code = 0; code <= d; ++code) {
    const BasisLabel b = BasisLabel::from_code(code);
    ctx.noisy.push_back(
        noisy_outcome_distribution(scenario.d, scenario.initial, b, scenario.noise));
    std::vector<bool> mask(d * d, false);
    for (int cell : ideal.allowed_cells(b)) mask[cell] = true;
    ctx.allowed.push_back(std::move(mask));
  }
  ctx.decoded.reserve(d * d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) {
      ctx.decoded.push_back(decode(scenario.initial, {c, r}, scenario.d));
    }
  }
  return ctx;
}

void record_trial(BatchAccumulator& acc, const TrialContext& ctx, int b_code,
                  int cell) {
  acc.trials += 1;
  acc.counts[{b_code, cell}] += 1;
  const DecodeResult& verdict = ctx.decoded[cell];
  const int decode_code = verdict.conclusive() ? verdict.b->code() : kInconclusiveCode;
  acc.confusion[{b_code, decode_code}] += 1;
  if (verdict.conclusive()) {
    acc.conclusive += 1;
    if (decode_code == b_code) acc.conclusive_correct += 1;
  }
  if (ctx.allowed[b_code][cell]) acc.expected_mass_hits += 1;
}

BatchAccumulator run_batch(const TrialContext& ctx, int b_code,
                           std::uint64_t shots, std::uint64_t seed) {
  BatchAccumulator acc;
  std::mt19937_64 gen(seed);
  const OutcomeDistribution& dist = ctx.noisy[b_code];
  for (std::uint64_t t = 0; t < shots; ++t) {
    const int cell = static_cast<int>(sample_index(dist.p, gen));
    record_trial(acc, ctx, b_code, cell);
  }
  return acc;
}

TrialStats finalize(const TrialContext& ctx, const BatchAccumulator& acc) {
  TrialStats stats;
  stats.d = ctx.d.value();
  stats.total_trials = acc.trials;
  stats.counts = acc.counts;
  stats.confusion = acc.confusion;
  const double total = static_cast<double>(acc.trials);
  stats.conclusive_rate = total > 0 ? acc.conclusive / total : 0.0;
  stats.reliability_expected_mass =
      total > 0 ? acc.expected_mass_hits / total : 0.0;
  stats.reliability_conclusive_accuracy =
      acc.conclusive > 0
          ? acc.conclusive_correct / static_cast<double>(acc.conclusive)
          : 0.0;
  return stats;
}

}  // namespace

std::string noise_name(const NoiseModel& noise) {
  if (std::holds_alternative<IdealNoise>(noise)) return "ideal";
  if (std::holds_alternative<WernerShared>(noise)) return "werner";
  if (std::holds_alternative<OutcomeWhiteNoise>(noise)) return "outcome-white";
  return "optics";
}

double noise_parameter(const NoiseModel& noise) {
  if (const auto* werner = std::get_if<WernerShared>(&noise)) return werner->lambda;
  if (const auto* white = std::get_if<OutcomeWhiteNoise>(&noise)) return white->p;
  if (const auto* backend = std::get_if<OpticsBackend>(&noise))
    return backend->mode_match;
  return 0.0;
}

NoiseModel make_noise(const std::string& name, double parameter) {
  NoiseModel noise;
  if (name == "ideal") {
    noise = IdealNoise{};
  } else if (name == "werner") {
    noise = WernerShared{parameter};
  } else if (name == "outcome-white") {
    noise = OutcomeWhiteNoise{parameter};
  } else if (name == "optics") {
    noise = OpticsBackend{parameter};
  } else {
    throw std::invalid_argument("unknown noise model '" + name + "'");
  }
  validate_noise(noise);
  return noise;
}

void validate_noise(const NoiseModel& noise) {
  if (const auto* werner = std::get_if<WernerShared>(&noise)) {
    check_fraction(werner->lambda, "werner lambda");
  } else if (const auto* white = std::get_if<OutcomeWhiteNoise>(&noise)) {
    check_fraction(white->p, "outcome noise p");
  } else if (const auto* backend = std::get_if<OpticsBackend>(&noise)) {
    check_fraction(backend->mode_match, "mode match");
  }
}

DensityOperator king_channel(const DensityOperator& rho, BasisLabel b, PrimeDim d) {
  const int dim = d.value();
  if (rho.dim() != dim * dim) {
    throw std::invalid_argument("state dimension does not match d^2");
  }
  // The projectors act on register 1. This is the convention under which the
  // decoding table b = s + (r - r')/(c' - c) is exact; for the maximally
  // entangled inputs of the protocol the outcome statistics coincide with
  // measuring register 2 in the transposed basis.
  const Matrix identity = Matrix::Identity(dim, dim);
  Matrix out = Matrix::Zero(dim * dim, dim * dim);
  for (int m = 0; m < dim; ++m) {
    const StateVector vec = mub_state(d, b, m);
    const Matrix projector = vec.amplitudes() * vec.amplitudes().adjoint();
    const Matrix lifted = tensor_product(projector, identity);
    out += lifted * rho.matrix() * lifted;
  }
  return DensityOperator::from_matrix(std::move(out));
}

OutcomeDistribution alice_outcome_distribution(const DensityOperator& rho, int s,
                                               PrimeDim d) {
  OutcomeDistribution dist;
  dist.d = d.value();
  dist.p = born_probabilities(rho, alice_basis(d, s));
  return dist;
}

DecodeResult decode(const EntangledLabel& initial, std::pair<int, int> outcome,
                    PrimeDim d) {
  const int dim = d.value();
  const auto [c_out, r_out] = outcome;
  if (c_out < 0 || c_out >= dim || r_out < 0 || r_out >= dim) {
    throw std::invalid_argument("outcome labels out of range");
  }
  if (initial.c != c_out) {
    const int dc = ((c_out - initial.c) % dim + dim) % dim;
    const int dr = ((initial.r - r_out) % dim + dim) % dim;
    const int b = (initial.s + dr * gf_inverse(dc, d)) % dim;
    return DecodeResult{BasisLabel::phase(b)};
  }
  if (initial.r != r_out) {
    return DecodeResult{BasisLabel::computational()};
  }
  return DecodeResult{std::nullopt};
}

std::vector<int> TheoreticalTable::allowed_cells(BasisLabel b) const {
  std::vector<int> cells;
  const OutcomeDistribution& dist = for_basis(b);
  for (int cell = 0; cell < dist.cells(); ++cell) {
    if (dist.p[cell] > kZeroBranchTol) cells.push_back(cell);
  }
  return cells;
}

TheoreticalTable theoretical_table(PrimeDim d, const EntangledLabel& initial) {
  TheoreticalTable table{d, initial, {}};
  const DensityOperator prepared =
      DensityOperator::from_pure(entangled_state(d, initial));
  table.per_basis.reserve(d.value() + 1);
  for (int code = 0; code <= d.value(); ++code) {
    const BasisLabel b = BasisLabel::from_code(code);
    table.per_basis.push_back(
        alice_outcome_distribution(king_channel(prepared, b, d), initial.s, d));
  }
  return table;
}

DensityOperator apply_noise(NoiseStage stage, const NoiseModel& noise,
                            const DensityOperator& rho) {
  if (std::holds_alternative<IdealNoise>(noise)) return rho;
  if (stage != NoiseStage::SharedState ||
      !std::holds_alternative<WernerShared>(noise)) {
    throw std::invalid_argument("noise model does not apply to this stage");
  }
  const double lambda = std::get<WernerShared>(noise).lambda;
  check_fraction(lambda, "werner lambda");
  const Matrix mixed = lambda * rho.matrix() +
                       (1.0 - lambda) *
                           Matrix::Identity(rho.dim(), rho.dim()) /
                           static_cast<double>(rho.dim());
  return DensityOperator::from_matrix(mixed);
}

OutcomeDistribution apply_noise(NoiseStage stage, const NoiseModel& noise,
                                const OutcomeDistribution& q) {
  if (std::holds_alternative<IdealNoise>(noise)) return q;
  if (stage != NoiseStage::OutcomeDistribution ||
      !std::holds_alternative<OutcomeWhiteNoise>(noise)) {
    throw std::invalid_argument("noise model does not apply to this stage");
  }
  const double p = std::get<OutcomeWhiteNoise>(noise).p;
  check_fraction(p, "outcome noise p");
  OutcomeDistribution out = q;
  const double uniform = 1.0 / q.cells();
  for (double& value : out.p) value = (1.0 - p) * value + p * uniform;
  return out;
}

OutcomeDistribution noisy_outcome_distribution(PrimeDim d,
                                               const EntangledLabel& initial,
                                               BasisLabel b,
                                               const NoiseModel& noise) {
  validate_noise(noise);
  DensityOperator prepared = DensityOperator::from_pure(entangled_state(d, initial));
  if (std::holds_alternative<WernerShared>(noise)) {
    prepared = apply_noise(NoiseStage::SharedState, noise, prepared);
  }
  const DensityOperator after_king = king_channel(prepared, b, d);

  OutcomeDistribution dist;
  if (const auto* backend = std::get_if<OpticsBackend>(&noise)) {
    if (d.value() != 2 || initial.s != 0) {
      throw std::invalid_argument(
          "optics backend models the d=2, s=0 coincidence analyzer only");
    }
    dist = optics_outcome_distribution(after_king, backend->mode_match);
  } else {
    dist = alice_outcome_distribution(after_king, initial.s, d);
  }

  if (std::holds_alternative<OutcomeWhiteNoise>(noise)) {
    dist = apply_noise(NoiseStage::OutcomeDistribution, noise, dist);
  }
  return dist;
}

TrialStats run_trials(const Scenario& scenario, const BSchedule& schedule) {
  if (scenario.shots < 1) throw std::invalid_argument("shots must be >= 1");
  const TrialContext ctx = make_trial_context(scenario);

  BatchAccumulator total;
  if (const auto* list = std::get_if<std::vector<BasisLabel>>(&schedule)) {
    if (list->empty()) throw std::invalid_argument("empty basis schedule");
    std::vector<std::future<BatchAccumulator>> futures;
    futures.reserve(list->size());
    for (size_t k = 0; k < list->size(); ++k) {
      const int b_code = (*list)[k].code();
      if (b_code > scenario.d.value()) {
        throw std::invalid_argument("basis label outside the d+1 choices");
      }
      futures.push_back(std::async(std::launch::async, run_batch, std::cref(ctx),
                                   b_code, scenario.shots,
                                   derive_seed(scenario.seed, k)));
    }
    for (auto& future : futures) total.merge(future.get());
  } else {
    // One batch; the King's choice is drawn uniformly per trial.
    std::mt19937_64 gen(derive_seed(scenario.seed, 0));
    const int choices = scenario.d.value() + 1;
    for (std::uint64_t t = 0; t < scenario.shots; ++t) {
      const int b_code = std::min(
          static_cast<int>(uniform_unit(gen) * choices), choices - 1);
      const int cell = static_cast<int>(sample_index(ctx.noisy[b_code].p, gen));
      record_trial(total, ctx, b_code, cell);
    }
  }
  return finalize(ctx, total);
}

double analytic_reliability(PrimeDim d, const EntangledLabel& initial,
                            const NoiseModel& noise) {
  const TheoreticalTable ideal = theoretical_table(d, initial);
  double sum = 0.0;
  for (int code = 0; code <= d.value(); ++code) {
    const BasisLabel b = BasisLabel::from_code(code);
    const OutcomeDistribution dist =
        noisy_outcome_distribution(d, initial, b, noise);
    for (int cell : ideal.allowed_cells(b)) sum += dist.p[cell];
  }
  return sum / (d.value() + 1);
}

CalibrationRangeError::CalibrationRangeError(double lo, double hi)
    : std::domain_error("target reliability outside achievable range [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]"),
      achievable_low(lo),
      achievable_high(hi) {}

CalibrationResult calibrate_noise(double target_reliability,
                                  const NoiseModel& family, PrimeDim d,
                                  const EntangledLabel& initial) {
  if (std::holds_alternative<IdealNoise>(family)) {
    throw std::invalid_argument("the ideal model has no parameter to calibrate");
  }
  auto with_parameter = [&](double value) {
    return make_noise(noise_name(family), value);
  };
  auto reliability_at = [&](double value) {
    return analytic_reliability(d, initial, with_parameter(value));
  };

  const double at_zero = reliability_at(0.0);
  const double at_one = reliability_at(1.0);
  const double lo = std::min(at_zero, at_one);
  const double hi = std::max(at_zero, at_one);
  constexpr double kTolerance = 1e-3;
  if (target_reliability < lo - kTolerance || target_reliability > hi + kTolerance) {
    throw CalibrationRangeError(lo, hi);
  }

  double left = 0.0;
  double right = 1.0;
  const bool increasing = at_one >= at_zero;
  for (int iteration = 0; iteration < 200; ++iteration) {
    const double mid = 0.5 * (left + right);
    const double value = reliability_at(mid);
    if (std::abs(value - target_reliability) <= kTolerance &&
        right - left < 1e-9) {
      break;
    }
    const bool go_right = increasing ? (value < target_reliability)
                                     : (value > target_reliability);
    (go_right ? left : right) = mid;
    if (right - left < 1e-12) break;
  }
  const double parameter = 0.5 * (left + right);
  const double achieved = reliability_at(parameter);
  if (std::abs(achieved - target_reliability) > kTolerance) {
    throw CalibrationRangeError(lo, hi);
  }
  return CalibrationResult{with_parameter(parameter), parameter, achieved};
}

RoundDecision decide_round(const std::vector<std::uint64_t>& cell_counts,
                           const EntangledLabel& initial, PrimeDim d) {
  const int dim = d.value();
  if (static_cast<int>(cell_counts.size()) != dim * dim) {
    throw std::invalid_argument("cell counts must cover all d^2 outcomes");
  }
  std::vector<std::uint64_t> votes(dim + 1, 0);
  std::uint64_t conclusive_total = 0;
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) {
      const std::uint64_t count = cell_counts[c * dim + r];
      if (count == 0) continue;
      const DecodeResult verdict = decode(initial, {c, r}, d);
      if (!verdict.conclusive()) continue;
      votes[verdict.b->code()] += count;
      conclusive_total += count;
    }
  }
  if (conclusive_total == 0) {
    return RoundDecision{DecodeResult{std::nullopt}, 0.0};
  }
  int best = 0;
  for (int code = 1; code <= dim; ++code) {
    if (votes[code] > votes[best]) best = code;  // ties keep the lowest label
  }
  return RoundDecision{DecodeResult{BasisLabel::from_code(best)},
                       static_cast<double>(votes[best]) / conclusive_total};
}

GameResult run_game(int rounds, std::uint64_t shots_per_round,
                    const Scenario& scenario, const KingInput& king_input,
                    const std::function<void(const RoundRecord&)>& on_round) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (shots_per_round < 1) {
    throw std::invalid_argument("shots per round must be >= 1");
  }
  const int dim = scenario.d.value();
  auto king_choice = [&](int round) -> BasisLabel {
    if (const auto* script = std::get_if<std::vector<BasisLabel>>(&king_input)) {
      if (static_cast<int>(script->size()) < rounds) {
        throw std::invalid_argument("scripted choices shorter than round count");
      }
      return (*script)[round];
    }
    return std::get<std::function<BasisLabel(int)>>(king_input)(round);
  };

  // Per-b distributions are cached lazily; the interactive King may never
  // exercise some choices.
  std::vector<std::optional<OutcomeDistribution>> dist_cache(dim + 2);
  auto distribution_for = [&](BasisLabel b) -> const OutcomeDistribution& {
    auto& slot = dist_cache[b.code()];
    if (!slot) {
      slot = noisy_outcome_distribution(scenario.d, scenario.initial, b,
                                        scenario.noise);
    }
    return *slot;
  };

  GameResult result;
  result.rounds.reserve(rounds);
  int hits = 0;
  for (int round = 0; round < rounds; ++round) {
    const BasisLabel b_true = king_choice(round);
    if (b_true.code() > dim) {
      throw std::invalid_argument("basis label outside the d+1 choices");
    }
    const OutcomeDistribution& dist = distribution_for(b_true);
    std::mt19937_64 gen(derive_seed(scenario.seed, static_cast<std::uint64_t>(round)));
    std::vector<std::uint64_t> counts(dim * dim, 0);
    for (std::uint64_t t = 0; t < shots_per_round; ++t) {
      counts[sample_index(dist.p, gen)] += 1;
    }
    const RoundDecision decision = decide_round(counts, scenario.initial, scenario.d);
    const bool hit = decision.guess.conclusive() && *decision.guess.b == b_true;
    if (hit) ++hits;
    result.rounds.push_back(RoundRecord{b_true, decision.guess,
                                        decision.confidence, hit});
    if (on_round) on_round(result.rounds.back());
  }
  result.hit_rate = static_cast<double>(hits) / rounds;
  return result;
}

}  // namespace tkp
