#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "test_helpers.hpp"
#include "tkp/protocol.hpp"

using namespace tkp;
using tkp_test::max_abs_diff;
using tkp_test::random_density;

namespace {

const PrimeDim kTwo(2);

BasisLabel sigma_x() { return BasisLabel::phase(0); }
BasisLabel sigma_y() { return BasisLabel::phase(1); }
BasisLabel sigma_z() { return BasisLabel::computational(); }

DensityOperator prepared(PrimeDim d, const EntangledLabel& label) {
  return DensityOperator::from_pure(entangled_state(d, label));
}

// Published d=2 truth table: probability per (initial, choice, coincidence).
struct TruthRow {
  const char* initial;
  BasisLabel b;
  double dh, dv, ah, av;
};
const std::vector<TruthRow>& truth_rows() {
  static const std::vector<TruthRow> rows = {
      {"phi+", sigma_x(), 0.5, 0.5, 0.0, 0.0},
      {"phi+", sigma_y(), 0.0, 0.5, 0.5, 0.0},
      {"phi+", sigma_z(), 0.0, 0.5, 0.0, 0.5},
      {"psi-", sigma_x(), 0.0, 0.0, 0.5, 0.5},
      {"psi-", sigma_y(), 0.0, 0.5, 0.5, 0.0},
      {"psi-", sigma_z(), 0.5, 0.0, 0.5, 0.0},
  };
  return rows;
}

EntangledLabel label_for(const std::string& bell_name) {
  for (const auto& entry : bell_coincidence_dictionary()) {
    if (bell_name == entry.bell_name) return {entry.c, entry.r, 0};
  }
  throw std::logic_error("unknown Bell name");
}

double row_value(const TruthRow& row, const std::string& coincidence) {
  if (coincidence == "DH") return row.dh;
  if (coincidence == "DV") return row.dv;
  if (coincidence == "AH") return row.ah;
  return row.av;
}

}  // namespace

TEST_CASE("nonselective x-basis measurement of phi+ dephases into D/A pairs") {
  const DensityOperator out = king_channel(prepared(kTwo, {0, 0, 0}), sigma_x(), kTwo);
  Vector dd(4), aa(4);
  dd << 0.5, 0.5, 0.5, 0.5;
  aa << 0.5, -0.5, -0.5, 0.5;
  const Matrix expected = 0.5 * (dd * dd.adjoint()) + 0.5 * (aa * aa.adjoint());
  CHECK(max_abs_diff(out.matrix(), expected) < 1e-12);
}

TEST_CASE("the maximally mixed state is invariant under every King channel") {
  for (int code = 0; code <= 2; ++code) {
    const DensityOperator out = king_channel(DensityOperator::maximally_mixed(4),
                                             BasisLabel::from_code(code), kTwo);
    CHECK(max_abs_diff(out.matrix(), Matrix::Identity(4, 4) / 4.0) < 1e-12);
  }
}

TEST_CASE("computational-basis measurement dephases phi+ into 00/11") {
  const DensityOperator out = king_channel(prepared(kTwo, {0, 0, 0}), sigma_z(), kTwo);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 0.5;
  expected(3, 3) = 0.5;
  CHECK(max_abs_diff(out.matrix(), expected) < 1e-12);
}

TEST_CASE("alice distribution matches the published rows") {
  for (const TruthRow& row : truth_rows()) {
    const EntangledLabel initial = label_for(row.initial);
    const OutcomeDistribution dist = alice_outcome_distribution(
        king_channel(prepared(kTwo, initial), row.b, kTwo), 0, kTwo);
    for (const auto& entry : bell_coincidence_dictionary()) {
      CHECK(dist.cell(entry.c, entry.r) ==
            doctest::Approx(row_value(row, entry.coincidence)).epsilon(1e-12));
    }
  }
}

TEST_CASE("an untouched eigenstate projects onto its own label") {
  const OutcomeDistribution dist =
      alice_outcome_distribution(prepared(kTwo, {0, 0, 0}), 0, kTwo);
  CHECK(dist.cell(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the coincidence dictionary is the unique assignment consistent with the table") {
  // Exhaustively score all 4! cell-to-coincidence bijections against the six
  // published rows; exactly one candidate must survive, the frozen one.
  const std::array<std::string, 4> labels = {"DH", "DV", "AH", "AV"};
  const std::array<std::pair<int, int>, 4> cells = {
      std::pair{0, 0}, {0, 1}, {1, 0}, {1, 1}};

  std::map<std::string, OutcomeDistribution> analytic;  // per initial+b
  for (const TruthRow& row : truth_rows()) {
    const EntangledLabel initial = label_for(row.initial);
    analytic.emplace(std::string(row.initial) + "/" + std::to_string(row.b.code()),
                     alice_outcome_distribution(
                         king_channel(prepared(kTwo, initial), row.b, kTwo), 0, kTwo));
  }

  std::array<int, 4> perm = {0, 1, 2, 3};
  int survivors = 0;
  std::array<int, 4> winning{};
  do {
    bool consistent = true;
    for (const TruthRow& row : truth_rows()) {
      const auto& dist = analytic.at(std::string(row.initial) + "/" +
                                     std::to_string(row.b.code()));
      for (int k = 0; k < 4 && consistent; ++k) {
        const auto [c, r] = cells[k];
        consistent = std::abs(dist.cell(c, r) -
                              row_value(row, labels[perm[k]])) < 1e-9;
      }
      if (!consistent) break;
    }
    if (consistent) {
      ++survivors;
      winning = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  REQUIRE(survivors == 1);
  for (int k = 0; k < 4; ++k) {
    const auto [c, r] = cells[k];
    CHECK(coincidence_for_cell(c, r) == labels[winning[k]]);
  }
}

TEST_CASE("decoding the published qubit cases") {
  CHECK(decode({0, 0, 0}, {1, 0}, kTwo) == DecodeResult{sigma_x()});
  CHECK(decode({0, 0, 0}, {0, 0}, kTwo) == DecodeResult{std::nullopt});
  CHECK(decode({0, 0, 0}, {0, 1}, kTwo) == DecodeResult{sigma_z()});
  CHECK(decode({0, 0, 0}, {1, 1}, kTwo) == DecodeResult{sigma_y()});
}

TEST_CASE("decoding uses field division for larger primes") {
  const PrimeDim five(5);
  const DecodeResult verdict = decode({1, 2, 3}, {3, 4}, five);
  REQUIRE(verdict.conclusive());
  CHECK(*verdict.b == BasisLabel::phase(2));
  CHECK_THROWS_AS(decode({0, 0, 0}, {5, 0}, five), std::invalid_argument);
}

TEST_CASE("decode is total and single-valued over all outcomes") {
  for (int p : {2, 3, 5, 7}) {
    const PrimeDim d(p);
    for (int c = 0; c < p; ++c) {
      for (int r = 0; r < p; ++r) {
        const EntangledLabel initial{c, r, 0};
        for (int c2 = 0; c2 < p; ++c2) {
          for (int r2 = 0; r2 < p; ++r2) {
            const DecodeResult first = decode(initial, {c2, r2}, d);
            const DecodeResult second = decode(initial, {c2, r2}, d);
            CHECK(first == second);
            if (c2 == c && r2 == r) {
              CHECK(!first.conclusive());
            } else {
              CHECK(first.conclusive());
            }
          }
        }
      }
    }
  }
}

TEST_CASE("theoretical table at d=3 puts mass 1/3 on the inconclusive cell") {
  const PrimeDim three(3);
  const TheoreticalTable table = theoretical_table(three, {0, 0, 0});
  for (int code = 0; code <= 3; ++code) {
    CHECK(table.per_basis[code].cell(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }
}

TEST_CASE("retrodiction: every occupied outcome decodes to the measured basis") {
  for (int p : {2, 3}) {
    const PrimeDim d(p);
    for (int s = 0; s < p; ++s) {
      for (int c = 0; c < p; ++c) {
        for (int r = 0; r < p; ++r) {
          const EntangledLabel initial{c, r, s};
          const DensityOperator rho = prepared(d, initial);
          for (int code = 0; code <= p; ++code) {
            const BasisLabel b = BasisLabel::from_code(code);
            const OutcomeDistribution dist =
                alice_outcome_distribution(king_channel(rho, b, d), s, d);
            CHECK(dist.cell(c, r) == doctest::Approx(1.0 / p).epsilon(1e-10));
            for (int c2 = 0; c2 < p; ++c2) {
              for (int r2 = 0; r2 < p; ++r2) {
                if (dist.cell(c2, r2) <= 1e-12) continue;
                if (c2 == c && r2 == r) continue;
                const DecodeResult verdict = decode(initial, {c2, r2}, d);
                REQUIRE(verdict.conclusive());
                CHECK(*verdict.b == b);
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("king channel is lawful and idempotent on random states") {
  std::mt19937_64 gen(2024);
  for (int p : {2, 3}) {
    const PrimeDim d(p);
    for (int trial = 0; trial < 20; ++trial) {
      const DensityOperator rho = random_density(p * p, gen);
      const BasisLabel b = BasisLabel::from_code(trial % (p + 1));
      const DensityOperator once = king_channel(rho, b, d);
      CHECK(std::abs(once.matrix().trace() - Complex(1.0)) < 1e-12);
      CHECK(max_abs_diff(once.matrix(), once.matrix().adjoint()) < 1e-10);
      CHECK(once.min_eigenvalue() >= -1e-9);
      const DensityOperator twice = king_channel(once, b, d);
      CHECK(max_abs_diff(once.matrix(), twice.matrix()) < 1e-10);
    }
  }
}

TEST_CASE("werner mixing at full weight is the identity") {
  const DensityOperator rho = prepared(kTwo, {0, 0, 0});
  const DensityOperator out =
      apply_noise(NoiseStage::SharedState, WernerShared{1.0}, rho);
  CHECK(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
}

TEST_CASE("full outcome white noise flattens any distribution") {
  OutcomeDistribution dist;
  dist.d = 2;
  dist.p = {0.7, 0.1, 0.2, 0.0};
  const OutcomeDistribution out =
      apply_noise(NoiseStage::OutcomeDistribution, OutcomeWhiteNoise{1.0}, dist);
  for (double p : out.p) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("a fully depolarized source gives uniform outcomes") {
  const OutcomeDistribution dist =
      noisy_outcome_distribution(kTwo, {0, 0, 0}, sigma_x(), WernerShared{0.0});
  for (double p : dist.p) CHECK(p == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("noise application rejects stage mismatches") {
  const DensityOperator rho = prepared(kTwo, {0, 0, 0});
  CHECK_THROWS_AS(apply_noise(NoiseStage::SharedState, OutcomeWhiteNoise{0.5}, rho),
                  std::invalid_argument);
  OutcomeDistribution dist;
  dist.d = 2;
  dist.p = {0.25, 0.25, 0.25, 0.25};
  CHECK_THROWS_AS(apply_noise(NoiseStage::OutcomeDistribution, WernerShared{0.5}, dist),
                  std::invalid_argument);
}

TEST_CASE("noise constructors validate parameter ranges") {
  CHECK_THROWS_AS(make_noise("werner", 1.5), std::invalid_argument);
  CHECK_THROWS_AS(make_noise("outcome-white", -0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_noise("bogus", 0.0), std::invalid_argument);
}

TEST_CASE("ideal trials land only in allowed cells and decode perfectly") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 100000, 7};
  std::vector<BasisLabel> schedule = {sigma_z(), sigma_x(), sigma_y()};
  const TrialStats stats = run_trials(scenario, schedule);
  CHECK(stats.total_trials == 300000);
  CHECK(stats.reliability_expected_mass == 1.0);
  CHECK(stats.reliability_conclusive_accuracy == 1.0);
  // Conclusive probability is exactly 1/2 per trial.
  const double sigma = std::sqrt(0.25 / 300000.0);
  CHECK(std::abs(stats.conclusive_rate - 0.5) < 5 * sigma);
}

TEST_CASE("empirical frequencies track the analytic cells within five sigma") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 100000, 99};
  std::vector<BasisLabel> schedule = {sigma_x()};
  const TrialStats stats = run_trials(scenario, schedule);
  const OutcomeDistribution dist =
      noisy_outcome_distribution(kTwo, {0, 0, 0}, sigma_x(), IdealNoise{});
  for (int cell = 0; cell < 4; ++cell) {
    const double expected = dist.p[cell];
    const auto it = stats.counts.find({sigma_x().code(), cell});
    const double observed =
        it == stats.counts.end() ? 0.0 : static_cast<double>(it->second);
    const double sigma = std::sqrt(std::max(expected * (1 - expected), 1e-12) *
                                   100000.0);
    CHECK(std::abs(observed - expected * 100000.0) <= 5 * sigma);
  }
}

TEST_CASE("fully white outcome noise halves the expected-mass reliability") {
  Scenario scenario{kTwo, {0, 0, 0}, OutcomeWhiteNoise{1.0}, 100000, 5};
  std::vector<BasisLabel> schedule = {sigma_z(), sigma_x(), sigma_y()};
  const TrialStats stats = run_trials(scenario, schedule);
  const double sigma = std::sqrt(0.25 / 300000.0);
  CHECK(std::abs(stats.reliability_expected_mass - 0.5) < 5 * sigma);
}

TEST_CASE("identical scenarios reproduce bit-identical statistics") {
  Scenario scenario{kTwo, {1, 1, 0}, OutcomeWhiteNoise{0.374}, 20000, 1234};
  std::vector<BasisLabel> schedule = {sigma_z(), sigma_x(), sigma_y()};
  const TrialStats first = run_trials(scenario, schedule);
  const TrialStats second = run_trials(scenario, schedule);
  CHECK(first == second);
  scenario.seed = 1235;
  const TrialStats shifted = run_trials(scenario, schedule);
  CHECK(first.counts != shifted.counts);
}

TEST_CASE("uniform-random schedule draws every basis") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 30000, 21};
  const TrialStats stats = run_trials(scenario, UniformRandomSchedule{});
  CHECK(stats.total_trials == 30000);
  std::uint64_t per_basis[3] = {0, 0, 0};
  for (const auto& [key, count] : stats.counts) per_basis[key.first] += count;
  for (std::uint64_t total : per_basis) {
    CHECK(static_cast<double>(total) > 30000.0 / 3 * 0.8);
  }
}

TEST_CASE("analytic reliability is monotone in the noise parameters") {
  double previous = 2.0;
  for (int step = 0; step <= 10; ++step) {
    const double value =
        analytic_reliability(kTwo, {0, 0, 0}, OutcomeWhiteNoise{step / 10.0});
    CHECK(value <= previous + 1e-12);
    previous = value;
  }
  previous = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double value =
        analytic_reliability(kTwo, {0, 0, 0}, WernerShared{step / 10.0});
    CHECK(value >= previous - 1e-12);
    previous = value;
  }
}

TEST_CASE("calibration closed forms for the outcome-white family") {
  const CalibrationResult zero =
      calibrate_noise(1.0, OutcomeWhiteNoise{0.0}, kTwo, {0, 0, 0});
  CHECK(zero.parameter == doctest::Approx(0.0).epsilon(1e-9));
  const CalibrationResult one =
      calibrate_noise(0.5, OutcomeWhiteNoise{0.0}, kTwo, {0, 0, 0});
  CHECK(one.parameter == doctest::Approx(1.0).epsilon(1e-9));
  const CalibrationResult headline =
      calibrate_noise(0.813, OutcomeWhiteNoise{0.0}, kTwo, {0, 0, 0});
  CHECK(std::abs(headline.parameter - 0.374) < 1e-9);
  CHECK(std::abs(headline.achieved - 0.813) < 1e-3);
}

TEST_CASE("calibration reports the achievable interval for bad targets") {
  try {
    calibrate_noise(0.4, OutcomeWhiteNoise{0.0}, kTwo, {0, 0, 0});
    FAIL("expected a range error");
  } catch (const CalibrationRangeError& e) {
    CHECK(e.achievable_low == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(e.achievable_high == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("round decisions follow the per-cell decoding map") {
  // Cells are indexed c*2+r: DV=(0,0), AV=(0,1), DH=(1,0), AH=(1,1).
  const EntangledLabel phi_plus{0, 0, 0};
  const RoundDecision clean = decide_round({52, 0, 48, 0}, phi_plus, kTwo);
  REQUIRE(clean.guess.conclusive());
  CHECK(*clean.guess.b == sigma_x());
  CHECK(clean.confidence == doctest::Approx(1.0));

  const RoundDecision empty = decide_round({100, 0, 0, 0}, phi_plus, kTwo);
  CHECK(!empty.guess.conclusive());
  CHECK(empty.confidence == 0.0);

  const RoundDecision split = decide_round({40, 1, 30, 29}, phi_plus, kTwo);
  REQUIRE(split.guess.conclusive());
  CHECK(*split.guess.b == sigma_x());
  CHECK(split.confidence == doctest::Approx(30.0 / 60.0));
}

TEST_CASE("ties in a round go to the lowest basis label") {
  const RoundDecision tie = decide_round({0, 10, 10, 0}, {0, 0, 0}, kTwo);
  REQUIRE(tie.guess.conclusive());
  CHECK(*tie.guess.b == sigma_z());  // AV decodes to z, DH to x; z wins the tie
  CHECK(tie.confidence == doctest::Approx(0.5));
}

TEST_CASE("an ideal twenty-round game identifies every choice") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 1, 424242};
  std::vector<BasisLabel> script;
  for (int i = 0; i < 20; ++i) script.push_back(BasisLabel::from_code(i % 3));
  const GameResult result = run_game(20, 200, scenario, script);
  CHECK(result.hit_rate == 1.0);
  for (const RoundRecord& record : result.rounds) {
    CHECK(record.hit);
    CHECK(record.confidence == doctest::Approx(1.0));
  }
}

TEST_CASE("a single-shot game round is deterministic for a fixed seed") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 1, 3};
  std::vector<BasisLabel> script = {sigma_x()};
  const GameResult first = run_game(1, 1, scenario, script);
  const GameResult second = run_game(1, 1, scenario, script);
  REQUIRE(first.rounds.size() == 1);
  CHECK(first.rounds[0].guess == second.rounds[0].guess);
  CHECK(first.rounds[0].confidence == second.rounds[0].confidence);
  CHECK(first.hit_rate == second.hit_rate);
}

TEST_CASE("noisy games still win with enough statistics") {
  Scenario scenario{kTwo, {0, 0, 0}, OutcomeWhiteNoise{0.374}, 1, 99};
  std::vector<BasisLabel> script;
  for (int i = 0; i < 20; ++i) script.push_back(BasisLabel::from_code((i * 2) % 3));
  const GameResult result = run_game(20, 200, scenario, script);
  CHECK(result.hit_rate >= 0.9);
}

TEST_CASE("game input through a callback matches the scripted path") {
  Scenario scenario{kTwo, {0, 0, 0}, IdealNoise{}, 1, 17};
  std::vector<BasisLabel> script = {sigma_x(), sigma_y(), sigma_z()};
  const GameResult scripted = run_game(3, 50, scenario, script);
  const GameResult prompted = run_game(
      3, 50, scenario,
      KingInput(std::function<BasisLabel(int)>([&](int i) { return script[i]; })));
  REQUIRE(scripted.rounds.size() == prompted.rounds.size());
  for (size_t i = 0; i < scripted.rounds.size(); ++i) {
    CHECK(scripted.rounds[i].guess == prompted.rounds[i].guess);
    CHECK(scripted.rounds[i].confidence == prompted.rounds[i].confidence);
  }
}
