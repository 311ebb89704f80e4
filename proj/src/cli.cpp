#include "tkp/cli.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tkp/optics.hpp"
#include "tkp/report.hpp"

namespace tkp {
namespace cli {

using nlohmann::ordered_json;
using report::csv_document;
using report::format_number;

namespace {

std::string trimmed(const std::string& text) {
  auto begin = text.begin();
  auto end = text.end();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  return std::string(begin, end);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(trimmed(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(trimmed(current));
  return parts;
}

int parse_int(const std::string& token, const char* what) {
  try {
    size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("invalid ") + what + " '" + token + "'");
  }
}

double parse_double(const std::string& token, const char* what) {
  try {
    size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("invalid ") + what + " '" + token + "'");
  }
}

std::string decode_to_string(const DecodeResult& result, PrimeDim d) {
  return result.conclusive() ? basis_to_string(*result.b, d) : "inconclusive";
}

ordered_json initial_json(const EntangledLabel& initial) {
  return ordered_json{{"c", initial.c}, {"r", initial.r}, {"s", initial.s}};
}

ordered_json noise_json(const NoiseModel& noise) {
  return ordered_json{{"variant", noise_name(noise)},
                      {"parameter", noise_parameter(noise)}};
}

std::string basis_choices_help(PrimeDim d) {
  if (d.value() == 2) return "z, x or y";
  return "comp or 0.." + std::to_string(d.value() - 1);
}

std::vector<double> hom_delay_grid(double width, int points) {
  // Symmetric grid out to +-10 widths; with an odd point count it contains
  // zero delay, so the curve extremes bracket the full dip.
  std::vector<double> delays(points);
  const double span = 10.0 * width;
  for (int i = 0; i < points; ++i) {
    delays[i] = -span + 2.0 * span * i / (points - 1);
  }
  return delays;
}

std::string two_qubit_bits(int index) {
  return std::string(1, static_cast<char>('0' + ((index >> 1) & 1))) +
         static_cast<char>('0' + (index & 1));
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

std::string basis_to_string(BasisLabel b, PrimeDim d) {
  if (d.value() == 2) {
    if (b.is_computational()) return "z";
    return b.phase_index() == 0 ? "x" : "y";
  }
  if (b.is_computational()) return "comp";
  return std::to_string(b.phase_index());
}

BasisLabel parse_basis(const std::string& token, PrimeDim d) {
  const std::string name = trimmed(token);
  if (d.value() == 2) {
    if (name == "z") return BasisLabel::computational();
    if (name == "x") return BasisLabel::phase(0);
    if (name == "y") return BasisLabel::phase(1);
  }
  if (name == "comp") return BasisLabel::computational();
  const int index = parse_int(name, "basis label");
  if (index < 0 || index >= d.value()) {
    throw std::invalid_argument("phase basis index " + name +
                                " outside 0.." + std::to_string(d.value() - 1));
  }
  return BasisLabel::phase(index);
}

EntangledLabel parse_initial(const std::string& token, PrimeDim d) {
  const std::string name = trimmed(token);
  if (d.value() == 2) {
    for (const auto& entry : bell_coincidence_dictionary()) {
      if (name == entry.bell_name) return EntangledLabel{entry.c, entry.r, 0};
    }
  }
  const auto parts = split(name, ',');
  if (parts.size() != 3) {
    throw std::invalid_argument("initial state must be c,r,s" +
                                std::string(d.value() == 2
                                                ? " or a Bell name (phi+/phi-/psi+/psi-)"
                                                : ""));
  }
  EntangledLabel label{parse_int(parts[0], "initial c"),
                       parse_int(parts[1], "initial r"),
                       parse_int(parts[2], "initial s")};
  for (int value : {label.c, label.r, label.s}) {
    if (value < 0 || value >= d.value()) {
      throw std::invalid_argument("initial state labels must lie in 0.." +
                                  std::to_string(d.value() - 1));
    }
  }
  return label;
}

NoiseModel parse_noise(const std::string& token) {
  const std::string name = trimmed(token);
  const auto colon = name.find(':');
  if (colon == std::string::npos) {
    return make_noise(name, 0.0);
  }
  return make_noise(name.substr(0, colon),
                    parse_double(name.substr(colon + 1), "noise parameter"));
}

BSchedule parse_schedule(const std::string& token, PrimeDim d) {
  const std::string name = trimmed(token);
  if (name == "random") return UniformRandomSchedule{};
  std::vector<BasisLabel> labels;
  for (const auto& part : split(name, ',')) labels.push_back(parse_basis(part, d));
  return labels;
}

std::string table_command(PrimeDim d, const EntangledLabel& initial, Format format) {
  const TheoreticalTable table = theoretical_table(d, initial);

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "table"},
                     {"d", d.value()},
                     {"initial", initial_json(initial)}};
    ordered_json rows = ordered_json::array();
    for (int code = 0; code <= d.value(); ++code) {
      const BasisLabel b = BasisLabel::from_code(code);
      const OutcomeDistribution& dist = table.for_basis(b);
      for (int c = 0; c < d.value(); ++c) {
        for (int r = 0; r < d.value(); ++r) {
          rows.push_back(ordered_json{
              {"b", basis_to_string(b, d)},
              {"outcome_c", c},
              {"outcome_r", r},
              {"coincidence_label",
               d.value() == 2 ? coincidence_for_cell(c, r) : ""},
              {"probability", dist.cell(c, r)}});
        }
      }
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (int code = 0; code <= d.value(); ++code) {
    const BasisLabel b = BasisLabel::from_code(code);
    const OutcomeDistribution& dist = table.for_basis(b);
    for (int c = 0; c < d.value(); ++c) {
      for (int r = 0; r < d.value(); ++r) {
        rows.push_back({std::to_string(d.value()), std::to_string(initial.c),
                        std::to_string(initial.r), std::to_string(initial.s),
                        basis_to_string(b, d), std::to_string(c),
                        std::to_string(r),
                        d.value() == 2 ? coincidence_for_cell(c, r) : "",
                        format_number(dist.cell(c, r))});
      }
    }
  }
  return csv_document({"d", "initial_c", "initial_r", "initial_s", "b",
                       "outcome_c", "outcome_r", "coincidence_label",
                       "probability"},
                      rows);
}

std::string trials_command(const Scenario& scenario, const BSchedule& schedule,
                           Format format) {
  const TrialStats stats = run_trials(scenario, schedule);
  const PrimeDim d = scenario.d;

  auto decoded_name = [&](int code) {
    return code == kInconclusiveCode
               ? std::string("inconclusive")
               : basis_to_string(BasisLabel::from_code(code), d);
  };

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "trials"},
                     {"d", d.value()},
                     {"initial", initial_json(scenario.initial)},
                     {"noise", noise_json(scenario.noise)},
                     {"shots", scenario.shots},
                     {"seed", scenario.seed}};
    if (std::holds_alternative<UniformRandomSchedule>(schedule)) {
      doc["schedule"] = "random";
    } else {
      ordered_json names = ordered_json::array();
      for (BasisLabel b : std::get<std::vector<BasisLabel>>(schedule)) {
        names.push_back(basis_to_string(b, d));
      }
      doc["schedule"] = std::move(names);
    }
    ordered_json counts = ordered_json::array();
    for (const auto& [key, value] : stats.counts) {
      counts.push_back(ordered_json{
          {"b", basis_to_string(BasisLabel::from_code(key.first), d)},
          {"outcome_c", key.second / d.value()},
          {"outcome_r", key.second % d.value()},
          {"count", value}});
    }
    doc["counts"] = std::move(counts);
    ordered_json confusion = ordered_json::array();
    for (const auto& [key, value] : stats.confusion) {
      confusion.push_back(ordered_json{
          {"b", basis_to_string(BasisLabel::from_code(key.first), d)},
          {"decoded", decoded_name(key.second)},
          {"count", value}});
    }
    doc["confusion"] = std::move(confusion);
    doc["summary"] = ordered_json{
        {"total_trials", stats.total_trials},
        {"conclusive_rate", stats.conclusive_rate},
        {"reliability_expected_mass", stats.reliability_expected_mass},
        {"reliability_conclusive_accuracy", stats.reliability_conclusive_accuracy}};
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (const auto& [key, value] : stats.counts) {
    rows.push_back({"count", basis_to_string(BasisLabel::from_code(key.first), d),
                    std::to_string(key.second / d.value()),
                    std::to_string(key.second % d.value()), "", "",
                    std::to_string(value), ""});
  }
  for (const auto& [key, value] : stats.confusion) {
    rows.push_back({"confusion",
                    basis_to_string(BasisLabel::from_code(key.first), d), "", "",
                    decoded_name(key.second), "", std::to_string(value), ""});
  }
  rows.push_back({"summary", "", "", "", "", "total_trials",
                  std::to_string(stats.total_trials), ""});
  rows.push_back({"summary", "", "", "", "", "conclusive_rate", "",
                  format_number(stats.conclusive_rate)});
  rows.push_back({"summary", "", "", "", "", "reliability_expected_mass", "",
                  format_number(stats.reliability_expected_mass)});
  rows.push_back({"summary", "", "", "", "", "reliability_conclusive_accuracy",
                  "", format_number(stats.reliability_conclusive_accuracy)});
  return csv_document({"record", "b", "outcome_c", "outcome_r", "decoded_b",
                       "metric", "count", "value"},
                      rows);
}

std::string calibrate_command(double target, const NoiseModel& family, PrimeDim d,
                              const EntangledLabel& initial, Format format) {
  const CalibrationResult result = calibrate_noise(target, family, d, initial);
  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "calibrate"},
                     {"d", d.value()},
                     {"initial", initial_json(initial)},
                     {"noise", noise_name(family)},
                     {"target", target},
                     {"parameter", result.parameter},
                     {"achieved_reliability", result.achieved}};
    return doc.dump(2) + "\n";
  }
  return csv_document(
      {"noise", "target", "parameter", "achieved_reliability"},
      {{noise_name(family), format_number(target), format_number(result.parameter),
        format_number(result.achieved)}});
}

std::string hom_command(double m0, double width, int points, Format format) {
  if (points < 3) throw std::invalid_argument("hom scan needs at least 3 points");
  const optics::HomCurve curve =
      optics::hom_scan(hom_delay_grid(width, points), m0, width, optics::ppbs_one());

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "hom"},
                     {"m0", m0},
                     {"width", width},
                     {"points", points}};
    ordered_json rows = ordered_json::array();
    for (size_t i = 0; i < curve.delays.size(); ++i) {
      rows.push_back(ordered_json{{"delay", curve.delays[i]},
                                  {"coincidence", curve.coincidences[i]}});
    }
    doc["rows"] = std::move(rows);
    doc["visibility"] = curve.visibility;
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < curve.delays.size(); ++i) {
    rows.push_back(
        {format_number(curve.delays[i]), format_number(curve.coincidences[i])});
  }
  rows.push_back({"visibility", format_number(curve.visibility)});
  return csv_document({"delay", "coincidence"}, rows);
}

std::string truth_table_command(double mode_match, Format format) {
  const optics::GateTruthTable table = optics::truth_table(mode_match);

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "truth-table"},
                     {"mode_match", mode_match}};
    ordered_json rows = ordered_json::array();
    for (int input = 0; input < 4; ++input) {
      for (int outcome = 0; outcome < 4; ++outcome) {
        rows.push_back(ordered_json{{"input", two_qubit_bits(input)},
                                    {"output", two_qubit_bits(outcome)},
                                    {"probability", table.probabilities(input, outcome)}});
      }
    }
    doc["rows"] = std::move(rows);
    doc["average_fidelity"] = table.average_fidelity;
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (int input = 0; input < 4; ++input) {
    for (int outcome = 0; outcome < 4; ++outcome) {
      rows.push_back({two_qubit_bits(input), two_qubit_bits(outcome),
                      format_number(table.probabilities(input, outcome))});
    }
  }
  rows.push_back({"average_fidelity", "", format_number(table.average_fidelity)});
  return csv_document({"input", "output", "probability"}, rows);
}

std::string bell_table_command(double mode_match, Format format) {
  const auto rows_data = optics::bell_table(mode_match);
  const auto& dictionary = bell_coincidence_dictionary();

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "bell-table"},
                     {"mode_match", mode_match}};
    ordered_json rows = ordered_json::array();
    for (size_t input = 0; input < rows_data.size(); ++input) {
      for (size_t out = 0; out < rows_data[input].size(); ++out) {
        rows.push_back(ordered_json{{"input_bell", dictionary[input].bell_name},
                                    {"coincidence", optics::kCoincidenceLabels[out]},
                                    {"probability", rows_data[input][out]}});
      }
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t input = 0; input < rows_data.size(); ++input) {
    for (size_t out = 0; out < rows_data[input].size(); ++out) {
      rows.push_back({dictionary[input].bell_name,
                      optics::kCoincidenceLabels[out],
                      format_number(rows_data[input][out])});
    }
  }
  return csv_document({"input_bell", "coincidence", "probability"}, rows);
}

std::string game_command(const GameConfig& config, Format format,
                         std::istream& king_in, std::ostream& prompt_out) {
  const PrimeDim d = config.scenario.d;
  KingInput input;
  if (config.script) {
    input = *config.script;
  } else {
    input = std::function<BasisLabel(int)>([&, d](int round) {
      while (true) {
        prompt_out << "round " << (round + 1) << "/" << config.rounds
                   << " - King's choice (" << basis_choices_help(d)
                   << "): " << std::flush;
        std::string token;
        if (!std::getline(king_in, token)) {
          throw std::runtime_error("input ended before all rounds were played");
        }
        try {
          return parse_basis(token, d);
        } catch (const std::exception&) {
          prompt_out << "unrecognized choice '" << trimmed(token)
                     << "', try again\n";
        }
      }
    });
  }

  std::function<void(const RoundRecord&)> observer;
  if (!config.script) {
    observer = [&](const RoundRecord& record) {
      prompt_out << "Alice guesses " << decode_to_string(record.guess, d)
                 << " (confidence " << format_number(record.confidence) << ")\n";
    };
  }

  const GameResult result = run_game(config.rounds, config.shots_per_round,
                                     config.scenario, input, observer);

  if (format == Format::Json) {
    ordered_json doc{{"schema_version", 1},
                     {"command", "game"},
                     {"d", d.value()},
                     {"initial", initial_json(config.scenario.initial)},
                     {"noise", noise_json(config.scenario.noise)},
                     {"seed", config.scenario.seed},
                     {"rounds", config.rounds},
                     {"shots_per_round", config.shots_per_round}};
    ordered_json records = ordered_json::array();
    for (size_t i = 0; i < result.rounds.size(); ++i) {
      const RoundRecord& record = result.rounds[i];
      records.push_back(ordered_json{{"round", i},
                                     {"b_true", basis_to_string(record.b_true, d)},
                                     {"guess", decode_to_string(record.guess, d)},
                                     {"confidence", record.confidence},
                                     {"hit", record.hit}});
    }
    doc["records"] = std::move(records);
    doc["hit_rate"] = result.hit_rate;
    return doc.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < result.rounds.size(); ++i) {
    const RoundRecord& record = result.rounds[i];
    rows.push_back({std::to_string(i), basis_to_string(record.b_true, d),
                    decode_to_string(record.guess, d),
                    format_number(record.confidence), record.hit ? "1" : "0"});
  }
  rows.push_back({"hit_rate", "", "", "", format_number(result.hit_rate)});
  return csv_document({"round", "b_true", "guess", "confidence", "hit"}, rows);
}

}  // namespace cli
}  // namespace tkp
