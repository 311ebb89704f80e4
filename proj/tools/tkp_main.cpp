#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "tkp/cli.hpp"

namespace {

struct CommonOptions {
  int d = 2;
  std::string initial = "phi+";
  std::string format = "csv";
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--d", options.d, "prime dimension (2, 3, 5, 7 or 11)");
  cmd->add_option("--initial", options.initial,
                  "initial entangled state: c,r,s or a Bell name at d=2");
  cmd->add_option("--format", options.format, "output format: csv or json");
  cmd->add_option("--out", options.out, "output file (default: stdout)");
}

void emit(const std::string& payload, const std::string& out) {
  if (out.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file " + out);
  file << payload;
}

// Config files split comma-separated values into several tokens; rejoin them
// so "--b-list x,y" and "b-list=x,y" in a file mean the same schedule.
std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string joined;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) joined += ',';
    joined += tokens[i];
  }
  return joined;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking-the-King retrodiction protocol simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key-value config file; flags override it");

  CommonOptions table_opts;
  auto* table = app.add_subcommand("table", "analytic truth table for every choice of b");
  add_common(table, table_opts);

  CommonOptions trials_opts;
  std::string trials_noise = "ideal";
  std::vector<std::string> trials_schedule;
  std::uint64_t trials_shots = 100000;
  std::optional<std::uint64_t> trials_seed;
  auto* trials = app.add_subcommand("trials", "Monte Carlo trials with reliability statistics");
  add_common(trials, trials_opts);
  trials->add_option("--noise", trials_noise,
                     "noise model: ideal, werner:L, outcome-white:P or optics:M");
  trials->add_option("--shots", trials_shots, "trials per schedule entry");
  trials->add_option("--seed", trials_seed, "generator seed (required)");
  trials->add_option("--b-list", trials_schedule,
                     "comma-separated b values, 'all', or 'random'");

  CommonOptions calibrate_opts;
  double calibrate_target = 0.0;
  std::string calibrate_noise_name = "outcome-white";
  auto* calibrate = app.add_subcommand(
      "calibrate", "solve a noise parameter for a target analytic reliability");
  add_common(calibrate, calibrate_opts);
  calibrate->add_option("--target", calibrate_target, "target reliability")
      ->required();
  calibrate->add_option("--noise", calibrate_noise_name,
                        "noise family: werner, outcome-white or optics");

  std::string hom_format = "csv";
  std::string hom_out;
  double hom_m0 = 1.0;
  double hom_width = 1.0;
  int hom_points = 81;
  auto* hom = app.add_subcommand("hom", "two-photon interference dip scan");
  hom->add_option("--m0", hom_m0, "mode match at zero delay");
  hom->add_option("--width", hom_width, "Gaussian width of the overlap decay");
  hom->add_option("--points", hom_points, "number of delay samples (odd keeps zero delay)");
  hom->add_option("--format", hom_format, "output format: csv or json");
  hom->add_option("--out", hom_out, "output file (default: stdout)");

  std::string gate_format = "csv";
  std::string gate_out;
  double gate_match = 1.0;
  auto* truth = app.add_subcommand("truth-table", "gate truth table in the ZZ basis");
  truth->add_option("--mode-match", gate_match, "photon mode match in [0, 1]");
  truth->add_option("--format", gate_format, "output format: csv or json");
  truth->add_option("--out", gate_out, "output file (default: stdout)");

  std::string bell_format = "csv";
  std::string bell_out;
  double bell_match = 1.0;
  auto* bell = app.add_subcommand("bell-table",
                                  "coincidence distribution for Bell-state inputs");
  bell->add_option("--mode-match", bell_match, "photon mode match in [0, 1]");
  bell->add_option("--format", bell_format, "output format: csv or json");
  bell->add_option("--out", bell_out, "output file (default: stdout)");

  CommonOptions game_opts;
  std::string game_noise = "ideal";
  std::vector<std::string> game_blist;
  int game_rounds = 0;
  std::uint64_t game_shots = 200;
  std::optional<std::uint64_t> game_seed;
  bool game_interactive = false;
  auto* game = app.add_subcommand("game", "guess a series of the King's choices");
  add_common(game, game_opts);
  game->add_option("--noise", game_noise, "noise model");
  game->add_option("--rounds", game_rounds,
                   "number of rounds (default: length of --b-list)");
  game->add_option("--shots-per-round", game_shots, "coincidence events per round");
  game->add_option("--seed", game_seed, "generator seed (required)");
  game->add_option("--b-list", game_blist, "scripted King choices, comma separated");
  game->add_flag("--interactive", game_interactive,
                 "prompt a human King on the terminal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*table) {
      const tkp::PrimeDim d(table_opts.d);
      emit(tkp::cli::table_command(d, tkp::cli::parse_initial(table_opts.initial, d),
                                   tkp::cli::parse_format(table_opts.format)),
           table_opts.out);
    } else if (*trials) {
      if (!trials_seed) throw std::invalid_argument("--seed is required for trials");
      const tkp::PrimeDim d(trials_opts.d);
      tkp::Scenario scenario{d, tkp::cli::parse_initial(trials_opts.initial, d),
                             tkp::cli::parse_noise(trials_noise), trials_shots,
                             *trials_seed};
      const std::string schedule_text =
          trials_schedule.empty() ? "all" : join_tokens(trials_schedule);
      tkp::BSchedule schedule;
      if (schedule_text == "all") {
        std::vector<tkp::BasisLabel> all;
        for (int code = 0; code <= d.value(); ++code) {
          all.push_back(tkp::BasisLabel::from_code(code));
        }
        schedule = all;
      } else {
        schedule = tkp::cli::parse_schedule(schedule_text, d);
      }
      emit(tkp::cli::trials_command(scenario, schedule,
                                    tkp::cli::parse_format(trials_opts.format)),
           trials_opts.out);
    } else if (*calibrate) {
      const tkp::PrimeDim d(calibrate_opts.d);
      emit(tkp::cli::calibrate_command(
               calibrate_target, tkp::make_noise(calibrate_noise_name, 0.0), d,
               tkp::cli::parse_initial(calibrate_opts.initial, d),
               tkp::cli::parse_format(calibrate_opts.format)),
           calibrate_opts.out);
    } else if (*hom) {
      emit(tkp::cli::hom_command(hom_m0, hom_width, hom_points,
                                 tkp::cli::parse_format(hom_format)),
           hom_out);
    } else if (*truth) {
      emit(tkp::cli::truth_table_command(gate_match,
                                         tkp::cli::parse_format(gate_format)),
           gate_out);
    } else if (*bell) {
      emit(tkp::cli::bell_table_command(bell_match,
                                        tkp::cli::parse_format(bell_format)),
           bell_out);
    } else if (*game) {
      if (!game_seed) throw std::invalid_argument("--seed is required for game");
      if (!game_interactive && game_blist.empty()) {
        throw std::invalid_argument("provide --b-list or --interactive");
      }
      if (game_interactive && !game_blist.empty()) {
        throw std::invalid_argument("--b-list and --interactive are exclusive");
      }
      if (game_interactive && !isatty(STDIN_FILENO)) {
        throw std::invalid_argument("interactive mode needs a terminal on stdin");
      }
      const tkp::PrimeDim d(game_opts.d);
      tkp::cli::GameConfig config;
      config.scenario = tkp::Scenario{d,
                                      tkp::cli::parse_initial(game_opts.initial, d),
                                      tkp::cli::parse_noise(game_noise), 1,
                                      *game_seed};
      config.shots_per_round = game_shots;
      if (!game_interactive) {
        const tkp::BSchedule schedule =
            tkp::cli::parse_schedule(join_tokens(game_blist), d);
        if (!std::holds_alternative<std::vector<tkp::BasisLabel>>(schedule)) {
          throw std::invalid_argument("game --b-list must be an explicit list");
        }
        config.script = std::get<std::vector<tkp::BasisLabel>>(schedule);
        config.rounds =
            game_rounds > 0 ? game_rounds : static_cast<int>(config.script->size());
      } else {
        if (game_rounds < 1) {
          throw std::invalid_argument("--rounds is required in interactive mode");
        }
        config.rounds = game_rounds;
      }
      emit(tkp::cli::game_command(config, tkp::cli::parse_format(game_opts.format),
                                  std::cin, std::cout),
           game_opts.out);
    }
  } catch (const tkp::CalibrationRangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
