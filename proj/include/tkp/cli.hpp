#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tkp/protocol.hpp"

namespace tkp {
namespace cli {

enum class Format { Csv, Json };

Format parse_format(const std::string& name);

/// CLI names for basis labels: z/x/y at d = 2, otherwise "comp" and digits.
std::string basis_to_string(BasisLabel b, PrimeDim d);
BasisLabel parse_basis(const std::string& token, PrimeDim d);

/// "c,r,s" triple, or a Bell alias (phi+, phi-, psi+, psi-) at d = 2.
EntangledLabel parse_initial(const std::string& token, PrimeDim d);

/// "ideal" or "name:parameter" with name in {werner, outcome-white, optics}.
NoiseModel parse_noise(const std::string& token);

/// Comma-separated basis names, or "random" for the uniform-random schedule.
BSchedule parse_schedule(const std::string& token, PrimeDim d);

// Each command renders its full output document as a string; callers decide
// where it goes. Outputs are byte-deterministic for fixed inputs.

std::string table_command(PrimeDim d, const EntangledLabel& initial, Format format);

std::string trials_command(const Scenario& scenario, const BSchedule& schedule,
                           Format format);

std::string calibrate_command(double target, const NoiseModel& family, PrimeDim d,
                              const EntangledLabel& initial, Format format);

std::string hom_command(double m0, double width, int points, Format format);

std::string truth_table_command(double mode_match, Format format);

std::string bell_table_command(double mode_match, Format format);

struct GameConfig {
  Scenario scenario;
  int rounds = 1;
  std::uint64_t shots_per_round = 1;
  std::optional<std::vector<BasisLabel>> script;  // unset: interactive
};

/// Interactive rounds prompt on `prompt_out` and read the King's choices from
/// `king_in`, re-prompting on malformed entries.
std::string game_command(const GameConfig& config, Format format,
                         std::istream& king_in, std::ostream& prompt_out);

}  // namespace cli
}  // namespace tkp
