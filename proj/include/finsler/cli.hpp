#pragma once

// Batch front end: load a model file, run checks, emit a JSON report on
// stdout (or --output) and a one-line summary on stderr.
//
// Exit codes: 0 Berwald / all checks pass, 1 not Berwald / a check failed,
// 2 inconclusive (sampler starvation, undefined fit), 3 input error.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "finsler/model_file.hpp"

namespace finsler::cli {

inline constexpr std::string_view kToolName = "berwald";
inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { pass = 0, fail = 1, inconclusive = 2, input_error = 3 };

enum class Command { classify, check_theorem1, check_ab, check_corollary3, identities, report_all };

std::optional<Command> parse_command(std::string_view s);
std::string_view to_string(Command c);

// --tol replaces the tolerance of the command's own check; for report-all it
// replaces the Ξ-spread tolerance.
struct Overrides {
  std::optional<double> tol;
  std::optional<int> samples;        // base points
  std::optional<int> fiber_samples;  // per base point
  std::optional<std::uint64_t> seed;
  int jobs = 1;                      // not part of the report
};

struct Outcome {
  int exit_code = ExitCode::pass;
  nlohmann::ordered_json report;
  std::string summary;
};

// `source` is echoed into the report. Throws ModelError/std::invalid_argument
// on unusable input.
Outcome run(Command command, const ModelDefinition& def, const Overrides& overrides, const std::string& source);

// Flattened "key: value" rendering of a report for --format text.
std::string render_text(const nlohmann::ordered_json& report);

// Full command line: parses argv, runs, writes outputs, returns the exit code.
int main(int argc, char** argv);

}  // namespace finsler::cli
