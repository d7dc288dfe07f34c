#pragma once

// Command execution for the command-line tool: each command turns a
// DeviceConfig into a table, written as CSV with a commented header or as
// JSON, next to a run manifest (<out>.manifest.json).

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "quadamp/config.hpp"
#include "quadamp/error.hpp"

namespace quadamp {

enum class Command { sweep, quadrature, noise, stability, tune, bounds };
enum class OutputFormat { csv, json };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command c);

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::pair<std::string, Cell>> meta;  // summary scalars
  std::vector<std::string> columns;                // names carry units
  std::vector<std::vector<Cell>> rows;
};

/// Runs the analysis only; throws Error.
Table build_table(Command command, const DeviceConfig& config);

/// 12 significant digits; nan, inf, -inf spelled out.
std::string format_number(double v);

std::string render_csv(const Table& t, Command command, const DeviceConfig& config);
std::string render_json(const Table& t, Command command, const DeviceConfig& config);

struct RunRequest {
  Command command = Command::sweep;
  std::filesystem::path config_path;
  std::filesystem::path out;
  OutputFormat format = OutputFormat::csv;
  std::vector<std::string> overrides;
};

struct RunOutcome {
  int exit_code = 0;
  std::optional<ErrorKind> error;
  std::string message;
  std::filesystem::path manifest;
};

std::filesystem::path manifest_path(const std::filesystem::path& out);

/// Loads the config, runs the command and writes the data file and manifest.
/// Errors are reported through the outcome, never thrown.
RunOutcome run_command(const RunRequest& request);

/// Same for an already loaded config.
RunOutcome run_command(Command command, const DeviceConfig& config, const std::filesystem::path& out,
                       OutputFormat format = OutputFormat::csv);

}  // namespace quadamp
