#pragma once

// Command implementations behind the risk_sentinel executable. Each command
// can be called in-process; run_cli parses arguments and maps errors to exit
// codes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/nullsim.hpp"
#include "sentinel/study.hpp"

namespace sentinel::cli {

// Measure and levels as given on the command line. alpha = 0 selects MES.
struct LevelFlags {
  std::optional<std::string> measure;
  std::optional<double> alpha;
  double beta = 0.95;
};

struct ResolvedLevels {
  MeasureKind measure;
  RiskLevels levels;
};

// Throws InputError for contradicting measure/alpha combinations.
ResolvedLevels resolve_levels(const LevelFlags& flags);

struct CriticalValuesOptions {
  LevelFlags level_flags;
  std::size_t n = 1000;
  std::size_t m = 250;
  std::size_t num_series = 1;
  double iota = 0.1;
  double a = 0.5;
  std::size_t reps = 10000;
  std::size_t moment_reps = 100000;
  std::uint64_t seed = 1;
  std::string out;
};

CriticalValues cmd_critical_values(const CriticalValuesOptions& opts, std::ostream& log);

struct MonitorOptions {
  std::string cv;
  std::string returns;
  std::string forecasts;
  std::string out_prefix;
};

MonitorReport cmd_monitor(const MonitorOptions& opts, std::ostream& log);

struct SimulateOptions {
  std::optional<std::string> params;
  std::optional<std::int64_t> break_t;
  double beta_post = 0.85;
  std::size_t n = 1000;
  std::size_t burnin = 500;
  std::size_t num_series = 1;  // used when no parameter file is given
  LevelFlags level_flags;
  std::uint64_t seed = 1;
  std::string out_prefix;
};

void cmd_simulate(const SimulateOptions& opts, std::ostream& log);

struct StudyOptions {
  std::string preset;
  double scale = 1.0;
  StudySettings settings;
  std::vector<std::string> measures;    // empty: all measures of the preset
  std::vector<std::size_t> num_series;  // empty: the whole K grid
  std::vector<double> betas;            // empty: the whole beta grid
  std::string out;                      // empty: standard output
};

std::vector<CellResult> cmd_study(const StudyOptions& opts, std::ostream& out, std::ostream& log);

// Parses argv-style arguments (without the program name) and runs the
// command. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sentinel::cli
