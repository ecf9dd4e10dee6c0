#pragma once

// Simulation studies: simulate -> forecast -> calibrate -> monitor -> aggregate.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sentinel/dgp.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/nullsim.hpp"

namespace sentinel {

struct StudySettings {
  std::size_t n = 1000;
  std::size_t m = 250;
  double iota = 0.1;
  double a = 0.5;
  std::size_t calibration_reps = 2000;  // B
  std::size_t moment_reps = 100000;     // b0
  std::size_t burnin = 500;
  double grid_step = 5e-4;
  std::uint64_t seed = 1;
};

struct StudyCell {
  MeasureKind measure = MeasureKind::CoVaR;
  RiskLevels levels;
  std::size_t K = 1;
  std::int64_t t_star = 1000;  // t_star >= n means no break
  double beta_post = 0.85;
  std::size_t reps = 1000;
};

// Rates are fractions in [0,1]. A detector counts towards its first-alarm rate
// whenever it crosses at the first alarm time, so simultaneous crossings are
// counted for every detector involved.
struct CellResult {
  StudyCell cell;
  double joint = 0.0;
  std::vector<double> first_var;
  std::vector<double> first_sys;
};

// Outcome of one replicate.
struct ReplicateOutcome {
  bool alarm = false;
  std::int64_t T = 0;
  std::vector<std::uint8_t> var_first;
  std::vector<std::uint8_t> sys_first;
};

// Critical values shared by all cells of a study. Moments and sup samples
// depend on (measure, levels) only and are reused across K.
class CriticalValueCache {
 public:
  explicit CriticalValueCache(const StudySettings& settings);
  CriticalValues get(MeasureKind measure, const RiskLevels& levels, std::size_t K);

 private:
  struct Entry {
    NullMoments moments;
    SupSamples sups;
  };
  StudySettings settings_;
  std::map<std::tuple<int, double, double>, std::shared_ptr<Entry>> entries_;
  std::mutex mutex_;
};

// One replicate: DCC path with the cell's break, pre-break forecasts, monitor
// stopped at the first alarm.
ReplicateOutcome run_replicate(const StudyCell& cell, const StudySettings& settings, const CriticalValues& cv,
                               const std::shared_ptr<const CoVaRSolver>& solver, std::size_t index);

CellResult run_cell(const StudyCell& cell, const StudySettings& settings, const CriticalValues& cv);

enum class StudyPreset { SizeTable, PowerBreak, PowerMagnitude, FirstAlarm };

StudyPreset parse_preset(const std::string& name);
std::string to_string(StudyPreset preset);

// Full-scale grid of the preset. Replication counts are multiplied by scale
// (at least 100 per cell); n, m and the grids never change.
std::vector<StudyCell> preset_cells(StudyPreset preset, const StudySettings& settings, double scale);

// Long-format rows: preset,measure,alpha,beta,K,t_star,beta_post,reps,detector,rate_pct
void write_study_header(std::ostream& out);
void write_study_rows(std::ostream& out, const std::string& preset, const CellResult& result);

}  // namespace sentinel
