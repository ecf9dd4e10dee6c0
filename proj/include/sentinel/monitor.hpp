#pragma once

// Sequential monitoring: one (forecast, observation) pair per day, detector
// values normalized by their critical values, alarm log with first-alarm
// attribution.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/detectors.hpp"
#include "sentinel/nullsim.hpp"
#include "sentinel/series.hpp"

namespace sentinel {

struct MonitorConfig {
  MeasureKind measure = MeasureKind::CoVaR;
  RiskLevels levels;
  std::size_t m = 250;
  std::size_t K = 1;
  double a = 0.5;
};

// Configuration implied by a critical-values file.
MonitorConfig config_from(const CriticalValues& cv);

enum class StreamGroup { VaR, Systemic };

struct StreamId {
  StreamGroup group = StreamGroup::VaR;
  std::size_t index = 0;  // 0-based; VaR streams are indexed per institution for RCoVaR

  bool operator==(const StreamId&) const = default;
};

// "var", "var_<k>" or "sys_<k>" with 1-based k.
std::string stream_label(StreamId id, MeasureKind measure);

struct AlarmRecord {
  std::int64_t T = 0;
  StreamId source;
  double normalized_value = 0.0;
  bool first = false;
};

struct StepOutcome {
  bool emitted = false;
  std::int64_t T = 0;
  std::vector<double> var_norm;
  std::vector<double> sys_norm;
  std::vector<AlarmRecord> alarms;
};

struct MonitorReport {
  MeasureKind measure = MeasureKind::CoVaR;
  DetectorTrace trace;  // normalized by the critical values
  DetectorTrace raw;    // detector values before normalization
  std::vector<AlarmRecord> alarms;
  std::optional<AlarmRecord> first_alarm;
  std::size_t horizon = 0;
  std::size_t m = 0;
  std::size_t steps = 0;
  double v = 0.0;
  double c = 0.0;
};

class Monitor {
 public:
  Monitor(const MonitorConfig& config, const CriticalValues& cv);

  StepOutcome step(const ForecastRecord& forecast, const ObservationRecord& observation);
  // Same as step() for evidence that has already been evaluated.
  StepOutcome step_evidence(std::int64_t t, const StepEvidence& evidence);
  MonitorReport finalize() const;

  std::size_t steps() const noexcept { return steps_; }
  const std::vector<AlarmRecord>& alarms() const noexcept { return report_.alarms; }
  bool alarmed() const noexcept { return report_.first_alarm.has_value(); }

 private:
  MonitorConfig config_;
  CriticalValues cv_;
  DetectorEngine engine_;
  std::size_t steps_ = 0;
  std::optional<std::int64_t> last_t_;
  MonitorReport report_;
  std::vector<double> var_raw_;
  std::vector<double> sys_raw_;
};

Monitor monitor_init(const MonitorConfig& config, const CriticalValues& cv);
StepOutcome monitor_step(Monitor& state, const ForecastRecord& forecast, const ObservationRecord& observation);
// Throws EmptyReportError when no detector value was emitted.
MonitorReport monitor_finalize(const Monitor& state);

// Runs a whole panel through a monitor.
MonitorReport monitor_panel(const IndicatorPanel& panel, const CriticalValues& cv);

}  // namespace sentinel
