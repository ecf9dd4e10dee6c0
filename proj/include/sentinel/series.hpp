#pragma once

// Evidence streams: exceedance indicators and cumulative violation sequences
// built from risk forecasts and realized losses.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

enum class MeasureKind { CoVaR, RCoVaR, CoES, MES };

std::string_view to_string(MeasureKind kind) noexcept;
MeasureKind parse_measure(std::string_view name);

// CoES and MES evidence comes from probability integral transforms rather
// than threshold forecasts.
constexpr bool uses_pits(MeasureKind kind) noexcept {
  return kind == MeasureKind::CoES || kind == MeasureKind::MES;
}

// One VaR stream for every measure except RCoVaR, which has one per institution.
constexpr std::size_t num_var_streams(MeasureKind kind, std::size_t num_series) noexcept {
  return kind == MeasureKind::RCoVaR ? num_series : 1;
}

struct RiskLevels {
  double alpha = 0.95;  // systemic level, in [0,1); 0 only for MES
  double beta = 0.95;   // stress level of the conditioning VaR, in (0,1)

  bool operator==(const RiskLevels&) const = default;
};

// Throws InputError when the levels are invalid for the measure.
void validate_levels(const RiskLevels& levels, MeasureKind kind);

// Null exceedance probability of the VaR indicator, 1 - beta.
inline double var_rate(const RiskLevels& l) noexcept { return 1.0 - l.beta; }
// Null exceedance probability of the joint indicator, (1 - alpha)(1 - beta).
inline double joint_rate(const RiskLevels& l) noexcept { return (1.0 - l.alpha) * (1.0 - l.beta); }

struct ObservationRecord {
  std::int64_t t = 0;
  double x = 0.0;          // loss of the reference position
  std::vector<double> y;   // losses of the K institutions
};

// Forecasts for day t, issued with information up to t-1. Threshold mode fills
// var_hat/sys_hat; PIT mode (CoES, MES) fills pit_x/pit_tail.
struct ForecastRecord {
  std::int64_t t = 0;
  std::vector<double> var_hat;   // size 1, or K for RCoVaR
  std::vector<double> sys_hat;   // size K
  std::optional<double> pit_x;
  std::vector<double> pit_tail;  // size K
};

// Immutable evidence for one monitoring run. Binary streams hold 0.0/1.0.
struct IndicatorPanel {
  MeasureKind measure = MeasureKind::CoVaR;
  RiskLevels levels;
  std::vector<std::int64_t> t;
  std::vector<std::vector<double>> i_var;     // one series per VaR hypothesis
  std::vector<std::vector<double>> evidence;  // K series

  std::size_t length() const noexcept { return t.size(); }
  std::size_t num_series() const noexcept { return evidence.size(); }
};

// 1 iff x > var_hat. Ties are non-exceedances.
int var_indicator(double x, double var_hat);

// 1 iff x > var_hat and y > sys_hat. RCoVaR calls this with the roles swapped.
int joint_indicator(double x, double y, double var_hat, double sys_hat);

// Truncated conditional tail PIT, 1{pit_x > beta, pit_tail > alpha}(pit_tail - alpha)/(1 - alpha).
double cumulative_violation(double pit_x, double pit_tail, const RiskLevels& levels);

// Joint VaR/CoVaR identification function evaluated at (v, c) for outcome (x, y).
std::array<double, 2> identification_value(double v, double c, double x, double y,
                                           const RiskLevels& levels);

// Evidence for a single day.
struct StepEvidence {
  std::vector<double> i_var;
  std::vector<double> evidence;
};

// Validates shapes against the measure and K, then evaluates every indicator for
// one (observation, forecast) pair. Shared by panel construction and the monitor.
StepEvidence step_evidence(const ObservationRecord& obs, const ForecastRecord& fc,
                           MeasureKind measure, const RiskLevels& levels);

IndicatorPanel build_indicator_panel(std::span<const ObservationRecord> observations,
                                     std::span<const ForecastRecord> forecasts,
                                     MeasureKind measure, const RiskLevels& levels);

}  // namespace sentinel
