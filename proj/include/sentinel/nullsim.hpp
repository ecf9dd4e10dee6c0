#pragma once

// Null simulation, null moments and critical-value calibration.
//
// Every replicate draws from its own stream keyed by (seed, stage, index), so
// results do not depend on the number of threads or on scheduling. The serial
// namespace holds single-threaded reference versions used for testing.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/detectors.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/series.hpp"

namespace sentinel {

struct NullPath {
  std::vector<double> i_var;
  std::vector<double> evidence;
};

// One path of length n under the null: I = 1{U1 > beta}, and either
// 1{U1 > beta, U2 > alpha} or its cumulative counterpart for CoES/MES.
NullPath simulate_null_path(MeasureKind measure, const RiskLevels& levels, std::size_t n, Engine& rng);

NullMoments estimate_null_moments(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                                  std::size_t b0, std::uint64_t seed);

struct SupSamples {
  std::vector<double> sup_var;
  std::vector<double> sup_sys;
  bool paired = true;
};

// Suprema over T = m..n of one VaR detector and one systemic detector on B
// independent null paths. The pair is identically distributed for every k, so
// the samples do not depend on K.
SupSamples sup_detector_samples(MeasureKind measure, const RiskLevels& levels, std::size_t n,
                                std::size_t m, double a, const NullMoments& moments, std::size_t B,
                                std::uint64_t seed);

// Smallest sample value q with #{samples >= q}/B <= nu. When no sample value
// qualifies the result lies strictly above the sample maximum.
double threshold_at(std::span<const double> sorted_samples, double nu);

struct CriticalValues {
  MeasureKind measure = MeasureKind::CoVaR;
  RiskLevels levels;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t K = 0;
  double iota = 0.1;
  double a = 0.5;
  double v = 0.0;
  double c = 0.0;
  double nu = 0.0;
  double achieved = 0.0;
  NullMoments moments;
  std::size_t b = 0;
  std::uint64_t seed = 0;
  double grid_step = 5e-4;
};

// Largest grid nu whose three-term estimate
// (1/B)#{var >= v} + (K/B)#{sys >= c} - (K/B)#{both} stays at or below iota.
CriticalValues calibrate_intersection(const SupSamples& sups, std::size_t K, double iota,
                                      double grid_step = 5e-4);

// Largest grid nu whose estimate (K/B)#{var >= v or sys >= c} stays at or below iota.
CriticalValues calibrate_union(const SupSamples& sups, std::size_t K, double iota,
                               double grid_step = 5e-4);

struct CalibrationConfig {
  MeasureKind measure = MeasureKind::CoVaR;
  RiskLevels levels;
  std::size_t n = 1000;
  std::size_t m = 250;
  std::size_t K = 1;
  double iota = 0.1;
  double a = 0.5;
  std::size_t B = 10000;
  std::size_t b0 = 100000;
  std::uint64_t seed = 1;
  double grid_step = 5e-4;
};

void validate_config(const CalibrationConfig& cfg);

// Calibrates on precomputed moments and samples; the union form is used for
// RCoVaR and the intersection form otherwise.
CriticalValues calibrate_from_samples(const CalibrationConfig& cfg, const NullMoments& moments,
                                      const SupSamples& sups);

// Full pipeline: moments from b0 windows, then B sup samples, then calibration.
CriticalValues compute_critical_values(const CalibrationConfig& cfg);

nlohmann::ordered_json to_json(const NullMoments& moments);
NullMoments null_moments_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CriticalValues& cv);
CriticalValues critical_values_from_json(const nlohmann::json& j);

std::string serialize(const CriticalValues& cv);
CriticalValues parse_critical_values(const std::string& text);

namespace detail {

// Raw statistics of the `count` windows of moment block `block`; writes four
// values per window (uc_var, iid_var, uc_sys, iid_sys) into out.
void moment_block(MeasureKind measure, const RiskLevels& levels, std::size_t m, std::uint64_t seed,
                  std::size_t block, std::size_t count, std::span<double> out);

// Windows simulated per moment block.
inline constexpr std::size_t kMomentBlock = 512;

NullMoments moments_from_raw(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                             std::size_t b0, std::span<const double> raw);

struct SupPair {
  double var = 0.0;
  double sys = 0.0;
};

SupPair sup_for_replicate(MeasureKind measure, const RiskLevels& levels, std::size_t n, std::size_t m,
                          double a, const NullMoments& moments, std::uint64_t seed, std::size_t index);

}  // namespace detail

namespace serial {

NullMoments estimate_null_moments(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                                  std::size_t b0, std::uint64_t seed);

SupSamples sup_detector_samples(MeasureKind measure, const RiskLevels& levels, std::size_t n,
                                std::size_t m, double a, const NullMoments& moments, std::size_t B,
                                std::uint64_t seed);

}  // namespace serial

}  // namespace sentinel
