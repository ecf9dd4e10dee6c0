#pragma once

// Rolling-window statistics and standardized detectors.
//
// Every statistic is computed from a sparse description of the window (the
// nonzero entries and their offsets). The window functions below, the rolling
// engine used for live monitoring and the null simulation all go through the
// same core routines, so a statistic computed on a given window is bit-identical
// regardless of which entry point produced it.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "sentinel/series.hpp"

namespace sentinel {

// |mean(window) - target_rate| for a binary window.
double window_violation_stat(std::span<const double> window, double target_rate);

// Gini coefficient of the durations between violations, measured from the
// window start. Zero when the window holds fewer than two violations; the gap
// after the last violation is not a duration.
double gini_from_window(std::span<const double> window);

// Null CDF of the cumulative violation sequence.
double null_cdf_H(double x, const RiskLevels& levels);

// Exact sup_x |F_m(x) - H(x)| including the atom of H at zero.
double ks_from_window(std::span<const double> window, const RiskLevels& levels);

// sin(pi z)/(pi z), with value 1 at z = 0.
double daniell_kernel(double z) noexcept;

// Lag-j sample autocorrelation with m-denominator autocovariances. Zero for a
// constant window.
double sample_autocorr(std::span<const double> window, std::size_t lag);

// m * sum_{j=1}^{m-1} kappa^2(j/p) rho_j^2 with the Daniell kernel.
double hong_from_window(std::span<const double> window, double p);

// Smoothing parameter for the Hong statistic, ln(m).
double hong_bandwidth(std::size_t m);

// (raw - mean)/sqrt(variance). Throws ConfigError if variance <= 0.
double standardize(double raw, double mean, double variance);

namespace detail {

struct SparsePoint {
  std::size_t offset;  // 0-based position in the window
  double value;
};

double violation_from_count(std::size_t count, std::size_t m, double target_rate) noexcept;

// offsets: 1-based violation positions inside the window, strictly increasing.
double gini_from_offsets(std::span<const std::size_t> offsets) noexcept;

double ks_from_support(std::size_t m, std::size_t zeros, std::span<const double> sorted_positive,
                       const RiskLevels& levels) noexcept;

// Writes m * gamma_j for j = 0..m-1 into `out` (size m). Returns false when the
// window is constant, in which case `out` is left unspecified.
bool scaled_autocovariances(std::size_t m, std::span<const SparsePoint> points,
                            std::span<double> out) noexcept;

double hong_from_autocovariances(std::span<const double> scaled_acov,
                                 std::span<const double> weights) noexcept;

// kappa^2(j/p) for j = 0..m-1.
std::vector<double> daniell_weights(std::size_t m, double p);

}  // namespace detail

// Simulated null moments of the raw window statistics. "uc" is V_T or D_kT,
// "iid" is the Gini coefficient or M_kT; the *_var fields belong to the VaR
// stream and the others to the systemic streams.
struct NullMoments {
  MeasureKind measure = MeasureKind::CoVaR;
  std::size_t m = 0;
  RiskLevels levels;
  double mean_uc = 0.0;
  double var_uc = 0.0;
  double mean_iid = 0.0;
  double var_iid = 0.0;
  double mean_uc_var = 0.0;
  double var_uc_var = 0.0;
  double mean_iid_var = 0.0;
  double var_iid_var = 0.0;
  std::size_t b0 = 0;
};

struct DetectorTrace {
  std::vector<std::int64_t> T;
  std::vector<std::vector<double>> var_det;  // one series per VaR hypothesis
  std::vector<std::vector<double>> sys_det;  // K series
};

enum class StreamKind { Binary, Continuous };

struct RawStats {
  double uc = 0.0;
  double iid = 0.0;
};

// Last m values of one evidence stream, kept as a sparse list of nonzeros.
class RollingWindow {
 public:
  RollingWindow(std::size_t m, StreamKind kind, double target_rate, const RiskLevels& levels,
                std::shared_ptr<const std::vector<double>> kernel_weights);

  void push(double value);
  bool full() const noexcept { return pushed_ >= m_; }
  std::size_t size() const noexcept { return pushed_ < m_ ? static_cast<std::size_t>(pushed_) : m_; }
  RawStats stats() const;

 private:
  std::size_t m_;
  StreamKind kind_;
  double rate_;
  RiskLevels levels_;
  std::shared_ptr<const std::vector<double>> weights_;
  std::uint64_t pushed_ = 0;
  std::deque<std::pair<std::uint64_t, double>> nonzero_;
  std::vector<double> sorted_positive_;
  mutable std::vector<double> acov_;
  mutable std::vector<detail::SparsePoint> points_;
  mutable std::vector<std::size_t> offsets_;
};

// Detector values for all streams of one monitoring run, updated one day at a time.
class DetectorEngine {
 public:
  DetectorEngine(MeasureKind measure, const RiskLevels& levels, std::size_t m, double a,
                 const NullMoments& moments, std::size_t num_var, std::size_t num_sys);

  void push(std::span<const double> i_var, std::span<const double> evidence);
  bool ready() const noexcept;
  void values(std::span<double> var_out, std::span<double> sys_out) const;

  std::size_t num_var() const noexcept { return var_.size(); }
  std::size_t num_sys() const noexcept { return sys_.size(); }

 private:
  double combine(const RawStats& s, bool var_stream) const;

  double a_;
  NullMoments moments_;
  std::vector<RollingWindow> var_;
  std::vector<RollingWindow> sys_;
};

// Throws ConfigError unless the moments were simulated for this configuration.
void check_moments(const NullMoments& moments, MeasureKind measure, const RiskLevels& levels,
                   std::size_t m);

// Detector values for T = m..n, combined as a*uc + (1-a)*iid after standardization.
DetectorTrace detector_trace(const IndicatorPanel& panel, std::size_t m, double a,
                             const NullMoments& moments);

}  // namespace sentinel
