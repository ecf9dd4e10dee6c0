#include <algorithm>
#include <cmath>
#include <string>

#include "sentinel/detectors.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

RollingWindow::RollingWindow(std::size_t m, StreamKind kind, double target_rate,
                             const RiskLevels& levels,
                             std::shared_ptr<const std::vector<double>> kernel_weights)
    : m_(m), kind_(kind), rate_(target_rate), levels_(levels), weights_(std::move(kernel_weights)) {
  if (m_ == 0) throw ConfigError("window length must be positive");
  if (kind_ == StreamKind::Continuous) {
    if (!weights_ || weights_->size() != m_) throw ConfigError("kernel weights do not match the window length");
    acov_.resize(m_);
  }
}

void RollingWindow::push(double value) {
  if (kind_ == StreamKind::Binary) {
    if (value != 0.0 && value != 1.0) throw InputError("binary stream holds a value other than 0 or 1");
  } else if (!(value >= 0.0 && value <= 1.0)) {
    throw InputError("cumulative violation outside [0,1]");
  }

  const std::uint64_t idx = pushed_++;
  if (value != 0.0) {
    nonzero_.emplace_back(idx, value);
    if (kind_ == StreamKind::Continuous)
      sorted_positive_.insert(std::upper_bound(sorted_positive_.begin(), sorted_positive_.end(), value), value);
  }
  if (pushed_ > m_) {
    const std::uint64_t start = pushed_ - m_;
    while (!nonzero_.empty() && nonzero_.front().first < start) {
      if (kind_ == StreamKind::Continuous) {
        auto it = std::lower_bound(sorted_positive_.begin(), sorted_positive_.end(), nonzero_.front().second);
        sorted_positive_.erase(it);
      }
      nonzero_.pop_front();
    }
  }
}

RawStats RollingWindow::stats() const {
  if (!full()) throw InputError("window not yet full");
  const std::uint64_t start = pushed_ - m_;
  RawStats out;
  if (kind_ == StreamKind::Binary) {
    offsets_.clear();
    for (const auto& [idx, v] : nonzero_) offsets_.push_back(static_cast<std::size_t>(idx - start) + 1);
    out.uc = detail::violation_from_count(nonzero_.size(), m_, rate_);
    out.iid = detail::gini_from_offsets(offsets_);
  } else {
    points_.clear();
    for (const auto& [idx, v] : nonzero_) points_.push_back({static_cast<std::size_t>(idx - start), v});
    out.uc = detail::ks_from_support(m_, m_ - nonzero_.size(), sorted_positive_, levels_);
    out.iid = detail::scaled_autocovariances(m_, points_, acov_)
                  ? detail::hong_from_autocovariances(acov_, *weights_)
                  : 0.0;
  }
  return out;
}

void check_moments(const NullMoments& moments, MeasureKind measure, const RiskLevels& levels,
                   std::size_t m) {
  if (moments.measure != measure)
    throw ConfigError("null moments were simulated for measure " + std::string(to_string(moments.measure)));
  if (moments.m != m) throw ConfigError("null moments were simulated for window length " + std::to_string(moments.m));
  if (!(moments.levels == levels)) throw ConfigError("null moments were simulated for different levels");
  for (double v : {moments.var_uc, moments.var_iid, moments.var_uc_var, moments.var_iid_var})
    if (!(v > 0.0)) throw ConfigError("null moments contain a non-positive variance");
}

DetectorEngine::DetectorEngine(MeasureKind measure, const RiskLevels& levels, std::size_t m, double a,
                               const NullMoments& moments, std::size_t num_var, std::size_t num_sys)
    : a_(a), moments_(moments) {
  validate_levels(levels, measure);
  check_moments(moments, measure, levels, m);
  if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("detector weight a must lie in [0,1]");
  if (num_var != num_var_streams(measure, num_sys)) throw ConfigError("wrong number of VaR streams for the measure");

  var_.reserve(num_var);
  for (std::size_t i = 0; i < num_var; ++i) var_.emplace_back(m, StreamKind::Binary, var_rate(levels), levels, nullptr);

  sys_.reserve(num_sys);
  if (uses_pits(measure)) {
    auto w = std::make_shared<const std::vector<double>>(detail::daniell_weights(m, hong_bandwidth(m)));
    for (std::size_t k = 0; k < num_sys; ++k) sys_.emplace_back(m, StreamKind::Continuous, 0.0, levels, w);
  } else {
    for (std::size_t k = 0; k < num_sys; ++k)
      sys_.emplace_back(m, StreamKind::Binary, joint_rate(levels), levels, nullptr);
  }
}

void DetectorEngine::push(std::span<const double> i_var, std::span<const double> evidence) {
  if (i_var.size() != var_.size() || evidence.size() != sys_.size())
    throw InputError("evidence does not match the number of streams");
  for (std::size_t i = 0; i < var_.size(); ++i) var_[i].push(i_var[i]);
  for (std::size_t k = 0; k < sys_.size(); ++k) sys_[k].push(evidence[k]);
}

bool DetectorEngine::ready() const noexcept { return !sys_.empty() && sys_.front().full(); }

double DetectorEngine::combine(const RawStats& s, bool var_stream) const {
  const NullMoments& mo = moments_;
  const double uc = var_stream ? (s.uc - mo.mean_uc_var) / std::sqrt(mo.var_uc_var)
                               : (s.uc - mo.mean_uc) / std::sqrt(mo.var_uc);
  const double iid = var_stream ? (s.iid - mo.mean_iid_var) / std::sqrt(mo.var_iid_var)
                                : (s.iid - mo.mean_iid) / std::sqrt(mo.var_iid);
  return a_ * uc + (1.0 - a_) * iid;
}

void DetectorEngine::values(std::span<double> var_out, std::span<double> sys_out) const {
  for (std::size_t i = 0; i < var_.size(); ++i) var_out[i] = combine(var_[i].stats(), true);
  for (std::size_t k = 0; k < sys_.size(); ++k) sys_out[k] = combine(sys_[k].stats(), false);
}

DetectorTrace detector_trace(const IndicatorPanel& panel, std::size_t m, double a,
                             const NullMoments& moments) {
  const std::size_t n = panel.length();
  const std::size_t k = panel.num_series();
  if (m == 0 || n < m) throw InputError("panel is shorter than the window length");
  DetectorEngine engine(panel.measure, panel.levels, m, a, moments, panel.i_var.size(), k);

  DetectorTrace trace;
  const std::size_t points = n - m + 1;
  trace.T.reserve(points);
  trace.var_det.assign(panel.i_var.size(), std::vector<double>(points));
  trace.sys_det.assign(k, std::vector<double>(points));

  std::vector<double> iv(panel.i_var.size()), ev(k), vo(panel.i_var.size()), so(k);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t h = 0; h < iv.size(); ++h) iv[h] = panel.i_var[h][t];
    for (std::size_t j = 0; j < k; ++j) ev[j] = panel.evidence[j][t];
    engine.push(iv, ev);
    if (!engine.ready()) continue;
    engine.values(vo, so);
    const std::size_t row = t + 1 - m;
    trace.T.push_back(panel.t[t]);
    for (std::size_t h = 0; h < vo.size(); ++h) trace.var_det[h][row] = vo[h];
    for (std::size_t j = 0; j < k; ++j) trace.sys_det[j][row] = so[j];
  }
  return trace;
}

}  // namespace sentinel
