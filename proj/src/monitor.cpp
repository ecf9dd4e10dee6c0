#include "sentinel/monitor.hpp"

#include "sentinel/errors.hpp"

namespace sentinel {

MonitorConfig config_from(const CriticalValues& cv) {
  MonitorConfig cfg;
  cfg.measure = cv.measure;
  cfg.levels = cv.levels;
  cfg.m = cv.m;
  cfg.K = cv.K;
  cfg.a = cv.a;
  return cfg;
}

std::string stream_label(StreamId id, MeasureKind measure) {
  if (id.group == StreamGroup::Systemic) return "sys_" + std::to_string(id.index + 1);
  if (measure == MeasureKind::RCoVaR) return "var_" + std::to_string(id.index + 1);
  return "var";
}

namespace {

const CriticalValues& checked(const MonitorConfig& config, const CriticalValues& cv) {
  if (cv.measure != config.measure)
    throw ConfigError("critical values were calibrated for measure " + std::string(to_string(cv.measure)));
  if (!(cv.levels == config.levels)) throw ConfigError("critical values were calibrated for different levels");
  if (cv.m != config.m) throw ConfigError("critical values were calibrated for window length " + std::to_string(cv.m));
  if (cv.K != config.K) throw ConfigError("critical values were calibrated for K = " + std::to_string(cv.K));
  if (cv.a != config.a) throw ConfigError("critical values were calibrated for a different weight a");
  if (cv.n < cv.m) throw ConfigError("critical-values horizon is shorter than the window");
  if (!(cv.v > 0.0 && cv.c > 0.0)) throw ConfigError("critical values must be positive to normalize detectors");
  return cv;
}

}  // namespace

Monitor::Monitor(const MonitorConfig& config, const CriticalValues& cv)
    : config_(config),
      cv_(checked(config, cv)),
      engine_(config.measure, config.levels, config.m, config.a, cv.moments,
              num_var_streams(config.measure, config.K), config.K) {
  report_.measure = config.measure;
  report_.horizon = cv.n;
  report_.m = cv.m;
  report_.v = cv.v;
  report_.c = cv.c;
  report_.trace.var_det.assign(engine_.num_var(), {});
  report_.trace.sys_det.assign(engine_.num_sys(), {});
  report_.raw.var_det.assign(engine_.num_var(), {});
  report_.raw.sys_det.assign(engine_.num_sys(), {});
  var_raw_.resize(engine_.num_var());
  sys_raw_.resize(engine_.num_sys());
}

StepOutcome Monitor::step(const ForecastRecord& forecast, const ObservationRecord& observation) {
  if (observation.y.size() != config_.K)
    throw InputError("observation has " + std::to_string(observation.y.size()) + " institutions, expected " +
                     std::to_string(config_.K));
  return step_evidence(observation.t,
                       sentinel::step_evidence(observation, forecast, config_.measure, config_.levels));
}

StepOutcome Monitor::step_evidence(std::int64_t t, const StepEvidence& evidence) {
  if (last_t_ && t <= *last_t_) throw InputError("time index does not increase at t=" + std::to_string(t));
  if (steps_ >= cv_.n)
    throw HorizonError("monitoring horizon of " + std::to_string(cv_.n) + " days is exhausted");
  if (evidence.i_var.size() != engine_.num_var() || evidence.evidence.size() != engine_.num_sys())
    throw InputError("evidence does not match the number of institutions");

  engine_.push(evidence.i_var, evidence.evidence);
  last_t_ = t;
  ++steps_;

  StepOutcome out;
  if (!engine_.ready()) return out;

  engine_.values(var_raw_, sys_raw_);
  out.emitted = true;
  out.T = t;
  out.var_norm.resize(var_raw_.size());
  out.sys_norm.resize(sys_raw_.size());
  report_.trace.T.push_back(t);
  report_.raw.T.push_back(t);
  for (std::size_t i = 0; i < var_raw_.size(); ++i) {
    out.var_norm[i] = var_raw_[i] / cv_.v;
    report_.trace.var_det[i].push_back(out.var_norm[i]);
    report_.raw.var_det[i].push_back(var_raw_[i]);
    if (out.var_norm[i] >= 1.0) out.alarms.push_back({t, {StreamGroup::VaR, i}, out.var_norm[i], false});
  }
  for (std::size_t k = 0; k < sys_raw_.size(); ++k) {
    out.sys_norm[k] = sys_raw_[k] / cv_.c;
    report_.trace.sys_det[k].push_back(out.sys_norm[k]);
    report_.raw.sys_det[k].push_back(sys_raw_[k]);
    if (out.sys_norm[k] >= 1.0) out.alarms.push_back({t, {StreamGroup::Systemic, k}, out.sys_norm[k], false});
  }

  if (!out.alarms.empty() && !report_.first_alarm) {
    // Largest normalized value wins; on exact ties the earliest stream in
    // (VaR streams, then institutions) order keeps the flag.
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.alarms.size(); ++i)
      if (out.alarms[i].normalized_value > out.alarms[best].normalized_value) best = i;
    out.alarms[best].first = true;
    report_.first_alarm = out.alarms[best];
  }
  report_.alarms.insert(report_.alarms.end(), out.alarms.begin(), out.alarms.end());
  return out;
}

MonitorReport Monitor::finalize() const {
  if (report_.trace.T.empty()) throw EmptyReportError("no detector value was emitted; fewer than m observations");
  MonitorReport r = report_;
  r.steps = steps_;
  return r;
}

Monitor monitor_init(const MonitorConfig& config, const CriticalValues& cv) { return Monitor(config, cv); }

StepOutcome monitor_step(Monitor& state, const ForecastRecord& forecast, const ObservationRecord& observation) {
  return state.step(forecast, observation);
}

MonitorReport monitor_finalize(const Monitor& state) { return state.finalize(); }

MonitorReport monitor_panel(const IndicatorPanel& panel, const CriticalValues& cv) {
  MonitorConfig cfg = config_from(cv);
  cfg.measure = panel.measure;
  cfg.levels = panel.levels;
  cfg.K = panel.num_series();
  Monitor mon(cfg, cv);
  StepEvidence ev;
  ev.i_var.resize(panel.i_var.size());
  ev.evidence.resize(panel.num_series());
  for (std::size_t t = 0; t < panel.length(); ++t) {
    for (std::size_t h = 0; h < ev.i_var.size(); ++h) ev.i_var[h] = panel.i_var[h][t];
    for (std::size_t k = 0; k < ev.evidence.size(); ++k) ev.evidence[k] = panel.evidence[k][t];
    mon.step_evidence(panel.t[t], ev);
  }
  return mon.finalize();
}

}  // namespace sentinel
