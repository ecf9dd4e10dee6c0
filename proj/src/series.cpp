#include "sentinel/series.hpp"

#include <cctype>
#include <cmath>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InputError(std::string("non-finite ") + what);
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(what) + " outside [0,1]");
}

}  // namespace

std::string_view to_string(MeasureKind kind) noexcept {
  switch (kind) {
    case MeasureKind::CoVaR: return "covar";
    case MeasureKind::RCoVaR: return "rcovar";
    case MeasureKind::CoES: return "coes";
    case MeasureKind::MES: return "mes";
  }
  return "covar";
}

MeasureKind parse_measure(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "covar") return MeasureKind::CoVaR;
  if (lower == "rcovar") return MeasureKind::RCoVaR;
  if (lower == "coes") return MeasureKind::CoES;
  if (lower == "mes") return MeasureKind::MES;
  throw InputError("unknown measure '" + std::string(name) + "'");
}

void validate_levels(const RiskLevels& levels, MeasureKind kind) {
  if (!(levels.beta > 0.0 && levels.beta < 1.0)) throw InputError("beta must lie in (0,1)");
  if (!(levels.alpha >= 0.0 && levels.alpha < 1.0)) throw InputError("alpha must lie in [0,1)");
  if (kind == MeasureKind::MES && levels.alpha != 0.0)
    throw InputError("MES requires alpha = 0");
  if (kind != MeasureKind::MES && levels.alpha == 0.0)
    throw InputError("alpha = 0 is only permitted for MES");
}

int var_indicator(double x, double var_hat) {
  require_finite(x, "loss");
  require_finite(var_hat, "VaR forecast");
  return x > var_hat ? 1 : 0;
}

int joint_indicator(double x, double y, double var_hat, double sys_hat) {
  require_finite(x, "loss");
  require_finite(y, "loss");
  require_finite(var_hat, "VaR forecast");
  require_finite(sys_hat, "systemic forecast");
  return (x > var_hat && y > sys_hat) ? 1 : 0;
}

double cumulative_violation(double pit_x, double pit_tail, const RiskLevels& levels) {
  require_probability(pit_x, "pit_x");
  require_probability(pit_tail, "pit_tail");
  if (pit_x > levels.beta && pit_tail > levels.alpha)
    return (pit_tail - levels.alpha) / (1.0 - levels.alpha);
  return 0.0;
}

std::array<double, 2> identification_value(double v, double c, double x, double y,
                                           const RiskLevels& levels) {
  require_finite(v, "VaR value");
  require_finite(c, "CoVaR value");
  require_finite(x, "loss");
  require_finite(y, "loss");
  const double first = (x <= v ? 1.0 : 0.0) - levels.beta;
  const double second = x > v ? (y <= c ? 1.0 : 0.0) - levels.alpha : 0.0;
  return {first, second};
}

StepEvidence step_evidence(const ObservationRecord& obs, const ForecastRecord& fc,
                           MeasureKind measure, const RiskLevels& levels) {
  const std::size_t k = obs.y.size();
  if (k == 0) throw SchemaError("observation without institution losses");
  if (fc.t != obs.t) throw SchemaError("forecast and observation times differ at t=" + std::to_string(obs.t));

  StepEvidence out;
  out.evidence.resize(k);
  switch (measure) {
    case MeasureKind::CoVaR: {
      if (fc.var_hat.size() != 1 || fc.sys_hat.size() != k)
        throw SchemaError("CoVaR forecasts need one var_hat and K sys_hat values");
      out.i_var = {static_cast<double>(var_indicator(obs.x, fc.var_hat[0]))};
      for (std::size_t i = 0; i < k; ++i)
        out.evidence[i] = joint_indicator(obs.x, obs.y[i], fc.var_hat[0], fc.sys_hat[i]);
      break;
    }
    case MeasureKind::RCoVaR: {
      if (fc.var_hat.size() != k || fc.sys_hat.size() != k)
        throw SchemaError("RCoVaR forecasts need K var_hat and K sys_hat values");
      out.i_var.resize(k);
      for (std::size_t i = 0; i < k; ++i) {
        out.i_var[i] = var_indicator(obs.y[i], fc.var_hat[i]);
        out.evidence[i] = joint_indicator(obs.y[i], obs.x, fc.var_hat[i], fc.sys_hat[i]);
      }
      break;
    }
    case MeasureKind::CoES:
    case MeasureKind::MES: {
      if (!fc.pit_x || fc.pit_tail.size() != k)
        throw SchemaError("CoES/MES forecasts need pit_x and K pit_tail values");
      require_probability(*fc.pit_x, "pit_x");
      out.i_var = {*fc.pit_x > levels.beta ? 1.0 : 0.0};
      for (std::size_t i = 0; i < k; ++i)
        out.evidence[i] = cumulative_violation(*fc.pit_x, fc.pit_tail[i], levels);
      break;
    }
  }
  return out;
}

IndicatorPanel build_indicator_panel(std::span<const ObservationRecord> observations,
                                     std::span<const ForecastRecord> forecasts,
                                     MeasureKind measure, const RiskLevels& levels) {
  validate_levels(levels, measure);
  if (observations.size() != forecasts.size())
    throw SchemaError("observation and forecast counts differ");
  if (observations.empty()) throw SchemaError("empty panel");

  const std::size_t k = observations.front().y.size();
  IndicatorPanel panel;
  panel.measure = measure;
  panel.levels = levels;
  panel.i_var.assign(num_var_streams(measure, k), {});
  panel.evidence.assign(k, {});
  panel.t.reserve(observations.size());

  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    if (obs.y.size() != k) throw SchemaError("number of institutions changes at t=" + std::to_string(obs.t));
    if (i > 0 && obs.t != observations[i - 1].t + 1)
      throw SchemaError("time grid has a gap or regression at t=" + std::to_string(obs.t));
    StepEvidence ev = step_evidence(obs, forecasts[i], measure, levels);
    panel.t.push_back(obs.t);
    for (std::size_t h = 0; h < ev.i_var.size(); ++h) panel.i_var[h].push_back(ev.i_var[h]);
    for (std::size_t j = 0; j < k; ++j) panel.evidence[j].push_back(ev.evidence[j]);
  }
  return panel;
}

}  // namespace sentinel
