#include <algorithm>
#include <cmath>
#include <limits>

#include "sentinel/dgp.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

constexpr double kRootTol = 1e-10;
constexpr int kTableSize = 199;  // rho = -0.99, -0.98, ..., 0.99
constexpr double kTableMin = -0.99;
constexpr double kTableStep = 0.01;

double unit_scale(double nu) { return std::isinf(nu) ? 1.0 : std::sqrt((nu - 2.0) / nu); }

// Density of the unit-variance t at y.
double unit_pdf(double y, double nu) {
  const double s = unit_scale(nu);
  return student_t_pdf(y / s, nu) / s;
}

// P(X > a | Y = y) for the unit-variance pair.
double conditional_sf(double a, double y, double rho, double nu) {
  const double one_m_r2 = (1.0 - rho) * (1.0 + rho);
  if (std::isinf(nu)) return 1.0 - student_t_cdf((a - rho * y) / std::sqrt(one_m_r2), nu);
  const double s = unit_scale(nu);
  const double ap = a / s;
  const double yp = y / s;
  const double sd = std::sqrt((nu + yp * yp) * one_m_r2 / (nu + 1.0));
  return 1.0 - student_t_cdf((ap - rho * yp) / sd, nu + 1.0);
}

struct PairScale {
  double sx;
  double sy;
  double rho;
};

PairScale pair_scale(const Eigen::Matrix2d& h) {
  if (!(h(0, 0) > 0.0 && h(1, 1) > 0.0) || !h.allFinite()) throw InputError("covariance block must have positive variances");
  PairScale p{std::sqrt(h(0, 0)), std::sqrt(h(1, 1)), 0.0};
  p.rho = h(0, 1) / (p.sx * p.sy);
  if (!(std::abs(p.rho) <= 1.0 + 1e-12)) throw InputError("covariance block is not positive semidefinite");
  p.rho = std::clamp(p.rho, -1.0, 1.0);
  return p;
}

}  // namespace

double var_forecast(double sigma, double nu, double beta) {
  if (!(sigma > 0.0)) throw InputError("standard deviation must be positive");
  return sigma * student_t_quantile(beta, nu, true);
}

CoVaRSolver::CoVaRSolver(double nu, const RiskLevels& levels)
    : nu_(nu), levels_(levels) {
  if (!(levels.beta > 0.0 && levels.beta < 1.0)) throw InputError("beta must lie in (0,1)");
  if (!(levels.alpha > 0.0 && levels.alpha < 1.0)) throw InputError("CoVaR needs alpha in (0,1)");
  q_beta_ = student_t_quantile(levels.beta, nu, true);
  target_ = (1.0 - levels.alpha) * (1.0 - levels.beta);
  const double start = student_t_quantile(levels.alpha, nu, true);
  table_.resize(kTableSize);
  for (int i = 0; i < kTableSize; ++i) table_[static_cast<std::size_t>(i)] = solve_from(kTableMin + kTableStep * i, start);
}

double CoVaRSolver::solve(double rho) const {
  if (!(rho >= -1.0 && rho <= 1.0)) throw InputError("correlation outside [-1,1]");
  if (rho == 1.0) return student_t_quantile(1.0 - target_, nu_, true);
  if (rho == -1.0) return -student_t_quantile(levels_.beta + target_, nu_, true);
  const double pos = std::clamp((rho - kTableMin) / kTableStep, 0.0, static_cast<double>(kTableSize - 1));
  const auto i = std::min(static_cast<int>(pos), kTableSize - 2);
  const double w = pos - i;
  const double start = (1.0 - w) * table_[static_cast<std::size_t>(i)] + w * table_[static_cast<std::size_t>(i + 1)];
  return solve_from(rho, start);
}

double CoVaRSolver::solve_from(double rho, double start) const {
  if (!std::isfinite(start)) throw InputError("root search needs a finite start");
  auto f = [&](double c) { return bivariate_t_upper_tail(q_beta_, c, rho, nu_) - target_; };
  // f is decreasing in c; its derivative is -g(c) P(X > q | Y = c).
  auto df = [&](double c) { return -unit_pdf(c, nu_) * conditional_sf(q_beta_, c, rho, nu_); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double lo = -kInf;  // f(lo) > 0
  double hi = kInf;   // f(hi) < 0
  double c = start;
  double step = std::max(1.0, std::abs(start)) * 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    const double fc = f(c);
    if (std::abs(fc) <= kRootTol) return c;
    if (fc > 0.0) lo = c;
    else hi = c;

    const double d = df(c);
    double next = c - fc / d;
    const bool newton_ok = std::isfinite(next) && d < 0.0 && next > lo && next < hi;
    if (!newton_ok) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else {
        // Expand geometrically until the root is bracketed.
        step *= 2.0;
        next = std::isfinite(lo) ? lo + step : hi - step;
      }
    }
    if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c)))
      break;
    c = next;
  }
  throw NumericError("CoVaR root search failed to reach |f| <= 1e-10");
}

double covar_forecast(const Eigen::Matrix2d& h, double nu, const RiskLevels& levels) {
  const PairScale p = pair_scale(h);
  return p.sy * CoVaRSolver(nu, levels).solve(p.rho);
}

double rcovar_forecast(const Eigen::Matrix2d& h, double nu, const RiskLevels& levels) {
  Eigen::Matrix2d swapped;
  swapped << h(1, 1), h(1, 0), h(0, 1), h(0, 0);
  return covar_forecast(swapped, nu, levels);
}

TailPit tail_pit(double y, double x, const Eigen::Matrix2d& h, double nu, const RiskLevels& levels) {
  if (std::isnan(x) || std::isnan(y)) throw InputError("NaN loss");
  const PairScale p = pair_scale(h);
  TailPit out;
  out.pit_x = unit_t_cdf(x / p.sx, nu);
  const double q = student_t_quantile(levels.beta, nu, true);
  const double xi = bivariate_t_upper_tail(q, y / p.sy, p.rho, nu) / (1.0 - levels.beta);
  out.pit_tail = std::clamp(1.0 - xi, 0.0, 1.0);
  return out;
}

Forecaster::Forecaster(const DccParams& params, const Presample& presample, MeasureKind measure,
                       const RiskLevels& levels, bool lazy, std::shared_ptr<const CoVaRSolver> solver)
    : params_(params), measure_(measure), levels_(levels), lazy_(lazy), solver_(std::move(solver)) {
  validate(params_);
  validate_levels(levels_, measure_);
  const auto d = static_cast<Eigen::Index>(params_.k_plus_1);
  if (presample.state.d2.size() != d || presample.state.q.rows() != d)
    throw InputError("presample state does not match the parameter dimension");
  if (presample.has_lag) {
    if (presample.w.size() != d) throw InputError("presample returns do not match the parameter dimension");
    state_ = DccFilter::update(params_, presample.state, presample.w);
  } else {
    state_ = presample.state;
  }
  q_beta_ = student_t_quantile(levels_.beta, params_.nu, true);
  if (!uses_pits(measure_)) {
    if (solver_) {
      if (solver_->nu() != params_.nu || !(solver_->levels() == levels_))
        throw ConfigError("shared CoVaR solver does not match the forecaster");
    } else {
      solver_ = std::make_shared<const CoVaRSolver>(params_.nu, levels_);
    }
  }
  w_.resize(d);
}

CovForecast Forecaster::current() const {
  return {state_.d2.array().sqrt().matrix(), DccFilter::correlation(state_.q)};
}

ForecastRecord Forecaster::forecast(const ObservationRecord& obs) {
  const std::size_t K = params_.k_plus_1 - 1;
  if (obs.y.size() != K) throw InputError("observation dimension does not match the parameters");
  const Eigen::VectorXd sd = state_.d2.array().sqrt().matrix();
  const Eigen::MatrixXd r = DccFilter::correlation(state_.q);
  const double nu = params_.nu;

  ForecastRecord fc;
  fc.t = obs.t;
  const auto k1 = [](std::size_t k) { return static_cast<Eigen::Index>(k + 1); };
  switch (measure_) {
    case MeasureKind::CoVaR: {
      fc.var_hat = {sd[0] * q_beta_};
      fc.sys_hat.resize(K);
      const bool stressed = obs.x > fc.var_hat[0];
      for (std::size_t k = 0; k < K; ++k) {
        if (lazy_ && !stressed) fc.sys_hat[k] = 0.0;
        else fc.sys_hat[k] = sd[k1(k)] * solver_->solve(r(0, k1(k)));
      }
      break;
    }
    case MeasureKind::RCoVaR: {
      fc.var_hat.resize(K);
      fc.sys_hat.resize(K);
      for (std::size_t k = 0; k < K; ++k) {
        fc.var_hat[k] = sd[k1(k)] * q_beta_;
        if (lazy_ && !(obs.y[k] > fc.var_hat[k])) fc.sys_hat[k] = 0.0;
        else fc.sys_hat[k] = sd[0] * solver_->solve(r(0, k1(k)));
      }
      break;
    }
    case MeasureKind::CoES:
    case MeasureKind::MES: {
      const double pit_x = unit_t_cdf(obs.x / sd[0], nu);
      fc.pit_x = pit_x;
      fc.pit_tail.resize(K);
      for (std::size_t k = 0; k < K; ++k) {
        if (lazy_ && !(pit_x > levels_.beta)) {
          fc.pit_tail[k] = 0.0;
          continue;
        }
        const double xi = bivariate_t_upper_tail(q_beta_, obs.y[k] / sd[k1(k)], r(0, k1(k)), nu) / (1.0 - levels_.beta);
        fc.pit_tail[k] = std::clamp(1.0 - xi, 0.0, 1.0);
      }
      break;
    }
  }
  return fc;
}

void Forecaster::update(const ObservationRecord& obs) {
  const std::size_t K = params_.k_plus_1 - 1;
  if (obs.y.size() != K) throw InputError("observation dimension does not match the parameters");
  w_[0] = obs.x;
  for (std::size_t k = 0; k < K; ++k) w_[static_cast<Eigen::Index>(k + 1)] = obs.y[k];
  state_ = DccFilter::update(params_, state_, w_);
}

std::vector<ForecastRecord> make_forecast_panel(const DccParams& params, const Presample& presample,
                                                std::span<const ObservationRecord> history,
                                                MeasureKind measure, const RiskLevels& levels) {
  Forecaster fc(params, presample, measure, levels);
  std::vector<ForecastRecord> out;
  out.reserve(history.size());
  for (const auto& obs : history) {
    if (obs.y.size() + 1 != params.k_plus_1) throw InputError("panel dimension does not match the parameters");
    out.push_back(fc.forecast(obs));
    fc.update(obs);
  }
  return out;
}

}  // namespace sentinel
