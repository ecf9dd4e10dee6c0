#pragma once

// DCC/CCC-GARCH simulation and model-based forecasts.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sentinel/rng.hpp"
#include "sentinel/series.hpp"

namespace sentinel {

// ---- Student t ------------------------------------------------------------

inline constexpr double kGaussianDof = std::numeric_limits<double>::infinity();

// CDF and density of the classical t distribution; nu = inf is the standard normal.
double student_t_cdf(double x, double nu);
double student_t_pdf(double x, double nu);

// Quantile; with unit_variance the classical quantile is scaled by sqrt((nu-2)/nu).
double student_t_quantile(double p, double nu, bool unit_variance);

// CDF of the unit-variance t distribution (nu > 2 or inf).
double unit_t_cdf(double x, double nu);

// P(X > a, Y > b) for a unit-variance bivariate t (or Gaussian) pair with correlation rho.
double bivariate_t_upper_tail(double a, double b, double rho, double nu);

namespace detail {
// Closed-form classical t CDF for integer degrees of freedom.
double t_cdf_integer(double x, int nu) noexcept;
}  // namespace detail

// ---- Risk forecasts from a 2x2 covariance block ---------------------------

// sigma * q(beta); sigma is the conditional standard deviation.
double var_forecast(double sigma, double nu, double beta);

// Solves P(X > VaR, Y > c) = (1 - alpha)(1 - beta) in standardized units for
// fixed (nu, alpha, beta). A table of solutions over rho, built on
// construction, seeds the Newton steps. Immutable afterwards, so one solver can
// be shared between threads.
class CoVaRSolver {
 public:
  CoVaRSolver(double nu, const RiskLevels& levels);

  // Standardized threshold c(rho); multiply by sigma_Y for the forecast.
  double solve(double rho) const;
  // Root search from an explicit starting point, without the table.
  double solve_from(double rho, double start) const;

  double nu() const noexcept { return nu_; }
  const RiskLevels& levels() const noexcept { return levels_; }
  double var_quantile() const noexcept { return q_beta_; }

 private:
  double nu_;
  RiskLevels levels_;
  double q_beta_;
  double target_;
  std::vector<double> table_;
};

// Threshold for coordinate 1 given stress in coordinate 0 of the 2x2 block h.
double covar_forecast(const Eigen::Matrix2d& h, double nu, const RiskLevels& levels);
// Same with the roles of the coordinates swapped.
double rcovar_forecast(const Eigen::Matrix2d& h, double nu, const RiskLevels& levels);

struct TailPit {
  double pit_x = 0.0;
  double pit_tail = 0.0;
};

// pit_x = F_X(x); pit_tail = 1 - P(X > VaR, Y > y)/(1 - beta), clamped to [0,1].
TailPit tail_pit(double y, double x, const Eigen::Matrix2d& h, double nu, const RiskLevels& levels);

// ---- DCC-GARCH ------------------------------------------------------------

struct DccParams {
  std::size_t k_plus_1 = 2;
  Eigen::VectorXd omega_g;
  Eigen::VectorXd alpha_g;
  Eigen::VectorXd beta_g;
  double alpha_q = 0.0;
  double beta_q = 0.0;
  double nu = 5.0;
  Eigen::MatrixXd q_bar;
};

struct BreakSpec {
  std::int64_t t_star = 0;
  double beta_post = 0.85;
};

// Throws ConfigError on any invariant violation.
void validate(const DccParams& params);
void validate(const BreakSpec& brk, const DccParams& params);

// nu = 5, omega = alpha_G = alpha_Q = 0.1, beta_G = beta_Q = 0.7, equicorrelation 0.5.
DccParams baseline_params(std::size_t K);

// Copy of params with every beta_g component and beta_q set to beta.
DccParams with_persistence(const DccParams& params, double beta);

nlohmann::ordered_json to_json(const DccParams& params);
// Vectors may be given as scalars and q_bar as an equicorrelation value; nu may be "inf".
DccParams dcc_params_from_json(const nlohmann::json& j);
std::optional<BreakSpec> break_from_json(const nlohmann::json& j);

struct DccState {
  Eigen::VectorXd d2;  // conditional variances for the next day
  Eigen::MatrixXd q;   // Q for the next day
};

struct CovForecast {
  Eigen::VectorXd d;  // conditional standard deviations
  Eigen::MatrixXd r;  // conditional correlation
  Eigen::MatrixXd h() const { return d.asDiagonal() * r * d.asDiagonal(); }
};

// The shared DCC recursion used by the simulator and the forecaster.
struct DccFilter {
  static DccState initial(const DccParams& params);
  static Eigen::MatrixXd correlation(const Eigen::MatrixXd& q);
  // State for the next day after observing returns w under today's state.
  static DccState update(const DccParams& params, const DccState& state, const Eigen::VectorXd& w);
};

// State before the first retained day. With has_lag the forecaster applies
// one pre-break update to (state, w); otherwise state already belongs to day 1.
struct Presample {
  bool has_lag = false;
  DccState state;
  Eigen::VectorXd w;
};

struct SimulatedPanel {
  std::vector<ObservationRecord> returns;  // t = 1..n; x is the first coordinate
  std::vector<CovForecast> truth;          // true (D_t, R_t), filled when requested
  Presample presample;
};

// Runs burnin + n steps. Persistence switches to beta_post for t > t_star.
SimulatedPanel simulate_dcc(const DccParams& params, const std::optional<BreakSpec>& brk, std::size_t n,
                            std::size_t burnin, Engine& rng, bool keep_truth = true);

// Day-by-day forecaster using fixed parameters.
class Forecaster {
 public:
  // With lazy set, systemic thresholds and tail PITs that cannot change the
  // evidence (the conditioning event failed) are skipped and reported as 0.
  // Used by the study harness.
  Forecaster(const DccParams& params, const Presample& presample, MeasureKind measure,
             const RiskLevels& levels, bool lazy = false,
             std::shared_ptr<const CoVaRSolver> solver = nullptr);

  // Forecast for the next day. PIT mode needs the realization, so the
  // observation is passed in; threshold mode reads it only when lazy.
  ForecastRecord forecast(const ObservationRecord& obs);
  // Absorbs the realized returns and moves to the next day.
  void update(const ObservationRecord& obs);

  const DccState& state() const noexcept { return state_; }
  CovForecast current() const;

 private:
  DccParams params_;
  MeasureKind measure_;
  RiskLevels levels_;
  bool lazy_;
  DccState state_;
  std::shared_ptr<const CoVaRSolver> solver_;
  double q_beta_;
  Eigen::VectorXd w_;
};

// Forecasts for every day of a panel using the pre-break parameters.
std::vector<ForecastRecord> make_forecast_panel(const DccParams& params, const Presample& presample,
                                                std::span<const ObservationRecord> history,
                                                MeasureKind measure, const RiskLevels& levels);

}  // namespace sentinel
