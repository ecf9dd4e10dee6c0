#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sentinel/dgp.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr int kMaxClosedFormDof = 1000;

void check_dof(double nu) {
  if (!(nu > 2.0)) throw InputError("degrees of freedom must exceed 2");
}

bool integer_dof(double nu) { return nu <= kMaxClosedFormDof && nu == std::floor(nu); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

// Classical t density without validation; log normalizing constant precomputed.
struct TDensity {
  double nu;
  double log_c;
  explicit TDensity(double dof)
      : nu(dof), log_c(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi)) {}
  double operator()(double x) const { return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu)); }
};

double t_cdf_raw(double x, double nu) {
  if (std::isinf(nu)) return normal_cdf(x);
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (integer_dof(nu)) return detail::t_cdf_integer(x, static_cast<int>(nu));
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

double t_sf_raw(double x, double nu) {
  if (std::isinf(nu)) return normal_sf(x);
  return t_cdf_raw(-x, nu);
}

double unit_scale(double nu) { return std::isinf(nu) ? 1.0 : std::sqrt((nu - 2.0) / nu); }

constexpr double kQuadAbsTol = 1e-13;
constexpr std::size_t kQuadMaxIntervals = 400;

struct Piece {
  double lo, hi, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

// Globally adaptive Gauss-Kronrod: the interval with the largest error
// estimate is bisected until the summed estimate meets the absolute target.
template <class G>
double adapt(const G& g, std::span<const double> breaks, double* error) {
  using boost::math::quadrature::gauss_kronrod;
  std::priority_queue<Piece> heap;
  auto piece = [&](double lo, double hi) {
    Piece p{lo, hi, 0.0, 0.0};
    p.value = gauss_kronrod<double, 31>::integrate(g, lo, hi, 0, 0.0, &p.error);
    return p;
  };
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) heap.push(piece(breaks[i], breaks[i + 1]));
  auto totals = [&] {
    double value = 0.0;
    err = 0.0;
    for (auto copy = heap; !copy.empty(); copy.pop()) {
      value += copy.top().value;
      err += copy.top().error;
    }
    return value;
  };
  totals();
  while (err > kQuadAbsTol && heap.size() < kQuadMaxIntervals) {
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      heap.push(worst);
      break;
    }
    const Piece left = piece(worst.lo, mid);
    const Piece right = piece(mid, worst.hi);
    heap.push(left);
    heap.push(right);
    err += left.error + right.error - worst.error;
  }
  const double value = totals();
  *error = err;
  return value;
}

// Integral of f over [a, inf) after the map x = a + u/(1-u). The conditional
// survival factor jumps near x = b/rho when the correlation is strong, so the
// u-range is split there.
template <class F>
double integrate_tail(F f, double a, double b, double rho, double* error) {
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double w = 1.0 - u;
    return f(a + u / w) / (w * w);
  };
  const double x0 = rho != 0.0 ? b / rho : 0.0;
  if (rho != 0.0 && std::isfinite(x0) && x0 > a) {
    const double d = x0 - a;
    const double u0 = d / (1.0 + d);
    if (u0 > 0.0 && u0 < 1.0) {
      const double breaks[] = {0.0, u0, 1.0};
      return adapt(g, breaks, error);
    }
  }
  const double breaks[] = {0.0, 1.0};
  return adapt(g, breaks, error);
}

}  // namespace

namespace detail {

double t_cdf_integer(double x, int nu) noexcept {
  const double theta = std::atan(x / std::sqrt(static_cast<double>(nu)));
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double c2 = c * c;
  double a;
  if (nu % 2 == 1) {
    if (nu == 1) {
      a = 2.0 * theta / std::numbers::pi;
    } else {
      double term = c;
      double sum = c;
      for (int k = 3; k <= nu - 2; k += 2) {
        term *= c2 * static_cast<double>(k - 1) / static_cast<double>(k);
        sum += term;
      }
      a = 2.0 / std::numbers::pi * (theta + s * sum);
    }
  } else {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 2; k <= nu - 2; k += 2) {
      term *= c2 * static_cast<double>(k - 1) / static_cast<double>(k);
      sum += term;
    }
    a = s * sum;
  }
  return 0.5 + 0.5 * a;
}

}  // namespace detail

double student_t_cdf(double x, double nu) {
  if (std::isnan(x)) throw InputError("t CDF of NaN");
  if (!(nu > 0.0)) throw InputError("degrees of freedom must be positive");
  return t_cdf_raw(x, nu);
}

double student_t_pdf(double x, double nu) {
  if (std::isnan(x)) throw InputError("t density of NaN");
  if (!(nu > 0.0)) throw InputError("degrees of freedom must be positive");
  if (std::isinf(nu)) return kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return TDensity(nu)(x);
}

double student_t_quantile(double p, double nu, bool unit_variance) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("quantile probability must lie in (0,1)");
  if (std::isinf(nu)) return boost::math::quantile(boost::math::normal_distribution<double>(), p);
  if (unit_variance) check_dof(nu);
  else if (!(nu > 0.0)) throw InputError("degrees of freedom must be positive");
  const double q = boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
  return unit_variance ? q * unit_scale(nu) : q;
}

double unit_t_cdf(double x, double nu) {
  if (std::isnan(x)) throw InputError("t CDF of NaN");
  if (!std::isinf(nu)) check_dof(nu);
  return t_cdf_raw(x / unit_scale(nu), nu);
}

double bivariate_t_upper_tail(double a, double b, double rho, double nu) {
  if (std::isnan(a) || std::isnan(b) || std::isnan(rho)) throw InputError("NaN argument to bivariate tail");
  if (!(rho >= -1.0 && rho <= 1.0)) throw InputError("correlation outside [-1,1]");
  if (!std::isinf(nu)) check_dof(nu);

  const double s = unit_scale(nu);
  auto sf = [&](double z) { return t_sf_raw(z / s, nu); };

  if (a == std::numeric_limits<double>::infinity() || b == std::numeric_limits<double>::infinity()) return 0.0;
  if (a == -std::numeric_limits<double>::infinity()) return sf(b);
  if (b == -std::numeric_limits<double>::infinity()) return sf(a);
  if (rho == 1.0) return sf(std::max(a, b));
  if (rho == -1.0) return std::max(0.0, t_cdf_raw(-b / s, nu) - t_cdf_raw(a / s, nu));

  // Integrate over the coordinate with the larger threshold.
  if (b > a) std::swap(a, b);
  const double ap = a / s;
  const double bp = b / s;
  const double one_m_r2 = (1.0 - rho) * (1.0 + rho);

  double error = 0.0;
  double value = 0.0;
  if (std::isinf(nu)) {
    const double sd = std::sqrt(one_m_r2);
    auto f = [&](double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x) * normal_sf((bp - rho * x) / sd); };
    value = integrate_tail(f, ap, bp, rho, &error);
  } else {
    const TDensity dens(nu);
    const double nu1 = nu + 1.0;
    auto f = [&](double x) {
      const double sd = std::sqrt((nu + x * x) * one_m_r2 / nu1);
      return dens(x) * t_sf_raw((bp - rho * x) / sd, nu1);
    };
    value = integrate_tail(f, ap, bp, rho, &error);
  }
  if (!std::isfinite(value) || error > 1e-9) throw NumericError("bivariate tail quadrature did not converge");
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace sentinel
