#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>

#include "sentinel/detectors.hpp"
#include "sentinel/dgp.hpp"
#include "sentinel/nullsim.hpp"

namespace oracle {

using sentinel::RiskLevels;

double violation(std::span<const double> w, double rate) {
  double sum = 0.0;
  for (double v : w) sum += v;
  return std::abs(sum / static_cast<double>(w.size()) - rate);
}

double gini(std::span<const double> w) {
  std::vector<double> d;
  std::size_t last = 0;
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (w[t] == 1.0) {
      d.push_back(static_cast<double>(t + 1 - last));
      last = t + 1;
    }
  }
  const std::size_t s = d.size();
  if (s <= 1) return 0.0;
  double pair = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    total += d[i];
    for (std::size_t j = 0; j < s; ++j) pair += std::abs(d[i] - d[j]);
  }
  const double sd = static_cast<double>(s);
  return (pair / (sd * sd)) / (2.0 * (total / sd));
}

double ks(std::span<const double> w, const RiskLevels& levels) {
  const double m = static_cast<double>(w.size());
  auto ecdf = [&](double x, bool left) {
    std::size_t c = 0;
    for (double v : w) c += left ? (v < x) : (v <= x);
    return static_cast<double>(c) / m;
  };
  auto H = [&](double x, bool left) {
    if (x < 0.0 || (left && x == 0.0)) return 0.0;
    if (x >= 1.0) return 1.0;
    return (x * (1.0 - levels.alpha) + levels.alpha) * (1.0 - levels.beta) + levels.beta;
  };
  std::vector<double> points(w.begin(), w.end());
  points.push_back(0.0);
  double d = 0.0;
  for (double x : points) {
    d = std::max(d, std::abs(ecdf(x, false) - H(x, false)));
    d = std::max(d, std::abs(ecdf(x, true) - H(x, true)));
  }
  return d;
}

double autocorr(std::span<const double> w, std::size_t lag) {
  const std::size_t m = w.size();
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(m);
  auto gamma = [&](std::size_t j) {
    double g = 0.0;
    for (std::size_t t = j; t < m; ++t) g += (w[t] - mean) * (w[t - j] - mean);
    return g / static_cast<double>(m);
  };
  const double g0 = gamma(0);
  if (g0 <= 0.0) return 0.0;
  return gamma(lag) / g0;
}

double hong(std::span<const double> w, double p) {
  const std::size_t m = w.size();
  double sum = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    const double z = static_cast<double>(j) / p;
    const double k = std::sin(std::numbers::pi * z) / (std::numbers::pi * z);
    const double r = autocorr(w, j);
    sum += k * k * r * r;
  }
  return static_cast<double>(m) * sum;
}

double binomial_mean_abs_dev(std::size_t m, double p) {
  boost::math::binomial_distribution<double> bin(static_cast<double>(m), p);
  double e = 0.0;
  for (std::size_t k = 0; k <= m; ++k)
    e += boost::math::pdf(bin, static_cast<double>(k)) * std::abs(static_cast<double>(k) / static_cast<double>(m) - p);
  return e;
}

double ks_sample_vs_H(std::vector<double> xs, const RiskLevels& levels) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  auto H = [&](double x) { return (x * (1.0 - levels.alpha) + levels.alpha) * (1.0 - levels.beta) + levels.beta; };
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double x = xs[i];
    const double below = static_cast<double>(i) / n;
    const double upto = static_cast<double>(j) / n;
    const double h_left = x == 0.0 ? 0.0 : H(x);
    d = std::max({d, std::abs(upto - H(x)), std::abs(below - h_left)});
    i = j;
  }
  if (xs.empty() || xs.front() > 0.0) d = std::max(d, H(0.0));
  return d;
}

PairSampler::PairSampler(double r, double dof) : rho(r), nu(dof), chi2(std::isinf(dof) ? 1.0 : dof) {}

std::pair<double, double> PairSampler::operator()(std::mt19937_64& rng) {
  const double z1 = normal(rng);
  const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * normal(rng);
  if (std::isinf(nu)) return {z1, z2};
  const double scale = std::sqrt((nu - 2.0) / chi2(rng));
  return {z1 * scale, z2 * scale};
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Check null_frequency_check(std::size_t n, std::uint64_t seed) {
  const RiskLevels lv{0.9, 0.9};
  const double nu = 5.0;
  const double rho = 0.5;
  const double var = sentinel::student_t_quantile(lv.beta, nu, true);
  const double covar = sentinel::CoVaRSolver(nu, lv).solve(rho);
  std::mt19937_64 rng(seed);
  PairSampler draw(rho, nu);
  std::size_t iv = 0;
  std::size_t ik = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto [x, y] = draw(rng);
    iv += sentinel::var_indicator(x, var);
    ik += sentinel::joint_indicator(x, y, var, covar);
  }
  const double nd = static_cast<double>(n);
  const double pv = sentinel::var_rate(lv);
  const double pk = sentinel::joint_rate(lv);
  const double fv = static_cast<double>(iv) / nd;
  const double fk = static_cast<double>(ik) / nd;
  const bool ok = std::abs(fv - pv) <= 4.0 * std::sqrt(pv * (1 - pv) / nd) &&
                  std::abs(fk - pk) <= 4.0 * std::sqrt(pk * (1 - pk) / nd);
  return {ok, "freq I=" + fmt(fv) + " I_k=" + fmt(fk)};
}

Check pit_h_ks_check(std::size_t n, std::uint64_t seed) {
  const RiskLevels lv{0.9, 0.9};
  const double nu = 5.0;
  const double rho = 0.5;
  Eigen::Matrix2d h;
  h << 1.0, rho, rho, 1.0;
  std::mt19937_64 rng(seed);
  PairSampler draw(rho, nu);
  std::vector<double> hs(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto [x, y] = draw(rng);
    const auto pit = sentinel::tail_pit(y, x, h, nu, lv);
    hs[t] = sentinel::cumulative_violation(pit.pit_x, pit.pit_tail, lv);
  }
  const double d = ks_sample_vs_H(std::move(hs), lv);
  return {d < 2.0 / std::sqrt(static_cast<double>(n)), "KS=" + fmt(d)};
}

Check nullsim_ks_check(std::size_t n, std::uint64_t seed) {
  const RiskLevels lv{0.95, 0.95};
  sentinel::Engine rng(seed);
  const auto path = sentinel::simulate_null_path(sentinel::MeasureKind::CoES, lv, n, rng);
  const double d = ks_sample_vs_H(path.evidence, lv);
  double sum = 0.0;
  for (double v : path.i_var) sum += v;
  const double nd = static_cast<double>(n);
  const double f = sum / nd;
  const bool ok = d < 2.0 / std::sqrt(nd) && std::abs(f - 0.05) <= 4.0 * std::sqrt(0.95 * 0.05 / nd);
  return {ok, "KS=" + fmt(d) + " freq I=" + fmt(f)};
}

Check brute_force_check(std::size_t max_len) {
  const std::vector<RiskLevels> levels{{0.9, 0.9}, {0.0, 0.95}, {0.5, 0.8}};
  const std::vector<double> alphabet{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t windows = 0;
  std::size_t mismatches = 0;
  double worst_m = 0.0;
  std::vector<double> w;
  for (std::size_t len = 1; len <= max_len; ++len) {
    w.assign(len, 0.0);
    // Binary windows: V, g, M.
    for (std::uint32_t bits = 0; bits < (1u << len); ++bits) {
      for (std::size_t i = 0; i < len; ++i) w[i] = (bits >> i) & 1u ? 1.0 : 0.0;
      ++windows;
      for (double rate : {0.1, 0.05, 0.0025}) mismatches += sentinel::window_violation_stat(w, rate) != violation(w, rate);
      mismatches += sentinel::gini_from_window(w) != gini(w);
      if (len >= 2) {
        const double p = sentinel::hong_bandwidth(len);
        const double got = sentinel::hong_from_window(w, p);
        const double want = hong(w, p);
        const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
        worst_m = std::max(worst_m, err);
        mismatches += err > 1e-12;
      }
    }
    // Quantized continuous windows: D, M.
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= alphabet.size();
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < len; ++i, c /= alphabet.size()) w[i] = alphabet[c % alphabet.size()];
      ++windows;
      for (const auto& lv : levels) mismatches += sentinel::ks_from_window(w, lv) != ks(w, lv);
      if (len >= 2) {
        const double p = sentinel::hong_bandwidth(len);
        const double want = hong(w, p);
        const double err = std::abs(sentinel::hong_from_window(w, p) - want) / std::max(1.0, std::abs(want));
        worst_m = std::max(worst_m, err);
        mismatches += err > 1e-12;
      }
    }
  }
  return {mismatches == 0, std::to_string(windows) + " windows, " + std::to_string(mismatches) +
                               " mismatches, worst M error " + fmt(worst_m)};
}

Check bivariate_tail_mc_check(std::size_t draws, std::uint64_t seed) {
  struct Point {
    double a, b, rho, nu;
  };
  const std::vector<Point> grid{{1.5, 1.5, 0.5, 5.0}, {0.0, 0.0, 0.3, 5.0}, {1.0, 2.0, -0.4, 5.0},
                                {2.0, 0.5, 0.8, 5.0}, {-0.5, 1.0, 0.9, 5.0}};
  std::vector<std::size_t> hits(grid.size(), 0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(5.0);
  for (std::size_t i = 0; i < draws; ++i) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double scale = std::sqrt(3.0 / chi2(rng));
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double r = grid[g].rho;
      const double x = z1 * scale;
      const double y = (r * z1 + std::sqrt(1.0 - r * r) * z2) * scale;
      hits[g] += x > grid[g].a && y > grid[g].b;
    }
  }
  bool ok = true;
  std::string detail;
  const double nd = static_cast<double>(draws);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double p = sentinel::bivariate_t_upper_tail(grid[g].a, grid[g].b, grid[g].rho, grid[g].nu);
    const double f = static_cast<double>(hits[g]) / nd;
    const double z = (f - p) / std::sqrt(p * (1.0 - p) / nd);
    ok = ok && std::abs(z) <= 3.0;
    detail += (g ? " " : "") + std::string("z=") + fmt(z);
  }
  return {ok, detail};
}

Check covar_self_consistency_check(std::size_t draws, std::uint64_t seed) {
  const RiskLevels lv{0.9, 0.9};
  const double nu = 5.0;
  const double rho = 0.5;
  Eigen::Matrix2d h;
  h << 2.0, rho * std::sqrt(2.0 * 0.5), rho * std::sqrt(2.0 * 0.5), 0.5;
  const double var = sentinel::var_forecast(std::sqrt(h(0, 0)), nu, lv.beta);
  const double covar = sentinel::covar_forecast(h, nu, lv);
  std::mt19937_64 rng(seed);
  PairSampler draw(rho, nu);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto [zx, zy] = draw(rng);
    hits += zx * std::sqrt(h(0, 0)) > var && zy * std::sqrt(h(1, 1)) > covar;
  }
  const double nd = static_cast<double>(draws);
  const double p = sentinel::joint_rate(lv);
  const double f = static_cast<double>(hits) / nd;
  const double sd = std::sqrt(p * (1.0 - p) / nd);
  return {std::abs(f - p) <= 4.0 * sd, "joint rate " + fmt(f) + " vs " + fmt(p) + " (sd " + fmt(sd) + ")"};
}

Check critical_values_determinism_check() {
  sentinel::CalibrationConfig cfg;
  cfg.levels = {0.9, 0.9};
  cfg.n = 400;
  cfg.m = 100;
  cfg.K = 2;
  cfg.B = 300;
  cfg.b0 = 10000;
  cfg.seed = 20240611;
  const std::string a = sentinel::serialize(sentinel::compute_critical_values(cfg));
  const std::string b = sentinel::serialize(sentinel::compute_critical_values(cfg));
  return {a == b, std::to_string(a.size()) + " bytes"};
}

}  // namespace oracle
