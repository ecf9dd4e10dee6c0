#include <algorithm>
#include <cmath>
#include <numbers>

#include "sentinel/detectors.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace detail {

double violation_from_count(std::size_t count, std::size_t m, double target_rate) noexcept {
  return std::abs(static_cast<double>(count) / static_cast<double>(m) - target_rate);
}

double gini_from_offsets(std::span<const std::size_t> offsets) noexcept {
  const std::size_t s = offsets.size();
  if (s <= 1) return 0.0;

  // Durations are integers, so the pairwise sum is exact.
  std::vector<std::int64_t> d(s);
  std::size_t prev = 0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < s; ++i) {
    d[i] = static_cast<std::int64_t>(offsets[i] - prev);
    prev = offsets[i];
    total += d[i];
  }
  std::sort(d.begin(), d.end());
  std::int64_t pair_sum = 0;
  const auto si = static_cast<std::int64_t>(s);
  for (std::int64_t i = 0; i < si; ++i) pair_sum += (2 * (i + 1) - si - 1) * d[static_cast<std::size_t>(i)];
  pair_sum *= 2;

  const double sd = static_cast<double>(s);
  const double mean = static_cast<double>(total) / sd;
  return (static_cast<double>(pair_sum) / (sd * sd)) / (2.0 * mean);
}

double ks_from_support(std::size_t m, std::size_t zeros, std::span<const double> sorted_positive,
                       const RiskLevels& levels) noexcept {
  const double md = static_cast<double>(m);
  double d = 0.0;
  if (zeros > 0) d = std::abs(static_cast<double>(zeros) / md - null_cdf_H(0.0, levels));
  std::size_t j = zeros;
  for (double x : sorted_positive) {
    ++j;
    const double h = null_cdf_H(x, levels);
    d = std::max(d, std::abs(static_cast<double>(j) / md - h));
    d = std::max(d, std::abs(static_cast<double>(j - 1) / md - h));
  }
  return d;
}

bool scaled_autocovariances(std::size_t m, std::span<const SparsePoint> points,
                            std::span<double> out) noexcept {
  const std::size_t s = points.size();
  if (s == 0) return false;
  if (s == m) {
    bool constant = true;
    for (const auto& p : points) constant = constant && p.value == points.front().value;
    if (constant) return false;
  }

  double sum = 0.0;
  for (const auto& p : points) sum += p.value;
  const double mu = sum / static_cast<double>(m);

  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < s; ++a) {
    const double va = points[a].value;
    out[0] += va * va;
    for (std::size_t b = a + 1; b < s; ++b) out[points[b].offset - points[a].offset] += va * points[b].value;
  }

  // m*gamma_j = P_j - mu*(A_j + B_j) + (m - j)*mu^2 where A_j sums the first
  // m - j entries and B_j the last m - j entries.
  double head = sum;  // A_j
  double tail = sum;  // B_j
  std::size_t hi = s;  // points[hi..s) have offset >= m - j
  std::size_t lo = 0;  // points[0..lo) have offset < j
  for (std::size_t j = 0; j < m; ++j) {
    while (hi > 0 && points[hi - 1].offset >= m - j) {
      --hi;
      head -= points[hi].value;
    }
    while (lo < s && points[lo].offset < j) {
      tail -= points[lo].value;
      ++lo;
    }
    out[j] = out[j] - mu * (head + tail) + static_cast<double>(m - j) * mu * mu;
  }
  return out[0] > 0.0;
}

double hong_from_autocovariances(std::span<const double> scaled_acov,
                                 std::span<const double> weights) noexcept {
  const std::size_t m = scaled_acov.size();
  const double c0 = scaled_acov[0];
  double acc = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    const double rho = scaled_acov[j] / c0;
    acc += weights[j] * rho * rho;
  }
  return static_cast<double>(m) * acc;
}

std::vector<double> daniell_weights(std::size_t m, double p) {
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double k = daniell_kernel(static_cast<double>(j) / p);
    w[j] = k * k;
  }
  return w;
}

}  // namespace detail

namespace {

void require_nonempty(std::span<const double> window) {
  if (window.empty()) throw InputError("empty window");
}

std::size_t count_binary(std::span<const double> window) {
  std::size_t count = 0;
  for (double v : window) {
    if (v == 1.0) ++count;
    else if (v != 0.0) throw InputError("binary window holds a value other than 0 or 1");
  }
  return count;
}

std::vector<detail::SparsePoint> sparse_points(std::span<const double> window) {
  std::vector<detail::SparsePoint> pts;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (!std::isfinite(window[i])) throw InputError("non-finite window entry");
    if (window[i] != 0.0) pts.push_back({i, window[i]});
  }
  return pts;
}

}  // namespace

double window_violation_stat(std::span<const double> window, double target_rate) {
  require_nonempty(window);
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw InputError("target rate must lie in (0,1)");
  return detail::violation_from_count(count_binary(window), window.size(), target_rate);
}

double gini_from_window(std::span<const double> window) {
  require_nonempty(window);
  count_binary(window);
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < window.size(); ++i)
    if (window[i] == 1.0) offsets.push_back(i + 1);
  return detail::gini_from_offsets(offsets);
}

double null_cdf_H(double x, const RiskLevels& levels) {
  if (x < 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return (x * (1.0 - levels.alpha) + levels.alpha) * (1.0 - levels.beta) + levels.beta;
}

double ks_from_window(std::span<const double> window, const RiskLevels& levels) {
  require_nonempty(window);
  std::vector<double> positive;
  std::size_t zeros = 0;
  for (double v : window) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("KS window entry outside [0,1]");
    if (v == 0.0) ++zeros;
    else positive.push_back(v);
  }
  std::sort(positive.begin(), positive.end());
  return detail::ks_from_support(window.size(), zeros, positive, levels);
}

double daniell_kernel(double z) noexcept {
  if (z == 0.0) return 1.0;
  const double pz = std::numbers::pi * z;
  return std::sin(pz) / pz;
}

double sample_autocorr(std::span<const double> window, std::size_t lag) {
  const std::size_t m = window.size();
  if (lag < 1 || lag >= m) throw InputError("autocorrelation lag outside [1, m-1]");
  const auto pts = sparse_points(window);
  std::vector<double> acov(m);
  if (!detail::scaled_autocovariances(m, pts, acov)) return 0.0;
  return acov[lag] / acov[0];
}

double hong_from_window(std::span<const double> window, double p) {
  require_nonempty(window);
  if (!(p > 0.0)) throw InputError("Hong smoothing parameter must be positive");
  const std::size_t m = window.size();
  const auto pts = sparse_points(window);
  std::vector<double> acov(m);
  if (!detail::scaled_autocovariances(m, pts, acov)) return 0.0;
  return detail::hong_from_autocovariances(acov, detail::daniell_weights(m, p));
}

double hong_bandwidth(std::size_t m) { return std::log(static_cast<double>(m)); }

double standardize(double raw, double mean, double variance) {
  if (!(variance > 0.0)) throw ConfigError("standardization variance must be positive");
  return (raw - mean) / std::sqrt(variance);
}

}  // namespace sentinel
