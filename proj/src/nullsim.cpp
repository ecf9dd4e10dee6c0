#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "sentinel/errors.hpp"
#include "sentinel/nullsim.hpp"

namespace sentinel {

NullPath simulate_null_path(MeasureKind measure, const RiskLevels& levels, std::size_t n, Engine& rng) {
  NullPath path;
  path.i_var.resize(n);
  path.evidence.resize(n);
  const bool cumulative = uses_pits(measure);
  for (std::size_t t = 0; t < n; ++t) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const bool stress = u1 > levels.beta;
    path.i_var[t] = stress ? 1.0 : 0.0;
    if (!stress || !(u2 > levels.alpha)) {
      path.evidence[t] = 0.0;
    } else {
      path.evidence[t] = cumulative ? (u2 - levels.alpha) / (1.0 - levels.alpha) : 1.0;
    }
  }
  return path;
}

namespace detail {

void moment_block(MeasureKind measure, const RiskLevels& levels, std::size_t m, std::uint64_t seed,
                  std::size_t block, std::size_t count, std::span<double> out) {
  Engine rng = make_stream(seed, "moments", block);
  const bool cumulative = uses_pits(measure);
  std::shared_ptr<const std::vector<double>> weights;
  if (cumulative) weights = std::make_shared<const std::vector<double>>(daniell_weights(m, hong_bandwidth(m)));

  for (std::size_t w = 0; w < count; ++w) {
    const NullPath path = simulate_null_path(measure, levels, m, rng);
    RollingWindow var_win(m, StreamKind::Binary, var_rate(levels), levels, nullptr);
    RollingWindow sys_win(m, cumulative ? StreamKind::Continuous : StreamKind::Binary,
                          cumulative ? 0.0 : joint_rate(levels), levels, weights);
    for (std::size_t t = 0; t < m; ++t) {
      var_win.push(path.i_var[t]);
      sys_win.push(path.evidence[t]);
    }
    const RawStats sv = var_win.stats();
    const RawStats ss = sys_win.stats();
    out[4 * w + 0] = sv.uc;
    out[4 * w + 1] = sv.iid;
    out[4 * w + 2] = ss.uc;
    out[4 * w + 3] = ss.iid;
  }
}

NullMoments moments_from_raw(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                             std::size_t b0, std::span<const double> raw) {
  double mean[4] = {0, 0, 0, 0};
  double var[4] = {0, 0, 0, 0};
  for (std::size_t col = 0; col < 4; ++col) {
    double s = 0.0;
    for (std::size_t w = 0; w < b0; ++w) s += raw[4 * w + col];
    mean[col] = s / static_cast<double>(b0);
    double ss = 0.0;
    for (std::size_t w = 0; w < b0; ++w) {
      const double d = raw[4 * w + col] - mean[col];
      ss += d * d;
    }
    var[col] = ss / static_cast<double>(b0 - 1);
    if (!(var[col] > 0.0)) throw ConfigError("simulated null variance is zero; the window is too short");
  }
  NullMoments mo;
  mo.measure = measure;
  mo.m = m;
  mo.levels = levels;
  mo.mean_uc_var = mean[0];
  mo.var_uc_var = var[0];
  mo.mean_iid_var = mean[1];
  mo.var_iid_var = var[1];
  mo.mean_uc = mean[2];
  mo.var_uc = var[2];
  mo.mean_iid = mean[3];
  mo.var_iid = var[3];
  mo.b0 = b0;
  return mo;
}

SupPair sup_for_replicate(MeasureKind measure, const RiskLevels& levels, std::size_t n, std::size_t m,
                          double a, const NullMoments& moments, std::uint64_t seed, std::size_t index) {
  Engine rng = make_stream(seed, "sup", index);
  const NullPath path = simulate_null_path(measure, levels, n, rng);
  DetectorEngine engine(measure, levels, m, a, moments, 1, 1);
  SupPair out{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double v = 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    engine.push(std::span<const double>(&path.i_var[t], 1), std::span<const double>(&path.evidence[t], 1));
    if (!engine.ready()) continue;
    engine.values(std::span<double>(&v, 1), std::span<double>(&s, 1));
    out.var = std::max(out.var, v);
    out.sys = std::max(out.sys, s);
  }
  return out;
}

}  // namespace detail

namespace {

void check_moment_args(MeasureKind measure, const RiskLevels& levels, std::size_t m, std::size_t b0) {
  validate_levels(levels, measure);
  if (m < 2) throw ConfigError("window length must be at least 2");
  if (b0 < 10000) throw ConfigError("at least 10^4 moment replications are required");
}

void check_sup_args(MeasureKind measure, const RiskLevels& levels, std::size_t n, std::size_t m,
                    const NullMoments& moments, std::size_t B) {
  validate_levels(levels, measure);
  if (m == 0 || n < m) throw ConfigError("horizon n must be at least the window length m");
  if (B == 0) throw ConfigError("at least one sup replication is required");
  check_moments(moments, measure, levels, m);
}

}  // namespace

NullMoments estimate_null_moments(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                                  std::size_t b0, std::uint64_t seed) {
  check_moment_args(measure, levels, m, b0);
  std::vector<double> raw(4 * b0);
  const std::size_t blocks = (b0 + detail::kMomentBlock - 1) / detail::kMomentBlock;
  const auto nb = static_cast<std::int64_t>(blocks);
  const int threads = max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * detail::kMomentBlock;
    const std::size_t count = std::min(detail::kMomentBlock, b0 - first);
    detail::moment_block(measure, levels, m, seed, static_cast<std::size_t>(b), count,
                         std::span<double>(raw).subspan(4 * first, 4 * count));
  }
  return detail::moments_from_raw(measure, levels, m, b0, raw);
}

SupSamples sup_detector_samples(MeasureKind measure, const RiskLevels& levels, std::size_t n,
                                std::size_t m, double a, const NullMoments& moments, std::size_t B,
                                std::uint64_t seed) {
  check_sup_args(measure, levels, n, m, moments, B);
  SupSamples out;
  out.sup_var.resize(B);
  out.sup_sys.resize(B);
  const auto nb = static_cast<std::int64_t>(B);
  const int threads = max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (std::int64_t b = 0; b < nb; ++b) {
    const auto idx = static_cast<std::size_t>(b);
    const auto pair = detail::sup_for_replicate(measure, levels, n, m, a, moments, seed, idx);
    out.sup_var[idx] = pair.var;
    out.sup_sys[idx] = pair.sys;
  }
  return out;
}

namespace serial {

NullMoments estimate_null_moments(MeasureKind measure, const RiskLevels& levels, std::size_t m,
                                  std::size_t b0, std::uint64_t seed) {
  check_moment_args(measure, levels, m, b0);
  std::vector<double> raw(4 * b0);
  for (std::size_t first = 0, b = 0; first < b0; first += detail::kMomentBlock, ++b) {
    const std::size_t count = std::min(detail::kMomentBlock, b0 - first);
    detail::moment_block(measure, levels, m, seed, b, count,
                         std::span<double>(raw).subspan(4 * first, 4 * count));
  }
  return detail::moments_from_raw(measure, levels, m, b0, raw);
}

SupSamples sup_detector_samples(MeasureKind measure, const RiskLevels& levels, std::size_t n,
                                std::size_t m, double a, const NullMoments& moments, std::size_t B,
                                std::uint64_t seed) {
  check_sup_args(measure, levels, n, m, moments, B);
  SupSamples out;
  out.sup_var.resize(B);
  out.sup_sys.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto pair = detail::sup_for_replicate(measure, levels, n, m, a, moments, seed, b);
    out.sup_var[b] = pair.var;
    out.sup_sys[b] = pair.sys;
  }
  return out;
}

}  // namespace serial

}  // namespace sentinel
