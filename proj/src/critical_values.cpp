#include <algorithm>
#include <cmath>
#include <limits>

#include "sentinel/errors.hpp"
#include "sentinel/nullsim.hpp"

namespace sentinel {

double threshold_at(std::span<const double> sorted_samples, double nu) {
  const std::size_t B = sorted_samples.size();
  if (B == 0) throw InputError("threshold of an empty sample set");
  if (!(nu >= 0.0 && nu <= 1.0)) throw InputError("quantile level must lie in [0,1]");
  const double bd = static_cast<double>(B);
  auto exceed_ok = [&](std::size_t i) {
    const auto first = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), sorted_samples[i]);
    const auto count = static_cast<double>(sorted_samples.end() - first);
    return count / bd <= nu;
  };
  // The predicate is monotone in i; find the first index where it holds.
  std::size_t lo = 0;
  std::size_t hi = B;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (exceed_ok(mid)) hi = mid;
    else lo = mid + 1;
  }
  if (lo == B) return std::nextafter(sorted_samples.back(), std::numeric_limits<double>::infinity());
  return sorted_samples[lo];
}

namespace {

enum class Form { Intersection, Union };

CriticalValues calibrate(const SupSamples& sups, std::size_t K, double iota, double grid_step, Form form) {
  const std::size_t B = sups.sup_var.size();
  if (B == 0 || sups.sup_sys.size() != B) throw InputError("sup samples must be non-empty and of equal length");
  if (!sups.paired) throw InputError("sup samples must be paired");
  if (K == 0) throw ConfigError("K must be at least 1");
  if (!(iota > 0.0 && iota < 1.0)) throw ConfigError("iota must lie in (0,1)");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ConfigError("grid step must lie in (0,1]");
  const auto steps = static_cast<std::int64_t>(std::llround(1.0 / grid_step));
  if (std::abs(static_cast<double>(steps) * grid_step - 1.0) > 1e-9)
    throw ConfigError("grid step must divide 1");

  std::vector<double> sv(sups.sup_var);
  std::vector<double> ss(sups.sup_sys);
  std::sort(sv.begin(), sv.end());
  std::sort(ss.begin(), ss.end());

  const auto kk = static_cast<std::int64_t>(K);
  const double bd = static_cast<double>(B);
  double last_v = std::numeric_limits<double>::quiet_NaN();
  double last_c = std::numeric_limits<double>::quiet_NaN();
  double last_est = 0.0;

  for (std::int64_t k = steps; k >= 0; --k) {
    const double nu = static_cast<double>(k) / static_cast<double>(steps);
    const double v = threshold_at(sv, nu);
    const double c = threshold_at(ss, nu);
    // A threshold above every sample is not a calibrated value.
    if (v > sv.back() || c > ss.back()) continue;

    double est = last_est;
    if (!(v == last_v && c == last_c)) {
      std::int64_t cv = 0, cs = 0, both = 0, either = 0;
      for (std::size_t b = 0; b < B; ++b) {
        const bool hv = sups.sup_var[b] >= v;
        const bool hs = sups.sup_sys[b] >= c;
        cv += hv;
        cs += hs;
        both += hv && hs;
        either += hv || hs;
      }
      const std::int64_t numer = form == Form::Intersection ? cv + kk * cs - kk * both : kk * either;
      est = static_cast<double>(numer) / bd;
      last_v = v;
      last_c = c;
      last_est = est;
    }
    if (est <= iota) {
      CriticalValues out;
      out.K = K;
      out.iota = iota;
      out.v = v;
      out.c = c;
      out.nu = nu;
      out.achieved = est;
      out.b = B;
      out.grid_step = grid_step;
      return out;
    }
  }
  throw CalibrationError("no quantile level meets the size bound with " + std::to_string(B) +
                         " replications; increase the number of replications or iota");
}

}  // namespace

CriticalValues calibrate_intersection(const SupSamples& sups, std::size_t K, double iota, double grid_step) {
  return calibrate(sups, K, iota, grid_step, Form::Intersection);
}

CriticalValues calibrate_union(const SupSamples& sups, std::size_t K, double iota, double grid_step) {
  return calibrate(sups, K, iota, grid_step, Form::Union);
}

void validate_config(const CalibrationConfig& cfg) {
  validate_levels(cfg.levels, cfg.measure);
  if (cfg.m < 2) throw ConfigError("window length m must be at least 2");
  if (cfg.n < cfg.m) throw ConfigError("horizon n must be at least the window length m");
  if (cfg.K == 0) throw ConfigError("number of series K must be at least 1");
  if (!(cfg.iota > 0.0 && cfg.iota < 1.0)) throw ConfigError("iota must lie in (0,1)");
  if (!(cfg.a >= 0.0 && cfg.a <= 1.0)) throw ConfigError("weight a must lie in [0,1]");
  if (cfg.B == 0) throw ConfigError("at least one calibration replication is required");
  if (cfg.b0 < 10000) throw ConfigError("at least 10^4 moment replications are required");
}

CriticalValues calibrate_from_samples(const CalibrationConfig& cfg, const NullMoments& moments,
                                      const SupSamples& sups) {
  validate_config(cfg);
  check_moments(moments, cfg.measure, cfg.levels, cfg.m);
  CriticalValues cv = cfg.measure == MeasureKind::RCoVaR
                          ? calibrate_union(sups, cfg.K, cfg.iota, cfg.grid_step)
                          : calibrate_intersection(sups, cfg.K, cfg.iota, cfg.grid_step);
  cv.measure = cfg.measure;
  cv.levels = cfg.levels;
  cv.n = cfg.n;
  cv.m = cfg.m;
  cv.a = cfg.a;
  cv.moments = moments;
  cv.seed = cfg.seed;
  return cv;
}

CriticalValues compute_critical_values(const CalibrationConfig& cfg) {
  validate_config(cfg);
  const NullMoments moments = estimate_null_moments(cfg.measure, cfg.levels, cfg.m, cfg.b0, cfg.seed);
  const SupSamples sups =
      sup_detector_samples(cfg.measure, cfg.levels, cfg.n, cfg.m, cfg.a, moments, cfg.B, cfg.seed);
  return calibrate_from_samples(cfg, moments, sups);
}

nlohmann::ordered_json to_json(const NullMoments& mo) {
  nlohmann::ordered_json j;
  j["measure"] = std::string(to_string(mo.measure));
  j["m"] = mo.m;
  j["alpha"] = mo.levels.alpha;
  j["beta"] = mo.levels.beta;
  j["mean_uc"] = mo.mean_uc;
  j["var_uc"] = mo.var_uc;
  j["mean_iid"] = mo.mean_iid;
  j["var_iid"] = mo.var_iid;
  j["mean_uc_var"] = mo.mean_uc_var;
  j["var_uc_var"] = mo.var_uc_var;
  j["mean_iid_var"] = mo.mean_iid_var;
  j["var_iid_var"] = mo.var_iid_var;
  j["b0"] = mo.b0;
  return j;
}

namespace {

nlohmann::ordered_json conventions() {
  nlohmann::ordered_json j;
  j["indicator_inequality"] = "strict: x > forecast";
  j["gini_few_violations"] = "g = 0 when the window holds at most one violation";
  j["gini_partial_duration"] = "gap after the last violation discarded";
  j["autocorr_constant_window"] = "rho = 0 for all lags";
  j["hong_bandwidth"] = "p = ln(m), natural logarithm";
  j["hong_max_lag"] = "m - 1";
  j["ks_sup"] = "exact over [0,1] including the atom of H at 0";
  j["quantile"] = "smallest sample q with #{>= q}/B <= nu";
  j["nu_selection"] = "largest feasible grid value; thresholds above the sample maximum are infeasible";
  j["nu_common"] = "one nu for both thresholds";
  j["moments_variance"] = "unbiased sample variance";
  return j;
}

double finite_number(const nlohmann::json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw SchemaError(std::string("non-finite value for ") + key);
  return v;
}

}  // namespace

NullMoments null_moments_from_json(const nlohmann::json& j) {
  try {
    NullMoments mo;
    mo.measure = parse_measure(j.at("measure").get<std::string>());
    mo.m = j.at("m").get<std::size_t>();
    mo.levels.alpha = finite_number(j, "alpha");
    mo.levels.beta = finite_number(j, "beta");
    mo.mean_uc = finite_number(j, "mean_uc");
    mo.var_uc = finite_number(j, "var_uc");
    mo.mean_iid = finite_number(j, "mean_iid");
    mo.var_iid = finite_number(j, "var_iid");
    mo.mean_uc_var = finite_number(j, "mean_uc_var");
    mo.var_uc_var = finite_number(j, "var_uc_var");
    mo.mean_iid_var = finite_number(j, "mean_iid_var");
    mo.var_iid_var = finite_number(j, "var_iid_var");
    mo.b0 = j.at("b0").get<std::size_t>();
    return mo;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("invalid null moments: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const CriticalValues& cv) {
  nlohmann::ordered_json j;
  j["format"] = "risk-sentinel-critical-values";
  j["version"] = 1;
  j["measure"] = std::string(to_string(cv.measure));
  j["alpha"] = cv.levels.alpha;
  j["beta"] = cv.levels.beta;
  j["n"] = cv.n;
  j["m"] = cv.m;
  j["K"] = cv.K;
  j["iota"] = cv.iota;
  j["a"] = cv.a;
  j["v"] = cv.v;
  j["c"] = cv.c;
  j["nu"] = cv.nu;
  j["achieved"] = cv.achieved;
  j["b"] = cv.b;
  j["seed"] = cv.seed;
  j["grid_step"] = cv.grid_step;
  j["moments"] = to_json(cv.moments);
  j["conventions"] = conventions();
  return j;
}

CriticalValues critical_values_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "risk-sentinel-critical-values")
      throw SchemaError("not a critical-values document");
    if (j.at("version").get<int>() != 1) throw SchemaError("unsupported critical-values version");
    CriticalValues cv;
    cv.measure = parse_measure(j.at("measure").get<std::string>());
    cv.levels.alpha = finite_number(j, "alpha");
    cv.levels.beta = finite_number(j, "beta");
    cv.n = j.at("n").get<std::size_t>();
    cv.m = j.at("m").get<std::size_t>();
    cv.K = j.at("K").get<std::size_t>();
    cv.iota = finite_number(j, "iota");
    cv.a = finite_number(j, "a");
    cv.v = finite_number(j, "v");
    cv.c = finite_number(j, "c");
    cv.nu = finite_number(j, "nu");
    cv.achieved = finite_number(j, "achieved");
    cv.b = j.at("b").get<std::size_t>();
    cv.seed = j.at("seed").get<std::uint64_t>();
    cv.grid_step = finite_number(j, "grid_step");
    cv.moments = null_moments_from_json(j.at("moments"));
    if (!(cv.nu >= 0.0 && cv.nu <= 1.0)) throw SchemaError("nu outside [0,1]");
    return cv;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("invalid critical-values document: ") + e.what());
  }
}

std::string serialize(const CriticalValues& cv) { return to_json(cv).dump(2) + "\n"; }

CriticalValues parse_critical_values(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return critical_values_from_json(j);
}

}  // namespace sentinel
