// Acceptance report: one PASS/FAIL line per criterion. Pass criterion ids as
// arguments to run a subset.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "sentinel/study.hpp"
#include "support/oracles.hpp"

using namespace sentinel;

namespace {

// Tolerances and protocol sizes.
constexpr double kSizeTolerance = 0.025;  // absolute, on the joint rate
constexpr double kConservativeLow = 0.04;
constexpr double kConservativeHigh = 0.105;
constexpr double kPowerGap = 0.10;
constexpr double kPowerAtZero = 0.80;
constexpr double kBalanceFactor = 3.0;
constexpr double kGuaranteeSlack = 0.03;
constexpr std::size_t kSizeReps = 1000;
constexpr std::size_t kPowerReps = 500;
constexpr std::size_t kBalanceReps = 2000;
constexpr std::size_t kGuaranteePaths = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string pct(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * r);
  return buf;
}

StudySettings desk_settings() {
  StudySettings s;
  s.n = 1000;
  s.m = 250;
  s.calibration_reps = 2000;
  s.moment_reps = 100000;
  s.seed = 20240601;
  return s;
}

CriticalValueCache& cache() {
  static CriticalValueCache c(desk_settings());
  return c;
}

CellResult run(MeasureKind measure, double beta, std::size_t K, std::int64_t t_star, std::size_t reps) {
  const RiskLevels levels{measure == MeasureKind::MES ? 0.0 : beta, beta};
  const StudyCell cell{measure, levels, K, t_star, 0.85, reps};
  return run_cell(cell, desk_settings(), cache().get(measure, levels, K));
}

CellResult null_cell(MeasureKind measure, double beta, std::size_t K, std::size_t reps = kSizeReps) {
  return run(measure, beta, K, 1000, reps);
}

struct SizeTarget {
  MeasureKind measure;
  double beta;
  std::size_t K;
  double reference;
};

Outcome size_against(const std::vector<SizeTarget>& targets) {
  Outcome o{true, ""};
  for (const auto& t : targets) {
    const double r = null_cell(t.measure, t.beta, t.K).joint;
    const bool ok = std::abs(r - t.reference) <= kSizeTolerance;
    o.pass = o.pass && ok;
    std::ostringstream s;
    s << to_string(t.measure) << " beta=" << t.beta << " K=" << t.K << ": " << pct(r) << " vs " << pct(t.reference);
    o.detail += (o.detail.empty() ? "" : "; ") + s.str();
  }
  return o;
}

Outcome criterion1() {
  return size_against({{MeasureKind::CoVaR, 0.9, 1, 0.1000}, {MeasureKind::CoVaR, 0.95, 1, 0.0962}});
}

Outcome criterion2() { return size_against({{MeasureKind::RCoVaR, 0.9, 2, 0.0932}}); }

Outcome criterion3() {
  return size_against({{MeasureKind::CoES, 0.9, 1, 0.1056}, {MeasureKind::MES, 0.9, 1, 0.1060}});
}

Outcome criterion4() {
  Outcome o{true, ""};
  for (auto measure : {MeasureKind::CoVaR, MeasureKind::RCoVaR})
    for (double beta : {0.9, 0.95}) {
      const double r = null_cell(measure, beta, 10).joint;
      o.pass = o.pass && r > kConservativeLow && r <= kConservativeHigh;
      std::ostringstream s;
      s << to_string(measure) << " beta=" << beta << ": " << pct(r);
      o.detail += (o.detail.empty() ? "" : "; ") + s.str();
    }
  return o;
}

Outcome criterion5() {
  Outcome o{true, ""};
  for (auto measure : {MeasureKind::CoVaR, MeasureKind::RCoVaR}) {
    const double p0 = run(measure, 0.9, 5, 0, kPowerReps).joint;
    const double p500 = run(measure, 0.9, 5, 500, kPowerReps).joint;
    const double p1000 = run(measure, 0.9, 5, 1000, kPowerReps).joint;
    const bool ok = p0 - p500 >= kPowerGap && p500 - p1000 >= kPowerGap && p0 >= kPowerAtZero;
    o.pass = o.pass && ok;
    std::ostringstream s;
    s << to_string(measure) << " t*=0/500/1000: " << pct(p0) << " / " << pct(p500) << " / " << pct(p1000);
    o.detail += (o.detail.empty() ? "" : "; ") + s.str();
  }
  return o;
}

Outcome criterion6() {
  Outcome o{true, ""};
  for (auto measure : {MeasureKind::CoVaR, MeasureKind::RCoVaR}) {
    const auto r = null_cell(measure, 0.9, 5, kBalanceReps);
    double var = 0.0;
    double sys = 0.0;
    for (double x : r.first_var) var += x;
    for (double x : r.first_sys) sys += x;
    const double ratio = std::max(var, sys) / std::max(std::min(var, sys), 1e-12);
    o.pass = o.pass && ratio <= kBalanceFactor;
    std::ostringstream s;
    s << to_string(measure) << ": var " << pct(var) << ", systemic " << pct(sys) << ", ratio " << ratio;
    o.detail += (o.detail.empty() ? "" : "; ") + s.str();
  }
  return o;
}

Outcome criterion7() {
  const std::vector<std::pair<std::string, std::function<oracle::Check()>>> checks{
      {"frequency", [] { return oracle::null_frequency_check(100000, 71); }},
      {"H-KS", [] { return oracle::pit_h_ks_check(100000, 72); }},
      {"nullsim-KS", [] { return oracle::nullsim_ks_check(100000, 73); }},
      {"brute-force", [] { return oracle::brute_force_check(8); }},
      {"tail-MC", [] { return oracle::bivariate_tail_mc_check(10000000, 74); }},
      {"covar-identity", [] { return oracle::covar_self_consistency_check(1000000, 75); }},
      {"cv-bytes", [] { return oracle::critical_values_determinism_check(); }},
  };
  Outcome o{true, ""};
  for (const auto& [name, check] : checks) {
    const auto c = check();
    o.pass = o.pass && c.pass;
    o.detail += (o.detail.empty() ? "" : "; ") + name + (c.pass ? " ok" : " FAILED (" + c.detail + ")");
  }
  return o;
}

Outcome criterion8() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("sentinel_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ostringstream log;
  cli::LevelFlags levels{"covar", 0.95, 0.95};

  cli::CriticalValuesOptions cv;
  cv.level_flags = levels;
  cv.num_series = 1;
  cv.reps = 2000;
  cv.seed = 808;
  cv.out = (dir / "cv.json").string();
  cli::cmd_critical_values(cv, log);

  std::size_t alarms = 0;
  for (std::size_t i = 0; i < kGuaranteePaths; ++i) {
    cli::SimulateOptions sim;
    sim.level_flags = levels;
    sim.num_series = 1;
    sim.seed = 10000 + i;
    sim.out_prefix = (dir / "path").string();
    cli::cmd_simulate(sim, log);
    const auto report = cli::cmd_monitor(
        {cv.out, sim.out_prefix + "_returns.csv", sim.out_prefix + "_forecasts.csv", (dir / "run").string()}, log);
    alarms += report.first_alarm.has_value();
  }
  fs::remove_all(dir);
  const double freq = static_cast<double>(alarms) / kGuaranteePaths;
  return {freq <= 0.1 + kGuaranteeSlack, "alarm frequency " + pct(freq) + " over " + std::to_string(kGuaranteePaths) +
                                             " null paths (bound " + pct(0.1 + kGuaranteeSlack) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"size K=1 covar", criterion1},       {"size K=2 rcovar", criterion2},
      {"size K=1 coes/mes", criterion3},    {"conservativeness K=10", criterion4},
      {"power monotonicity", criterion5},   {"first-alarm balance", criterion6},
      {"property suite", criterion7},       {"end-to-end guarantee", criterion8},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
