#include "sentinel/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sentinel/errors.hpp"
#include "sentinel/io.hpp"

namespace sentinel {

CriticalValueCache::CriticalValueCache(const StudySettings& settings) : settings_(settings) {}

CriticalValues CriticalValueCache::get(MeasureKind measure, const RiskLevels& levels, std::size_t K) {
  CalibrationConfig cfg;
  cfg.measure = measure;
  cfg.levels = levels;
  cfg.n = settings_.n;
  cfg.m = settings_.m;
  cfg.K = K;
  cfg.iota = settings_.iota;
  cfg.a = settings_.a;
  cfg.B = settings_.calibration_reps;
  cfg.b0 = settings_.moment_reps;
  cfg.seed = stage_key(settings_.seed, "calibration");
  cfg.grid_step = settings_.grid_step;
  validate_config(cfg);

  std::shared_ptr<Entry> entry;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = entries_[{static_cast<int>(measure), levels.alpha, levels.beta}];
    if (!slot) {
      slot = std::make_shared<Entry>();
      slot->moments = estimate_null_moments(measure, levels, cfg.m, cfg.b0, cfg.seed);
      slot->sups = sup_detector_samples(measure, levels, cfg.n, cfg.m, cfg.a, slot->moments, cfg.B, cfg.seed);
    }
    entry = slot;
  }
  return calibrate_from_samples(cfg, entry->moments, entry->sups);
}

ReplicateOutcome run_replicate(const StudyCell& cell, const StudySettings& settings, const CriticalValues& cv,
                               const std::shared_ptr<const CoVaRSolver>& solver, std::size_t index) {
  const DccParams params = baseline_params(cell.K);
  std::optional<BreakSpec> brk;
  if (cell.t_star < static_cast<std::int64_t>(settings.n)) brk = BreakSpec{cell.t_star, cell.beta_post};

  Engine rng = make_stream(settings.seed, "paths", index);
  const SimulatedPanel sim = simulate_dcc(params, brk, settings.n, settings.burnin, rng, false);
  Forecaster forecaster(params, sim.presample, cell.measure, cell.levels, true, solver);
  Monitor monitor(config_from(cv), cv);

  ReplicateOutcome out;
  out.var_first.assign(num_var_streams(cell.measure, cell.K), 0);
  out.sys_first.assign(cell.K, 0);
  for (const auto& obs : sim.returns) {
    const ForecastRecord fc = forecaster.forecast(obs);
    const StepOutcome step = monitor.step(fc, obs);
    forecaster.update(obs);
    if (step.alarms.empty()) continue;
    out.alarm = true;
    out.T = step.T;
    for (const auto& a : step.alarms) {
      if (a.source.group == StreamGroup::VaR) out.var_first[a.source.index] = 1;
      else out.sys_first[a.source.index] = 1;
    }
    break;
  }
  return out;
}

CellResult run_cell(const StudyCell& cell, const StudySettings& settings, const CriticalValues& cv) {
  if (cell.reps == 0) throw ConfigError("a study cell needs at least one replicate");
  validate_levels(cell.levels, cell.measure);
  if (cv.measure != cell.measure || !(cv.levels == cell.levels) || cv.K != cell.K || cv.n != settings.n ||
      cv.m != settings.m)
    throw ConfigError("critical values do not match the study cell");

  std::shared_ptr<const CoVaRSolver> solver;
  if (!uses_pits(cell.measure)) solver = std::make_shared<const CoVaRSolver>(baseline_params(cell.K).nu, cell.levels);

  std::vector<ReplicateOutcome> outcomes(cell.reps);
  const auto reps = static_cast<std::int64_t>(cell.reps);
  const int threads = max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t r = 0; r < reps; ++r) {
    try {
      outcomes[static_cast<std::size_t>(r)] = run_replicate(cell, settings, cv, solver, static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CellResult res;
  res.cell = cell;
  res.first_var.assign(num_var_streams(cell.measure, cell.K), 0.0);
  res.first_sys.assign(cell.K, 0.0);
  std::size_t alarms = 0;
  for (const auto& o : outcomes) {
    alarms += o.alarm;
    for (std::size_t i = 0; i < o.var_first.size(); ++i) res.first_var[i] += o.var_first[i];
    for (std::size_t k = 0; k < o.sys_first.size(); ++k) res.first_sys[k] += o.sys_first[k];
  }
  const double n = static_cast<double>(cell.reps);
  res.joint = static_cast<double>(alarms) / n;
  for (double& v : res.first_var) v /= n;
  for (double& v : res.first_sys) v /= n;
  return res;
}

StudyPreset parse_preset(const std::string& name) {
  if (name == "size_table") return StudyPreset::SizeTable;
  if (name == "power_break") return StudyPreset::PowerBreak;
  if (name == "power_magnitude") return StudyPreset::PowerMagnitude;
  if (name == "first_alarm") return StudyPreset::FirstAlarm;
  throw InputError("unknown study preset '" + name + "'");
}

std::string to_string(StudyPreset preset) {
  switch (preset) {
    case StudyPreset::SizeTable: return "size_table";
    case StudyPreset::PowerBreak: return "power_break";
    case StudyPreset::PowerMagnitude: return "power_magnitude";
    case StudyPreset::FirstAlarm: return "first_alarm";
  }
  return "size_table";
}

std::vector<StudyCell> preset_cells(StudyPreset preset, const StudySettings& settings, double scale) {
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  constexpr std::size_t kFullReps = 5000;
  const std::size_t reps = std::max<std::size_t>(100, static_cast<std::size_t>(std::llround(kFullReps * scale)));
  const auto n = static_cast<std::int64_t>(settings.n);
  const std::vector<double> betas{0.9, 0.95};

  auto levels_for = [](MeasureKind m, double beta) {
    return RiskLevels{m == MeasureKind::MES ? 0.0 : beta, beta};
  };
  auto k_grid = [](MeasureKind m) {
    return m == MeasureKind::RCoVaR ? std::vector<std::size_t>{2, 5, 10} : std::vector<std::size_t>{1, 2, 5, 10};
  };
  std::vector<std::int64_t> break_grid;
  for (std::int64_t t = 0; t <= n; t += std::max<std::int64_t>(1, n / 20)) break_grid.push_back(t);
  if (break_grid.back() != n) break_grid.push_back(n);
  const std::vector<double> magnitude_grid{0.7, 0.75, 0.8, 0.85, 0.87, 0.89, 0.899};

  std::vector<StudyCell> cells;
  const std::vector<MeasureKind> all{MeasureKind::CoVaR, MeasureKind::RCoVaR, MeasureKind::CoES, MeasureKind::MES};
  switch (preset) {
    case StudyPreset::SizeTable:
      for (auto m : all)
        for (double b : betas)
          for (std::size_t K : k_grid(m)) cells.push_back({m, levels_for(m, b), K, n, 0.85, reps});
      break;
    case StudyPreset::PowerBreak:
      for (auto m : all)
        for (double b : betas)
          for (std::size_t K : k_grid(m))
            for (auto t : break_grid) cells.push_back({m, levels_for(m, b), K, t, 0.85, reps});
      break;
    case StudyPreset::PowerMagnitude:
      for (auto m : all)
        for (double b : betas)
          for (std::size_t K : k_grid(m))
            for (double bp : magnitude_grid) cells.push_back({m, levels_for(m, b), K, 0, bp, reps});
      break;
    case StudyPreset::FirstAlarm:
      for (auto m : {MeasureKind::CoVaR, MeasureKind::RCoVaR})
        for (auto t : break_grid) cells.push_back({m, levels_for(m, 0.9), 5, t, 0.85, reps});
      break;
  }
  return cells;
}

void write_study_header(std::ostream& out) {
  out << "preset,measure,alpha,beta,K,t_star,beta_post,reps,detector,rate_pct\n";
}

namespace {

// Percent with two decimals.
std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * rate);
  return buf;
}

}  // namespace

void write_study_rows(std::ostream& out, const std::string& preset, const CellResult& r) {
  const StudyCell& c = r.cell;
  auto row = [&](const std::string& detector, double rate) {
    out << preset << ',' << to_string(c.measure) << ',' << format_double(c.levels.alpha) << ','
        << format_double(c.levels.beta) << ',' << c.K << ',' << c.t_star << ',' << format_double(c.beta_post) << ','
        << c.reps << ',' << detector << ',' << percent(rate) << '\n';
  };
  row("joint", r.joint);
  for (std::size_t i = 0; i < r.first_var.size(); ++i)
    row(stream_label({StreamGroup::VaR, i}, c.measure), r.first_var[i]);
  for (std::size_t k = 0; k < r.first_sys.size(); ++k)
    row(stream_label({StreamGroup::Systemic, k}, c.measure), r.first_sys[k]);
}

}  // namespace sentinel
