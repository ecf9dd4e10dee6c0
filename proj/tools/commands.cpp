#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "sentinel/dgp.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/io.hpp"
#include "sentinel/monitor.hpp"

namespace sentinel::cli {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  write_text_file(path, buf.str());
}

}  // namespace

ResolvedLevels resolve_levels(const LevelFlags& flags) {
  ResolvedLevels r{MeasureKind::CoVaR, {0.95, flags.beta}};
  if (flags.measure) r.measure = parse_measure(*flags.measure);
  if (flags.alpha && *flags.alpha == 0.0) {
    if (flags.measure && r.measure != MeasureKind::MES)
      throw InputError("--alpha 0 requires --measure mes, got " + *flags.measure);
    r.measure = MeasureKind::MES;
  }
  if (r.measure == MeasureKind::MES) {
    if (flags.alpha && *flags.alpha != 0.0) throw InputError("--measure mes requires --alpha 0");
    r.levels.alpha = 0.0;
  } else if (flags.alpha) {
    r.levels.alpha = *flags.alpha;
  }
  validate_levels(r.levels, r.measure);
  return r;
}

CriticalValues cmd_critical_values(const CriticalValuesOptions& opts, std::ostream& log) {
  const ResolvedLevels lv = resolve_levels(opts.level_flags);
  CalibrationConfig cfg;
  cfg.measure = lv.measure;
  cfg.levels = lv.levels;
  cfg.n = opts.n;
  cfg.m = opts.m;
  cfg.K = opts.num_series;
  cfg.iota = opts.iota;
  cfg.a = opts.a;
  cfg.B = opts.reps;
  cfg.b0 = opts.moment_reps;
  cfg.seed = opts.seed;
  const CriticalValues cv = compute_critical_values(cfg);
  if (!opts.out.empty()) write_text_file(opts.out, serialize(cv));
  log << "v=" << format_double(cv.v) << " c=" << format_double(cv.c) << " nu=" << format_double(cv.nu)
      << " achieved=" << format_double(cv.achieved) << '\n';
  return cv;
}

MonitorReport cmd_monitor(const MonitorOptions& opts, std::ostream& log) {
  const CriticalValues cv = parse_critical_values(read_text_file(opts.cv));
  std::vector<ObservationRecord> returns;
  std::vector<ForecastRecord> forecasts;
  {
    auto in = open_input(opts.returns);
    returns = read_returns_csv(in);
  }
  {
    auto in = open_input(opts.forecasts);
    forecasts = read_forecasts_csv(in, cv.measure, cv.K);
  }
  if (returns.size() != forecasts.size())
    throw SchemaError("returns and forecasts have different row counts");

  Monitor monitor(config_from(cv), cv);
  for (std::size_t i = 0; i < returns.size(); ++i) monitor.step(forecasts[i], returns[i]);
  const MonitorReport report = monitor.finalize();

  if (!opts.out_prefix.empty()) {
    write_file(opts.out_prefix + "_trace.csv", [&](std::ostream& o) { write_trace_csv(o, report.trace, cv.measure); });
    write_text_file(opts.out_prefix + "_alarms.json", alarms_to_json(report).dump(2) + "\n");
  }
  if (report.first_alarm) {
    log << "first alarm at T=" << report.first_alarm->T << " from "
        << stream_label(report.first_alarm->source, cv.measure) << '\n';
  } else {
    log << "no alarm over " << report.steps << " days\n";
  }
  return report;
}

void cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  const ResolvedLevels lv = resolve_levels(opts.level_flags);
  DccParams params;
  std::optional<BreakSpec> brk;
  if (opts.params) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(*opts.params));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("parameter file: " + std::string(e.what()));
    }
    params = dcc_params_from_json(j);
    brk = break_from_json(j);
  } else {
    if (opts.num_series == 0) throw ConfigError("--num-series must be positive");
    params = baseline_params(opts.num_series);
  }
  validate(params);
  if (opts.break_t) brk = BreakSpec{*opts.break_t, opts.beta_post};
  if (brk) {
    validate(*brk, params);
    if (brk->t_star >= static_cast<std::int64_t>(opts.n)) brk.reset();
  }
  if (opts.n == 0) throw ConfigError("--n must be positive");

  Engine rng = make_stream(opts.seed, "simulate", 0);
  const SimulatedPanel sim = simulate_dcc(params, brk, opts.n, opts.burnin, rng, false);
  const auto forecasts = make_forecast_panel(params, sim.presample, sim.returns, lv.measure, lv.levels);

  write_file(opts.out_prefix + "_returns.csv", [&](std::ostream& o) { write_returns_csv(o, sim.returns); });
  write_file(opts.out_prefix + "_forecasts.csv",
             [&](std::ostream& o) { write_forecasts_csv(o, forecasts, lv.measure); });
  log << "wrote " << sim.returns.size() << " days for K=" << params.k_plus_1 - 1 << '\n';
}

std::vector<CellResult> cmd_study(const StudyOptions& opts, std::ostream& out, std::ostream& log) {
  const StudyPreset preset = parse_preset(opts.preset);
  std::set<MeasureKind> measures;
  for (const auto& s : opts.measures) measures.insert(parse_measure(s));
  const std::set<std::size_t> ks(opts.num_series.begin(), opts.num_series.end());
  const std::set<double> betas(opts.betas.begin(), opts.betas.end());

  std::vector<StudyCell> cells;
  for (const auto& c : preset_cells(preset, opts.settings, opts.scale)) {
    if (!measures.empty() && !measures.contains(c.measure)) continue;
    if (!ks.empty() && !ks.contains(c.K)) continue;
    if (!betas.empty() && !betas.contains(c.levels.beta)) continue;
    cells.push_back(c);
  }
  if (cells.empty()) throw ConfigError("the filters leave no study cell");

  std::ostringstream table;
  write_study_header(table);
  CriticalValueCache cache(opts.settings);
  std::vector<CellResult> results;
  results.reserve(cells.size());
  const std::string name = to_string(preset);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const StudyCell& cell = cells[i];
    const CriticalValues cv = cache.get(cell.measure, cell.levels, cell.K);
    results.push_back(run_cell(cell, opts.settings, cv));
    write_study_rows(table, name, results.back());
    log << '[' << i + 1 << '/' << cells.size() << "] " << to_string(cell.measure) << " beta="
        << format_double(cell.levels.beta) << " K=" << cell.K << " t*=" << cell.t_star
        << " beta_post=" << format_double(cell.beta_post) << " joint=" << std::fixed << std::setprecision(2)
        << 100.0 * results.back().joint << "%\n"
        << std::defaultfloat;
  }
  if (opts.out.empty()) out << table.str();
  else write_text_file(opts.out, table.str());
  return results;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online surveillance of systemic risk forecasts"};
  app.require_subcommand(1);

  auto add_levels = [](CLI::App* sub, LevelFlags& f) {
    sub->add_option("--measure", f.measure, "covar, rcovar, coes or mes");
    sub->add_option("--alpha", f.alpha, "systemic level; 0 selects mes");
    sub->add_option("--beta", f.beta, "stress level of the conditioning VaR")->capture_default_str();
  };

  CriticalValuesOptions cv_opts;
  auto* cv_cmd = app.add_subcommand("critical-values", "Calibrate time-uniform critical values");
  add_levels(cv_cmd, cv_opts.level_flags);
  cv_cmd->add_option("--n", cv_opts.n, "monitoring horizon")->capture_default_str();
  cv_cmd->add_option("--m", cv_opts.m, "window length")->capture_default_str();
  cv_cmd->add_option("--num-series", cv_opts.num_series, "number of institutions K")->capture_default_str();
  cv_cmd->add_option("--iota", cv_opts.iota, "familywise false-alarm level")->capture_default_str();
  cv_cmd->add_option("--a-weight", cv_opts.a, "weight of the unconditional component")->capture_default_str();
  cv_cmd->add_option("--reps", cv_opts.reps, "simulated paths B")->capture_default_str();
  cv_cmd->add_option("--moment-reps", cv_opts.moment_reps, "windows for the null moments b0")->capture_default_str();
  cv_cmd->add_option("--seed", cv_opts.seed)->capture_default_str();
  cv_cmd->add_option("--out", cv_opts.out, "output JSON file")->required();

  MonitorOptions mon_opts;
  auto* mon_cmd = app.add_subcommand("monitor", "Run the detectors over a forecast panel");
  mon_cmd->add_option("--cv", mon_opts.cv, "critical-values JSON")->required();
  mon_cmd->add_option("--returns", mon_opts.returns, "returns CSV")->required();
  mon_cmd->add_option("--forecasts", mon_opts.forecasts, "forecasts CSV")->required();
  mon_cmd->add_option("--out-prefix", mon_opts.out_prefix, "prefix of the trace and alarm files")->required();

  SimulateOptions sim_opts;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate DCC-GARCH returns and model forecasts");
  sim_cmd->add_option("--params", sim_opts.params, "DCC parameter JSON (default: baseline)");
  sim_cmd->add_option("--break-t", sim_opts.break_t, "break point t*; t* >= n means no break");
  sim_cmd->add_option("--beta-post", sim_opts.beta_post, "post-break persistence")->capture_default_str();
  sim_cmd->add_option("--n", sim_opts.n)->capture_default_str();
  sim_cmd->add_option("--burnin", sim_opts.burnin)->capture_default_str();
  sim_cmd->add_option("--num-series", sim_opts.num_series, "K for the baseline parameters")->capture_default_str();
  add_levels(sim_cmd, sim_opts.level_flags);
  sim_cmd->add_option("--seed", sim_opts.seed)->capture_default_str();
  sim_cmd->add_option("--out-prefix", sim_opts.out_prefix)->required();

  StudyOptions st_opts;
  auto* st_cmd = app.add_subcommand("study", "Run a simulation study preset");
  st_cmd->add_option("preset", st_opts.preset, "size_table, power_break, power_magnitude or first_alarm")->required();
  st_cmd->add_option("--scale", st_opts.scale, "replication multiplier")->capture_default_str();
  st_cmd->add_option("--seed", st_opts.settings.seed)->capture_default_str();
  st_cmd->add_option("--calibration-reps", st_opts.settings.calibration_reps)->capture_default_str();
  st_cmd->add_option("--moment-reps", st_opts.settings.moment_reps)->capture_default_str();
  st_cmd->add_option("--iota", st_opts.settings.iota)->capture_default_str();
  st_cmd->add_option("--measure", st_opts.measures, "restrict to these measures");
  st_cmd->add_option("--num-series", st_opts.num_series, "restrict to these K");
  st_cmd->add_option("--beta", st_opts.betas, "restrict to these beta");
  st_cmd->add_option("--out", st_opts.out, "output CSV (default: standard output)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return static_cast<int>(ExitCode::kSchema);
  }

  try {
    if (*cv_cmd) cmd_critical_values(cv_opts, out);
    else if (*mon_cmd) cmd_monitor(mon_opts, out);
    else if (*sim_cmd) cmd_simulate(sim_opts, out);
    else if (*st_cmd) cmd_study(st_opts, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kFailure);
  }
  return 0;
}

}  // namespace sentinel::cli
