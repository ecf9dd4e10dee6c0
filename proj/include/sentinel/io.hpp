#pragma once

// CSV panels, trace files and the alarm log.
//
// returns.csv    t,x,y1..yK
// forecasts.csv  t,var_hat,sys_hat_1..K           (CoVaR)
//                t,var_hat_1..K,sys_hat_1..K      (RCoVaR)
//                t,pit_x,pit_tail_1..K            (CoES, MES)
// trace.csv      T,det_var,det_sys_1..K           (det_var_1..K for RCoVaR)

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/detectors.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/series.hpp"

namespace sentinel {

// Shortest representation that reads back to the same double.
std::string format_double(double v);

std::vector<ObservationRecord> read_returns_csv(std::istream& in);
void write_returns_csv(std::ostream& out, std::span<const ObservationRecord> rows);

// K is taken from the header and must match num_series when that is nonzero.
std::vector<ForecastRecord> read_forecasts_csv(std::istream& in, MeasureKind measure, std::size_t num_series = 0);
void write_forecasts_csv(std::ostream& out, std::span<const ForecastRecord> rows, MeasureKind measure);

DetectorTrace read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, const DetectorTrace& trace, MeasureKind measure);

nlohmann::ordered_json alarms_to_json(const MonitorReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sentinel
