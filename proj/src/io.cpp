#include "sentinel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sentinel/errors.hpp"

namespace sentinel {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InputError("cannot format number");
  return std::string(buf, ptr);
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Reads the header and all non-empty data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
};

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw SchemaError("line " + std::to_string(no) + ": expected " + std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(fields));
    t.line_no.push_back(no);
  }
  if (!have_header) throw SchemaError("missing CSV header");
  return t;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw SchemaError("line " + std::to_string(line) + ": invalid number '" + s + "'");
  if (!std::isfinite(v)) throw SchemaError("line " + std::to_string(line) + ": non-finite value");
  return v;
}

std::int64_t parse_time(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw SchemaError("line " + std::to_string(line) + ": invalid time index '" + s + "'");
  return v;
}

void expect_column(const std::vector<std::string>& header, std::size_t i, const std::string& name) {
  if (i >= header.size() || header[i] != name)
    throw SchemaError("expected column '" + name + "' at position " + std::to_string(i + 1));
}

void check_increasing(std::int64_t prev, std::int64_t t, std::size_t row, std::size_t line) {
  if (row > 0 && t <= prev) throw SchemaError("line " + std::to_string(line) + ": time index does not increase");
}

std::string indexed(const char* base, std::size_t k) { return std::string(base) + std::to_string(k + 1); }

}  // namespace

std::vector<ObservationRecord> read_returns_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 3) throw SchemaError("returns need columns t,x,y1..yK");
  expect_column(t.header, 0, "t");
  expect_column(t.header, 1, "x");
  const std::size_t K = t.header.size() - 2;
  for (std::size_t k = 0; k < K; ++k) expect_column(t.header, k + 2, indexed("y", k));

  std::vector<ObservationRecord> out(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t ln = t.line_no[i];
    out[i].t = parse_time(r[0], ln);
    if (i > 0) check_increasing(out[i - 1].t, out[i].t, i, ln);
    out[i].x = parse_number(r[1], ln);
    out[i].y.resize(K);
    for (std::size_t k = 0; k < K; ++k) out[i].y[k] = parse_number(r[k + 2], ln);
  }
  return out;
}

void write_returns_csv(std::ostream& out, std::span<const ObservationRecord> rows) {
  const std::size_t K = rows.empty() ? 0 : rows.front().y.size();
  out << "t,x";
  for (std::size_t k = 0; k < K; ++k) out << ',' << indexed("y", k);
  out << '\n';
  for (const auto& r : rows) {
    if (r.y.size() != K) throw SchemaError("rows with different numbers of institutions");
    out << r.t << ',' << format_double(r.x);
    for (double y : r.y) out << ',' << format_double(y);
    out << '\n';
  }
}

std::vector<ForecastRecord> read_forecasts_csv(std::istream& in, MeasureKind measure, std::size_t num_series) {
  const CsvTable t = read_csv(in);
  expect_column(t.header, 0, "t");
  const std::size_t cols = t.header.size();
  std::size_t K = 0;
  if (uses_pits(measure)) {
    if (cols < 3) throw SchemaError("PIT forecasts need columns t,pit_x,pit_tail_1..K");
    expect_column(t.header, 1, "pit_x");
    K = cols - 2;
    for (std::size_t k = 0; k < K; ++k) expect_column(t.header, k + 2, indexed("pit_tail_", k));
  } else if (measure == MeasureKind::CoVaR) {
    if (cols < 3) throw SchemaError("CoVaR forecasts need columns t,var_hat,sys_hat_1..K");
    expect_column(t.header, 1, "var_hat");
    K = cols - 2;
    for (std::size_t k = 0; k < K; ++k) expect_column(t.header, k + 2, indexed("sys_hat_", k));
  } else {
    if (cols < 3 || (cols - 1) % 2 != 0) throw SchemaError("RCoVaR forecasts need columns t,var_hat_1..K,sys_hat_1..K");
    K = (cols - 1) / 2;
    for (std::size_t k = 0; k < K; ++k) expect_column(t.header, k + 1, indexed("var_hat_", k));
    for (std::size_t k = 0; k < K; ++k) expect_column(t.header, K + k + 1, indexed("sys_hat_", k));
  }
  if (num_series != 0 && K != num_series)
    throw SchemaError("forecasts cover " + std::to_string(K) + " institutions, expected " + std::to_string(num_series));

  std::vector<ForecastRecord> out(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t ln = t.line_no[i];
    auto& f = out[i];
    f.t = parse_time(r[0], ln);
    if (i > 0) check_increasing(out[i - 1].t, f.t, i, ln);
    if (uses_pits(measure)) {
      f.pit_x = parse_number(r[1], ln);
      f.pit_tail.resize(K);
      for (std::size_t k = 0; k < K; ++k) f.pit_tail[k] = parse_number(r[k + 2], ln);
      auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
      if (!in_unit(*f.pit_x)) throw SchemaError("line " + std::to_string(ln) + ": pit_x outside [0,1]");
      for (double p : f.pit_tail)
        if (!in_unit(p)) throw SchemaError("line " + std::to_string(ln) + ": pit_tail outside [0,1]");
    } else if (measure == MeasureKind::CoVaR) {
      f.var_hat = {parse_number(r[1], ln)};
      f.sys_hat.resize(K);
      for (std::size_t k = 0; k < K; ++k) f.sys_hat[k] = parse_number(r[k + 2], ln);
    } else {
      f.var_hat.resize(K);
      f.sys_hat.resize(K);
      for (std::size_t k = 0; k < K; ++k) f.var_hat[k] = parse_number(r[k + 1], ln);
      for (std::size_t k = 0; k < K; ++k) f.sys_hat[k] = parse_number(r[K + k + 1], ln);
    }
  }
  return out;
}

void write_forecasts_csv(std::ostream& out, std::span<const ForecastRecord> rows, MeasureKind measure) {
  std::size_t K = 0;
  if (!rows.empty()) K = uses_pits(measure) ? rows.front().pit_tail.size() : rows.front().sys_hat.size();
  out << 't';
  if (uses_pits(measure)) {
    out << ",pit_x";
    for (std::size_t k = 0; k < K; ++k) out << ',' << indexed("pit_tail_", k);
  } else if (measure == MeasureKind::CoVaR) {
    out << ",var_hat";
    for (std::size_t k = 0; k < K; ++k) out << ',' << indexed("sys_hat_", k);
  } else {
    for (std::size_t k = 0; k < K; ++k) out << ',' << indexed("var_hat_", k);
    for (std::size_t k = 0; k < K; ++k) out << ',' << indexed("sys_hat_", k);
  }
  out << '\n';
  for (const auto& f : rows) {
    out << f.t;
    if (uses_pits(measure)) {
      if (!f.pit_x || f.pit_tail.size() != K) throw SchemaError("PIT forecast rows are incomplete");
      out << ',' << format_double(*f.pit_x);
      for (double p : f.pit_tail) out << ',' << format_double(p);
    } else {
      const std::size_t nv = num_var_streams(measure, K);
      if (f.var_hat.size() != nv || f.sys_hat.size() != K) throw SchemaError("threshold forecast rows are incomplete");
      for (double v : f.var_hat) out << ',' << format_double(v);
      for (double s : f.sys_hat) out << ',' << format_double(s);
    }
    out << '\n';
  }
}

DetectorTrace read_trace_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  expect_column(t.header, 0, "T");
  DetectorTrace tr;
  std::size_t nv = 0;
  std::size_t ns = 0;
  for (std::size_t i = 1; i < t.header.size(); ++i) {
    const auto& h = t.header[i];
    if (h == "det_var" || h.rfind("det_var_", 0) == 0) {
      if (ns > 0) throw SchemaError("VaR detector columns must precede systemic ones");
      ++nv;
    } else if (h.rfind("det_sys_", 0) == 0) {
      expect_column(t.header, i, indexed("det_sys_", ns));
      ++ns;
    } else {
      throw SchemaError("unexpected trace column '" + h + "'");
    }
  }
  if (nv == 0 || ns == 0) throw SchemaError("trace needs VaR and systemic detector columns");
  tr.var_det.assign(nv, {});
  tr.sys_det.assign(ns, {});
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t ln = t.line_no[i];
    tr.T.push_back(parse_time(r[0], ln));
    for (std::size_t h = 0; h < nv; ++h) tr.var_det[h].push_back(parse_number(r[1 + h], ln));
    for (std::size_t k = 0; k < ns; ++k) tr.sys_det[k].push_back(parse_number(r[1 + nv + k], ln));
  }
  return tr;
}

void write_trace_csv(std::ostream& out, const DetectorTrace& trace, MeasureKind measure) {
  out << 'T';
  if (measure == MeasureKind::RCoVaR) {
    for (std::size_t h = 0; h < trace.var_det.size(); ++h) out << ',' << indexed("det_var_", h);
  } else {
    out << ",det_var";
  }
  for (std::size_t k = 0; k < trace.sys_det.size(); ++k) out << ',' << indexed("det_sys_", k);
  out << '\n';
  for (std::size_t i = 0; i < trace.T.size(); ++i) {
    out << trace.T[i];
    for (const auto& s : trace.var_det) out << ',' << format_double(s[i]);
    for (const auto& s : trace.sys_det) out << ',' << format_double(s[i]);
    out << '\n';
  }
}

nlohmann::ordered_json alarms_to_json(const MonitorReport& report) {
  auto record = [&](const AlarmRecord& a) {
    nlohmann::ordered_json j;
    j["T"] = a.T;
    j["source"] = stream_label(a.source, report.measure);
    j["normalized_value"] = a.normalized_value;
    j["first"] = a.first;
    return j;
  };
  nlohmann::ordered_json j;
  j["measure"] = std::string(to_string(report.measure));
  j["horizon"] = report.horizon;
  j["m"] = report.m;
  j["steps"] = report.steps;
  j["v"] = report.v;
  j["c"] = report.c;
  j["first_alarm"] = report.first_alarm ? record(*report.first_alarm) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& a : report.alarms) list.push_back(record(a));
  j["alarms"] = list;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace sentinel
