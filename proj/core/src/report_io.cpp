#include "hmlab/report_io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "hmlab/error.hpp"
#include "json_util.hpp"

namespace hmlab {

namespace {

using detail::ordered_json;

ordered_json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_num(const ordered_json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw Error(ErrorCode::ParseError, "report field " + what + ": expected a number");
}

ordered_json nums(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> from_nums(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "report field " + what + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(from_num(x, what));
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

}  // namespace

void write_report_json(std::ostream& os, const EstimateReport& r) {
  ordered_json j;
  j["id"] = r.id;
  j["scenario"] = r.scenario;
  j["h"] = nums(r.h);
  j["stability"] = num(r.stability);
  j["pass"] = r.pass;
  ordered_json qs = ordered_json::array();
  for (const Quantity& q : r.quantities) {
    ordered_json o;
    o["name"] = q.name;
    o["values"] = nums(q.values);
    o["lower"] = num(q.lower);
    o["upper"] = num(q.upper);
    o["check_trend"] = q.check_trend;
    o["gating"] = q.gating;
    o["trend_ratio"] = num(q.trend_ratio());
    o["within_budget"] = q.within_budget();
    qs.push_back(o);
  }
  j["quantities"] = qs;
  j["failures"] = r.failures();
  j["notes"] = r.notes;
  ordered_json ts = ordered_json::array();
  for (const Table& t : r.tables) {
    ordered_json o;
    o["name"] = t.name;
    o["columns"] = t.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) rows.push_back(nums(row));
    o["rows"] = rows;
    ts.push_back(o);
  }
  j["tables"] = ts;
  os << j.dump(2) << '\n';
}

EstimateReport read_report_json(std::istream& is) {
  std::ostringstream ss;
  ss << is.rdbuf();
  const ordered_json j = [&] {
    try {
      return ordered_json::parse(ss.str());
    } catch (const ordered_json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
  }();
  EstimateReport r;
  try {
    r.id = j.at("id").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.h = from_nums(j.at("h"), "h");
    r.stability = from_num(j.at("stability"), "stability");
    for (const auto& o : j.at("quantities")) {
      Quantity q;
      q.name = o.at("name").get<std::string>();
      q.values = from_nums(o.at("values"), q.name + ".values");
      q.lower = from_num(o.at("lower"), q.name + ".lower");
      q.upper = from_num(o.at("upper"), q.name + ".upper");
      q.check_trend = o.at("check_trend").get<bool>();
      q.gating = o.at("gating").get<bool>();
      r.add(std::move(q));
    }
    for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    for (const auto& o : j.at("tables")) {
      Table t;
      t.name = o.at("name").get<std::string>();
      t.columns = o.at("columns").get<std::vector<std::string>>();
      for (const auto& row : o.at("rows")) t.rows.push_back(from_nums(row, t.name));
      r.tables.push_back(std::move(t));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  r.evaluate();
  return r;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_rollup_csv(std::ostream& os, std::span<const EstimateReport> reports) {
  os << "estimate_id,scenario,quantity,observed,lower,upper,trend_ratio,gating,quantity_pass,report_pass\n";
  for (const EstimateReport& r : reports) {
    for (const Quantity& q : r.quantities) {
      std::string observed;
      for (std::size_t i = 0; i < q.values.size(); ++i) observed += (i ? ";" : "") + fmt(q.values[i]);
      const bool qpass = q.within_budget() && (!q.check_trend || q.trend_ratio() <= r.stability);
      os << csv_cell(r.id) << ',' << csv_cell(r.scenario) << ',' << csv_cell(q.name) << ',' << observed << ','
         << fmt(q.lower) << ',' << fmt(q.upper) << ',' << fmt(q.trend_ratio()) << ',' << (q.gating ? 1 : 0) << ','
         << (qpass ? 1 : 0) << ',' << (r.pass ? 1 : 0) << '\n';
    }
  }
}

void write_table_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_cell(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
    os << '\n';
  }
}

}  // namespace hmlab
