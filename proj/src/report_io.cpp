#include "uavsec/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavsec {

using nlohmann::ordered_json;

namespace {

double round9(double v) { return std::stod(format_g9(v)); }

ordered_json array9(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(round9(x));
  return a;
}

}  // namespace

std::string format_g9(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string solution_to_json(const Solution& s) {
  ordered_json j;
  j["objective_bps_hz"] = round9(s.objective_bps_hz);
  j["n_slots"] = s.n_slots();
  ordered_json wp = ordered_json::array();
  for (const auto& q : s.waypoints) wp.push_back({round9(q.x()), round9(q.y())});
  j["waypoints"] = std::move(wp);
  j["powers_w"] = array9(s.powers);
  ordered_json slacks = ordered_json::object();
  for (const auto& [name, values] : s.slacks) slacks[name] = array9(values);
  j["slacks"] = std::move(slacks);
  return j.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  Solution s;
  s.objective_bps_hz = j.at("objective_bps_hz").get<double>();
  for (const auto& p : j.at("waypoints")) s.waypoints.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  s.powers = j.at("powers_w").get<std::vector<double>>();
  for (const auto& [name, values] : j.at("slacks").items()) s.slacks[name] = values.get<std::vector<double>>();
  if (s.waypoints.size() != s.powers.size()) throw std::invalid_argument("solution JSON: waypoint/power count mismatch");
  return s;
}

std::string report_to_json(const ValidationReport& r) {
  ordered_json j;
  j["kind"] = r.kind;
  j["passed"] = r.passed;
  j["max_violation"] = round9(r.max_violation);
  j["certified_rate_bps_hz"] = round9(r.certified_rate_bps_hz);
  ordered_json v = ordered_json::object();
  for (const auto& [name, value] : r.violations) v[name] = round9(value);
  j["violations"] = std::move(v);
  ordered_json d = ordered_json::object();
  for (const auto& [name, value] : r.diagnostics) d[name] = round9(value);
  j["diagnostics"] = std::move(d);
  if (r.kind == "worst_case") j["tolerance"] = r.tolerance;
  if (r.kind == "outage") {
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["eve_limit"] = round9(r.eve_limit);
    j["pu_limit"] = round9(r.pu_limit);
    j["eve_outage"] = array9(r.eve_outage);
    j["pu_outage"] = array9(r.pu_outage);
    j["failing_slots"] = r.failing_slots;
  }
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << content;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace uavsec
