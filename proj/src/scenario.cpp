#include "uavsec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavsec/ocr.hpp"

namespace uavsec {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const char* invariant, const std::string& what) {
  if (!ok) throw ScenarioError(invariant, what);
}

}  // namespace

void Scenario::validate() const {
  require(n_slots >= 2, "n_slots", "need at least 2 slots, got " + std::to_string(n_slots));
  require(positive_finite(altitude_m), "positivity", "altitude_m must be > 0");
  require(positive_finite(beta0), "positivity", "beta0 must be > 0");
  require(positive_finite(noise_su_w), "positivity", "noise_su_w must be > 0");
  require(positive_finite(p_avg_w), "positivity", "p_avg_w must be > 0");
  require(positive_finite(p_max_w), "positivity", "p_max_w must be > 0");
  require(positive_finite(v_max_mps), "positivity", "v_max_mps must be > 0");
  require(positive_finite(slot_s), "positivity", "slot_s must be > 0");
  require(positive_finite(it_threshold_w), "positivity", "it_threshold_w must be > 0");
  require(!eves.empty(), "eve_count", "at least one eavesdropper is required");
  require(noise_eve_w.size() == eves.size(), "eve_noise_count",
          "noise_eve_w must have one entry per Eve");
  for (double s : noise_eve_w) require(positive_finite(s), "positivity", "Eve noise must be > 0");
  require(p_max_w >= p_avg_w, "peak_vs_average", "p_max_w must be >= p_avg_w");
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, "outage_range", "rho must lie in (0, 1]");
  require(std::isfinite(phi) && phi > 0.0 && phi <= 1.0, "outage_range", "phi must lie in (0, 1]");
  auto check_node = [](const UncertainNode& node) {
    require(node.center_xy.allFinite(), "node_uncertainty", "node center must be finite");
    require(std::isfinite(node.bounded_radius_m) && node.bounded_radius_m >= 0.0,
            "node_uncertainty", "bounded_radius_m must be >= 0");
    require(std::isfinite(node.gaussian_std_m) && node.gaussian_std_m >= 0.0,
            "node_uncertainty", "gaussian_std_m must be >= 0");
  };
  for (const auto& n : pus) check_node(n);
  for (const auto& n : eves) check_node(n);
  require(su_xy.allFinite() && q_init_xy.allFinite() && q_final_xy.allFinite(), "positions",
          "positions must be finite");
  const double reach = max_step_m() * (n_slots - 1);
  const double dist = (q_final_xy - q_init_xy).norm();
  require(dist <= reach * (1.0 + 1e-12), "reachability",
          "|q_final - q_init| = " + std::to_string(dist) + " m exceeds v_max*slot*(N-1) = " +
              std::to_string(reach) + " m");
}

void Scenario::validate_for(UncertaintyModel) const {
  // Zero radius/std is a valid degenerate (nominal) model, so the per-model
  // check reduces to the common invariants.
  validate();
}

namespace {

struct Reader {
  const json& doc;
  std::string where;

  bool has(const std::string& key) const { return doc.contains(key); }

  double number(const std::string& key) const {
    const auto& v = doc.at(key);
    if (!v.is_number()) throw ScenarioError("parse", where + key + " must be a number");
    return v.get<double>();
  }

  Vec2 vec2(const std::string& key) const {
    const auto& v = doc.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ScenarioError("parse", where + key + " must be a 2-element number array");
    return Vec2(v[0].get<double>(), v[1].get<double>());
  }

  // Power-like field: exactly one of base_w / base_dbw / base_dbm.
  double power(const std::string& base, bool required = true) const {
    if (has(base))
      throw ScenarioError("unit", where + base + " has no unit suffix (use _w, _dbw or _dbm)");
    int count = 0;
    double value = 0.0;
    if (has(base + "_w")) { value = number(base + "_w"); ++count; }
    if (has(base + "_dbw")) { value = dbw_to_watts(number(base + "_dbw")); ++count; }
    if (has(base + "_dbm")) { value = dbm_to_watts(number(base + "_dbm")); ++count; }
    if (count > 1)
      throw ScenarioError("unit", where + base + " given in more than one representation");
    if (count == 0 && required) throw ScenarioError("parse", where + "missing field " + base + "_w");
    return value;
  }

  // Field with a single mandatory unit suffix.
  double suffixed(const std::string& base, const std::string& suffix) const {
    if (has(base))
      throw ScenarioError("unit", where + base + " has no unit suffix (use " + base + suffix + ")");
    if (!has(base + suffix)) throw ScenarioError("parse", where + "missing field " + base + suffix);
    return number(base + suffix);
  }

  Vec2 suffixed_vec2(const std::string& base) const {
    if (has(base)) throw ScenarioError("unit", where + base + " has no unit suffix (use " + base + "_m)");
    if (!has(base + "_m")) throw ScenarioError("parse", where + "missing field " + base + "_m");
    return vec2(base + "_m");
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& [key, _] : doc.items()) {
      if (!key.empty() && key.front() == '_') continue;  // comment fields
      bool ok = false;
      bool unsuffixed = false;
      for (const char* k : known) {
        const std::string_view kv(k);
        ok = ok || key == kv;
        unsuffixed = unsuffixed || (kv.size() > key.size() && kv.substr(0, key.size()) == key &&
                                    kv[key.size()] == '_');
      }
      if (!ok && unsuffixed)
        throw ScenarioError("unit", where + key + " has no unit suffix");
      if (!ok) throw ScenarioError("parse", where + "unknown field '" + key + "'");
    }
  }
};

UncertainNode read_node(const json& j, const std::string& where, double* noise_out) {
  if (!j.is_object()) throw ScenarioError("parse", where + "node must be an object");
  Reader r{j, where};
  if (noise_out)
    r.reject_unknown({"center_xy_m", "bounded_radius_m", "gaussian_std_m", "noise_w", "noise_dbw",
                      "noise_dbm"});
  else
    r.reject_unknown({"center_xy_m", "bounded_radius_m", "gaussian_std_m"});
  UncertainNode node;
  node.center_xy = r.suffixed_vec2("center_xy");
  if (r.has("bounded_radius")) throw ScenarioError("unit", where + "bounded_radius has no unit suffix");
  if (r.has("gaussian_std")) throw ScenarioError("unit", where + "gaussian_std has no unit suffix");
  const bool has_radius = r.has("bounded_radius_m");
  const bool has_std = r.has("gaussian_std_m");
  if (!has_radius && !has_std)
    throw ScenarioError("node_uncertainty",
                        where + "node needs bounded_radius_m and/or gaussian_std_m");
  if (has_radius) node.bounded_radius_m = r.number("bounded_radius_m");
  if (has_std) node.gaussian_std_m = r.number("gaussian_std_m");
  if (noise_out) *noise_out = r.power("noise", false);
  return node;
}

}  // namespace

Scenario load_scenario(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("parse", e.what());
  }
  if (!doc.is_object()) throw ScenarioError("parse", "top-level document must be an object");

  Reader r{doc, ""};
  r.reject_unknown({"su_xy_m", "pus", "eves", "altitude_m", "beta0", "beta0_db", "noise_su_w",
                    "noise_su_dbw", "noise_su_dbm", "p_avg_w", "p_avg_dbw", "p_avg_dbm", "p_max_w",
                    "p_max_dbw", "p_max_dbm", "v_max_mps", "slot_s", "n_slots", "duration_s",
                    "q_init_xy_m", "q_final_xy_m", "it_threshold_w", "it_threshold_dbw",
                    "it_threshold_dbm", "rho", "phi"});

  Scenario s;
  s.su_xy = r.suffixed_vec2("su_xy");
  s.altitude_m = r.suffixed("altitude", "_m");
  if (r.has("beta0") && r.has("beta0_db"))
    throw ScenarioError("unit", "beta0 given in more than one representation");
  if (r.has("beta0"))
    s.beta0 = r.number("beta0");
  else if (r.has("beta0_db"))
    s.beta0 = db_to_ratio(r.number("beta0_db"));
  else
    throw ScenarioError("parse", "missing field beta0 (or beta0_db)");
  s.noise_su_w = r.power("noise_su");
  s.p_avg_w = r.power("p_avg");
  s.p_max_w = r.power("p_max");
  s.it_threshold_w = r.power("it_threshold");
  if (r.has("v_max")) throw ScenarioError("unit", "v_max has no unit suffix (use v_max_mps)");
  s.v_max_mps = r.suffixed("v_max", "_mps");
  s.slot_s = r.suffixed("slot", "_s");

  const bool has_n = r.has("n_slots");
  const bool has_t = r.has("duration_s");
  if (has_n == has_t) throw ScenarioError("parse", "give exactly one of n_slots or duration_s");
  if (has_n) {
    const auto& v = doc.at("n_slots");
    if (!v.is_number_integer()) throw ScenarioError("parse", "n_slots must be an integer");
    s.n_slots = v.get<int>();
  } else {
    const double t = r.number("duration_s");
    const double n = t / s.slot_s;
    if (!std::isfinite(n) || std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
      throw ScenarioError("n_slots", "duration_s must be an integer multiple of slot_s");
    s.n_slots = static_cast<int>(std::lround(n));
  }
  s.q_init_xy = r.suffixed_vec2("q_init_xy");
  s.q_final_xy = r.suffixed_vec2("q_final_xy");
  if (!r.has("rho") || !r.has("phi")) throw ScenarioError("parse", "missing field rho or phi");
  s.rho = r.number("rho");
  s.phi = r.number("phi");

  if (!doc.contains("pus") || !doc["pus"].is_array()) throw ScenarioError("parse", "pus must be an array");
  if (!doc.contains("eves") || !doc["eves"].is_array())
    throw ScenarioError("parse", "eves must be an array");
  for (std::size_t i = 0; i < doc["pus"].size(); ++i)
    s.pus.push_back(read_node(doc["pus"][i], "pus[" + std::to_string(i) + "].", nullptr));
  for (std::size_t i = 0; i < doc["eves"].size(); ++i) {
    double noise = 0.0;
    s.eves.push_back(read_node(doc["eves"][i], "eves[" + std::to_string(i) + "].", &noise));
    // Eve noise defaults to the SU receiver noise.
    s.noise_eve_w.push_back(noise > 0.0 ? noise : s.noise_su_w);
  }
  s.validate();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("parse", "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  auto vec = [](const Vec2& v) { return json::array({v.x(), v.y()}); };
  json doc;
  doc["su_xy_m"] = vec(s.su_xy);
  doc["altitude_m"] = s.altitude_m;
  doc["beta0"] = s.beta0;
  doc["noise_su_w"] = s.noise_su_w;
  doc["p_avg_w"] = s.p_avg_w;
  doc["p_max_w"] = s.p_max_w;
  doc["v_max_mps"] = s.v_max_mps;
  doc["slot_s"] = s.slot_s;
  doc["n_slots"] = s.n_slots;
  doc["q_init_xy_m"] = vec(s.q_init_xy);
  doc["q_final_xy_m"] = vec(s.q_final_xy);
  doc["it_threshold_w"] = s.it_threshold_w;
  doc["rho"] = s.rho;
  doc["phi"] = s.phi;
  doc["pus"] = json::array();
  for (const auto& n : s.pus)
    doc["pus"].push_back({{"center_xy_m", vec(n.center_xy)},
                          {"bounded_radius_m", n.bounded_radius_m},
                          {"gaussian_std_m", n.gaussian_std_m}});
  doc["eves"] = json::array();
  for (std::size_t k = 0; k < s.eves.size(); ++k) {
    const auto& n = s.eves[k];
    doc["eves"].push_back({{"center_xy_m", vec(n.center_xy)},
                           {"bounded_radius_m", n.bounded_radius_m},
                           {"gaussian_std_m", n.gaussian_std_m},
                           {"noise_w", s.noise_eve_w.at(k)}});
  }
  return doc.dump(2);
}

Scenario default_fixture() {
  Scenario s;
  s.altitude_m = 100.0;
  s.beta0 = db_to_ratio(-10.0);
  s.su_xy = Vec2(0.0, 0.0);
  s.noise_su_w = dbm_to_watts(-50.0);
  s.rho = 0.2;
  s.phi = 0.2;
  s.v_max_mps = 10.0;
  s.slot_s = 1.0;
  s.n_slots = 60;
  s.p_avg_w = dbw_to_watts(-10.0);
  s.p_max_w = 4.0 * s.p_avg_w;
  s.it_threshold_w = 2.5e-7;
  s.q_init_xy = Vec2(-200.0, 0.0);
  s.q_final_xy = Vec2(200.0, 0.0);

  UncertainNode pu;
  pu.center_xy = Vec2(-40.0, -80.0);
  pu.gaussian_std_m = 5.0;
  s.pus = {pu};

  UncertainNode eve1, eve2;
  eve1.center_xy = Vec2(240.0, -120.0);
  eve1.gaussian_std_m = 5.0;
  eve2.center_xy = Vec2(-240.0, 120.0);
  eve2.gaussian_std_m = 35.0;
  s.eves = {eve1, eve2};
  s.noise_eve_w = {s.noise_su_w, s.noise_su_w};

  for (auto& n : s.pus) n.bounded_radius_m = matched_radius(n.gaussian_std_m, 1.0 - s.phi);
  for (auto& n : s.eves)
    n.bounded_radius_m = matched_radius(n.gaussian_std_m, 1.0 - s.rho, s.num_eves());
  s.validate();
  return s;
}

Scenario with_duration(Scenario s, double duration_s) {
  s.n_slots = static_cast<int>(std::lround(duration_s / s.slot_s));
  s.validate();
  return s;
}

}  // namespace uavsec
