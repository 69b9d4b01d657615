#include "waverec/config.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "waverec/error.hpp"
#include "waverec/io.hpp"

namespace waverec {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

/// Rejects keys of `obj` not in `allowed`.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) invalid(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!ok.count(item.key())) invalid("unknown key '" + item.key() + "' in " + where);
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) invalid(where + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) invalid(where + "." + key + " must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) invalid(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) invalid(where + "." + key + " must be a string");
  return v.get<std::string>();
}

Point2 get_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    invalid(where + " must be an array [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Rect get_rect(const json& obj, const char* key, const Rect& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 4) invalid(where + "." + key + " must be [xmin, xmax, ymin, ymax]");
  for (const auto& x : v)
    if (!x.is_number()) invalid(where + "." + key + " must contain numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

json rect_json(const Rect& r) { return json::array({r.xmin, r.xmax, r.ymin, r.ymax}); }

}  // namespace

void ExperimentConfig::validate() const {
  const auto& g = geometry;
  if (!g.g_bounds.valid() || !g.omega_bounds.valid()) invalid("geometry rectangles must be nonempty");
  if (!(g.h_tilde > 0.0)) invalid("geometry.h_tilde must be positive");
  if (!(g.circle.radius > 0.0)) invalid("geometry.circle.radius must be positive");
  if (!(simulation.tau > 0.0) || !(simulation.omega > 0.0) || !(simulation.T > simulation.t1()))
    invalid("simulation needs tau > 0, omega > 0 and T > 2 pi / omega");
  if (!(simulation.sigma >= 0.0)) invalid("simulation.sigma must be nonnegative");
  if (simulation.abc_sign != 1.0 && simulation.abc_sign != -1.0) invalid("simulation.abc_sign must be 1 or -1");
  pseudo_frequency.validate();
  const auto& a = algorithm;
  if (a.m_inner_max < 1 || a.lag_max < 1) invalid("iteration caps must be at least 1");
  if (!(a.inner_tol > 0.0)) invalid("algorithm.inner_tol must be positive");
  if (!(a.d > 1.0)) invalid("algorithm.d must exceed 1");
  if (recording == RecordingSet::Boundary && a.data_constraint == gcm::DataConstraint::Interior)
    invalid("the interior data constraint needs recording = \"interior\"");
  for (const auto& inc : phantom)
    if (!(inc.value >= 1.0 && inc.value <= a.d))
      throw Error(ErrorCode::InvalidPhantom, "phantom values must lie in [1, d]");
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  if (!(pseudo_frequency.s_min * simulation.T >= 2.0))
    out.push_back("s_min * T < 2: the truncated Laplace transform neglects a non-negligible tail");
  return out;
}

gcm::GcmConfig ExperimentConfig::gcm_config() const {
  gcm::GcmConfig c;
  c.grid = pseudo_frequency;
  c.sim = simulation;
  c.m_inner_max = algorithm.m_inner_max;
  c.inner_tol = algorithm.inner_tol;
  c.lag_max = algorithm.lag_max;
  c.d = algorithm.d;
  c.tail_init = algorithm.tail_init;
  c.constraint = algorithm.data_constraint;
  c.smooth = algorithm.smooth;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, "config", {"geometry", "simulation", "pseudo_frequency", "algorithm", "recording", "phantom"});
  ExperimentConfig cfg;

  if (root.contains("geometry")) {
    const json& g = root.at("geometry");
    check_keys(g, "geometry", {"g_bounds", "omega_bounds", "circle", "h_tilde"});
    cfg.geometry.g_bounds = get_rect(g, "g_bounds", cfg.geometry.g_bounds, "geometry");
    cfg.geometry.omega_bounds = get_rect(g, "omega_bounds", cfg.geometry.omega_bounds, "geometry");
    cfg.geometry.h_tilde = get_number(g, "h_tilde", cfg.geometry.h_tilde, "geometry");
    if (g.contains("circle")) {
      const json& c = g.at("circle");
      check_keys(c, "geometry.circle", {"center", "radius"});
      if (c.contains("center")) cfg.geometry.circle.center = get_point(c.at("center"), "geometry.circle.center");
      cfg.geometry.circle.radius = get_number(c, "radius", cfg.geometry.circle.radius, "geometry.circle");
    }
  }
  if (root.contains("simulation")) {
    const json& s = root.at("simulation");
    check_keys(s, "simulation", {"omega", "T", "tau", "sigma", "seed", "abc_sign"});
    auto& sim = cfg.simulation;
    sim.omega = get_number(s, "omega", sim.omega, "simulation");
    sim.T = get_number(s, "T", sim.T, "simulation");
    sim.tau = get_number(s, "tau", sim.tau, "simulation");
    sim.sigma = get_number(s, "sigma", sim.sigma, "simulation");
    sim.abc_sign = get_number(s, "abc_sign", sim.abc_sign, "simulation");
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) invalid("simulation.seed must be a nonnegative integer");
      sim.seed = s.at("seed").get<std::uint64_t>();
    }
  }
  if (root.contains("pseudo_frequency")) {
    const json& p = root.at("pseudo_frequency");
    check_keys(p, "pseudo_frequency", {"s_min", "s_max", "s_step", "lambda", "epsilon"});
    auto& g = cfg.pseudo_frequency;
    g.s_min = get_number(p, "s_min", g.s_min, "pseudo_frequency");
    g.s_max = get_number(p, "s_max", g.s_max, "pseudo_frequency");
    g.h = get_number(p, "s_step", g.h, "pseudo_frequency");
    g.lambda = get_number(p, "lambda", g.lambda, "pseudo_frequency");
    g.epsilon = get_number(p, "epsilon", g.epsilon, "pseudo_frequency");
  }
  if (root.contains("algorithm")) {
    const json& a = root.at("algorithm");
    check_keys(a, "algorithm",
               {"m_inner_max", "inner_tol", "lag_max", "d", "tail_init", "data_constraint", "smooth"});
    auto& alg = cfg.algorithm;
    alg.m_inner_max = get_int(a, "m_inner_max", alg.m_inner_max, "algorithm");
    alg.inner_tol = get_number(a, "inner_tol", alg.inner_tol, "algorithm");
    alg.lag_max = get_int(a, "lag_max", alg.lag_max, "algorithm");
    alg.d = get_number(a, "d", alg.d, "algorithm");
    alg.smooth = get_bool(a, "smooth", alg.smooth, "algorithm");
    const std::string tail = get_string(a, "tail_init", "background", "algorithm");
    if (tail == "background") alg.tail_init = gcm::TailInit::Background;
    else if (tail == "zero") alg.tail_init = gcm::TailInit::Zero;
    else invalid("algorithm.tail_init must be \"background\" or \"zero\"");
    const std::string dc = get_string(a, "data_constraint", "interior", "algorithm");
    if (dc == "interior") alg.data_constraint = gcm::DataConstraint::Interior;
    else if (dc == "boundary") alg.data_constraint = gcm::DataConstraint::Boundary;
    else invalid("algorithm.data_constraint must be \"interior\" or \"boundary\"");
  }
  {
    const std::string rec = get_string(root, "recording", "interior", "config");
    if (rec == "interior") cfg.recording = RecordingSet::Interior;
    else if (rec == "boundary") cfg.recording = RecordingSet::Boundary;
    else invalid("recording must be \"interior\" or \"boundary\"");
  }
  if (root.contains("phantom")) {
    const json& ph = root.at("phantom");
    if (!ph.is_array()) invalid("phantom must be an array");
    for (std::size_t i = 0; i < ph.size(); ++i) {
      const std::string where = "phantom[" + std::to_string(i) + "]";
      const json& item = ph[i];
      check_keys(item, where, {"shape", "center", "radius", "value"});
      Inclusion inc;
      const std::string shape = get_string(item, "shape", "", where);
      if (shape == "point") inc.shape = InclusionShape::Point;
      else if (shape == "disc") inc.shape = InclusionShape::Disc;
      else invalid(where + ".shape must be \"point\" or \"disc\"");
      if (!item.contains("center")) invalid(where + ".center is required");
      inc.center = get_point(item.at("center"), where + ".center");
      inc.radius = get_number(item, "radius", 0.0, where);
      if (inc.shape == InclusionShape::Disc && !item.contains("radius")) invalid(where + ".radius is required");
      if (!item.contains("value")) invalid(where + ".value is required");
      inc.value = get_number(item, "value", 1.0, where);
      cfg.phantom.push_back(inc);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(io::read_text(path)); }

std::string to_json(const ExperimentConfig& cfg) {
  json root;
  const auto& g = cfg.geometry;
  root["geometry"] = {{"g_bounds", rect_json(g.g_bounds)},
                      {"omega_bounds", rect_json(g.omega_bounds)},
                      {"circle", {{"center", {g.circle.center.x, g.circle.center.y}}, {"radius", g.circle.radius}}},
                      {"h_tilde", g.h_tilde}};
  const auto& s = cfg.simulation;
  root["simulation"] = {{"omega", s.omega}, {"T", s.T},       {"tau", s.tau},
                        {"sigma", s.sigma}, {"seed", s.seed}, {"abc_sign", s.abc_sign}};
  const auto& p = cfg.pseudo_frequency;
  root["pseudo_frequency"] = {
      {"s_min", p.s_min}, {"s_max", p.s_max}, {"s_step", p.h}, {"lambda", p.lambda}, {"epsilon", p.epsilon}};
  const auto& a = cfg.algorithm;
  root["algorithm"] = {
      {"m_inner_max", a.m_inner_max},
      {"inner_tol", a.inner_tol},
      {"lag_max", a.lag_max},
      {"d", a.d},
      {"tail_init", a.tail_init == gcm::TailInit::Background ? "background" : "zero"},
      {"data_constraint", a.data_constraint == gcm::DataConstraint::Interior ? "interior" : "boundary"},
      {"smooth", a.smooth}};
  root["recording"] = cfg.recording == RecordingSet::Interior ? "interior" : "boundary";
  json ph = json::array();
  for (const auto& inc : cfg.phantom) {
    json item = {{"shape", inc.shape == InclusionShape::Point ? "point" : "disc"},
                 {"center", {inc.center.x, inc.center.y}},
                 {"value", inc.value}};
    if (inc.shape == InclusionShape::Disc) item["radius"] = inc.radius;
    ph.push_back(item);
  }
  root["phantom"] = ph;
  return root.dump(2) + "\n";
}

}  // namespace waverec
