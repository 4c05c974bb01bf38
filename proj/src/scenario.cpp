#include "wedge/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace wedge {

using nlohmann::json;

const char* to_string(Channel c) {
  switch (c) {
    case Channel::E: return "E";
    case Channel::F: return "F";
    case Channel::Unresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

ScenarioConfig ScenarioConfig::symmetric(double width, double speed, double arm_length) {
  const double s = std::numbers::sqrt2 / 2;
  ScenarioConfig cfg;
  cfg.upper.center = Eigen::Vector2d(-arm_length * s, arm_length * s);
  cfg.upper.momentum = Eigen::Vector2d(speed * s, -speed * s);
  cfg.upper.width = width;
  cfg.lower.center = Eigen::Vector2d(-arm_length * s, -arm_length * s);
  cfg.lower.momentum = Eigen::Vector2d(speed * s, speed * s);
  cfg.lower.width = width;
  return cfg;
}

namespace {

Packet2 make_packet(const PacketParams& p, double birth) {
  Packet2 g;
  g.center = p.center;
  g.momentum = p.momentum;
  g.width = p.width;
  g.birth_time = birth;
  return g;
}

} // namespace

Packet2 ScenarioConfig::upper_packet() const { return make_packet(upper, t1()); }
Packet2 ScenarioConfig::lower_packet() const { return make_packet(lower, t1()); }

Superposition2 ScenarioConfig::initial_state() const {
  const double a = std::numbers::sqrt2 / 2;
  Superposition2 psi{{{a, upper_packet()}, {a, lower_packet()}}};
  return normalized(psi, t1());
}

Packet2 ScenarioConfig::exit_packet(Channel c) const {
  if (c == Channel::E) return lower_packet();
  if (c == Channel::F) return upper_packet();
  throw std::invalid_argument("exit_packet: no packet for UNRESOLVED");
}

double ScenarioConfig::trigger_threshold() const {
  if (detector.trigger_threshold) return *detector.trigger_threshold;
  return detector.pointer_center + 0.5 * detector.kick * (t4() - detector.t_int);
}

void validate(const ScenarioConfig& c) {
  auto finite = [](double v, const char* what) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
  };
  for (const auto* p : {&c.upper, &c.lower}) {
    if (!p->center.allFinite() || !p->momentum.allFinite())
      throw ConfigError("packet center and momentum must be finite");
    finite(p->width, "packet width");
    if (p->width <= 0) throw ConfigError("packet width must be positive");
  }
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    finite(c.times[k], "time grid entry");
    if (k > 0 && !(c.times[k] > c.times[k - 1]))
      throw ConfigError("time grid t0..t4 must be strictly increasing");
  }
  const auto& d = c.detector;
  finite(d.kick, "detector.kick");
  finite(d.t_int, "detector.t_int");
  finite(d.pointer_width, "detector.pointer_width");
  finite(d.pointer_center, "detector.pointer_center");
  if (d.pointer_width <= 0) throw ConfigError("detector.pointer_width must be positive");
  if (d.trigger_threshold) finite(*d.trigger_threshold, "detector.trigger_threshold");
  if (d.enabled && !(d.t_int > c.t1() && d.t_int < c.t2()))
    throw ConfigError("detector.t_int must lie strictly between t1 and t2");
  if (c.ensemble.n < 1) throw ConfigError("ensemble.n must be at least 1");
  finite(c.ensemble.tol, "ensemble.tol");
  if (c.ensemble.tol <= 0) throw ConfigError("ensemble.tol must be positive");
  finite(c.histories_tol, "histories_tol");
  finite(c.bridge_tol, "bridge_tol");
  if (c.histories_tol < 0 || c.bridge_tol < 0) throw ConfigError("tolerances must be >= 0");
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

Eigen::Vector2d vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

void read_packet(const json& j, PacketParams& p) {
  if (!j.is_object()) throw ConfigError("packet entry must be an object");
  if (j.contains("center")) p.center = vec2(j["center"]);
  if (j.contains("momentum")) p.momentum = vec2(j["momentum"]);
  p.width = get_or(j, "width", p.width);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
}

} // namespace

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    reject_unknown(j,
                   {"packets", "times", "detector", "ensemble", "histories", "histories_tol",
                    "bridge", "output"},
                   "config");
    ScenarioConfig c = ScenarioConfig::standard();
    if (j.contains("packets")) {
      const auto& p = j["packets"];
      reject_unknown(p, {"width", "speed", "arm_length", "upper", "lower"}, "packets");
      c = ScenarioConfig::symmetric(get_or(p, "width", 1.0), get_or(p, "speed", 5.0),
                                    get_or(p, "arm_length", 8.0));
      if (p.contains("upper")) read_packet(p["upper"], c.upper);
      if (p.contains("lower")) read_packet(p["lower"], c.lower);
    }
    if (j.contains("times")) {
      const auto& t = j["times"];
      if (!t.is_array() || t.size() != 5) throw ConfigError("times must list t0..t4");
      for (std::size_t k = 0; k < 5; ++k) c.times[k] = t[k].get<double>();
    }
    if (j.contains("detector")) {
      const auto& d = j["detector"];
      reject_unknown(d,
                     {"enabled", "kick", "t_int", "pointer_width", "pointer_center",
                      "trigger_threshold"},
                     "detector");
      c.detector.enabled = get_or(d, "enabled", c.detector.enabled);
      c.detector.kick = get_or(d, "kick", c.detector.kick);
      c.detector.t_int = get_or(d, "t_int", c.detector.t_int);
      c.detector.pointer_width = get_or(d, "pointer_width", c.detector.pointer_width);
      c.detector.pointer_center = get_or(d, "pointer_center", c.detector.pointer_center);
      if (d.contains("trigger_threshold") && !d["trigger_threshold"].is_null())
        c.detector.trigger_threshold = d["trigger_threshold"].get<double>();
    }
    if (j.contains("ensemble")) {
      const auto& e = j["ensemble"];
      reject_unknown(e, {"n", "seed", "tol", "keep_paths"}, "ensemble");
      if (e.contains("n")) {
        const auto n = e["n"].get<long long>();
        if (n < 1) throw ConfigError("ensemble.n must be at least 1");
        c.ensemble.n = static_cast<std::size_t>(n);
      }
      c.ensemble.seed = get_or(e, "seed", c.ensemble.seed);
      c.ensemble.tol = get_or(e, "tol", c.ensemble.tol);
      c.ensemble.keep_paths = get_or(e, "keep_paths", c.ensemble.keep_paths);
    }
    if (j.contains("histories")) c.histories = j["histories"];
    c.histories_tol = get_or(j, "histories_tol", c.histories_tol);
    if (j.contains("bridge")) {
      const auto& b = j["bridge"];
      reject_unknown(b, {"tol", "reference"}, "bridge");
      c.bridge_tol = get_or(b, "tol", c.bridge_tol);
      if (b.contains("reference")) c.bridge_reference = b["reference"];
    }
    if (j.contains("output")) c.output_dir = get_or<std::string>(j["output"], "dir", c.output_dir);
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return scenario_from_json(j);
}

json to_json(const ScenarioConfig& c) {
  auto v = [](const Eigen::Vector2d& x) { return json::array({x[0], x[1]}); };
  auto packet = [&](const PacketParams& p) {
    return json{{"center", v(p.center)}, {"momentum", v(p.momentum)}, {"width", p.width}};
  };
  json detector{{"enabled", c.detector.enabled},
                {"kick", c.detector.kick},
                {"t_int", c.detector.t_int},
                {"pointer_width", c.detector.pointer_width},
                {"pointer_center", c.detector.pointer_center},
                {"trigger_threshold", c.trigger_threshold()}};
  return json{{"packets", {{"upper", packet(c.upper)}, {"lower", packet(c.lower)}}},
              {"times", c.times},
              {"detector", detector},
              {"ensemble",
               {{"n", c.ensemble.n},
                {"seed", c.ensemble.seed},
                {"tol", c.ensemble.tol},
                {"keep_paths", c.ensemble.keep_paths}}},
              {"histories", c.histories},
              {"histories_tol", c.histories_tol},
              {"bridge", {{"tol", c.bridge_tol}, {"reference", c.bridge_reference}}},
              {"output", {{"dir", c.output_dir}}}};
}

} // namespace wedge
