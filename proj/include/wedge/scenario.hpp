// Physical and numerical parameters of one wedge-and-mirrors run.
//
// Geometry: the symmetry plane is the x-axis. At t1 the upper packet (c path)
// sits above the plane and heads down-right towards the crossing region J at
// the origin; the lower packet (d path) is its mirror image. Reflection at the
// wedge and the mirrors is not simulated; the run starts from the two packets.
#pragma once

#include "wedge/packets.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace wedge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { E, F, Unresolved };

const char* to_string(Channel c);

struct PacketParams {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d momentum = Eigen::Vector2d::Zero();
  double width = 1.0;
};

struct DetectorParams {
  bool enabled = false;
  double kick = 20.0;          // pointer momentum transferred by a d-side electron
  double t_int = 0.2;          // impulsive interaction time, inside (t1, t2)
  double pointer_width = 1.0;
  double pointer_center = 0.0;
  std::optional<double> trigger_threshold; // default: half the asymptotic branch separation
};

struct EnsembleParams {
  std::size_t n = 10000;
  std::uint64_t seed = 1999;
  double tol = 1e-8;
  std::size_t keep_paths = 32; // trajectories whose every accepted step is recorded
};

struct ScenarioConfig {
  PacketParams upper; // c path
  PacketParams lower; // d path
  std::array<double, 5> times{-1.0, 0.0, 0.4, 0.8, 3.2};
  DetectorParams detector;
  EnsembleParams ensemble;
  double histories_tol = 1e-10;
  double bridge_tol = 1e-4;
  nlohmann::json histories = "default-paper-family";
  /// Scenario whose packets define the labeled basis states for the bridge.
  /// Empty means the scenario labels itself.
  nlohmann::json bridge_reference = nlohmann::json::object();
  std::string output_dir = "out";

  /// Mirror-symmetric pair: centers (-L, +-L)/sqrt 2, momenta speed (1, -+1)/sqrt 2.
  static ScenarioConfig symmetric(double width, double speed, double arm_length);
  static ScenarioConfig standard() { return symmetric(1.0, 5.0, 8.0); }

  double t1() const { return times[1]; }
  double t2() const { return times[2]; }
  double t3() const { return times[3]; }
  double t4() const { return times[4]; }

  Packet2 upper_packet() const;
  Packet2 lower_packet() const;
  /// (|c> + |d>) / sqrt 2 at t1, renormalized for the residual packet overlap.
  Superposition2 initial_state() const;
  /// Packet occupying the given output channel at late times: E is fed by d, F by c.
  Packet2 exit_packet(Channel c) const;

  double trigger_threshold() const;
};

void validate(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& config);

} // namespace wedge
