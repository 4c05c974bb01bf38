// Single-particle pilot-wave dynamics for the detector-free experiment.
#pragma once

#include "wedge/ode.hpp"
#include "wedge/packets.hpp"
#include "wedge/scenario.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace wedge::bohm {

/// |psi|^2 below which the guidance velocity is not evaluated.
inline constexpr double node_floor = 1e-30;

class NodeProximity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> points;
  Channel exit_channel = Channel::Unresolved;
  bool crossed_symmetry_plane = false;
  std::optional<double> crossing_time;
  PathStatus status = PathStatus::ok;

  bool resolved() const { return status == PathStatus::ok; }
  /// Position at a recorded time (segment ends are always recorded).
  Eigen::Vector2d point_at(double t) const;
};

struct EnsembleResult {
  std::vector<Trajectory> trajectories;
  std::uint64_t seed = 0;
  std::map<Channel, std::size_t> counts;
};

/// Guidance velocity Im(grad psi / psi). Throws NodeProximity when |psi|^2 < node_floor.
Eigen::Vector2d velocity(const Superposition2& psi, const Eigen::Vector2d& x, double t);
std::optional<Eigen::Vector2d> try_velocity(const Superposition2& psi, const Eigen::Vector2d& x,
                                            double t);

/// Integrates the guidance equation from t_start to t_end. `stops` are extra
/// times (inside the interval) at which the position is always recorded.
Trajectory integrate_trajectory(const Superposition2& psi, const Eigen::Vector2d& x0,
                                double t_start, double t_end, double tol,
                                std::span<const double> stops = {}, bool dense = true);

/// One draw from |psi(., t)|^2: packet chosen by |amplitude|^2, Gaussian draw
/// from that packet, interference corrected by rejection.
Eigen::Vector2d draw_position(const Superposition2& psi, double t, std::mt19937_64& rng);

/// n draws; draw i uses the stream keyed by (seed, i).
std::vector<Eigen::Vector2d> sample_initial(const Superposition2& psi, double t, std::size_t n,
                                            std::uint64_t seed);

/// E inside 4 sigma(t4) of the E packet moving away from the plane upwards, F mirrored.
Channel classify_point(const ScenarioConfig& scenario, const Eigen::Vector2d& x,
                       double normal_velocity);
Channel classify_exit(const Trajectory& trajectory, const ScenarioConfig& scenario);

EnsembleResult run_ensemble(const ScenarioConfig& scenario, std::size_t n, std::uint64_t seed);

/// Ensemble with explicitly given start points (used for pairing with detector runs).
EnsembleResult run_from(const ScenarioConfig& scenario, std::span<const Eigen::Vector2d> starts,
                        std::uint64_t seed);

} // namespace wedge::bohm
