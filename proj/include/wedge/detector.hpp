// Electron + detector-pointer dynamics.
//
// The configuration-space wave function is a sum of product branches
//   Psi(x, y, t) = sum_i a_i g_i(x, t) P_i(y, t)
// with g_i a 2-D electron packet and P_i a 1-D pointer packet. The detector
// interacts once, impulsively, at t_int: branches whose electron sits below
// the symmetry plane have their pointer momentum raised by `kick`.
#pragma once

#include "wedge/bohm.hpp"
#include "wedge/ode.hpp"
#include "wedge/packets.hpp"
#include "wedge/scenario.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wedge::detector {

using PointerPacket = GaussianPacket<double, 1>;

template <typename Real>
struct BranchState {
  struct Branch {
    std::complex<Real> amplitude;
    GaussianPacket<Real, 2> electron;
    GaussianPacket<Real, 1> pointer;
  };
  std::vector<Branch> branches;
};

class BranchesNotSeparated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Real>
std::complex<Real> evaluate(const BranchState<Real>& state, const RealVector<Real, 2>& x, Real y,
                            Real t) {
  std::complex<Real> sum{0};
  const RealVector<Real, 1> yv(y);
  for (const auto& b : state.branches)
    sum += b.amplitude * evolve_packet(b.electron, t)(x) * evolve_packet(b.pointer, t)(yv);
  return sum;
}

template <typename Real>
struct ConfigGradient {
  std::complex<Real> value;
  ComplexVector<Real, 2> electron; // d/dx, d/dy of the electron coordinates
  std::complex<Real> pointer;
};

template <typename Real>
ConfigGradient<Real> value_and_gradient(const BranchState<Real>& state,
                                        const RealVector<Real, 2>& x, Real y, Real t) {
  ConfigGradient<Real> out{std::complex<Real>{0}, ComplexVector<Real, 2>::Zero(),
                           std::complex<Real>{0}};
  const RealVector<Real, 1> yv(y);
  for (const auto& b : state.branches) {
    const auto g = evolve_packet(b.electron, t);
    const auto p = evolve_packet(b.pointer, t);
    const std::complex<Real> v = b.amplitude * std::exp(g.log_value(x) + p.log_value(yv));
    out.value += v;
    out.electron += v * g.log_gradient(x);
    out.pointer += v * p.log_gradient(yv)[0];
  }
  return out;
}

template <typename Real>
std::complex<Real> inner(const BranchState<Real>& a, const BranchState<Real>& b, Real t) {
  std::complex<Real> sum{0};
  for (const auto& u : a.branches)
    for (const auto& v : b.branches)
      sum += std::conj(u.amplitude) * v.amplitude * overlap(u.electron, v.electron, t) *
             overlap(u.pointer, v.pointer, t);
  return sum;
}

template <typename Real>
Real norm_squared(const BranchState<Real>& state, Real t) {
  return inner(state, state, t).real();
}

/// The pointer packet after multiplication by exp(i kick y) at t_int, written
/// as a packet with the same birth time: for t >= t_int it equals the freely
/// evolved kicked state exactly.
template <typename Real>
GaussianPacket<Real, 1> boost_pointer(const GaussianPacket<Real, 1>& p, Real kick, Real t_int) {
  const Real tau = t_int - p.birth_time;
  GaussianPacket<Real, 1> out = p;
  out.center[0] = p.center[0] - kick * tau;
  out.momentum[0] = p.momentum[0] + kick;
  out.global_phase = p.global_phase + kick * p.center[0] - kick * kick * tau / 2;
  return out;
}

/// Impulsive von Neumann coupling at t_int. Branches whose electron packet is
/// below the plane at t_int get their pointer boosted by `kick`.
template <typename Real>
BranchState<Real> apply_coupling(const BranchState<Real>& state, Real kick, Real t_int,
                                 Real separation_tol = Real(1e-8)) {
  std::vector<int> side(state.branches.size());
  for (std::size_t i = 0; i < state.branches.size(); ++i) {
    const auto& b = state.branches[i];
    if (t_int < b.electron.birth_time || t_int < b.pointer.birth_time)
      throw std::invalid_argument("apply_coupling: interaction precedes branch birth");
    const Real y = evolve_packet(b.electron, t_int).center[1];
    if (y == 0) throw BranchesNotSeparated("apply_coupling: electron branch centered on the plane");
    side[i] = y > 0 ? 1 : -1;
  }
  for (std::size_t i = 0; i < side.size(); ++i)
    for (std::size_t j = i + 1; j < side.size(); ++j)
      if (side[i] != side[j] &&
          std::abs(overlap(state.branches[i].electron, state.branches[j].electron, t_int)) >
              separation_tol)
        throw BranchesNotSeparated("apply_coupling: electron branches overlap across the plane");
  if (kick == 0) return state;
  BranchState<Real> out = state;
  for (std::size_t i = 0; i < side.size(); ++i)
    if (side[i] < 0) out.branches[i].pointer = boost_pointer(state.branches[i].pointer, kick, t_int);
  return out;
}

struct ConfigVelocity {
  Eigen::Vector2d electron;
  double pointer;
};

std::optional<ConfigVelocity> try_velocity_config(const BranchState<double>& state,
                                                  const Eigen::Vector2d& x, double y, double t);
/// (Im grad_x Psi / Psi, Im d_y Psi / Psi). Throws bohm::NodeProximity near nodes.
ConfigVelocity velocity_config(const BranchState<double>& state, const Eigen::Vector2d& x,
                               double y, double t);

/// Wave function before and after the interaction.
struct DetectorModel {
  BranchState<double> before;
  BranchState<double> after;
  double t_int = 0;

  const BranchState<double>& at(double t) const { return t < t_int ? before : after; }
};

/// (c D + d D) / sqrt 2 at t1, coupled at t_int. A disabled detector gives
/// after == before.
DetectorModel make_model(const ScenarioConfig& scenario);

enum class PathLabel { C, D };
const char* to_string(PathLabel p);

struct DetectorRunRecord {
  Eigen::Vector2d electron_start = Eigen::Vector2d::Zero();
  double pointer_start = 0;
  Channel exit_channel = Channel::Unresolved;
  bool triggered = false;
  PathLabel electron_path_label = PathLabel::C; // side of the plane at t2
  bool crossed_plane = false;
  Eigen::Vector2d electron_end = Eigen::Vector2d::Zero();
  double pointer_end = 0;
  PathStatus status = PathStatus::ok;
};

struct DetectorRun {
  std::vector<DetectorRunRecord> records;
  /// Dense configuration paths (x, y, pointer) for the first keep_paths records.
  std::vector<Path<3>> paths;
};

/// Integrates one configuration trajectory from t1 to t4.
Path<3> integrate_configuration(const DetectorModel& model, const ScenarioConfig& scenario,
                                const Eigen::Vector3d& start, bool dense);

/// One draw from |Psi(., ., t)|^2. For product states the electron coordinate
/// uses `electron_rng` exactly as bohm::draw_position does, so detector runs
/// pair one-to-one with detector-free runs.
Eigen::Vector3d draw_configuration(const BranchState<double>& state, double t,
                                   std::mt19937_64& electron_rng, std::mt19937_64& pointer_rng);

DetectorRun run_detector_scenario(const ScenarioConfig& scenario, std::size_t n,
                                  std::uint64_t seed);

/// Runs from given start configurations (x, y, pointer).
DetectorRun run_detector_from(const ScenarioConfig& scenario,
                              std::span<const Eigen::Vector3d> starts);

struct InfluencePair {
  PathLabel path = PathLabel::C;
  Channel with_detector = Channel::Unresolved;
  Channel without_detector = Channel::Unresolved;
  bool triggered = false;
};

struct InfluenceReport {
  std::vector<InfluencePair> pairs;
  std::size_t flips = 0;            // exit differs between the paired runs
  std::size_t c_path = 0;
  std::size_t c_path_e_to_f = 0;    // C_PATH pairs exiting E without and F with the detector
  std::size_t d_path = 0;
  double flip_fraction() const {
    return pairs.empty() ? 0.0 : static_cast<double>(flips) / static_cast<double>(pairs.size());
  }
};

/// Pairs runs of two scenarios that differ only in the detector coupling by
/// identical electron draws and compares exit channels.
InfluenceReport nonlocal_influence_report(const ScenarioConfig& with_detector,
                                          const ScenarioConfig& without_detector, std::size_t n,
                                          std::uint64_t seed);
/// Same, reusing an existing run of `with_detector` drawn with `seed`.
InfluenceReport nonlocal_influence_report(const ScenarioConfig& with_detector,
                                          const DetectorRun& with_run,
                                          const ScenarioConfig& without_detector,
                                          std::uint64_t seed);

struct SweepRow {
  double kick = 0;
  std::size_t records = 0;
  std::size_t remote_triggers = 0; // path C, triggered, exit E
  std::size_t c_path = 0;
  double remote_fraction() const {
    return records ? static_cast<double>(remote_triggers) / static_cast<double>(records) : 0.0;
  }
};

/// For each kick, runs every sampled electron start against every pointer start in the grid.
std::vector<SweepRow> remote_trigger_sweep(const ScenarioConfig& base,
                                           std::span<const double> kicks,
                                           std::span<const double> pointer_grid,
                                           std::size_t n_electrons, std::uint64_t seed,
                                           std::vector<DetectorRunRecord>* all_records = nullptr);

} // namespace wedge::detector
