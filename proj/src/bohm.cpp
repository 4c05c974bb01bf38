#include "wedge/bohm.hpp"

#include "wedge/parallel.hpp"
#include "wedge/rng.hpp"

#include <algorithm>
#include <cmath>

namespace wedge::bohm {

Eigen::Vector2d Trajectory::point_at(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t)
    throw std::out_of_range("Trajectory::point_at: time not recorded");
  return points[static_cast<std::size_t>(it - times.begin())];
}

std::optional<Eigen::Vector2d> try_velocity(const Superposition2& psi, const Eigen::Vector2d& x,
                                            double t) {
  const auto vg = value_and_gradient(psi, x, t);
  const double density = std::norm(vg.value);
  if (!(density >= node_floor)) return std::nullopt;
  const std::complex<double> inv = 1.0 / vg.value;
  return Eigen::Vector2d((vg.gradient[0] * inv).imag(), (vg.gradient[1] * inv).imag());
}

Eigen::Vector2d velocity(const Superposition2& psi, const Eigen::Vector2d& x, double t) {
  if (auto v = try_velocity(psi, x, t)) return *v;
  throw NodeProximity("guidance velocity requested at a node of the wave function");
}

Trajectory integrate_trajectory(const Superposition2& psi, const Eigen::Vector2d& x0,
                                double t_start, double t_end, double tol,
                                std::span<const double> stops, bool dense) {
  if (!(t_start < t_end)) throw std::invalid_argument("integrate_trajectory: t_start >= t_end");
  IntegratorOptions opt;
  opt.tol = tol;
  opt.dense = dense;
  DormandPrince<2> solver(t_start, x0, opt);
  auto field = [&psi](double t, const Eigen::Vector2d& x) { return try_velocity(psi, x, t); };

  std::vector<double> ends(stops.begin(), stops.end());
  ends.erase(std::remove_if(ends.begin(), ends.end(),
                            [&](double s) { return !(s > t_start && s < t_end); }),
             ends.end());
  std::sort(ends.begin(), ends.end());
  ends.push_back(t_end);
  for (double end : ends)
    if (!solver.advance_to(field, end)) break;

  auto path = solver.release();
  Trajectory traj;
  traj.times = std::move(path.times);
  traj.points.assign(path.states.begin(), path.states.end());
  traj.crossed_symmetry_plane = path.crossed_plane;
  traj.crossing_time = path.first_crossing;
  traj.status = path.status;
  return traj;
}

Eigen::Vector2d draw_position(const Superposition2& psi, double t, std::mt19937_64& rng) {
  struct Branch {
    double weight;
    EvolvedPacket<double, 2> packet;
  };
  std::vector<Branch> branches;
  std::vector<double> weights;
  for (const auto& term : psi.terms) {
    branches.push_back({std::norm(term.amplitude), evolve_packet(term.packet, t)});
    weights.push_back(branches.back().weight);
  }
  const double bound = static_cast<double>(branches.size());
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  while (true) {
    const auto& b = branches[pick(rng)];
    const double s = b.packet.position_stddev();
    const double nx = normal(rng);
    const double ny = normal(rng);
    const Eigen::Vector2d x = b.packet.center + s * Eigen::Vector2d(nx, ny);
    std::complex<double> value{0};
    double envelope = 0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const std::complex<double> v = psi.terms[i].amplitude * branches[i].packet(x);
      value += v;
      envelope += std::norm(v);
    }
    // |sum v_i|^2 <= K sum |v_i|^2 bounds the target by the proposal.
    if (uniform(rng) * bound * envelope <= std::norm(value)) return x;
  }
}

std::vector<Eigen::Vector2d> sample_initial(const Superposition2& psi, double t, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<Eigen::Vector2d> out(n);
  parallel_for(n, [&](std::size_t i) {
    auto rng = stream_rng(seed, i, Stream::electron);
    out[i] = draw_position(psi, t, rng);
  });
  return out;
}

Channel classify_point(const ScenarioConfig& scenario, const Eigen::Vector2d& x,
                       double normal_velocity) {
  const double t4 = scenario.t4();
  const auto e = evolve_packet(scenario.exit_packet(Channel::E), t4);
  const auto f = evolve_packet(scenario.exit_packet(Channel::F), t4);
  if ((x - e.center).norm() <= 4 * e.position_stddev() && normal_velocity > 0) return Channel::E;
  if ((x - f.center).norm() <= 4 * f.position_stddev() && normal_velocity < 0) return Channel::F;
  return Channel::Unresolved;
}

Channel classify_exit(const Trajectory& trajectory, const ScenarioConfig& scenario) {
  if (!trajectory.resolved() || trajectory.times.empty() ||
      trajectory.times.back() != scenario.t4())
    return Channel::Unresolved;
  const auto& x = trajectory.points.back();
  const auto v = try_velocity(scenario.initial_state(), x, scenario.t4());
  if (!v) return Channel::Unresolved;
  return classify_point(scenario, x, (*v)[1]);
}

EnsembleResult run_from(const ScenarioConfig& scenario, std::span<const Eigen::Vector2d> starts,
                        std::uint64_t seed) {
  const auto psi = scenario.initial_state();
  const std::array<double, 2> stops{scenario.t2(), scenario.t3()};
  EnsembleResult result;
  result.seed = seed;
  result.trajectories.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    auto traj = integrate_trajectory(psi, starts[i], scenario.t1(), scenario.t4(),
                                     scenario.ensemble.tol, stops,
                                     i < scenario.ensemble.keep_paths);
    traj.exit_channel = classify_exit(traj, scenario);
    result.trajectories[i] = std::move(traj);
  });
  for (auto c : {Channel::E, Channel::F, Channel::Unresolved}) result.counts[c] = 0;
  for (const auto& traj : result.trajectories) ++result.counts[traj.exit_channel];
  return result;
}

EnsembleResult run_ensemble(const ScenarioConfig& scenario, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("run_ensemble: n must be at least 1");
  const auto starts = sample_initial(scenario.initial_state(), scenario.t1(), n, seed);
  return run_from(scenario, starts, seed);
}

} // namespace wedge::bohm
