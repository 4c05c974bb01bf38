#include "wedge/detector.hpp"

#include "wedge/parallel.hpp"
#include "wedge/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace wedge::detector {

const char* to_string(PathLabel p) { return p == PathLabel::C ? "C" : "D"; }

std::optional<ConfigVelocity> try_velocity_config(const BranchState<double>& state,
                                                  const Eigen::Vector2d& x, double y, double t) {
  const auto g = value_and_gradient(state, x, y, t);
  if (!(std::norm(g.value) >= bohm::node_floor)) return std::nullopt;
  const std::complex<double> inv = 1.0 / g.value;
  return ConfigVelocity{Eigen::Vector2d((g.electron[0] * inv).imag(), (g.electron[1] * inv).imag()),
                        (g.pointer * inv).imag()};
}

ConfigVelocity velocity_config(const BranchState<double>& state, const Eigen::Vector2d& x,
                               double y, double t) {
  if (auto v = try_velocity_config(state, x, y, t)) return *v;
  throw bohm::NodeProximity("configuration velocity requested at a node of the wave function");
}

DetectorModel make_model(const ScenarioConfig& scenario) {
  PointerPacket pointer;
  pointer.center[0] = scenario.detector.pointer_center;
  pointer.momentum[0] = 0;
  pointer.width = scenario.detector.pointer_width;
  pointer.birth_time = scenario.t1();

  const auto electron = scenario.initial_state();
  DetectorModel model;
  for (const auto& term : electron.terms)
    model.before.branches.push_back({term.amplitude, term.packet, pointer});
  model.t_int = scenario.detector.t_int;
  const double kick = scenario.detector.enabled ? scenario.detector.kick : 0.0;
  model.after = apply_coupling(model.before, kick, model.t_int);
  return model;
}

Path<3> integrate_configuration(const DetectorModel& model, const ScenarioConfig& scenario,
                                const Eigen::Vector3d& start, bool dense) {
  IntegratorOptions opt;
  opt.tol = scenario.ensemble.tol;
  opt.dense = dense;
  DormandPrince<3> solver(scenario.t1(), start, opt);

  auto field_for = [](const BranchState<double>& state) {
    return [&state](double t, const Eigen::Vector3d& q) -> std::optional<Eigen::Vector3d> {
      const auto v = try_velocity_config(state, q.head<2>(), q[2], t);
      if (!v) return std::nullopt;
      return Eigen::Vector3d(v->electron[0], v->electron[1], v->pointer);
    };
  };
  auto before = field_for(model.before);
  auto after = field_for(model.after);

  std::vector<double> ends{scenario.t2(), scenario.t3(), scenario.t4()};
  if (model.t_int > scenario.t1() && model.t_int < scenario.t4()) ends.push_back(model.t_int);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  for (double end : ends) {
    const bool ok = end <= model.t_int ? solver.advance_to(before, end)
                                       : solver.advance_to(after, end);
    if (!ok) break;
  }
  return solver.release();
}

Eigen::Vector3d draw_configuration(const BranchState<double>& state, double t,
                                   std::mt19937_64& electron_rng, std::mt19937_64& pointer_rng) {
  const auto& first = state.branches.front().pointer;
  const bool product = std::all_of(state.branches.begin(), state.branches.end(), [&](const auto& b) {
    return b.pointer.center == first.center && b.pointer.momentum == first.momentum &&
           b.pointer.width == first.width && b.pointer.global_phase == first.global_phase &&
           b.pointer.birth_time == first.birth_time;
  });
  std::normal_distribution<double> normal;
  if (product) {
    Superposition2 electron;
    for (const auto& b : state.branches) electron.terms.push_back({b.amplitude, b.electron});
    const Eigen::Vector2d x = bohm::draw_position(electron, t, electron_rng);
    const auto p = evolve_packet(first, t);
    const double y = p.center[0] + p.position_stddev() * normal(pointer_rng);
    return {x[0], x[1], y};
  }

  // Joint rejection sampling over product branches, same bound as the 2-D case.
  struct Frozen {
    EvolvedPacket<double, 2> electron;
    EvolvedPacket<double, 1> pointer;
  };
  std::vector<Frozen> frozen;
  std::vector<double> weights;
  for (const auto& b : state.branches) {
    frozen.push_back({evolve_packet(b.electron, t), evolve_packet(b.pointer, t)});
    weights.push_back(std::norm(b.amplitude));
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> uniform;
  const double bound = static_cast<double>(frozen.size());
  while (true) {
    const auto& f = frozen[pick(electron_rng)];
    const double nx = normal(electron_rng);
    const double ny = normal(electron_rng);
    const double np = normal(electron_rng);
    const Eigen::Vector2d x = f.electron.center + f.electron.position_stddev() * Eigen::Vector2d(nx, ny);
    const Eigen::Matrix<double, 1, 1> y(f.pointer.center[0] + f.pointer.position_stddev() * np);
    std::complex<double> value{0};
    double envelope = 0;
    for (std::size_t i = 0; i < frozen.size(); ++i) {
      const std::complex<double> v = state.branches[i].amplitude *
                                     std::exp(frozen[i].electron.log_value(x) +
                                              frozen[i].pointer.log_value(y));
      value += v;
      envelope += std::norm(v);
    }
    if (uniform(electron_rng) * bound * envelope <= std::norm(value)) return {x[0], x[1], y[0]};
  }
}

namespace {

DetectorRunRecord make_record(const DetectorModel& model, const ScenarioConfig& scenario,
                              const Eigen::Vector3d& start, const Path<3>& path) {
  DetectorRunRecord r;
  r.electron_start = start.head<2>();
  r.pointer_start = start[2];
  r.crossed_plane = path.crossed_plane;
  r.status = path.status;
  const auto& end = path.states.back();
  r.electron_end = end.head<2>();
  r.pointer_end = end[2];

  const auto at_t2 = std::lower_bound(path.times.begin(), path.times.end(), scenario.t2());
  if (at_t2 != path.times.end() && *at_t2 == scenario.t2()) {
    const auto& q = path.states[static_cast<std::size_t>(at_t2 - path.times.begin())];
    r.electron_path_label = q[1] > 0 ? PathLabel::C : PathLabel::D;
  }
  if (path.status != PathStatus::ok || path.times.back() != scenario.t4()) return r;

  r.triggered = r.pointer_end > scenario.trigger_threshold();
  const auto v = try_velocity_config(model.after, r.electron_end, r.pointer_end, scenario.t4());
  if (v) r.exit_channel = bohm::classify_point(scenario, r.electron_end, v->electron[1]);
  return r;
}

} // namespace

DetectorRun run_detector_from(const ScenarioConfig& scenario,
                              std::span<const Eigen::Vector3d> starts) {
  const auto model = make_model(scenario);
  DetectorRun run;
  run.records.resize(starts.size());
  const std::size_t kept = std::min(starts.size(), scenario.ensemble.keep_paths);
  run.paths.resize(kept);
  parallel_for(starts.size(), [&](std::size_t i) {
    auto path = integrate_configuration(model, scenario, starts[i], i < kept);
    run.records[i] = make_record(model, scenario, starts[i], path);
    if (i < kept) run.paths[i] = std::move(path);
  });
  return run;
}

DetectorRun run_detector_scenario(const ScenarioConfig& scenario, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("run_detector_scenario: n must be at least 1");
  const auto model = make_model(scenario);
  if (!(model.t_int > scenario.t1()))
    throw std::invalid_argument("run_detector_scenario: sampling must precede the interaction");
  std::vector<Eigen::Vector3d> starts(n);
  parallel_for(n, [&](std::size_t i) {
    auto e = stream_rng(seed, i, Stream::electron);
    auto p = stream_rng(seed, i, Stream::pointer);
    starts[i] = draw_configuration(model.before, scenario.t1(), e, p);
  });
  return run_detector_from(scenario, starts);
}

namespace {

struct ExitSummary {
  std::vector<Channel> exits;
  std::vector<PathLabel> paths;
  std::vector<bool> triggered;
};

ExitSummary run_any(const ScenarioConfig& scenario, std::size_t n, std::uint64_t seed) {
  ExitSummary s;
  if (scenario.detector.enabled) {
    const auto run = run_detector_scenario(scenario, n, seed);
    for (const auto& r : run.records) {
      s.exits.push_back(r.exit_channel);
      s.paths.push_back(r.electron_path_label);
      s.triggered.push_back(r.triggered);
    }
  } else {
    auto quiet = scenario;
    quiet.ensemble.keep_paths = 0;
    const auto run = bohm::run_ensemble(quiet, n, seed);
    for (const auto& t : run.trajectories) {
      s.exits.push_back(t.exit_channel);
      s.paths.push_back(t.point_at(scenario.t2())[1] > 0 ? PathLabel::C : PathLabel::D);
      s.triggered.push_back(false);
    }
  }
  return s;
}

} // namespace

namespace {

void require_same_geometry(const ScenarioConfig& a, const ScenarioConfig& b) {
  if (a.upper.center != b.upper.center || a.upper.momentum != b.upper.momentum ||
      a.upper.width != b.upper.width || a.lower.center != b.lower.center ||
      a.lower.momentum != b.lower.momentum || a.lower.width != b.lower.width ||
      a.times != b.times)
    throw std::invalid_argument(
        "nonlocal_influence_report: scenarios must differ only in the detector coupling");
}

InfluenceReport pair_up(const ExitSummary& with, const ExitSummary& without) {
  const std::size_t n = with.exits.size();
  InfluenceReport report;
  report.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = report.pairs[i];
    p.path = with.paths[i];
    p.with_detector = with.exits[i];
    p.without_detector = without.exits[i];
    p.triggered = with.triggered[i];
    if (p.with_detector != p.without_detector) ++report.flips;
    if (p.path == PathLabel::C) {
      ++report.c_path;
      if (p.without_detector == Channel::E && p.with_detector == Channel::F)
        ++report.c_path_e_to_f;
    } else {
      ++report.d_path;
    }
  }
  return report;
}

} // namespace

InfluenceReport nonlocal_influence_report(const ScenarioConfig& with_detector,
                                          const ScenarioConfig& without_detector, std::size_t n,
                                          std::uint64_t seed) {
  require_same_geometry(with_detector, without_detector);
  auto quiet = with_detector;
  quiet.ensemble.keep_paths = 0;
  return pair_up(run_any(quiet, n, seed), run_any(without_detector, n, seed));
}

InfluenceReport nonlocal_influence_report(const ScenarioConfig& with_detector,
                                          const DetectorRun& with_run,
                                          const ScenarioConfig& without_detector,
                                          std::uint64_t seed) {
  require_same_geometry(with_detector, without_detector);
  ExitSummary with;
  for (const auto& r : with_run.records) {
    with.exits.push_back(r.exit_channel);
    with.paths.push_back(r.electron_path_label);
    with.triggered.push_back(r.triggered);
  }
  return pair_up(with, run_any(without_detector, with_run.records.size(), seed));
}

std::vector<SweepRow> remote_trigger_sweep(const ScenarioConfig& base,
                                           std::span<const double> kicks,
                                           std::span<const double> pointer_grid,
                                           std::size_t n_electrons, std::uint64_t seed,
                                           std::vector<DetectorRunRecord>* all_records) {
  const auto electrons = bohm::sample_initial(base.initial_state(), base.t1(), n_electrons, seed);
  std::vector<Eigen::Vector3d> starts;
  starts.reserve(electrons.size() * pointer_grid.size());
  for (const auto& x : electrons)
    for (double y : pointer_grid) starts.emplace_back(x[0], x[1], y);

  std::vector<SweepRow> rows;
  for (double kick : kicks) {
    auto scenario = base;
    scenario.detector.enabled = true;
    scenario.detector.kick = kick;
    scenario.ensemble.keep_paths = 0;
    const auto run = run_detector_from(scenario, starts);
    SweepRow row;
    row.kick = kick;
    row.records = run.records.size();
    for (const auto& r : run.records) {
      if (r.electron_path_label == PathLabel::C) {
        ++row.c_path;
        if (r.triggered && r.exit_channel == Channel::E) ++row.remote_triggers;
      }
    }
    if (all_records) all_records->insert(all_records->end(), run.records.begin(), run.records.end());
    rows.push_back(row);
  }
  return rows;
}

} // namespace wedge::detector
