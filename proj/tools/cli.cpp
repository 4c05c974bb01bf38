#include "cli.hpp"

#include "wedge/bohm.hpp"
#include "wedge/bridge.hpp"
#include "wedge/detector.hpp"
#include "wedge/families.hpp"
#include "wedge/report.hpp"
#include "wedge/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

namespace wedge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::optional<long long> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "scenario JSON (defaults apply to missing keys)");
  sub->add_option("--n", f.n, "ensemble size");
  sub->add_option("--seed", f.seed, "base RNG seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--tol", f.tol,
                  "integrator tolerance (bohm, detector), consistency tolerance (histories) "
                  "or validation tolerance (bridge)");
}

ScenarioConfig load(const Flags& f) {
  ScenarioConfig s = f.config.empty() ? scenario_from_json(json::object()) : load_scenario(f.config);
  if (f.n) {
    if (*f.n < 1) throw ConfigError("--n must be at least 1");
    s.ensemble.n = static_cast<std::size_t>(*f.n);
  }
  if (f.seed) s.ensemble.seed = *f.seed;
  if (f.out) s.output_dir = *f.out;
  if (f.tol && !(*f.tol > 0)) throw ConfigError("--tol must be positive");
  validate(s);
  return s;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  return dir;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  writer(os);
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void run_bohm(ScenarioConfig s, const Flags& f, std::ostream& out) {
  if (f.tol) s.ensemble.tol = *f.tol;
  s.detector.enabled = false;
  const auto dir = prepare_dir(s.output_dir);
  const auto result = bohm::run_ensemble(s, s.ensemble.n, s.ensemble.seed);
  write_file(dir / "bohm_records.csv", [&](std::ostream& os) { report::write_records(os, s, result); });
  write_file(dir / "bohm_trajectories.csv",
             [&](std::ostream& os) { report::write_trajectories(os, result); });
  const auto summary = report::bohm_summary(s, result);
  write_json(dir / "bohm_summary.json", summary);
  out << "bohm: " << summary["counts"].dump() << " -> " << dir.string() << '\n';
}

void run_detector(ScenarioConfig s, const Flags& f, std::ostream& out) {
  if (f.tol) s.ensemble.tol = *f.tol;
  s.detector.enabled = true;
  auto without = s;
  without.detector.enabled = false;
  const auto dir = prepare_dir(s.output_dir);
  const auto run = detector::run_detector_scenario(s, s.ensemble.n, s.ensemble.seed);
  const auto influence = detector::nonlocal_influence_report(s, run, without, s.ensemble.seed);
  write_file(dir / "detector_records.csv", [&](std::ostream& os) { report::write_records(os, run); });
  write_file(dir / "detector_trajectories.csv",
             [&](std::ostream& os) { report::write_trajectories(os, run); });
  write_file(dir / "detector_influence.csv",
             [&](std::ostream& os) { report::write_influence(os, influence); });
  const auto summary = report::detector_summary(s, run, influence);
  write_json(dir / "detector_summary.json", summary);
  out << "detector: " << summary["counts"].dump() << ", flips " << influence.flips << " -> "
      << dir.string() << '\n';
}

void run_histories(ScenarioConfig s, const Flags& f, std::ostream& out) {
  if (f.tol) s.histories_tol = *f.tol;
  const auto dir = prepare_dir(s.output_dir);
  auto spec = histories::family_from_json(s.histories, s.times);
  const auto result = report::evaluate_histories(std::move(spec), s.histories_tol);
  write_file(dir / "histories_weights.csv", [&](std::ostream& os) { report::write_weights(os, result); });
  write_file(dir / "histories_decoherence.csv",
             [&](std::ostream& os) { report::write_decoherence(os, result); });
  const auto summary = report::histories_summary(result);
  write_json(dir / "histories_summary.json", summary);
  out << "histories: " << summary["weights"].dump() << " -> " << dir.string() << '\n';
}

ScenarioConfig bridge_reference(const ScenarioConfig& s) {
  if (s.bridge_reference.empty()) {
    auto ref = ScenarioConfig::standard();
    ref.detector = s.detector;
    return ref;
  }
  return scenario_from_json(s.bridge_reference);
}

void run_bridge(ScenarioConfig s, const Flags& f, std::ostream& out) {
  if (f.tol) s.bridge_tol = *f.tol;
  s.detector.enabled = true;
  auto reference = bridge_reference(s);
  reference.detector = s.detector;
  const auto dir = prepare_dir(s.output_dir);
  const auto result = bridge::run_bridge(s, reference, s.bridge_tol);
  write_file(dir / "bridge_effective.csv", [&](std::ostream& os) { report::write_effective(os, result); });
  write_json(dir / "bridge_summary.json", report::bridge_summary(result, s.bridge_tol));
  out << "bridge: " << (result.passed ? "pass" : "fail") << ", max deviation "
      << report::fmt(result.max_entry_deviation) << " -> " << dir.string() << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wedge-and-mirrors trajectory, detector and histories runner", "wedge"};
  app.require_subcommand(1);
  Flags flags;
  auto* bohm_cmd = app.add_subcommand("bohm", "detector-free trajectory ensemble");
  auto* det_cmd = app.add_subcommand("detector", "electron + pointer ensemble and influence report");
  auto* hist_cmd = app.add_subcommand("histories", "weights, decoherence and conditionals");
  auto* bridge_cmd = app.add_subcommand("bridge", "effective unitaries against the ideal maps");
  for (auto* sub : {bohm_cmd, det_cmd, hist_cmd, bridge_cmd}) add_flags(sub, flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "wedge: " << e.what() << '\n';
    return config_error;
  }

  try {
    const auto scenario = load(flags);
    if (*bohm_cmd) run_bohm(scenario, flags, out);
    else if (*det_cmd) run_detector(scenario, flags, out);
    else if (*hist_cmd) run_histories(scenario, flags, out);
    else run_bridge(scenario, flags, out);
    return ok;
  } catch (const ConfigError& e) {
    err << "wedge: config error: " << e.what() << '\n';
    return config_error;
  } catch (const histories::FamilyError& e) {
    err << "wedge: config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "wedge: numerical failure: " << e.what() << '\n';
    return numerical_failure;
  }
}

} // namespace wedge::cli
