#include "wedge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace wedge::report {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks)
    out.push_back({{"criterion", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

const char* flag(bool b) { return b ? "true" : "false"; }

const char* side_label(double y) { return y > 0 ? "C" : "D"; }

json counts_json(const std::map<Channel, std::size_t>& counts) {
  json j = json::object();
  for (Channel c : {Channel::E, Channel::F, Channel::Unresolved}) {
    const auto it = counts.find(c);
    j[to_string(c)] = it == counts.end() ? 0 : it->second;
  }
  return j;
}

} // namespace

void write_records(std::ostream& os, const ScenarioConfig& scenario,
                   const bohm::EnsembleResult& result) {
  os << "traj_id,x0,y0,exit,triggered,path_label,crossed_plane\n";
  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    const auto& tr = result.trajectories[i];
    const auto& x0 = tr.points.front();
    const char* label = tr.resolved() ? side_label(tr.point_at(scenario.t2()).y()) : "";
    os << i << ',' << fmt(x0.x()) << ',' << fmt(x0.y()) << ',' << to_string(tr.exit_channel)
       << ",false," << label << ',' << flag(tr.crossed_symmetry_plane) << '\n';
  }
}

void write_records(std::ostream& os, const detector::DetectorRun& run) {
  os << "traj_id,x0,y0,pointer0,exit,triggered,path_label,crossed_plane\n";
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    os << i << ',' << fmt(r.electron_start.x()) << ',' << fmt(r.electron_start.y()) << ','
       << fmt(r.pointer_start) << ',' << to_string(r.exit_channel) << ',' << flag(r.triggered)
       << ',' << detector::to_string(r.electron_path_label) << ',' << flag(r.crossed_plane)
       << '\n';
  }
}

void write_trajectories(std::ostream& os, const bohm::EnsembleResult& result) {
  os << "traj_id,t,x,y\n";
  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    const auto& tr = result.trajectories[i];
    if (tr.times.size() <= 2) continue; // endpoints only: not a kept path
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      os << i << ',' << fmt(tr.times[k]) << ',' << fmt(tr.points[k].x()) << ','
         << fmt(tr.points[k].y()) << '\n';
  }
}

void write_trajectories(std::ostream& os, const detector::DetectorRun& run) {
  os << "traj_id,t,x,y,pointer_y\n";
  for (std::size_t i = 0; i < run.paths.size(); ++i) {
    const auto& p = run.paths[i];
    for (std::size_t k = 0; k < p.times.size(); ++k)
      os << i << ',' << fmt(p.times[k]) << ',' << fmt(p.states[k][0]) << ','
         << fmt(p.states[k][1]) << ',' << fmt(p.states[k][2]) << '\n';
  }
}

void write_influence(std::ostream& os, const detector::InfluenceReport& report) {
  os << "pair_id,path_label,exit_without,exit_with,triggered\n";
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const auto& p = report.pairs[i];
    os << i << ',' << detector::to_string(p.path) << ',' << to_string(p.without_detector) << ','
       << to_string(p.with_detector) << ',' << flag(p.triggered) << '\n';
  }
}

std::vector<Check> bohm_checks(const bohm::EnsembleResult& result) {
  std::size_t resolved = 0, crossings = 0, e = 0, e_from_below = 0;
  for (const auto& tr : result.trajectories) {
    if (!tr.resolved()) continue;
    ++resolved;
    if (tr.crossed_symmetry_plane) ++crossings;
    if (tr.exit_channel == Channel::E) {
      ++e;
      if (!(tr.points.front().y() > 0)) ++e_from_below;
    }
  }
  const double n = static_cast<double>(result.trajectories.size());
  const double e_fraction = n > 0 ? static_cast<double>(e) / n : 0.0;
  return {
      {"no resolved trajectory crosses the symmetry plane", crossings == 0,
       std::to_string(crossings) + " of " + std::to_string(resolved) + " resolved cross"},
      {"channel split 0.5 +- 0.02", std::abs(e_fraction - 0.5) <= 0.02,
       "E fraction " + fmt(e_fraction)},
      {"every E exit started above the plane", e_from_below == 0,
       std::to_string(e_from_below) + " E exits started at y <= 0"},
  };
}

json bohm_summary(const ScenarioConfig& scenario, const bohm::EnsembleResult& result) {
  std::size_t crossings = 0;
  for (const auto& tr : result.trajectories)
    if (tr.crossed_symmetry_plane) ++crossings;
  const auto checks = bohm_checks(result);
  return {{"subcommand", "bohm"},
          {"n", result.trajectories.size()},
          {"seed", result.seed},
          {"counts", counts_json(result.counts)},
          {"plane_crossings", crossings},
          {"scenario", to_json(scenario)},
          {"paper_checks", checks_json(checks)}};
}

std::vector<Check> detector_checks(const ScenarioConfig& scenario, const detector::DetectorRun& run,
                                   const detector::InfluenceReport& influence) {
  std::vector<Check> out;
  std::size_t c = 0, c_bad = 0;
  for (const auto& r : run.records) {
    if (r.electron_path_label != detector::PathLabel::C) continue;
    ++c;
    if (r.triggered || r.exit_channel != Channel::F) ++c_bad;
  }
  out.push_back({"C path records untriggered with exit F", c_bad == 0,
                 std::to_string(c_bad) + " of " + std::to_string(c) + " C records differ"});
  if (scenario.detector.kick == 0.0) {
    out.push_back({"zero kick gives no flips", influence.flips == 0,
                   std::to_string(influence.flips) + " flips"});
  } else {
    out.push_back({"every C path pair flips E to F",
                   influence.c_path > 0 && influence.c_path_e_to_f == influence.c_path,
                   std::to_string(influence.c_path_e_to_f) + " of " +
                       std::to_string(influence.c_path) + " C path pairs flip"});
  }
  return out;
}

json detector_summary(const ScenarioConfig& scenario, const detector::DetectorRun& run,
                      const detector::InfluenceReport& influence) {
  std::map<Channel, std::size_t> counts;
  std::size_t triggered = 0, c_path = 0, remote = 0;
  for (const auto& r : run.records) {
    ++counts[r.exit_channel];
    if (r.triggered) ++triggered;
    if (r.electron_path_label == detector::PathLabel::C) {
      ++c_path;
      if (r.triggered && r.exit_channel == Channel::E) ++remote;
    }
  }
  const auto checks = detector_checks(scenario, run, influence);
  return {{"subcommand", "detector"},
          {"n", run.records.size()},
          {"seed", scenario.ensemble.seed},
          {"counts", counts_json(counts)},
          {"triggered", triggered},
          {"c_path", c_path},
          {"remote_triggers", remote},
          {"trigger_threshold", scenario.trigger_threshold()},
          {"influence",
           {{"pairs", influence.pairs.size()},
            {"flips", influence.flips},
            {"flip_fraction", influence.flip_fraction()},
            {"c_path", influence.c_path},
            {"c_path_e_to_f", influence.c_path_e_to_f},
            {"d_path", influence.d_path}}},
          {"scenario", to_json(scenario)},
          {"paper_checks", checks_json(checks)}};
}

HistoriesResult evaluate_histories(histories::FamilySpec spec, double tol) {
  HistoriesResult r;
  r.spec = std::move(spec);
  const auto& fam = r.spec.family;
  r.consistency = histories::check_consistency(fam, tol);
  r.all_weights = histories::enumerate_and_assign(fam, tol);
  r.decoherence = histories::decoherence_matrix(fam);
  for (const auto& nh : r.spec.named) r.named_weights.emplace_back(nh.name, histories::weight(fam, nh.history));
  for (const auto& q : r.spec.conditionals) {
    if (q.condition_time >= fam.time_count() || q.query_time >= fam.time_count())
      throw histories::FamilyError("conditional '" + q.name + "': time index out of range");
    const auto ci = fam.decompositions[q.condition_time].index_of(q.condition_event);
    const auto qi = fam.decompositions[q.query_time].index_of(q.query_event);
    r.conditionals.emplace_back(
        q.name, histories::conditional(fam, q.condition_time, ci, q.query_time, qi, tol));
  }
  return r;
}

namespace {

const std::map<std::string, double> kExpectedWeights{
    {"Y_cf", 0.5}, {"Y_de", 0.5}, {"Y_ce", 0.0}, {"Y_df", 0.0}};
const std::map<std::string, double> kExpectedConditionals{
    {"P(d2|e4)", 1.0}, {"P(c2|f4)", 1.0}, {"P(c2|e4)", 0.0},
    {"P(d2 D*|e4 D*)", 1.0}, {"P(c2 D|f4 D)", 1.0}};
constexpr double kExact = 1e-12;

} // namespace

std::vector<Check> histories_checks(const HistoriesResult& r) {
  std::vector<Check> out;
  for (const auto& [name, w] : r.named_weights) {
    const auto it = kExpectedWeights.find(name);
    if (it == kExpectedWeights.end()) continue;
    out.push_back({"weight " + name + " = " + fmt(it->second), std::abs(w - it->second) < kExact,
                   "got " + fmt(w)});
  }
  out.push_back({"max off-diagonal |D| < 1e-12", r.consistency.max_offdiag < kExact,
                 "max off-diagonal " + fmt(r.consistency.max_offdiag)});
  for (const auto& [name, p] : r.conditionals) {
    const auto it = kExpectedConditionals.find(name);
    if (it == kExpectedConditionals.end()) continue;
    out.push_back({name + " = " + fmt(it->second), std::abs(p - it->second) < kExact,
                   "got " + fmt(p)});
  }
  return out;
}

json histories_summary(const HistoriesResult& r) {
  const auto& fam = r.spec.family;
  json weights = json::object();
  for (const auto& [name, w] : r.named_weights) weights[name] = w;
  json conditionals = json::object();
  for (const auto& [name, p] : r.conditionals) conditionals[name] = p;
  json nonzero = json::array();
  for (const auto& wh : r.all_weights)
    if (wh.weight > kExact)
      nonzero.push_back({{"history", histories::history_name(fam, wh.history)}, {"weight", wh.weight}});
  return {{"subcommand", "histories"},
          {"dimension", fam.dimension()},
          {"times", fam.grid.times},
          {"history_count", r.all_weights.size()},
          {"weights", weights},
          {"nonzero_histories", nonzero},
          {"consistency",
           {{"consistent", r.consistency.consistent}, {"max_offdiag", r.consistency.max_offdiag}}},
          {"conditionals", conditionals},
          {"paper_checks", checks_json(histories_checks(r))}};
}

void write_weights(std::ostream& os, const HistoriesResult& r) {
  os << "history,weight\n";
  for (const auto& wh : r.all_weights)
    os << '"' << histories::history_name(r.spec.family, wh.history) << "\"," << fmt(wh.weight) << '\n';
}

void write_decoherence(std::ostream& os, const HistoriesResult& r) {
  os << "row,col,re,im\n";
  const auto& d = r.decoherence;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (d(i, j) != std::complex<double>{})
        os << i << ',' << j << ',' << fmt(d(i, j).real()) << ',' << fmt(d(i, j).imag()) << '\n';
}

std::vector<Check> bridge_checks(const bridge::BridgeReport& report, double tol) {
  std::vector<Check> out;
  for (const auto& ir : report.intervals)
    out.push_back({ir.name + " matches ideal", ir.validation.passed,
                   "max deviation " + fmt(ir.validation.max_deviation)});
  out.push_back({"effective weights match ideal weights", report.max_weight_deviation < tol,
                 "max deviation " + fmt(report.max_weight_deviation)});
  return out;
}

json bridge_summary(const bridge::BridgeReport& report, double tol) {
  json intervals = json::array();
  for (const auto& ir : report.intervals) {
    intervals.push_back({{"name", ir.name},
                         {"t_a", ir.effective.interval.first},
                         {"t_b", ir.effective.interval.second},
                         {"from", ir.effective.from.labels()},
                         {"to", ir.effective.basis.labels()},
                         {"compared_columns", ir.compared_columns},
                         {"max_deviation", ir.validation.max_deviation},
                         {"unitarity_defect", ir.compared_defect},
                         {"passed", ir.validation.passed}});
  }
  json weights = json::array();
  for (const auto& w : report.weights)
    weights.push_back({{"family", w.family}, {"history", w.history}, {"ideal", w.ideal},
                       {"effective", w.effective}});
  return {{"subcommand", "bridge"},
          {"tol", tol},
          {"passed", report.passed},
          {"max_entry_deviation", report.max_entry_deviation},
          {"max_weight_deviation", report.max_weight_deviation},
          {"intervals", intervals},
          {"weights", weights},
          {"paper_checks", checks_json(bridge_checks(report, tol))}};
}

void write_effective(std::ostream& os, const bridge::BridgeReport& report) {
  os << "interval,row,col,re,im,compared\n";
  for (const auto& ir : report.intervals) {
    const auto& m = ir.effective.matrix;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const bool compared =
          std::find(ir.compared_columns.begin(), ir.compared_columns.end(), j) != ir.compared_columns.end();
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        os << '"' << ir.name << "\"," << ir.effective.basis.labels()[static_cast<std::size_t>(i)] << ','
           << ir.effective.from.labels()[static_cast<std::size_t>(j)] << ',' << fmt(m(i, j).real())
           << ',' << fmt(m(i, j).imag()) << ',' << flag(compared) << '\n';
    }
  }
}

} // namespace wedge::report
