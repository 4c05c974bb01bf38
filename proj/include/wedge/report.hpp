// CSV and JSON emitters shared by the CLI and the acceptance suite.
//
// CSV numbers use %.17g so reruns with the same seed are byte-identical.
#pragma once

#include "wedge/bohm.hpp"
#include "wedge/bridge.hpp"
#include "wedge/detector.hpp"
#include "wedge/families.hpp"
#include "wedge/scenario.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace wedge::report {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

nlohmann::json checks_json(const std::vector<Check>& checks);
bool all_passed(const std::vector<Check>& checks);

std::string fmt(double v);

// traj_id,x0,y0,exit,triggered,path_label,crossed_plane
void write_records(std::ostream& os, const ScenarioConfig& scenario,
                   const bohm::EnsembleResult& result);
// traj_id,x0,y0,pointer0,exit,triggered,path_label,crossed_plane
void write_records(std::ostream& os, const detector::DetectorRun& run);
// traj_id,t,x,y
void write_trajectories(std::ostream& os, const bohm::EnsembleResult& result);
// traj_id,t,x,y,pointer_y
void write_trajectories(std::ostream& os, const detector::DetectorRun& run);
// pair_id,path_label,exit_without,exit_with,triggered
void write_influence(std::ostream& os, const detector::InfluenceReport& report);

std::vector<Check> bohm_checks(const bohm::EnsembleResult& result);
nlohmann::json bohm_summary(const ScenarioConfig& scenario, const bohm::EnsembleResult& result);

std::vector<Check> detector_checks(const ScenarioConfig& scenario, const detector::DetectorRun& run,
                                   const detector::InfluenceReport& influence);
nlohmann::json detector_summary(const ScenarioConfig& scenario, const detector::DetectorRun& run,
                                const detector::InfluenceReport& influence);

struct HistoriesResult {
  histories::FamilySpec spec;
  histories::ConsistencyReport<double> consistency;
  std::vector<histories::WeightedHistory<double>> all_weights;
  std::vector<std::pair<std::string, double>> named_weights;
  std::vector<std::pair<std::string, double>> conditionals;
  histories::CMatrix<double> decoherence;
};

/// Throws histories::InconsistentFamily when the family fails the consistency test.
HistoriesResult evaluate_histories(histories::FamilySpec spec, double tol);
std::vector<Check> histories_checks(const HistoriesResult& result);
nlohmann::json histories_summary(const HistoriesResult& result);
// history,weight
void write_weights(std::ostream& os, const HistoriesResult& result);
// row,col,re,im for the nonzero entries of D
void write_decoherence(std::ostream& os, const HistoriesResult& result);

std::vector<Check> bridge_checks(const bridge::BridgeReport& report, double tol);
nlohmann::json bridge_summary(const bridge::BridgeReport& report, double tol);
// interval,row,col,re,im,compared
void write_effective(std::ostream& os, const bridge::BridgeReport& report);

} // namespace wedge::report
