// Ideal coarse-grained families for the wedge-and-mirrors experiment, plus the
// JSON family loader.
//
// Path space: at t0 the basis is {a0, a0_perp}; at t1..t3 it is {c_k, d_k};
// at t4 it is {e4, f4}. The wedge sends a0 to (c1 + d1)/sqrt 2, free flight
// keeps c and d, and passing through J relabels c3 -> f4 and d3 -> e4. The
// detector family tensors this with {D, D*}; between t1 and t2 the d branch
// flips the detector.
#pragma once

#include "wedge/histories.hpp"

#include <json.hpp>

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace wedge::histories {

using Family = HistoryFamily<double>;

struct NamedHistory {
  std::string name;
  History history;
};

struct ConditionalQuery {
  std::string name;
  std::size_t condition_time = 0;
  std::string condition_event;
  std::size_t query_time = 0;
  std::string query_event;
};

struct FamilySpec {
  Family family;
  std::vector<NamedHistory> named;
  std::vector<ConditionalQuery> conditionals;
};

using Times = std::array<double, 5>;

/// Path-only family. splitter_angle = pi/4 is the symmetric wedge; other
/// angles send a0 to cos(angle) c1 + sin(angle) d1.
Family path_family(const Times& times, double splitter_angle);
Family path_family(const Times& times);

/// Path (x) detector family with initial state |a0>|D>.
Family detector_family(const Times& times);

/// Path family whose t4 decomposition is {(e4 + f4)/sqrt 2, (e4 - f4)/sqrt 2}.
Family superposition_readout_family(const Times& times);

/// Ideal step matrices (t0->t1, ..., t3->t4) of the path and detector families.
std::vector<CMatrix<double>> ideal_path_unitaries(double splitter_angle);
std::vector<CMatrix<double>> ideal_detector_unitaries();

FamilySpec path_spec(const Times& times);
FamilySpec detector_spec(const Times& times);

/// Accepts "default-paper-family", "default-detector-family" or an explicit
/// family object (bases, unitaries as row-major [re, im] pairs, initial_state,
/// decompositions as named index sets, optional named_histories and conditionals).
FamilySpec family_from_json(const nlohmann::json& j, const Times& default_times);

} // namespace wedge::histories
