// Continuum packets projected onto the labeled bases of the ideal families.
//
// For an interval (t_a, t_b) the effective matrix is
//   M_ji = < basis_j(t_b) | U(t_b, t_a) basis_i(t_a) >
// where U is free evolution plus, for detector scenarios, the impulsive
// pointer coupling when t_int falls inside the interval.
#pragma once

#include "wedge/detector.hpp"
#include "wedge/histories.hpp"
#include "wedge/families.hpp"
#include "wedge/scenario.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wedge::bridge {

using histories::CMatrix;
using histories::LabeledBasis;

class BasisNotOrthogonal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledState {
  std::string label;
  detector::BranchState<double> state;
};

struct EffectiveUnitary {
  CMatrix<double> matrix;
  LabeledBasis from;
  LabeledBasis basis; // rows
  std::pair<double, double> interval;
  double unitarity_defect = 0; // max |M^dagger M - I|
};

/// Applies the scenario dynamics between t_a and t_b (the packets carry free
/// evolution themselves; only the detector coupling changes the state).
detector::BranchState<double> propagate(const ScenarioConfig& scenario,
                                        const detector::BranchState<double>& state, double t_a,
                                        double t_b);

EffectiveUnitary effective_unitary(const ScenarioConfig& scenario,
                                   std::span<const LabeledState> at_ta, double t_a,
                                   std::span<const LabeledState> at_tb, double t_b,
                                   double orthogonality_tol = 1e-8);

struct ValidationReport {
  double max_deviation = 0;
  std::complex<double> phase{1, 0}; // applied to the effective matrix
  bool passed = false;
};

/// Entrywise max deviation after aligning one global phase on the entry pair
/// with the largest |ideal| * |effective|. `columns`, when given, restricts the
/// comparison to those input states.
ValidationReport validate_against_ideal(const EffectiveUnitary& eff, const CMatrix<double>& ideal,
                                        double tol,
                                        std::optional<std::vector<Eigen::Index>> columns = {});

/// Labeled continuum states of the path family at time index k (0..4). The t0
/// states are the wedge outputs (c1 +- d1)/sqrt 2, evaluated at t1.
std::vector<LabeledState> path_basis(const ScenarioConfig& scenario, int k);
/// Path basis (x) {D, D*}; D* is the pointer boosted at t_int.
std::vector<LabeledState> detector_basis(const ScenarioConfig& scenario, int k);

struct IntervalReport {
  std::string name;
  EffectiveUnitary effective;
  ValidationReport validation;
  std::vector<Eigen::Index> compared_columns;
  double compared_defect = 0; // unitarity defect over compared_columns only
};

struct WeightComparison {
  std::string family;
  std::string history;
  double ideal = 0;
  double effective = 0;
};

struct BridgeReport {
  std::vector<IntervalReport> intervals;
  std::vector<WeightComparison> weights;
  double max_entry_deviation = 0;
  double max_weight_deviation = 0;
  bool passed = false;
};

/// Builds every interval's effective matrix with t_a states from `actual` and
/// t_b labels from `reference`, validates against the ideal families, and
/// compares the named-history weights. Detector intervals are included when
/// `actual` has the detector enabled.
BridgeReport run_bridge(const ScenarioConfig& actual, const ScenarioConfig& reference, double tol);

} // namespace wedge::bridge
