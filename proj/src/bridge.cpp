#include "wedge/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wedge::bridge {

using detector::BranchState;
using C = std::complex<double>;

detector::BranchState<double> propagate(const ScenarioConfig& scenario,
                                        const BranchState<double>& state, double t_a, double t_b) {
  const auto& d = scenario.detector;
  if (d.enabled && d.t_int > t_a && d.t_int <= t_b)
    return detector::apply_coupling(state, d.kick, d.t_int);
  return state;
}

namespace {

CMatrix<double> gram(std::span<const LabeledState> states, double t) {
  const auto n = static_cast<Eigen::Index>(states.size());
  CMatrix<double> g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = detector::inner(states[static_cast<std::size_t>(i)].state,
                                states[static_cast<std::size_t>(j)].state, t);
  return g;
}

void require_orthonormal(std::span<const LabeledState> states, double t, double tol,
                         const char* which) {
  const auto g = gram(states, t);
  const auto id = CMatrix<double>::Identity(g.rows(), g.cols());
  if ((g - id).cwiseAbs().maxCoeff() > tol)
    throw BasisNotOrthogonal(std::string(which) + " basis is not orthonormal");
}

LabeledBasis labels_of(std::span<const LabeledState> states) {
  std::vector<std::string> labels;
  for (const auto& s : states) labels.push_back(s.label);
  return LabeledBasis(labels);
}

} // namespace

EffectiveUnitary effective_unitary(const ScenarioConfig& scenario,
                                   std::span<const LabeledState> at_ta, double t_a,
                                   std::span<const LabeledState> at_tb, double t_b,
                                   double orthogonality_tol) {
  if (!(t_b >= t_a)) throw std::invalid_argument("effective_unitary: interval reversed");
  require_orthonormal(at_ta, t_a, orthogonality_tol, "initial");
  require_orthonormal(at_tb, t_b, orthogonality_tol, "final");

  EffectiveUnitary eff;
  eff.from = labels_of(at_ta);
  eff.basis = labels_of(at_tb);
  eff.interval = {t_a, t_b};
  eff.matrix.resize(static_cast<Eigen::Index>(at_tb.size()), static_cast<Eigen::Index>(at_ta.size()));
  for (std::size_t i = 0; i < at_ta.size(); ++i) {
    const auto moved = propagate(scenario, at_ta[i].state, t_a, t_b);
    for (std::size_t j = 0; j < at_tb.size(); ++j)
      eff.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          detector::inner(at_tb[j].state, moved, t_b);
  }
  const auto id = CMatrix<double>::Identity(eff.matrix.cols(), eff.matrix.cols());
  eff.unitarity_defect = (eff.matrix.adjoint() * eff.matrix - id).cwiseAbs().maxCoeff();
  return eff;
}

ValidationReport validate_against_ideal(const EffectiveUnitary& eff, const CMatrix<double>& ideal,
                                        double tol,
                                        std::optional<std::vector<Eigen::Index>> columns) {
  if (eff.matrix.rows() != ideal.rows() || eff.matrix.cols() != ideal.cols())
    throw std::invalid_argument("validate_against_ideal: dimension mismatch");
  std::vector<Eigen::Index> cols;
  if (columns) {
    cols = *columns;
  } else {
    for (Eigen::Index c = 0; c < ideal.cols(); ++c) cols.push_back(c);
  }

  double best = -1;
  C phase{1, 0};
  for (auto c : cols)
    for (Eigen::Index r = 0; r < ideal.rows(); ++r) {
      const double score = std::abs(ideal(r, c)) * std::abs(eff.matrix(r, c));
      if (score > best && score > 0) {
        best = score;
        phase = (ideal(r, c) / std::abs(ideal(r, c))) *
                std::conj(eff.matrix(r, c) / std::abs(eff.matrix(r, c)));
      }
    }

  ValidationReport report;
  report.phase = phase;
  for (auto c : cols)
    for (Eigen::Index r = 0; r < ideal.rows(); ++r)
      report.max_deviation = std::max(report.max_deviation, std::abs(phase * eff.matrix(r, c) - ideal(r, c)));
  report.passed = report.max_deviation <= tol;
  return report;
}

namespace {

BranchState<double> single(const Packet2& electron, const Packet1& pointer) {
  return BranchState<double>{{{C{1, 0}, electron, pointer}}};
}

Packet1 rest_pointer(const ScenarioConfig& s) {
  Packet1 p;
  p.center[0] = s.detector.pointer_center;
  p.width = s.detector.pointer_width;
  p.birth_time = s.t1();
  return p;
}

BranchState<double> normalized_pair(const Packet2& a, const Packet2& b, double sign,
                                    const Packet1& pointer, double t) {
  const double h = std::numbers::sqrt2 / 2;
  BranchState<double> s{{{C{h, 0}, a, pointer}, {C{sign * h, 0}, b, pointer}}};
  const double n = std::sqrt(detector::norm_squared(s, t));
  for (auto& br : s.branches) br.amplitude /= n;
  return s;
}

std::vector<LabeledState> basis_with_pointer(const ScenarioConfig& s, int k, const Packet1& pointer,
                                             const std::string& suffix) {
  const auto c = s.upper_packet();
  const auto d = s.lower_packet();
  switch (k) {
    case 0:
      return {{"a0" + suffix, normalized_pair(c, d, +1, pointer, s.t1())},
              {"a0_perp" + suffix, normalized_pair(c, d, -1, pointer, s.t1())}};
    case 1:
    case 2:
    case 3: {
      const auto n = std::to_string(k);
      return {{"c" + n + suffix, single(c, pointer)}, {"d" + n + suffix, single(d, pointer)}};
    }
    case 4:
      return {{"e4" + suffix, single(d, pointer)}, {"f4" + suffix, single(c, pointer)}};
    default:
      throw std::invalid_argument("time index must be in 0..4");
  }
}

} // namespace

std::vector<LabeledState> path_basis(const ScenarioConfig& scenario, int k) {
  return basis_with_pointer(scenario, k, rest_pointer(scenario), "");
}

std::vector<LabeledState> detector_basis(const ScenarioConfig& scenario, int k) {
  const auto d = rest_pointer(scenario);
  const auto d_star = detector::boost_pointer(d, scenario.detector.kick, scenario.detector.t_int);
  const auto with_d = basis_with_pointer(scenario, k, d, " D");
  const auto with_d_star = basis_with_pointer(scenario, k, d_star, " D*");
  std::vector<LabeledState> out;
  for (std::size_t i = 0; i < with_d.size(); ++i) {
    out.push_back(with_d[i]);
    out.push_back(with_d_star[i]);
  }
  return out;
}

namespace {

// Evaluation times of the interval k -> k+1. The wedge is not simulated, so
// the t0 states are the prepared packets at t1.
std::pair<double, double> evaluation_interval(const ScenarioConfig& s, int k) {
  return {k == 0 ? s.t1() : s.times[static_cast<std::size_t>(k)],
          s.times[static_cast<std::size_t>(k + 1)]};
}

double restricted_defect(const CMatrix<double>& m, const std::vector<Eigen::Index>& cols) {
  CMatrix<double> sub(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  const auto id = CMatrix<double>::Identity(sub.cols(), sub.cols());
  return (sub.adjoint() * sub - id).cwiseAbs().maxCoeff();
}

void compare_weights(const histories::FamilySpec& spec, const std::vector<CMatrix<double>>& steps,
                     const std::string& family_name, BridgeReport& report) {
  histories::Family eff = spec.family;
  eff.grid.unitaries = steps;
  histories::validate_family(eff, 1e-12, histories::Checks::skip_unitarity);
  for (const auto& nh : spec.named) {
    WeightComparison w{family_name, nh.name, histories::weight(spec.family, nh.history),
                       histories::weight(eff, nh.history)};
    report.max_weight_deviation = std::max(report.max_weight_deviation, std::abs(w.ideal - w.effective));
    report.weights.push_back(w);
  }
}

} // namespace

BridgeReport run_bridge(const ScenarioConfig& actual, const ScenarioConfig& reference, double tol) {
  BridgeReport report;

  auto path_dynamics = actual;
  path_dynamics.detector.enabled = false;
  const auto path_ideal = histories::ideal_path_unitaries(std::numbers::pi / 4);
  std::vector<CMatrix<double>> path_steps;
  for (int k = 0; k < 4; ++k) {
    const auto [ta, tb] = evaluation_interval(actual, k);
    const auto from = path_basis(actual, k);
    const auto to = path_basis(reference, k + 1);
    IntervalReport ir;
    ir.name = "path t" + std::to_string(k) + "->t" + std::to_string(k + 1);
    ir.effective = effective_unitary(path_dynamics, from, ta, to, tb);
    ir.validation = validate_against_ideal(ir.effective, path_ideal[static_cast<std::size_t>(k)], tol);
    for (Eigen::Index c = 0; c < 2; ++c) ir.compared_columns.push_back(c);
    ir.compared_defect = ir.effective.unitarity_defect;
    path_steps.push_back(ir.effective.matrix);
    report.intervals.push_back(std::move(ir));
  }
  compare_weights(histories::path_spec(actual.times), path_steps, "path", report);

  if (actual.detector.enabled) {
    const auto det_ideal = histories::ideal_detector_unitaries();
    std::vector<CMatrix<double>> det_steps;
    for (int k = 0; k < 4; ++k) {
      const auto [ta, tb] = evaluation_interval(actual, k);
      const auto from = detector_basis(actual, k);
      const auto to = detector_basis(reference, k + 1);
      IntervalReport ir;
      ir.name = "detector t" + std::to_string(k) + "->t" + std::to_string(k + 1);
      ir.effective = effective_unitary(actual, from, ta, to, tb);
      // The coupling fixes only |x D> -> ...; the image of |x D*> is not part of the ideal map.
      const bool coupling = actual.detector.t_int > ta && actual.detector.t_int <= tb;
      for (Eigen::Index c = 0; c < 4; ++c)
        if (!coupling || c % 2 == 0) ir.compared_columns.push_back(c);
      ir.validation = validate_against_ideal(ir.effective, det_ideal[static_cast<std::size_t>(k)],
                                             tol, ir.compared_columns);
      ir.compared_defect = restricted_defect(ir.effective.matrix, ir.compared_columns);
      det_steps.push_back(ir.effective.matrix);
      report.intervals.push_back(std::move(ir));
    }
    compare_weights(histories::detector_spec(actual.times), det_steps, "detector", report);
  }

  report.passed = report.max_weight_deviation < tol;
  for (const auto& ir : report.intervals) {
    report.max_entry_deviation = std::max(report.max_entry_deviation, ir.validation.max_deviation);
    report.passed = report.passed && ir.validation.passed;
  }
  return report;
}

} // namespace wedge::bridge
