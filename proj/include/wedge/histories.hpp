// Finite-dimensional consistent-histories engine.
//
// A family fixes, at each time t_k, an orthogonal decomposition of the
// identity. Coordinates at t_k are taken in a per-time labeled basis and the
// unitary U_k maps t_{k-1} coordinates to t_k coordinates. The chain vector of
// a history (P_0, ..., P_n) is P_n U_n ... P_1 U_1 P_0 |psi_0>, its weight the
// squared norm, and the decoherence functional the Gram matrix of chain vectors.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wedge::histories {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

class FamilyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InconsistentFamily : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroConditioningEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LabeledBasis {
 public:
  LabeledBasis() = default;
  explicit LabeledBasis(std::vector<std::string> labels) : labels_(std::move(labels)) {
    const std::set<std::string> unique(labels_.begin(), labels_.end());
    if (unique.size() != labels_.size()) throw FamilyError("basis labels must be unique");
  }

  const std::vector<std::string>& labels() const { return labels_; }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(labels_.size()); }

  Eigen::Index index_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw FamilyError("unknown basis label '" + std::string(label) + "'");
    return static_cast<Eigen::Index>(it - labels_.begin());
  }

 private:
  std::vector<std::string> labels_;
};

template <typename Real>
struct TimeGrid {
  std::vector<Real> times;
  std::vector<CMatrix<Real>> unitaries; // unitaries[k] maps times[k] to times[k + 1]
};

template <typename Real>
struct Decomposition {
  std::vector<std::string> names;
  std::vector<CMatrix<Real>> projectors;
  std::size_t size() const { return projectors.size(); }

  std::size_t index_of(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw FamilyError("unknown event '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

template <typename Real>
struct HistoryFamily {
  std::vector<LabeledBasis> bases;
  TimeGrid<Real> grid;
  std::vector<Decomposition<Real>> decompositions;
  CVector<Real> initial_state;

  std::size_t time_count() const { return decompositions.size(); }
  Eigen::Index dimension() const { return initial_state.size(); }
};

struct History {
  std::vector<std::size_t> projector_choice;
  bool operator==(const History&) const = default;
};

enum class Checks { full, skip_unitarity };

template <typename Real>
Real unitarity_defect(const CMatrix<Real>& u) {
  const CMatrix<Real> id = CMatrix<Real>::Identity(u.cols(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff();
}

/// Throws FamilyError unless the family satisfies its structural invariants to `tol`.
template <typename Real>
void validate_family(const HistoryFamily<Real>& fam, Real tol = Real(1e-12),
                     Checks checks = Checks::full) {
  const std::size_t n = fam.time_count();
  const Eigen::Index d = fam.dimension();
  if (n == 0) throw FamilyError("family needs at least one time");
  if (fam.grid.times.size() != n) throw FamilyError("one time per decomposition required");
  if (fam.grid.unitaries.size() + 1 != n) throw FamilyError("one unitary per adjacent time pair");
  if (!fam.bases.empty() && fam.bases.size() != n) throw FamilyError("one basis per time required");
  for (std::size_t k = 1; k < n; ++k)
    if (!(fam.grid.times[k] > fam.grid.times[k - 1]))
      throw FamilyError("times must be strictly increasing");
  if (std::abs(fam.initial_state.norm() - Real(1)) > tol)
    throw FamilyError("initial state must be normalized");
  for (const auto& u : fam.grid.unitaries) {
    if (u.rows() != d || u.cols() != d) throw FamilyError("unitary has wrong shape");
    if (checks == Checks::full && unitarity_defect(u) > tol)
      throw FamilyError("time step matrix is not unitary");
  }
  const CMatrix<Real> id = CMatrix<Real>::Identity(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& dec = fam.decompositions[k];
    if (dec.size() == 0 || dec.names.size() != dec.size())
      throw FamilyError("each time needs named projectors");
    if (!fam.bases.empty() && fam.bases[k].dimension() != d)
      throw FamilyError("basis dimension mismatch");
    CMatrix<Real> sum = CMatrix<Real>::Zero(d, d);
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const auto& p = dec.projectors[i];
      if (p.rows() != d || p.cols() != d) throw FamilyError("projector has wrong shape");
      if ((p * p - p).cwiseAbs().maxCoeff() > tol) throw FamilyError("projector not idempotent");
      if ((p - p.adjoint()).cwiseAbs().maxCoeff() > tol) throw FamilyError("projector not Hermitian");
      for (std::size_t j = i + 1; j < dec.size(); ++j)
        if ((p * dec.projectors[j]).cwiseAbs().maxCoeff() > tol)
          throw FamilyError("projectors at one time must be mutually orthogonal");
      sum += p;
    }
    if ((sum - id).cwiseAbs().maxCoeff() > tol) throw FamilyError("projectors must sum to identity");
  }
}

/// Sum of |i><i| over the given basis indices.
template <typename Real>
CMatrix<Real> projector_onto(Eigen::Index dimension, std::span<const Eigen::Index> indices) {
  CMatrix<Real> p = CMatrix<Real>::Zero(dimension, dimension);
  for (auto i : indices) {
    if (i < 0 || i >= dimension) throw FamilyError("projector index out of range");
    p(i, i) = 1;
  }
  return p;
}

template <typename Real>
CMatrix<Real> rank_one(const CVector<Real>& v) {
  return v * v.adjoint() / v.squaredNorm();
}

template <typename Real>
void check_history(const HistoryFamily<Real>& fam, const History& h) {
  if (h.projector_choice.size() != fam.time_count())
    throw FamilyError("history must pick one projector per time");
  for (std::size_t k = 0; k < h.projector_choice.size(); ++k)
    if (h.projector_choice[k] >= fam.decompositions[k].size())
      throw FamilyError("history projector index out of range");
}

template <typename Real>
History history_from_names(const HistoryFamily<Real>& fam, std::span<const std::string> names) {
  if (names.size() != fam.time_count()) throw FamilyError("history must name one event per time");
  History h;
  for (std::size_t k = 0; k < names.size(); ++k)
    h.projector_choice.push_back(fam.decompositions[k].index_of(names[k]));
  return h;
}

template <typename Real>
std::string history_name(const HistoryFamily<Real>& fam, const History& h) {
  std::string out;
  for (std::size_t k = 0; k < h.projector_choice.size(); ++k) {
    if (k) out += " | ";
    out += fam.decompositions[k].names[h.projector_choice[k]];
  }
  return out;
}

template <typename Real>
CVector<Real> chain_vector(const HistoryFamily<Real>& fam, const History& h) {
  check_history(fam, h);
  CVector<Real> v = fam.decompositions[0].projectors[h.projector_choice[0]] * fam.initial_state;
  for (std::size_t k = 1; k < fam.time_count(); ++k)
    v = fam.decompositions[k].projectors[h.projector_choice[k]] * (fam.grid.unitaries[k - 1] * v);
  return v;
}

template <typename Real>
Real weight(const HistoryFamily<Real>& fam, const History& h) {
  return chain_vector(fam, h).squaredNorm();
}

/// D(h1, h2) = <chain(h2) | chain(h1)>.
template <typename Real>
std::complex<Real> decoherence_functional(const HistoryFamily<Real>& fam, const History& h1,
                                          const History& h2) {
  return chain_vector(fam, h2).dot(chain_vector(fam, h1));
}

/// All histories, last time varying fastest.
template <typename Real>
std::vector<History> enumerate_histories(const HistoryFamily<Real>& fam) {
  std::vector<History> out;
  History h{std::vector<std::size_t>(fam.time_count(), 0)};
  while (true) {
    out.push_back(h);
    std::size_t k = fam.time_count();
    while (k > 0) {
      --k;
      if (++h.projector_choice[k] < fam.decompositions[k].size()) break;
      h.projector_choice[k] = 0;
      if (k == 0) return out;
    }
  }
}

/// Chain vectors of every history as columns, in enumerate_histories order.
/// Shares prefixes so each partial product is computed once.
template <typename Real>
CMatrix<Real> chain_matrix(const HistoryFamily<Real>& fam) {
  std::size_t total = 1;
  for (const auto& dec : fam.decompositions) total *= dec.size();
  CMatrix<Real> out(fam.dimension(), static_cast<Eigen::Index>(total));
  Eigen::Index column = 0;
  auto recurse = [&](auto&& self, std::size_t k, const CVector<Real>& v) -> void {
    const auto& dec = fam.decompositions[k];
    const CVector<Real> moved = k == 0 ? v : CVector<Real>(fam.grid.unitaries[k - 1] * v);
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const CVector<Real> next = dec.projectors[i] * moved;
      if (k + 1 == fam.time_count())
        out.col(column++) = next;
      else
        self(self, k + 1, next);
    }
  };
  recurse(recurse, 0, fam.initial_state);
  return out;
}

/// D(h_i, h_j) for all pairs, indexed as in enumerate_histories.
template <typename Real>
CMatrix<Real> decoherence_matrix(const HistoryFamily<Real>& fam) {
  const CMatrix<Real> chains = chain_matrix(fam);
  return (chains.adjoint() * chains).transpose();
}

template <typename Real>
struct ConsistencyReport {
  bool consistent = false;
  Real max_offdiag = 0;
};

/// Medium decoherence: every off-diagonal |D(h1, h2)| must be <= tol.
template <typename Real>
ConsistencyReport<Real> check_consistency(const HistoryFamily<Real>& fam, Real tol) {
  const CMatrix<Real> dm = decoherence_matrix(fam);
  Real worst = 0;
  for (Eigen::Index j = 0; j < dm.cols(); ++j)
    for (Eigen::Index i = 0; i < dm.rows(); ++i)
      if (i != j) worst = std::max(worst, std::abs(dm(i, j)));
  return {worst <= tol, worst};
}

template <typename Real>
struct WeightedHistory {
  History history;
  Real weight = 0;
};

template <typename Real>
std::vector<WeightedHistory<Real>> enumerate_and_assign(const HistoryFamily<Real>& fam,
                                                       Real tol = Real(1e-10)) {
  const auto report = check_consistency(fam, tol);
  if (!report.consistent)
    throw InconsistentFamily("family is not consistent; probabilities are undefined");
  const auto histories = enumerate_histories(fam);
  const CMatrix<Real> chains = chain_matrix(fam);
  std::vector<WeightedHistory<Real>> out;
  out.reserve(histories.size());
  for (std::size_t i = 0; i < histories.size(); ++i)
    out.push_back({histories[i], chains.col(static_cast<Eigen::Index>(i)).squaredNorm()});
  return out;
}

/// Pr(query event at query_time | condition event at condition_time).
template <typename Real>
Real conditional(const HistoryFamily<Real>& fam, std::size_t condition_time,
                 std::size_t condition_index, std::size_t query_time, std::size_t query_index,
                 Real tol = Real(1e-10), Real zero_floor = Real(1e-14)) {
  if (condition_time >= fam.time_count() || query_time >= fam.time_count())
    throw FamilyError("conditional: time index out of range");
  if (condition_index >= fam.decompositions[condition_time].size() ||
      query_index >= fam.decompositions[query_time].size())
    throw FamilyError("conditional: event index out of range");
  Real joint = 0, marginal = 0;
  for (const auto& wh : enumerate_and_assign(fam, tol)) {
    if (wh.history.projector_choice[condition_time] != condition_index) continue;
    marginal += wh.weight;
    if (wh.history.projector_choice[query_time] == query_index) joint += wh.weight;
  }
  if (!(marginal > zero_floor))
    throw ZeroConditioningEvent("conditioning event has zero probability");
  return joint / marginal;
}

/// Inserts a time carrying only the identity, between `position - 1` and
/// `position`. The new step is the identity; the following step keeps the old unitary.
template <typename Real>
HistoryFamily<Real> insert_identity_time(HistoryFamily<Real> fam, std::size_t position, Real time) {
  if (position == 0 || position > fam.time_count())
    throw FamilyError("identity time must follow the first time");
  const Eigen::Index d = fam.dimension();
  const LabeledBasis basis = fam.bases.empty() ? LabeledBasis{} : fam.bases[position - 1];
  Decomposition<Real> identity{{"I"}, {CMatrix<Real>::Identity(d, d)}};
  fam.decompositions.insert(fam.decompositions.begin() + static_cast<std::ptrdiff_t>(position),
                            identity);
  fam.grid.times.insert(fam.grid.times.begin() + static_cast<std::ptrdiff_t>(position), time);
  fam.grid.unitaries.insert(fam.grid.unitaries.begin() + static_cast<std::ptrdiff_t>(position - 1),
                            CMatrix<Real>::Identity(d, d));
  if (!fam.bases.empty())
    fam.bases.insert(fam.bases.begin() + static_cast<std::ptrdiff_t>(position), basis);
  return fam;
}

} // namespace wedge::histories
