#include "wedge/families.hpp"

#include <cmath>
#include <numbers>

namespace wedge::histories {

using nlohmann::json;
using C = std::complex<double>;
using Matrix = CMatrix<double>;

namespace {

Matrix mat2(C a, C b, C c, C d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

const std::vector<std::vector<std::string>> kPathLabels{
    {"a0", "a0_perp"}, {"c1", "d1"}, {"c2", "d2"}, {"c3", "d3"}, {"e4", "f4"}};

Decomposition<double> basis_decomposition(const LabeledBasis& basis) {
  Decomposition<double> dec;
  for (Eigen::Index i = 0; i < basis.dimension(); ++i) {
    const std::array<Eigen::Index, 1> idx{i};
    dec.names.push_back(basis.labels()[static_cast<std::size_t>(i)]);
    dec.projectors.push_back(projector_onto<double>(basis.dimension(), idx));
  }
  return dec;
}

Family assemble(const Times& times, std::vector<LabeledBasis> bases, std::vector<Matrix> steps,
                CVector<double> psi0) {
  Family fam;
  fam.grid.times.assign(times.begin(), times.end());
  fam.grid.unitaries = std::move(steps);
  fam.initial_state = std::move(psi0);
  for (const auto& b : bases) fam.decompositions.push_back(basis_decomposition(b));
  fam.bases = std::move(bases);
  validate_family(fam);
  return fam;
}

std::vector<std::string> with_detector(const std::vector<std::string>& path_labels) {
  std::vector<std::string> out;
  for (const auto& p : path_labels)
    for (const char* d : {"D", "D*"}) out.push_back(p + " " + d);
  return out;
}

} // namespace

std::vector<Matrix> ideal_path_unitaries(double splitter_angle) {
  const double c = std::cos(splitter_angle), s = std::sin(splitter_angle);
  const Matrix id = Matrix::Identity(2, 2);
  // Columns are images of the earlier basis; rows the later basis.
  return {mat2(c, s, s, -c), id, id, mat2(0, 1, 1, 0)};
}

std::vector<Matrix> ideal_detector_unitaries() {
  const auto path = ideal_path_unitaries(std::numbers::pi / 4);
  const Matrix id2 = Matrix::Identity(2, 2);
  const Matrix flip = mat2(0, 1, 1, 0);
  const Matrix on_c = mat2(1, 0, 0, 0);
  const Matrix on_d = mat2(0, 0, 0, 1);
  const Matrix couple = kron(on_c, id2) + kron(on_d, flip);
  return {kron(path[0], id2), couple, kron(path[2], id2), kron(path[3], id2)};
}

Family path_family(const Times& times, double splitter_angle) {
  std::vector<LabeledBasis> bases;
  for (const auto& labels : kPathLabels) bases.emplace_back(labels);
  CVector<double> psi0(2);
  psi0 << 1, 0;
  return assemble(times, std::move(bases), ideal_path_unitaries(splitter_angle), psi0);
}

Family path_family(const Times& times) {
  return path_family(times, std::numbers::pi / 4);
}

Family detector_family(const Times& times) {
  std::vector<LabeledBasis> bases;
  for (const auto& labels : kPathLabels) bases.emplace_back(with_detector(labels));
  CVector<double> psi0 = CVector<double>::Zero(4);
  psi0(0) = 1; // a0 D
  return assemble(times, std::move(bases), ideal_detector_unitaries(), psi0);
}

Family superposition_readout_family(const Times& times) {
  Family fam = path_family(times);
  CVector<double> plus(2), minus(2);
  plus << 1, 1;
  minus << 1, -1;
  fam.decompositions.back() = {{"e4+f4", "e4-f4"}, {rank_one(plus), rank_one(minus)}};
  validate_family(fam);
  return fam;
}

namespace {

std::vector<NamedHistory> named(const Family& fam,
                                std::vector<std::pair<std::string, std::vector<std::string>>> list) {
  std::vector<NamedHistory> out;
  for (auto& [name, events] : list) out.push_back({name, history_from_names(fam, events)});
  return out;
}

} // namespace

FamilySpec path_spec(const Times& times) {
  FamilySpec spec;
  spec.family = path_family(times);
  spec.named = named(spec.family, {{"Y_cf", {"a0", "c1", "c2", "c3", "f4"}},
                                   {"Y_de", {"a0", "d1", "d2", "d3", "e4"}},
                                   {"Y_ce", {"a0", "c1", "c2", "c3", "e4"}},
                                   {"Y_df", {"a0", "d1", "d2", "d3", "f4"}}});
  spec.conditionals = {{"P(d2|e4)", 4, "e4", 2, "d2"},
                       {"P(c2|f4)", 4, "f4", 2, "c2"},
                       {"P(c2|e4)", 4, "e4", 2, "c2"}};
  return spec;
}

FamilySpec detector_spec(const Times& times) {
  FamilySpec spec;
  spec.family = detector_family(times);
  spec.named = named(spec.family,
                     {{"Y_cf", {"a0 D", "c1 D", "c2 D", "c3 D", "f4 D"}},
                      {"Y_de", {"a0 D", "d1 D", "d2 D*", "d3 D*", "e4 D*"}},
                      {"Y_ce", {"a0 D", "c1 D", "c2 D", "c3 D", "e4 D"}},
                      {"Y_df", {"a0 D", "d1 D", "d2 D*", "d3 D*", "f4 D*"}}});
  spec.conditionals = {{"P(d2 D*|e4 D*)", 4, "e4 D*", 2, "d2 D*"},
                       {"P(c2 D|f4 D)", 4, "f4 D", 2, "c2 D"}};
  return spec;
}

namespace {

C complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw FamilyError("complex entries must be numbers or [re, im] pairs");
}

} // namespace

FamilySpec family_from_json(const json& j, const Times& default_times) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "default-paper-family") return path_spec(default_times);
    if (name == "default-detector-family") return detector_spec(default_times);
    throw FamilyError("unknown family name '" + name + "'");
  }
  if (!j.is_object()) throw FamilyError("histories entry must be a name or an object");
  try {
    FamilySpec spec;
    Family& fam = spec.family;
    const auto& bases = j.at("bases");
    const std::size_t n = bases.size();
    for (const auto& b : bases) fam.bases.emplace_back(b.get<std::vector<std::string>>());
    const Eigen::Index d = fam.bases.front().dimension();

    if (j.contains("times")) {
      fam.grid.times = j["times"].get<std::vector<double>>();
    } else if (n == default_times.size()) {
      fam.grid.times.assign(default_times.begin(), default_times.end());
    } else {
      for (std::size_t k = 0; k < n; ++k) fam.grid.times.push_back(static_cast<double>(k));
    }

    for (const auto& u : j.at("unitaries")) {
      if (u.size() != static_cast<std::size_t>(d * d))
        throw FamilyError("unitary must list dimension^2 row-major entries");
      Matrix m(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = complex_from(u[static_cast<std::size_t>(r * d + c)]);
      fam.grid.unitaries.push_back(m);
    }

    const auto& psi = j.at("initial_state");
    if (psi.size() != static_cast<std::size_t>(d)) throw FamilyError("initial_state has wrong size");
    fam.initial_state.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) fam.initial_state(i) = complex_from(psi[static_cast<std::size_t>(i)]);

    const json decs = j.value("decompositions", json::array());
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= decs.size() || decs[k].is_null()) {
        fam.decompositions.push_back(basis_decomposition(fam.bases[k]));
        continue;
      }
      Decomposition<double> dec;
      for (const auto& entry : decs[k]) {
        const auto idx = entry.at("indices").get<std::vector<Eigen::Index>>();
        dec.names.push_back(entry.at("name").get<std::string>());
        dec.projectors.push_back(projector_onto<double>(d, idx));
      }
      fam.decompositions.push_back(std::move(dec));
    }
    validate_family(fam);

    if (j.contains("named_histories"))
      for (const auto& [name, events] : j["named_histories"].items())
        spec.named.push_back({name, history_from_names(fam, events.get<std::vector<std::string>>())});
    if (j.contains("conditionals"))
      for (const auto& q : j["conditionals"]) {
        ConditionalQuery cq;
        cq.name = q.value("name", std::string("conditional"));
        cq.condition_time = q.at("given").at("time").get<std::size_t>();
        cq.condition_event = q.at("given").at("event").get<std::string>();
        cq.query_time = q.at("query").at("time").get<std::size_t>();
        cq.query_event = q.at("query").at("event").get<std::string>();
        spec.conditionals.push_back(cq);
      }
    return spec;
  } catch (const json::exception& e) {
    throw FamilyError(std::string("malformed family definition: ") + e.what());
  }
}

} // namespace wedge::histories
