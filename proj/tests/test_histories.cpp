#include "oracles.hpp"

#include "wedge/families.hpp"

#include <doctest.h>

#include <numbers>

using namespace wedge::histories;
using oracle::cd;
using Matrix = CMatrix<double>;

namespace {

const Times kTimes{-1, 0, 0.4, 0.8, 3.2};

std::vector<cd> to_std(const CVector<double>& v) { return {v.data(), v.data() + v.size()}; }

// Random family: each time splits a random orthonormal basis into random blocks.
Family random_family(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 5), steps(2, 5);
  const int d = dim(rng), n = steps(rng);
  Family fam;
  for (int k = 0; k < n; ++k) {
    fam.grid.times.push_back(k);
    if (k) fam.grid.unitaries.push_back(oracle::random_unitary(d, rng));
    const Matrix frame = oracle::random_unitary(d, rng);
    std::uniform_int_distribution<int> blocks(1, d);
    const int m = blocks(rng);
    std::vector<int> owner(d);
    for (int i = 0; i < d; ++i) owner[i] = i < m ? i : std::uniform_int_distribution<int>(0, m - 1)(rng);
    Decomposition<double> dec;
    for (int b = 0; b < m; ++b) {
      Matrix p = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i)
        if (owner[i] == b) p += frame.col(i) * frame.col(i).adjoint();
      dec.names.push_back("P" + std::to_string(b));
      dec.projectors.push_back(p);
    }
    fam.decompositions.push_back(dec);
  }
  fam.initial_state = oracle::random_unitary(d, rng).col(0);
  return fam;
}

struct Dense {
  std::vector<Matrix> projectors, unitaries;
};

Dense pick(const Family& fam, const History& h) {
  Dense out;
  for (std::size_t k = 0; k < fam.time_count(); ++k)
    out.projectors.push_back(fam.decompositions[k].projectors[h.projector_choice[k]]);
  out.unitaries = fam.grid.unitaries;
  return out;
}

double sum_weights(const Family& fam) {
  double s = 0;
  for (const auto& h : enumerate_histories(fam)) s += weight(fam, h);
  return s;
}

} // namespace

TEST_CASE("chain vectors and decoherence against explicit loops") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Family fam = random_family(rng);
    REQUIRE_NOTHROW(validate_family(fam, 1e-10));
    const auto hs = enumerate_histories(fam);
    const Matrix chains = chain_matrix(fam);
    const Matrix dm = decoherence_matrix(fam);
    std::vector<std::vector<cd>> naive;
    double worst = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const auto d = pick(fam, hs[i]);
      naive.push_back(oracle::naive_chain(d.projectors, d.unitaries, to_std(fam.initial_state)));
      const auto v = chain_vector(fam, hs[i]);
      for (Eigen::Index r = 0; r < v.size(); ++r) {
        worst = std::max(worst, std::abs(v(r) - naive[i][static_cast<std::size_t>(r)]));
        worst = std::max(worst, std::abs(chains(r, static_cast<Eigen::Index>(i)) - naive[i][static_cast<std::size_t>(r)]));
      }
    }
    for (std::size_t i = 0; i < hs.size(); ++i)
      for (std::size_t j = 0; j < hs.size(); ++j) {
        const cd ref = oracle::naive_inner(naive[j], naive[i]);
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        worst = std::max(worst, std::abs(dm(ii, jj) - ref));
        if (i < 4 && j < 4) worst = std::max(worst, std::abs(decoherence_functional(fam, hs[i], hs[j]) - ref));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("decoherence matrix invariants") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const Family fam = random_family(rng);
    const Matrix dm = decoherence_matrix(fam);
    CHECK((dm - dm.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(dm);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(std::abs(dm.sum() - 1.0) < 1e-12);
    for (Eigen::Index i = 0; i < dm.rows(); ++i) CHECK(dm(i, i).real() >= 0);
  }
}

TEST_CASE("history enumeration order") {
  const Family fam = path_family(kTimes);
  const auto hs = enumerate_histories(fam);
  REQUIRE(hs.size() == 32);
  CHECK(hs.front().projector_choice == std::vector<std::size_t>{0, 0, 0, 0, 0});
  CHECK(hs[1].projector_choice == std::vector<std::size_t>{0, 0, 0, 0, 1});
  CHECK(hs.back().projector_choice == std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK(history_name(fam, hs[1]) == "a0 | c1 | c2 | c3 | f4");
}

TEST_CASE("path family") {
  const auto spec = path_spec(kTimes);
  const Family& fam = spec.family;
  CHECK(check_consistency(fam, 1e-12).consistent);
  CHECK(std::abs(sum_weights(fam) - 1) < 1e-14);

  std::map<std::string, double> expected{{"Y_cf", 0.5}, {"Y_de", 0.5}, {"Y_ce", 0.0}, {"Y_df", 0.0}};
  for (const auto& nh : spec.named) CHECK(std::abs(weight(fam, nh.history) - expected.at(nh.name)) < 1e-12);

  const auto e4 = fam.decompositions[4].index_of("e4");
  const auto f4 = fam.decompositions[4].index_of("f4");
  const auto c2 = fam.decompositions[2].index_of("c2");
  const auto d2 = fam.decompositions[2].index_of("d2");
  CHECK(std::abs(conditional(fam, 4, e4, 2, d2) - 1) < 1e-12);
  CHECK(std::abs(conditional(fam, 4, f4, 2, c2) - 1) < 1e-12);
  CHECK(std::abs(conditional(fam, 4, e4, 2, c2)) < 1e-12);

  SUBCASE("unequal splitter") {
    const Family biased = path_family(kTimes, 0.3);
    CHECK(std::abs(conditional(biased, 0, 0, 4, f4) - std::pow(std::cos(0.3), 2)) < 1e-12);
    CHECK(std::abs(conditional(biased, 0, 0, 4, e4) - std::pow(std::sin(0.3), 2)) < 1e-12);
  }

  SUBCASE("refinement by identity times keeps weights") {
    const Family fine = insert_identity_time(insert_identity_time(fam, 4, 1.6), 2, 0.2);
    REQUIRE(fine.time_count() == 7);
    CHECK(check_consistency(fine, 1e-12).consistent);
    const auto coarse = enumerate_and_assign(fam);
    const auto refined = enumerate_and_assign(fine);
    REQUIRE(coarse.size() == refined.size());
    for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(std::abs(coarse[i].weight - refined[i].weight) < 1e-15);
  }

  SUBCASE("zero-probability conditioning event") {
    CHECK_THROWS_AS(conditional(fam, 0, fam.decompositions[0].index_of("a0_perp"), 4, e4), ZeroConditioningEvent);
  }

  SUBCASE("out-of-range queries") {
    CHECK_THROWS_AS(conditional(fam, 5, 0, 4, 0), FamilyError);
    CHECK_THROWS_AS(conditional(fam, 4, 2, 4, 0), FamilyError);
    CHECK_THROWS_AS(weight(fam, History{{0, 0}}), FamilyError);
  }
}

TEST_CASE("two-time Born rule") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 4;
    const Matrix u = oracle::random_unitary(d, rng);
    const Matrix frame = oracle::random_unitary(d, rng);
    Family fam;
    fam.grid.times = {0, 1};
    fam.grid.unitaries = {u};
    fam.initial_state = oracle::random_unitary(d, rng).col(0);
    fam.decompositions.push_back({{"I"}, {Matrix::Identity(d, d)}});
    Decomposition<double> dec;
    for (int i = 0; i < d; ++i) {
      dec.names.push_back("b" + std::to_string(i));
      dec.projectors.push_back(frame.col(i) * frame.col(i).adjoint());
    }
    fam.decompositions.push_back(dec);
    const auto out = enumerate_and_assign(fam);
    const CVector<double> evolved = u * fam.initial_state;
    for (int i = 0; i < d; ++i) CHECK(std::abs(out[i].weight - std::norm(frame.col(i).dot(evolved))) < 1e-13);
  }
}

TEST_CASE("detector family") {
  const auto spec = detector_spec(kTimes);
  const Family& fam = spec.family;
  CHECK(check_consistency(fam, 1e-12).consistent);
  const auto all = enumerate_and_assign(fam);
  std::size_t nonzero = 0;
  for (const auto& wh : all) nonzero += wh.weight > 1e-12;
  CHECK(nonzero == 2);
  std::map<std::string, double> expected{{"Y_cf", 0.5}, {"Y_de", 0.5}, {"Y_ce", 0.0}, {"Y_df", 0.0}};
  for (const auto& nh : spec.named) CHECK(std::abs(weight(fam, nh.history) - expected.at(nh.name)) < 1e-12);
  for (const auto& q : spec.conditionals) {
    const double p = conditional(fam, q.condition_time, fam.decompositions[q.condition_time].index_of(q.condition_event),
                                 q.query_time, fam.decompositions[q.query_time].index_of(q.query_event));
    CHECK(std::abs(p - 1) < 1e-12);
  }
}

TEST_CASE("superposition readout is inconsistent") {
  const Family fam = superposition_readout_family(kTimes);
  const auto report = check_consistency(fam, 1e-12);
  CHECK_FALSE(report.consistent);
  CHECK(report.max_offdiag > 0.1);
  CHECK_THROWS_AS(enumerate_and_assign(fam), InconsistentFamily);
  CHECK_THROWS_AS(conditional(fam, 4, 0, 2, 0), InconsistentFamily);
}

TEST_CASE("structural validation") {
  Family fam = path_family(kTimes);
  SUBCASE("non-unitary step") {
    fam.grid.unitaries[1](0, 0) = 2;
    CHECK_THROWS_AS(validate_family(fam), FamilyError);
    CHECK_NOTHROW(validate_family(fam, 1e-12, Checks::skip_unitarity));
  }
  SUBCASE("incomplete decomposition") {
    fam.decompositions[2].projectors.pop_back();
    fam.decompositions[2].names.pop_back();
    CHECK_THROWS_AS(validate_family(fam), FamilyError);
  }
  SUBCASE("overlapping projectors") {
    fam.decompositions[1].projectors[1] = fam.decompositions[1].projectors[0];
    CHECK_THROWS_AS(validate_family(fam), FamilyError);
  }
  SUBCASE("unnormalized state") {
    fam.initial_state *= 2;
    CHECK_THROWS_AS(validate_family(fam), FamilyError);
  }
  SUBCASE("non-increasing times") {
    fam.grid.times[3] = fam.grid.times[2];
    CHECK_THROWS_AS(validate_family(fam), FamilyError);
  }
  SUBCASE("duplicate labels") { CHECK_THROWS_AS(LabeledBasis({"a", "a"}), FamilyError); }
}

TEST_CASE("JSON families") {
  SUBCASE("named defaults") {
    const auto a = family_from_json("default-paper-family", kTimes);
    CHECK(a.family.dimension() == 2);
    CHECK(a.named.size() == 4);
    const auto b = family_from_json("default-detector-family", kTimes);
    CHECK(b.family.dimension() == 4);
    CHECK_THROWS_AS(family_from_json("nonsense", kTimes), FamilyError);
  }

  SUBCASE("explicit Hadamard chain") {
    const double r = 1 / std::sqrt(2.0);
    // a two-string list would otherwise read as a key/value pair
    const auto uv = nlohmann::json::array({"u", "v"});
    const nlohmann::json j = {
        {"bases", nlohmann::json::array({uv, uv, uv})},
        {"unitaries", {{{r, 0}, {r, 0}, {r, 0}, {-r, 0}}, {{0, 0}, {1, 0}, {1, 0}, {0, 0}}}},
        {"initial_state", {{1, 0}, {0, 0}}},
        {"named_histories", {{"uvu", nlohmann::json::array({"u", "v", "u"})}, {"uuv", nlohmann::json::array({"u", "u", "v"})}}},
        {"conditionals", {{{"name", "P(v1|u2)"}, {"given", {{"time", 2}, {"event", "u"}}}, {"query", {{"time", 1}, {"event", "v"}}}}}}};
    const auto spec = family_from_json(j, kTimes);
    CHECK(spec.family.grid.times == std::vector<double>{0, 1, 2});
    REQUIRE(spec.named.size() == 2);
    for (const auto& nh : spec.named) CHECK(std::abs(weight(spec.family, nh.history) - 0.5) < 1e-15);
    REQUIRE(spec.conditionals.size() == 1);
    const auto& q = spec.conditionals[0];
    const auto& f = spec.family;
    CHECK(std::abs(conditional(f, q.condition_time, f.decompositions[2].index_of("u"), q.query_time,
                               f.decompositions[1].index_of("v")) - 1) < 1e-12);
  }

  SUBCASE("coarse decomposition by index sets") {
    const nlohmann::json j = {
        {"bases", {{"x", "y", "z"}, {"x", "y", "z"}}},
        {"times", {0.0, 5.0}},
        {"unitaries", {{{1, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}}}},
        {"initial_state", {{0.6, 0}, {0, 0.8}, {0, 0}}},
        {"decompositions", {nullptr, {{{"name", "xy"}, {"indices", {0, 1}}}, {{"name", "z"}, {"indices", {2}}}}}}};
    const auto spec = family_from_json(j, kTimes);
    CHECK(spec.family.decompositions[1].size() == 2);
    CHECK(std::abs(weight(spec.family, History{{1, 0}}) - 0.64) < 1e-15);
  }

  SUBCASE("malformed definitions") {
    const auto uv = nlohmann::json::array({"u", "v"});
    CHECK_THROWS_AS(family_from_json(nlohmann::json{{"bases", nlohmann::json::array({uv})}}, kTimes), FamilyError);
    const nlohmann::json bad_unitary = {{"bases", nlohmann::json::array({uv, uv})},
                                        {"unitaries", {{{2, 0}, {0, 0}, {0, 0}, {1, 0}}}},
                                        {"initial_state", {{1, 0}, {0, 0}}}};
    CHECK_THROWS_AS(family_from_json(bad_unitary, kTimes), FamilyError);
    const nlohmann::json short_unitary = {{"bases", nlohmann::json::array({uv, uv})},
                                          {"unitaries", {{{1, 0}, {0, 0}}}},
                                          {"initial_state", {{1, 0}, {0, 0}}}};
    CHECK_THROWS_AS(family_from_json(short_unitary, kTimes), FamilyError);
    CHECK_THROWS_AS(family_from_json(nlohmann::json(3), kTimes), FamilyError);
  }
}

TEST_CASE("float instantiation") {
  HistoryFamily<float> fam;
  fam.grid.times = {0.f, 1.f};
  CMatrix<float> h(2, 2);
  const float r = 1 / std::sqrt(2.f);
  h << r, r, r, -r;
  fam.grid.unitaries = {h};
  fam.initial_state = CVector<float>::Zero(2);
  fam.initial_state(0) = 1;
  const CMatrix<float> id = CMatrix<float>::Identity(2, 2);
  const std::array<Eigen::Index, 1> i0{0}, i1{1};
  fam.decompositions.push_back({{"I"}, {id}});
  fam.decompositions.push_back({{"u", "v"}, {projector_onto<float>(2, i0), projector_onto<float>(2, i1)}});
  validate_family(fam, 1e-6f);
  const auto out = enumerate_and_assign(fam, 1e-6f);
  CHECK(out[0].weight == doctest::Approx(0.5f));
}
