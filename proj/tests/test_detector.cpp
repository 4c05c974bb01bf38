#include "oracles.hpp"

#include "wedge/bohm.hpp"
#include "wedge/detector.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace wedge;
using namespace wedge::detector;
using oracle::cd;
using V2 = Eigen::Vector2d;
using V1 = Eigen::Matrix<double, 1, 1>;

namespace {

ScenarioConfig with_kick(double kick) {
  auto sc = ScenarioConfig::standard();
  sc.detector.enabled = true;
  sc.detector.kick = kick;
  return sc;
}

Packet1 rest_pointer(const ScenarioConfig& sc) {
  Packet1 p;
  p.center[0] = sc.detector.pointer_center;
  p.width = sc.detector.pointer_width;
  p.birth_time = sc.t1();
  return p;
}

// Free 1-D evolution of samples on a periodic grid.
std::vector<cd> spectral_1d(std::vector<cd> f, double dx, double tau) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<cd> spec;
  fft.fwd(spec, f);
  for (int i = 0; i < n; ++i) {
    const double k = 2 * oracle::pi / (n * dx) * (i < n / 2 ? i : i - n);
    spec[i] *= std::exp(cd(0, -0.5 * k * k * tau));
  }
  fft.inv(f, spec);
  return f;
}

} // namespace

TEST_CASE("pointer coupling") {
  const auto sc = with_kick(20);
  const auto model = make_model(sc);

  SUBCASE("zero kick leaves the state unchanged") {
    const auto same = apply_coupling(model.before, 0.0, sc.detector.t_int);
    REQUIRE(same.branches.size() == model.before.branches.size());
    for (std::size_t i = 0; i < same.branches.size(); ++i) {
      CHECK(same.branches[i].pointer.center == model.before.branches[i].pointer.center);
      CHECK(same.branches[i].pointer.momentum == model.before.branches[i].pointer.momentum);
      CHECK(same.branches[i].amplitude == model.before.branches[i].amplitude);
    }
  }

  SUBCASE("only the lower branch is kicked, amplitudes kept") {
    REQUIRE(model.after.branches.size() == 2);
    const auto& c = model.after.branches[0];
    const auto& d = model.after.branches[1];
    CHECK(c.electron.center[1] > 0);
    CHECK(d.electron.center[1] < 0);
    CHECK(c.pointer.momentum[0] == 0.0);
    CHECK(d.pointer.momentum[0] == doctest::Approx(20.0));
    CHECK(c.amplitude == model.before.branches[0].amplitude);
    CHECK(d.amplitude == model.before.branches[1].amplitude);
  }

  SUBCASE("kicked pointer equals exp(i k y) D at t_int and evolves freely after") {
    const double kick = 3.0, t_int = sc.detector.t_int;
    const auto d = rest_pointer(sc);
    const auto ds = boost_pointer(d, kick, t_int);
    const auto e = evolve_packet(d, t_int), es = evolve_packet(ds, t_int);
    for (double y : {-2.0, -0.3, 0.0, 0.8, 2.5}) {
      const V1 yv(y);
      CHECK(std::abs(es(yv) - std::exp(cd(0, kick * y)) * e(yv)) < 1e-14);
    }
    const int n = 2048;
    const double lo = -40, dx = 80.0 / n;
    std::vector<cd> f(n);
    for (int i = 0; i < n; ++i) {
      const double y = lo + i * dx;
      f[i] = std::exp(cd(0, kick * y)) *
             oracle::fourier_evolved(y, d.center[0], 0.0, d.width, t_int - d.birth_time);
    }
    const double t = sc.t4();
    const auto g = spectral_1d(f, dx, t - t_int);
    const auto et = evolve_packet(ds, t);
    double worst = 0;
    for (int i = 0; i < n; i += 5) worst = std::max(worst, std::abs(g[i] - et(V1(lo + i * dx))));
    CHECK(worst < 1e-10);
  }

  SUBCASE("<D|D*> closed form against 1-D quadrature") {
    const double t_int = sc.detector.t_int;
    const auto d = rest_pointer(sc);
    for (double kick : {0.5, 1.0, 2.0, 5.0}) {
      const auto ds = boost_pointer(d, kick, t_int);
      const oracle::Composite r(-15, 15, 120, 12);
      const cd q = oracle::integrate(r, [&](double y) {
        const cd v = oracle::fourier_evolved(y, d.center[0], 0.0, d.width, t_int - d.birth_time);
        return std::norm(v) * std::exp(cd(0, kick * y));
      });
      CHECK(std::abs(overlap(d, ds, t_int) - q) < 1e-10);
      CHECK(std::abs(overlap(d, ds, sc.t4()) - q) < 1e-10);
    }
  }

  SUBCASE("strong kick makes the pointer states orthogonal") {
    const auto& a = model.after.branches[0].pointer;
    const auto& b = model.after.branches[1].pointer;
    CHECK(std::abs(overlap(a, b, sc.t4())) < 1e-10);
  }

  SUBCASE("coupling at the crossing is refused") {
    CHECK_THROWS_AS(apply_coupling(model.before, 20.0, 1.6), BranchesNotSeparated);
  }

  SUBCASE("norm is conserved across the interaction") {
    for (double t : {sc.t1(), sc.detector.t_int, sc.t2(), sc.t3(), 1.6, sc.t4()})
      CHECK(std::abs(norm_squared(model.at(t), t) - 1) < 1e-8);
  }
}

TEST_CASE("configuration-space velocity") {
  const auto sc = with_kick(20);
  const auto model = make_model(sc);

  SUBCASE("product state") {
    const auto pointer = rest_pointer(sc);
    BranchState<double> one{{{1.0, sc.upper_packet(), pointer}}};
    const Superposition2 electron{{{1.0, sc.upper_packet()}}};
    for (double t : {0.1, 0.9}) {
      const V2 x = evolve_packet(sc.upper_packet(), t).center + V2(0.3, -0.2);
      const double y = evolve_packet(pointer, t).center[0];
      const auto v = velocity_config(one, x, y, t);
      CHECK((v.electron - bohm::velocity(electron, x, t)).norm() < 1e-13);
      CHECK(std::abs(v.pointer - pointer.momentum[0]) < 1e-13);
    }
  }

  SUBCASE("disjoint pointer branches select one electron packet") {
    const double t = 1.6; // electron packets coincide at J
    const auto& c = model.after.branches[0];
    const Superposition2 only_c{{{c.amplitude, c.electron}}};
    const double y = evolve_packet(c.pointer, t).center[0];
    for (const V2& x : {V2(0, 0), V2(0.4, -0.3), V2(-0.5, 0.9)}) {
      const auto v = velocity_config(model.after, x, y, t);
      CHECK((v.electron - bohm::velocity(only_c, x, t)).norm() < 1e-10);
    }
  }

  SUBCASE("finite differences at random configuration points") {
    for (double kick : {20.0, 1.0}) {
      const auto m = make_model(with_kick(kick));
      std::mt19937_64 rng(41);
      std::mt19937_64 prng(42);
      std::uniform_real_distribution<double> u(0, 1);
      const double h = 1e-5;
      for (int i = 0; i < 100; ++i) {
        const double t = sc.detector.t_int + u(rng) * (sc.t4() - sc.detector.t_int);
        const auto q = draw_configuration(m.after, t, rng, prng);
        const V2 x(q[0], q[1]);
        const double y = q[2];
        const cd f0 = evaluate(m.after, x, y, t);
        const auto v = velocity_config(m.after, x, y, t);
        const double scale = std::max(1.0, std::hypot(v.electron.norm(), v.pointer));
        for (int k = 0; k < 2; ++k) {
          V2 dx = V2::Zero();
          dx[k] = h;
          const cd fd = (evaluate(m.after, V2(x + dx), y, t) - evaluate(m.after, V2(x - dx), y, t)) / (2 * h);
          CHECK(std::abs((fd / f0).imag() - v.electron[k]) < 1e-6 * scale);
        }
        const cd fy = (evaluate(m.after, x, y + h, t) - evaluate(m.after, x, y - h, t)) / (2 * h);
        CHECK(std::abs((fy / f0).imag() - v.pointer) < 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("product state reduces to the single-particle path") {
  const auto sc = with_kick(20);
  const auto pointer = rest_pointer(sc);
  DetectorModel m;
  m.before.branches.push_back({1.0, sc.upper_packet(), pointer});
  m.after = m.before;
  m.t_int = sc.detector.t_int;
  const Superposition2 electron{{{1.0, sc.upper_packet()}}};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const V2 x0 = bohm::draw_position(electron, sc.t1(), rng);
    const auto path = integrate_configuration(m, sc, Eigen::Vector3d(x0[0], x0[1], 0.4), false);
    const auto tr = bohm::integrate_trajectory(electron, x0, sc.t1(), sc.t4(), sc.ensemble.tol);
    REQUIRE(path.status == PathStatus::ok);
    const auto& end = path.states.back();
    CHECK((V2(end[0], end[1]) - tr.points.back()).norm() < 1e-6);
  }
}

TEST_CASE("strong kick: textbook outcome and branch confinement") {
  auto sc = with_kick(20);
  sc.ensemble.keep_paths = 40;
  const auto model = make_model(sc);
  REQUIRE(std::abs(overlap(model.after.branches[0].pointer, model.after.branches[1].pointer,
                           sc.detector.t_int)) < 1e-12);
  const auto run = run_detector_scenario(sc, 300, 1);
  // A path ending outside the 4 sigma exit disc is left unresolved; that tail is rare.
  std::size_t c = 0, d = 0, unresolved = 0;
  for (const auto& r : run.records) {
    REQUIRE(r.status == PathStatus::ok);
    unresolved += r.exit_channel == Channel::Unresolved;
    if (r.electron_path_label == PathLabel::C) {
      ++c;
      CHECK_FALSE(r.triggered);
      CHECK(r.exit_channel != Channel::E);
    } else {
      ++d;
      CHECK(r.triggered);
      CHECK(r.exit_channel != Channel::F);
    }
  }
  CHECK(c > 100);
  CHECK(d > 100);
  CHECK(unresolved <= 6);

  // After t_int the configuration stays inside the support of its own branch.
  std::size_t checked = 0, strays = 0;
  for (std::size_t i = 0; i < run.paths.size(); ++i) {
    const auto& p = run.paths[i];
    const std::size_t own = run.records[i].electron_path_label == PathLabel::C ? 0 : 1;
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const double t = p.times[k];
      if (t < sc.detector.t_int) continue;
      const V2 x(p.states[k][0], p.states[k][1]);
      const V1 y(p.states[k][2]);
      double w[2];
      for (std::size_t b = 0; b < 2; ++b) {
        const auto& br = model.after.branches[b];
        w[b] = std::norm(br.amplitude * evolve_packet(br.electron, t)(x) * evolve_packet(br.pointer, t)(y));
      }
      ++checked;
      strays += !(w[own] > w[1 - own]);
    }
  }
  CHECK(checked > 400);
  CHECK(strays == 0);
}

TEST_CASE("zero kick matches the detector-free ensemble") {
  const auto sc = with_kick(0.0);
  const std::size_t n = 1000;
  const auto run = run_detector_scenario(sc, n, 3);
  auto free = sc;
  free.detector.enabled = false;
  const auto ens = bohm::run_ensemble(free, n, 3);
  std::size_t e_det = 0;
  for (const auto& r : run.records) {
    e_det += r.exit_channel == Channel::E;
    CHECK_FALSE(r.crossed_plane);
  }
  const double f_det = static_cast<double>(e_det) / n;
  const double f_free = static_cast<double>(ens.counts.at(Channel::E)) / n;
  CHECK(std::abs(f_det - f_free) <= 0.02);
  // identical electron draws
  for (std::size_t i = 0; i < n; ++i) CHECK(V2(run.records[i].electron_start) == ens.trajectories[i].points.front());
}

TEST_CASE("nonlocal influence") {
  auto without = ScenarioConfig::standard();
  without.detector.enabled = false;

  SUBCASE("strong kick flips every C path pair from E to F") {
    const auto rep = nonlocal_influence_report(with_kick(20), without, 400, 12);
    CHECK(rep.c_path > 100);
    CHECK(rep.c_path_e_to_f == rep.c_path);
  }

  SUBCASE("zero kick flips nothing") {
    const auto rep = nonlocal_influence_report(with_kick(0), without, 400, 12);
    CHECK(rep.flips == 0);
  }

  SUBCASE("intermediate kicks give partial flipping") {
    double last = -1;
    bool monotone = true;
    for (double kick : {0.5, 1.0, 2.0, 4.0}) {
      const auto rep = nonlocal_influence_report(with_kick(kick), without, 200, 12);
      const double f = rep.flip_fraction();
      MESSAGE("kick " << kick << ": flip fraction " << f);
      CHECK(f > 0);
      CHECK(f < 1);
      monotone = monotone && f >= last;
      last = f;
    }
    MESSAGE("monotone over the sweep: " << std::string(monotone ? "yes" : "no"));
  }

  SUBCASE("geometry must match") {
    auto other = with_kick(20);
    other.times[4] = 4.0;
    CHECK_THROWS_AS(nonlocal_influence_report(other, without, 10, 1), std::invalid_argument);
  }
}

TEST_CASE("weak kick sweep finds remote triggers") {
  const auto base = with_kick(1.0);
  const double kicks[] = {0.5, 1.0, 2.0};
  std::vector<double> grid;
  for (double y = -3; y <= 3.0001; y += 0.5) grid.push_back(y);
  std::vector<DetectorRunRecord> records;
  const auto rows = remote_trigger_sweep(base, kicks, grid, 40, 5, &records);
  REQUIRE(rows.size() == 3);
  std::size_t total = 0;
  for (const auto& row : rows) {
    MESSAGE("kick " << row.kick << ": remote fraction " << row.remote_fraction());
    total += row.remote_triggers;
  }
  CHECK(total > 0);
  CHECK(records.size() == 3 * 40 * grid.size());
  std::size_t seen = 0;
  for (const auto& r : records)
    seen += r.electron_path_label == PathLabel::C && r.triggered && r.exit_channel == Channel::E;
  CHECK(seen == total);
}
