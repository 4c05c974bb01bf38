// Adaptive Dormand-Prince 5(4) integration with symmetry-plane crossing detection.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace wedge {

template <int N>
using OdeState = Eigen::Matrix<double, N, 1>;

enum class PathStatus { ok, step_underflow, step_limit };

template <int N>
struct Path {
  std::vector<double> times;
  std::vector<OdeState<N>> states;
  bool crossed_plane = false;
  std::optional<double> first_crossing;
  PathStatus status = PathStatus::ok;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

struct IntegratorOptions {
  double tol = 1e-8;         // absolute, max-norm of the embedded error per step
  double min_step = 1e-12;   // below this the path is abandoned (node trapping)
  double max_step = 0.25;
  double initial_step = 1e-3;
  std::size_t max_steps = 2'000'000;
  bool dense = true;         // record every accepted step, not only segment ends
  int plane_axis = 1;        // component whose sign defines the side of the plane
  double crossing_resolution = 1e-10;
};

/// Integrates dx/dt = f(t, x) piecewise. The field returns std::nullopt where
/// it cannot be evaluated (too close to a node); such steps are retried smaller.
template <int N>
class DormandPrince {
 public:
  using State = OdeState<N>;

  DormandPrince(double t0, const State& x0, const IntegratorOptions& options)
      : t_(t0), x_(x0), h_(options.initial_step), opt_(options) {
    path_.times.push_back(t0);
    path_.states.push_back(x0);
    last_sign_ = sign(x0[opt_.plane_axis]);
  }

  double time() const { return t_; }
  const State& state() const { return x_; }
  const Path<N>& path() const { return path_; }
  Path<N> release() { return std::move(path_); }
  bool failed() const { return path_.status != PathStatus::ok; }

  /// Advances to exactly t_end. Returns false (and marks the path) on failure.
  template <class Field>
  bool advance_to(Field&& f, double t_end) {
    if (failed()) return false;
    auto k1 = f(t_, x_);
    if (!k1) return fail(PathStatus::step_underflow);
    while (t_ < t_end) {
      if (path_.accepted_steps + path_.rejected_steps >= opt_.max_steps)
        return fail(PathStatus::step_limit);
      double h = std::min({h_, opt_.max_step, t_end - t_});
      const bool last = (t_ + h >= t_end);
      if (last) h = t_end - t_;

      State stages[7];
      stages[0] = *k1;
      State y;
      double err = 0;
      const bool ok = step(f, t_, x_, h, stages, y, &err);
      if (!ok || err > 1.0) {
        ++path_.rejected_steps;
        h_ = ok ? h * std::max(0.2, 0.9 * std::pow(err, -0.2)) : h * 0.25;
        if (h_ < opt_.min_step) return fail(PathStatus::step_underflow);
        continue;
      }

      const double t_new = last ? t_end : t_ + h;
      const int s_new = sign(y[opt_.plane_axis]);
      if (s_new != 0 && last_sign_ != 0 && s_new != last_sign_) {
        path_.crossed_plane = true;
        if (!path_.first_crossing) path_.first_crossing = locate_crossing(f, t_, x_, h, *k1);
      }
      if (s_new != 0) last_sign_ = s_new;

      t_ = t_new;
      x_ = y;
      k1 = stages[6]; // FSAL
      ++path_.accepted_steps;
      if (opt_.dense || t_ == t_end) {
        path_.times.push_back(t_);
        path_.states.push_back(x_);
      }
      const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(grow, 0.2, 5.0);
      if (h_ < opt_.min_step) h_ = opt_.min_step;
    }
    return true;
  }

 private:
  static int sign(double v) { return (v > 0) - (v < 0); }

  bool fail(PathStatus status) {
    path_.status = status;
    return false;
  }

  // One Dormand-Prince step of size h. stages[0] must hold f(t, x); on success
  // stages[6] holds f(t + h, y). err is the scaled max-norm error estimate.
  template <class Field>
  bool step(Field& f, double t, const State& x, double h, State* k, State& y, double* err) const {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto eval = [&](double tt, const State& xx, State& out) {
      auto v = f(tt, xx);
      if (!v) return false;
      out = *v;
      return true;
    };
    if (!eval(t + c2 * h, x + h * a21 * k[0], k[1])) return false;
    if (!eval(t + c3 * h, x + h * (a31 * k[0] + a32 * k[1]), k[2])) return false;
    if (!eval(t + c4 * h, x + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]), k[3])) return false;
    if (!eval(t + c5 * h, x + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]), k[4]))
      return false;
    if (!eval(t + h, x + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]),
              k[5]))
      return false;
    y = x + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
    if (!eval(t + h, y, k[6])) return false;
    if (err) {
      const State e =
          h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
      *err = e.cwiseAbs().maxCoeff() / opt_.tol;
      if (!std::isfinite(*err) || !y.allFinite()) return false;
    }
    return true;
  }

  // Bisection on the step length until the sign change is bracketed to the resolution.
  template <class Field>
  double locate_crossing(Field& f, double t, const State& x, double h, const State& k1) const {
    const int start = last_sign_;
    double lo = 0, hi = h;
    State stages[7];
    State y;
    while (hi - lo > opt_.crossing_resolution) {
      const double mid = 0.5 * (lo + hi);
      stages[0] = k1;
      if (!step(f, t, x, mid, stages, y, nullptr)) break;
      if (sign(y[opt_.plane_axis]) == start)
        lo = mid;
      else
        hi = mid;
    }
    return t + hi;
  }

  double t_;
  State x_;
  double h_;
  IntegratorOptions opt_;
  Path<N> path_;
  int last_sign_ = 0;
};

} // namespace wedge
