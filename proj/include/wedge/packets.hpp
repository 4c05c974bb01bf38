// Analytic Gaussian wave packets under free evolution (hbar = m = 1).
//
// A packet born at time t_b with center c, momentum p, width s and phase phi
// has the amplitude
//
//   g(x, t) = (2 pi)^(-D/4) s^(D/2) alpha^(-D/2)
//             exp(-|x - c - p tau|^2 / (4 alpha) + i p.(x - c) - i |p|^2 tau / 2 + i phi)
//
// with tau = t - t_b and the complex width alpha = s^2 + i tau / 2. This is the
// exact solution of the free Schroedinger equation for the Gaussian initial
// condition, so evaluation never needs a grid.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wedge {

template <typename Real, int Dim>
using RealVector = Eigen::Matrix<Real, Dim, 1>;

template <typename Real, int Dim>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Dim, 1>;

template <typename Real, int Dim>
struct GaussianPacket {
  RealVector<Real, Dim> center = RealVector<Real, Dim>::Zero();
  RealVector<Real, Dim> momentum = RealVector<Real, Dim>::Zero();
  Real width{1};
  Real global_phase{0};
  Real birth_time{0};
};

using Packet2 = GaussianPacket<double, 2>;
using Packet1 = GaussianPacket<double, 1>;

/// A packet frozen at one time: everything needed to evaluate it and its gradient.
template <typename Real, int Dim>
struct EvolvedPacket {
  using Vec = RealVector<Real, Dim>;
  using Complex = std::complex<Real>;

  Vec center;    // center at `time`
  Vec momentum;
  Vec origin;    // center at birth; phase reference
  Complex alpha; // width^2 + i (time - birth) / 2
  Complex log_prefactor;
  Real time{0};

  Real width() const { return std::sqrt(alpha.real()); }
  /// Standard deviation of |g|^2 along each axis.
  Real position_stddev() const { return std::abs(alpha) / width(); }

  Complex log_value(const Vec& x) const {
    const Vec r = x - center;
    return log_prefactor - r.squaredNorm() / (Real(4) * alpha) +
           Complex(0, momentum.dot(x - origin));
  }

  Complex operator()(const Vec& x) const { return std::exp(log_value(x)); }

  /// grad g / g, which is affine in x.
  ComplexVector<Real, Dim> log_gradient(const Vec& x) const {
    const Complex inv = Real(-1) / (Real(2) * alpha);
    ComplexVector<Real, Dim> out;
    for (int k = 0; k < Dim; ++k)
      out[k] = inv * (x[k] - center[k]) + Complex(0, momentum[k]);
    return out;
  }
};

template <typename Real, int Dim>
EvolvedPacket<Real, Dim> evolve_packet(const GaussianPacket<Real, Dim>& p, Real t) {
  using Complex = std::complex<Real>;
  if (!(t >= p.birth_time))
    throw std::invalid_argument("evolve_packet: time precedes packet birth");
  if (!(p.width > 0)) throw std::invalid_argument("evolve_packet: width must be positive");
  const Real tau = t - p.birth_time;
  const Real half_dim = Real(Dim) / 2;

  EvolvedPacket<Real, Dim> e;
  e.center = p.center + p.momentum * tau;
  e.momentum = p.momentum;
  e.origin = p.center;
  e.alpha = Complex(p.width * p.width, tau / 2);
  e.time = t;
  e.log_prefactor = Complex(-half_dim / 2 * std::log(2 * std::numbers::pi_v<Real>) +
                                half_dim * std::log(p.width),
                            p.global_phase - p.momentum.squaredNorm() * tau / 2) -
                    half_dim * std::log(e.alpha);
  return e;
}

/// <a|b> for two frozen packets at the same time, in closed form.
template <typename Real, int Dim>
std::complex<Real> overlap(const EvolvedPacket<Real, Dim>& a, const EvolvedPacket<Real, Dim>& b) {
  using Complex = std::complex<Real>;
  const Complex ia = Real(1) / (Real(4) * std::conj(a.alpha));
  const Complex ib = Real(1) / (Real(4) * b.alpha);
  const Complex quad = ia + ib;

  Complex exponent = std::conj(a.log_prefactor) + b.log_prefactor;
  for (int k = 0; k < Dim; ++k) {
    const Complex lin = Real(2) * ia * a.center[k] + Real(2) * ib * b.center[k] +
                        Complex(0, b.momentum[k] - a.momentum[k]);
    exponent += -ia * (a.center[k] * a.center[k]) - ib * (b.center[k] * b.center[k]) +
                Complex(0, a.momentum[k] * a.origin[k] - b.momentum[k] * b.origin[k]) +
                lin * lin / (Real(4) * quad);
  }
  exponent += Real(Dim) / 2 * std::log(std::numbers::pi_v<Real> / quad);
  return std::exp(exponent);
}

template <typename Real, int Dim>
std::complex<Real> overlap(const GaussianPacket<Real, Dim>& a, const GaussianPacket<Real, Dim>& b,
                           Real t) {
  return overlap(evolve_packet(a, t), evolve_packet(b, t));
}

template <typename Real, int Dim>
struct Superposition {
  struct Term {
    std::complex<Real> amplitude;
    GaussianPacket<Real, Dim> packet;
  };
  std::vector<Term> terms;

  Real latest_birth() const {
    Real t = -std::numeric_limits<Real>::infinity();
    for (const auto& term : terms) t = std::max(t, term.packet.birth_time);
    return t;
  }
};

using Superposition2 = Superposition<double, 2>;

template <typename Real, int Dim>
std::complex<Real> evaluate(const Superposition<Real, Dim>& psi, const RealVector<Real, Dim>& x,
                            Real t) {
  std::complex<Real> sum{0};
  for (const auto& term : psi.terms) sum += term.amplitude * evolve_packet(term.packet, t)(x);
  return sum;
}

template <typename Real, int Dim>
struct ValueAndGradient {
  std::complex<Real> value;
  ComplexVector<Real, Dim> gradient;
};

template <typename Real, int Dim>
ValueAndGradient<Real, Dim> value_and_gradient(const Superposition<Real, Dim>& psi,
                                               const RealVector<Real, Dim>& x, Real t) {
  ValueAndGradient<Real, Dim> out{std::complex<Real>{0}, ComplexVector<Real, Dim>::Zero()};
  for (const auto& term : psi.terms) {
    const auto g = evolve_packet(term.packet, t);
    const std::complex<Real> v = term.amplitude * g(x);
    out.value += v;
    out.gradient += v * g.log_gradient(x);
  }
  return out;
}

template <typename Real, int Dim>
ComplexVector<Real, Dim> gradient(const Superposition<Real, Dim>& psi,
                                  const RealVector<Real, Dim>& x, Real t) {
  return value_and_gradient(psi, x, t).gradient;
}

/// <phi|psi> at time t.
template <typename Real, int Dim>
std::complex<Real> inner(const Superposition<Real, Dim>& phi, const Superposition<Real, Dim>& psi,
                         Real t) {
  std::complex<Real> sum{0};
  for (const auto& a : phi.terms) {
    const auto ga = evolve_packet(a.packet, t);
    for (const auto& b : psi.terms)
      sum += std::conj(a.amplitude) * b.amplitude * overlap(ga, evolve_packet(b.packet, t));
  }
  return sum;
}

template <typename Real, int Dim>
Real norm_squared(const Superposition<Real, Dim>& psi, Real t) {
  return inner(psi, psi, t).real();
}

template <typename Real, int Dim>
Superposition<Real, Dim> normalized(Superposition<Real, Dim> psi, Real t) {
  const Real n = std::sqrt(norm_squared(psi, t));
  for (auto& term : psi.terms) term.amplitude /= n;
  return psi;
}

} // namespace wedge
