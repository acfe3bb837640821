/**
 * @file jones.hpp
 * @brief Jones-calculus model of the QWP-HWP-PBS measurement device.
 *
 * A quarter-wave plate at angle q followed by a half-wave plate at angle h
 * maps |H> onto the +1 eigenstate of the measured Pauli operator r.sigma.
 * The Bloch vector of that state is the measurement vector r.
 *
 * All angles are in radians. Degrees appear only at the CLI boundary.
 */
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace polcomp {

using JonesVector = Eigen::Vector2cd;
using JonesMatrix = Eigen::Matrix2cd;
using BlochVector = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegree = kPi / 180.0;

constexpr double deg_to_rad(double deg) { return deg * kDegree; }
constexpr double rad_to_deg(double rad) { return rad / kDegree; }

/// Linear retarder: optic axis rotated by `theta` from horizontal, retardance `delta`.
struct WavePlate {
  double theta = 0.0;
  double delta = 0.0;
};

inline constexpr double kQuarterWave = kPi / 2.0;
inline constexpr double kHalfWave = kPi;

/**
 * Transfer matrix of a wave plate.
 *
 *   [ cos^2 + e^{id} sin^2        (1 - e^{id}) sin(2 theta)/2 ]
 *   [ (1 - e^{id}) sin(2 theta)/2        sin^2 + e^{id} cos^2 ]
 *
 * No symmetrizing e^{-id/2} phase is applied, so the fast axis carries phase 1.
 */
inline JonesMatrix waveplate_unitary(const WavePlate& plate) {
  const std::complex<double> e = std::polar(1.0, plate.delta);
  const double c = std::cos(plate.theta);
  const double s = std::sin(plate.theta);
  const std::complex<double> off = 0.5 * (1.0 - e) * std::sin(2.0 * plate.theta);
  JonesMatrix m;
  m << c * c + e * (s * s), off,
       off, s * s + e * (c * c);
  return m;
}

/// State emerging from U(q, dq) U(h, dh) |H>.
inline JonesVector propagate(double q, double dq, double h, double dh) {
  const JonesVector horizontal(1.0, 0.0);
  return waveplate_unitary({q, dq}) * (waveplate_unitary({h, dh}) * horizontal);
}

/// Expectation values of (sigma_x, sigma_y, sigma_z). Throws if `psi` is not normalized within 1e-9.
inline BlochVector bloch_from_jones(const JonesVector& psi) {
  const double norm_sq = psi.squaredNorm();
  if (std::abs(norm_sq - 1.0) > 1e-9) {
    throw std::invalid_argument("bloch_from_jones: Jones vector is not normalized");
  }
  const std::complex<double> coherence = std::conj(psi(0)) * psi(1);
  return {2.0 * coherence.real(), 2.0 * coherence.imag(),
          std::norm(psi(0)) - std::norm(psi(1))};
}

/**
 * Closed-form Bloch vector for arbitrary retardances:
 *
 *   r = A1 cos(dq) + A2 sin(dq) + A3
 *
 * with A1, A2, A3 depending on (q, h, dh) only. Agrees with
 * bloch_from_jones(propagate(q, dq, h, dh)) to machine precision.
 */
inline BlochVector measured_bloch_general(double q, double dq, double h, double dh) {
  using std::cos;
  using std::sin;
  const double c = cos(dh) - 1.0;
  const double sd = sin(dh);
  const double s4q = sin(4 * q), c4q = cos(4 * q);
  const double s4h = sin(4 * h), c4h = cos(4 * h);
  const double s4qh = sin(4 * q - 4 * h), c4qh = cos(4 * q - 4 * h);
  const double s2h = sin(2 * h);

  const BlochVector a1 =
      0.25 * BlochVector(c * (s4qh - s4q - s4h) - 2 * s4q,
                         -4 * sd * s2h,
                         c * (c4qh - c4q - c4h + 1) - 2 * c4q + 2);
  const BlochVector a2(sd * cos(2 * q) * s2h,
                       -c * cos(2 * q - 2 * h) * s2h - sin(2 * q),
                       -sd * sin(2 * q) * s2h);
  const BlochVector a3 =
      0.25 * BlochVector(-c * (s4qh - s4q + s4h) + 2 * s4q,
                         0.0,
                         -c * (c4qh - c4q + c4h - 1) + 2 * c4q + 2);
  return a1 * cos(dq) + a2 * sin(dq) + a3;
}

/// Measurement vector of an ideal QWP/HWP pair; t = 2h - q.
inline BlochVector ideal_vector(double q, double h) {
  const double t = 2.0 * h - q;
  return {std::sin(2 * q) * std::cos(2 * t), std::sin(2 * t),
          std::cos(2 * q) * std::cos(2 * t)};
}

}  // namespace polcomp
