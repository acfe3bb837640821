/**
 * @file tomography.hpp
 * @brief Linear-inversion qubit tomography with three measurement arms, and the
 * systematic error it inherits from an imperfect QWP/HWP pair.
 *
 * Each arm is a CompositeMeasurement: a single setting for the plain scheme
 * (NCM) or an ecm4 composite (ECM). With R0 the matrix whose columns are the
 * ideal arm vectors and R the realized ones, the estimator
 *
 *   s_hat = (R0^T)^{-1} m,   m_i = r_i . s
 *
 * carries the systematic error  (R0^T)^{-1} (R - R0)^T s.
 */
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polcomp/ecm.hpp"
#include "polcomp/error_model.hpp"
#include "polcomp/jones.hpp"

namespace polcomp {

/// Qubit state rho = (1 + s.sigma) / 2. Estimates may leave the Bloch ball.
struct QubitState {
  BlochVector s = BlochVector::Zero();

  bool is_physical(double slack = 1e-12) const { return s.norm() <= 1.0 + slack; }
};

inline void require_physical(const QubitState& state, const char* where) {
  if (!state.is_physical()) {
    throw std::invalid_argument(std::string(where) + ": Bloch vector norm exceeds 1");
  }
}

/// Expectation values of the three arm observables.
struct ProjectionRecord {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
};

enum class SchemeMode { NCM, ECM };

constexpr std::string_view mode_name(SchemeMode mode) {
  return mode == SchemeMode::NCM ? "NCM" : "ECM";
}

inline SchemeMode parse_mode(std::string_view name) {
  if (name == "NCM" || name == "ncm") return SchemeMode::NCM;
  if (name == "ECM" || name == "ecm") return SchemeMode::ECM;
  throw std::invalid_argument("unknown scheme mode: " + std::string(name));
}

class SingularScheme : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TomographyScheme {
 public:
  static constexpr double kMinAbsDet = 1e-6;

  explicit TomographyScheme(std::array<CompositeMeasurement, 3> arms)
      : arms_(std::move(arms)) {
    for (int i = 0; i < 3; ++i) r0_.col(i) = arms_[static_cast<std::size_t>(i)].ideal();
    if (std::abs(r0_.determinant()) <= kMinAbsDet) {
      throw SingularScheme("TomographyScheme: ideal measurement vectors are linearly dependent");
    }
    r0t_lu_.compute(Eigen::Matrix3d(r0_.transpose()));
  }

  const std::array<CompositeMeasurement, 3>& arms() const { return arms_; }
  const Eigen::Matrix3d& ideal_matrix() const { return r0_; }

  /// Columns are the effective realized vectors of each arm.
  Eigen::Matrix3d realized_matrix(const DeviceError& err) const {
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i) r.col(i) = effective_vector(arms_[static_cast<std::size_t>(i)], err);
    return r;
  }

  /// Applies (R0^T)^{-1}.
  Eigen::Vector3d invert(const Eigen::Vector3d& m) const { return r0t_lu_.solve(m); }

  std::size_t total_settings() const {
    std::size_t n = 0;
    for (const auto& arm : arms_) n += arm.size();
    return n;
  }

 private:
  std::array<CompositeMeasurement, 3> arms_;
  Eigen::Matrix3d r0_;
  Eigen::PartialPivLU<Eigen::Matrix3d> r0t_lu_;
};

/// Scheme built from three seeds, each wrapped as a single setting (NCM) or an ecm4 composite (ECM).
inline TomographyScheme make_scheme(std::span<const AngleSetting, 3> seeds, SchemeMode mode) {
  auto arm = [mode](const AngleSetting& s) {
    return mode == SchemeMode::ECM ? ecm4(s) : CompositeMeasurement::single(s);
  };
  return TomographyScheme({arm(seeds[0]), arm(seeds[1]), arm(seeds[2])});
}

/// sigma_x, sigma_y, sigma_z arms; R0 is the identity.
inline TomographyScheme pauli_scheme(SchemeMode mode) {
  const auto seeds = pauli_settings();
  return make_scheme(std::span<const AngleSetting, 3>(seeds), mode);
}

inline QubitState estimate(const TomographyScheme& scheme, const ProjectionRecord& record) {
  return {scheme.invert(record.m)};
}

/// Ideal or realized projections m_i = r_i . s.
inline ProjectionRecord project(const Eigen::Matrix3d& measurement_vectors, const QubitState& state) {
  return {measurement_vectors.transpose() * state.s};
}

/// Exact bias of the linear-inversion estimator under `err`; no Taylor truncation.
inline Eigen::Vector3d systematic_error_exact(const TomographyScheme& scheme,
                                              const QubitState& state, const DeviceError& err) {
  require_physical(state, "systematic_error_exact");
  const Eigen::Matrix3d delta = scheme.realized_matrix(err) - scheme.ideal_matrix();
  return scheme.invert(delta.transpose() * state.s);
}

/// Second-order coefficients of |Delta s|^2 per channel for the Pauli NCM scheme.
struct NcmCoefficients {
  double c_h = 0.0;
  double c_dh = 0.0;
  double c_dq = 0.0;
  double c_q = 0.0;

  double operator[](ErrorChannel ch) const {
    switch (ch) {
      case ErrorChannel::QAxis: return c_q;
      case ErrorChannel::HAxis: return c_h;
      case ErrorChannel::QPhase: return c_dq;
      case ErrorChannel::HPhase: return c_dh;
    }
    throw std::logic_error("bad ErrorChannel");
  }
};

inline NcmCoefficients ncm_quadratic_coefficients(const QubitState& state) {
  require_physical(state, "ncm_quadratic_coefficients");
  const double x = state.s.x(), y = state.s.y(), z = state.s.z();
  return {32 * y * y + 16 * z * z,
          0.5 * (x * x + z * z),
          x * x,
          4 * (x * x + 2 * y * y + 2 * z * z + 2 * y * z - 2 * x * y)};
}

/// ECM error is 4 (s_x^2 + s_z^2) eps_q^2 to second order, whatever the arms.
inline double ecm_quadratic_coefficient(const QubitState& state) {
  require_physical(state, "ecm_quadratic_coefficient");
  return 4.0 * (state.s.x() * state.s.x() + state.s.z() * state.s.z());
}

struct ErrorBudget {
  NcmCoefficients ncm_coefficients;
  std::array<double, 4> ncm_channel{};  // indexed like kAllChannels: q, h, dq, dh
  double ncm_total = 0.0;
  double ecm_coefficient = 0.0;
  double ecm_total = 0.0;

  double ncm(ErrorChannel ch) const { return ncm_channel[static_cast<std::size_t>(ch)]; }
};

/// Second-order error budget assuming independent channels; `magnitudes` uses absolute values.
inline ErrorBudget predicted_error_budget(const QubitState& state, const DeviceError& magnitudes) {
  ErrorBudget b;
  b.ncm_coefficients = ncm_quadratic_coefficients(state);
  for (ErrorChannel ch : kAllChannels) {
    const double eps = component(magnitudes, ch);
    const double value = b.ncm_coefficients[ch] * eps * eps;
    b.ncm_channel[static_cast<std::size_t>(ch)] = value;
    b.ncm_total += value;
  }
  b.ecm_coefficient = ecm_quadratic_coefficient(state);
  b.ecm_total = b.ecm_coefficient * magnitudes.eps_q * magnitudes.eps_q;
  return b;
}

// --- Coefficient fitting -----------------------------------------------------

/**
 * Leading coefficient c2 of f(eps) = c2 eps^2 + c3 eps^3 + c4 eps^4 + ...
 * from an exact parabola through g = f / eps^2 at three points.
 */
template <class Fn>
double fit_quadratic_three_point(Fn&& f, double e1 = 5e-4, double e2 = 1e-3, double e3 = 2e-3) {
  const double g1 = f(e1) / (e1 * e1);
  const double g2 = f(e2) / (e2 * e2);
  const double g3 = f(e3) / (e3 * e3);
  // Lagrange interpolation of g evaluated at eps = 0.
  return g1 * (e2 * e3) / ((e1 - e2) * (e1 - e3)) +
         g2 * (e1 * e3) / ((e2 - e1) * (e2 - e3)) +
         g3 * (e1 * e2) / ((e3 - e1) * (e3 - e2));
}

/// Least-squares variant over a geometric grid; g = f / eps^2 is fit by c2 + c3 eps + c4 eps^2.
template <class Fn>
double fit_quadratic_least_squares(Fn&& f, double lo = 5e-4, double hi = 2e-3, int samples = 12) {
  const auto grid = geometric_grid(lo, hi, samples);
  Eigen::MatrixXd a(samples, 3);
  Eigen::VectorXd g(samples);
  for (int i = 0; i < samples; ++i) {
    const double e = grid[static_cast<std::size_t>(i)];
    a.row(i) << 1.0, e, e * e;
    g(i) = f(e) / (e * e);
  }
  return a.colPivHouseholderQr().solve(g)(0);
}

/// |Delta s|^2 with only `channel` perturbed by eps.
inline double channel_error_sq(const TomographyScheme& scheme, const QubitState& state,
                               ErrorChannel channel, double eps) {
  return systematic_error_exact(scheme, state, single_channel(channel, eps)).squaredNorm();
}

}  // namespace polcomp
