/**
 * @file error_model.hpp
 * @brief Measurement vector of an imperfect QWP/HWP pair and its first-order sensitivities.
 */
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polcomp/jones.hpp"

namespace polcomp {

/// Constant deviations of the two plates from their nominal axes and retardances (radians).
struct DeviceError {
  double eps_q = 0.0;   // QWP axis
  double eps_h = 0.0;   // HWP axis
  double eps_dq = 0.0;  // QWP retardance
  double eps_dh = 0.0;  // HWP retardance

  bool operator==(const DeviceError&) const = default;
};

enum class ErrorChannel { QAxis, HAxis, QPhase, HPhase };

inline constexpr std::array<ErrorChannel, 4> kAllChannels = {
    ErrorChannel::QAxis, ErrorChannel::HAxis, ErrorChannel::QPhase, ErrorChannel::HPhase};

/// Short name used in files and on the command line: q, h, dq, dh.
constexpr std::string_view channel_name(ErrorChannel ch) {
  switch (ch) {
    case ErrorChannel::QAxis: return "q";
    case ErrorChannel::HAxis: return "h";
    case ErrorChannel::QPhase: return "dq";
    case ErrorChannel::HPhase: return "dh";
  }
  return "?";
}

/// Accepts the short names as well as Q-AXIS, H-AXIS, Q-PHASE, H-PHASE.
inline ErrorChannel parse_channel(std::string_view name) {
  if (name == "q" || name == "Q-AXIS") return ErrorChannel::QAxis;
  if (name == "h" || name == "H-AXIS") return ErrorChannel::HAxis;
  if (name == "dq" || name == "Q-PHASE") return ErrorChannel::QPhase;
  if (name == "dh" || name == "H-PHASE") return ErrorChannel::HPhase;
  throw std::invalid_argument("unknown error channel: " + std::string(name));
}

inline double& component(DeviceError& err, ErrorChannel ch) {
  switch (ch) {
    case ErrorChannel::QAxis: return err.eps_q;
    case ErrorChannel::HAxis: return err.eps_h;
    case ErrorChannel::QPhase: return err.eps_dq;
    case ErrorChannel::HPhase: return err.eps_dh;
  }
  throw std::logic_error("bad ErrorChannel");
}

inline double component(const DeviceError& err, ErrorChannel ch) {
  DeviceError copy = err;
  return component(copy, ch);
}

/// DeviceError with a single nonzero channel.
inline DeviceError single_channel(ErrorChannel ch, double eps) {
  DeviceError err;
  component(err, ch) = eps;
  return err;
}

/// Measurement vector actually realized at nominal setting (q, h) under `err`.
inline BlochVector realized_vector(double q, double h, const DeviceError& err) {
  return measured_bloch_general(q + err.eps_q, kQuarterWave + err.eps_dq,
                                h + err.eps_h, kHalfWave + err.eps_dh);
}

/// Closed-form derivative of the realized vector w.r.t. one channel, taken at err = 0.
inline Eigen::Vector3d analytic_partial(double q, double h, ErrorChannel ch) {
  using std::cos;
  using std::sin;
  const double t = 2.0 * h - q;
  switch (ch) {
    case ErrorChannel::HAxis:
      return 4.0 * Eigen::Vector3d(-sin(2 * q) * sin(2 * t), cos(2 * t),
                                   -cos(2 * q) * sin(2 * t));
    case ErrorChannel::QPhase:
      return {-cos(2 * q) * sin(2 * t), 0.0, sin(2 * q) * sin(2 * t)};
    case ErrorChannel::HPhase:
      return {-cos(2 * q) * sin(2 * h), 0.0, sin(2 * q) * sin(2 * h)};
    case ErrorChannel::QAxis:
      return 2.0 * Eigen::Vector3d(cos(4 * h - 4 * q), -cos(2 * t), sin(4 * h - 4 * q));
  }
  throw std::logic_error("bad ErrorChannel");
}

inline constexpr double kDefaultFdStep = 1e-5;

/// Central finite difference of realized_vector along one channel. Step must lie in [1e-8, 1e-2].
inline Eigen::Vector3d fd_partial(double q, double h, ErrorChannel ch,
                                  double step = kDefaultFdStep) {
  if (!(step >= 1e-8 && step <= 1e-2)) {
    throw std::out_of_range("fd_partial: step must lie in [1e-8, 1e-2]");
  }
  const BlochVector plus = realized_vector(q, h, single_channel(ch, step));
  const BlochVector minus = realized_vector(q, h, single_channel(ch, -step));
  return (plus - minus) / (2.0 * step);
}

/// Raised when a log-log fit has nothing meaningful to fit.
class DegenerateFit : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// `samples` geometrically spaced points covering [lo, hi].
inline std::vector<double> geometric_grid(double lo, double hi, int samples) {
  std::vector<double> grid(static_cast<std::size_t>(samples));
  const double ratio = std::log(hi / lo) / (samples - 1);
  for (int i = 0; i < samples; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i);
  grid.back() = hi;
  return grid;
}

/**
 * Unweighted least-squares slope of log(error_norm(eps)) against log(eps) over
 * a geometric grid. Slope 1 certifies first-order error, slope 2 second-order.
 *
 * Requires eps_max >= 10 eps_min and samples >= 8. Throws DegenerateFit when
 * every sampled norm is below 1e-14 or any norm is nonpositive.
 */
template <class ErrorNorm>
double scaling_exponent(ErrorNorm&& error_norm, double eps_min, double eps_max, int samples) {
  if (!(eps_min > 0.0) || !(eps_max >= 10.0 * eps_min)) {
    throw std::invalid_argument("scaling_exponent: range must span at least one decade");
  }
  if (samples < 8) throw std::invalid_argument("scaling_exponent: need at least 8 samples");

  std::vector<double> xs, ys;
  bool any_resolved = false;
  for (double eps : geometric_grid(eps_min, eps_max, samples)) {
    const double value = error_norm(eps);
    if (value >= 1e-14) any_resolved = true;
    if (!(value > 0.0)) throw DegenerateFit("scaling_exponent: nonpositive error norm");
    xs.push_back(std::log(eps));
    ys.push_back(std::log(value));
  }
  if (!any_resolved) throw DegenerateFit("scaling_exponent: error norms underflow");

  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace polcomp
