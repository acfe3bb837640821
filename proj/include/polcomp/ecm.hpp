/**
 * @file ecm.hpp
 * @brief Error-compensation measurements (ECM): composites of angle settings that
 * share one ideal measurement vector and cancel first-order device errors.
 *
 * Photons are split into n equal groups, one per setting, so the effective
 * measurement vector is the plain average of the realized vectors. The
 * canonical four-setting scheme cancels the HWP axis error and both
 * retardance errors to first order; the QWP axis error is only reduced.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polcomp/error_model.hpp"
#include "polcomp/jones.hpp"

namespace polcomp {

/// Nominal QWP/HWP rotation angles (radians).
struct AngleSetting {
  double q = 0.0;
  double h = 0.0;

  double t() const { return 2.0 * h - q; }
  BlochVector ideal() const { return ideal_vector(q, h); }

  bool operator==(const AngleSetting&) const = default;
};

/// Equal-weight average over settings that realize the same ideal measurement.
class CompositeMeasurement {
 public:
  static constexpr double kSharedVectorTol = 1e-10;

  explicit CompositeMeasurement(std::vector<AngleSetting> settings)
      : settings_(std::move(settings)) {
    if (settings_.empty()) {
      throw std::invalid_argument("CompositeMeasurement: at least one setting required");
    }
    ideal_ = settings_.front().ideal();
    for (const auto& s : settings_) {
      if ((s.ideal() - ideal_).lpNorm<Eigen::Infinity>() > kSharedVectorTol) {
        throw std::invalid_argument(
            "CompositeMeasurement: settings do not share one ideal measurement vector");
      }
    }
  }

  static CompositeMeasurement single(AngleSetting s) { return CompositeMeasurement({s}); }

  const std::vector<AngleSetting>& settings() const { return settings_; }
  std::size_t size() const { return settings_.size(); }
  double weight() const { return 1.0 / static_cast<double>(settings_.size()); }
  const BlochVector& ideal() const { return ideal_; }

 private:
  std::vector<AngleSetting> settings_;
  BlochVector ideal_;
};

/// Generator of the residual QWP-axis sensitivity: (U0 r) = (r_z, 0, -r_x).
inline Eigen::Matrix3d u0_matrix() {
  Eigen::Matrix3d u = Eigen::Matrix3d::Zero();
  u(0, 2) = 1.0;
  u(2, 0) = -1.0;
  return u;
}

/**
 * Partner setting that shares the ideal vector of `setting` and cancels its
 * first-order sensitivity to `channel`:
 *
 *   HAxis, QPhase:  (q + (k + 1/2) pi,  q - h + k' pi/2)
 *   HPhase:         (q + k pi,          h + (k' + 1/2) pi)
 *
 * The QWP axis error admits no general partner; QAxis throws.
 */
inline AngleSetting compensating_pair(const AngleSetting& setting, ErrorChannel channel,
                                      int k = 0, int k_prime = 0) {
  switch (channel) {
    case ErrorChannel::HAxis:
    case ErrorChannel::QPhase:
      return {setting.q + (k + 0.5) * kPi, setting.q - setting.h + k_prime * kPi / 2.0};
    case ErrorChannel::HPhase:
      return {setting.q + k * kPi, setting.h + (k_prime + 0.5) * kPi};
    case ErrorChannel::QAxis:
      break;
  }
  throw std::invalid_argument("compensating_pair: QWP axis error cannot be compensated by a pair");
}

/**
 * Four-setting ECM seeded at (q1, h1):
 *   (q1, h1), (q1 + pi/2, q1 - h1), (q1, h1 + pi/2), (q1 + pi/2, q1 - h1 + pi/2).
 * Settings 1-2 and 3-4 cancel HAxis/QPhase; settings 1-3 and 2-4 cancel HPhase.
 */
inline CompositeMeasurement ecm4(const AngleSetting& seed) {
  const AngleSetting s2{seed.q + kPi / 2.0, seed.q - seed.h};
  const AngleSetting s3{seed.q, seed.h + kPi / 2.0};
  const AngleSetting s4{s2.q, s2.h + kPi / 2.0};
  return CompositeMeasurement({seed, s2, s3, s4});
}

inline BlochVector effective_vector(const CompositeMeasurement& cm, const DeviceError& err) {
  BlochVector sum = BlochVector::Zero();
  for (const auto& s : cm.settings()) sum += realized_vector(s.q, s.h, err);
  return sum * cm.weight();
}

inline Eigen::Vector3d summed_sensitivity(const CompositeMeasurement& cm, ErrorChannel channel) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& s : cm.settings()) sum += analytic_partial(s.q, s.h, channel);
  return sum * cm.weight();
}

/// |d r_e / d eps_q|^2; equals 4 (1 - r_y^2) for an ecm4 composite.
inline double residual_q_norm_sq(const CompositeMeasurement& cm) {
  return summed_sensitivity(cm, ErrorChannel::QAxis).squaredNorm();
}

/// Settings measuring sigma_x, sigma_y, sigma_z with an ideal QWP/HWP pair.
inline std::array<AngleSetting, 3> pauli_settings() {
  return {AngleSetting{deg_to_rad(45.0), deg_to_rad(22.5)},
          AngleSetting{0.0, deg_to_rad(22.5)},
          AngleSetting{0.0, 0.0}};
}

struct QSensitivityTotals {
  double ecm_total = 0.0;
  double ncm_total = 0.0;
};

/// Summed squared QWP-axis sensitivity over the sigma_x/y/z triple, with and without ECM.
inline QSensitivityTotals mub_q_sensitivity_totals() {
  QSensitivityTotals totals;
  for (const auto& s : pauli_settings()) {
    totals.ecm_total += residual_q_norm_sq(ecm4(s));
    totals.ncm_total += analytic_partial(s.q, s.h, ErrorChannel::QAxis).squaredNorm();
  }
  return totals;
}

// --- QWP axis pair infeasibility -------------------------------------------

/**
 * The six conditions a pair must satisfy to share an ideal vector and cancel
 * the QWP-axis sensitivity, written as residuals that vanish on a solution.
 */
inline std::array<double, 6> q_axis_pair_conditions(const AngleSetting& a, const AngleSetting& b) {
  using std::cos;
  using std::sin;
  const double ua = 4 * a.h - 4 * a.q;
  const double ub = 4 * b.h - 4 * b.q;
  return {sin(2 * a.t()) - sin(2 * b.t()), cos(2 * a.t()) + cos(2 * b.t()),
          sin(2 * a.q) + sin(2 * b.q),     cos(2 * a.q) + cos(2 * b.q),
          cos(ua) + cos(ub),               sin(ua) + sin(ub)};
}

inline double q_axis_pair_residual(const AngleSetting& a, const AngleSetting& b) {
  double worst = 0.0;
  for (double c : q_axis_pair_conditions(a, b)) worst = std::max(worst, std::abs(c));
  return worst;
}

struct PairSearchResult {
  AngleSetting best;
  double best_residual = 0.0;
  std::vector<AngleSetting> hits;  // refined partners with residual below tolerance
};

namespace detail {

inline double pair_objective(const AngleSetting& a, const AngleSetting& b) {
  double sum = 0.0;
  for (double c : q_axis_pair_conditions(a, b)) sum += c * c;
  return sum;
}

// Compass search on the smooth sum-of-squares residual.
inline AngleSetting refine_partner(const AngleSetting& seed, AngleSetting b, double step) {
  double f = pair_objective(seed, b);
  while (step > 1e-12) {
    bool moved = false;
    for (const auto& [dq, dh] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
      const AngleSetting trial{b.q + dq * step, b.h + dh * step};
      const double ft = pair_objective(seed, trial);
      if (ft < f) {
        f = ft;
        b = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return b;
}

}  // namespace detail

/**
 * Exhaustive search for a QWP-axis compensating partner of `seed` on a
 * grid_points x grid_points grid over (q2, h2) in [0, pi]^2. The best few grid
 * cells are refined locally; any refined partner with residual below `tol`
 * is reported as a hit.
 */
inline PairSearchResult search_q_axis_partner(const AngleSetting& seed, int grid_points = 721,
                                              double tol = 1e-3, int refine_count = 8) {
  if (grid_points < 2) throw std::invalid_argument("search_q_axis_partner: grid too small");
  const double spacing = kPi / (grid_points - 1);

  std::vector<std::pair<double, AngleSetting>> cells;
  cells.reserve(static_cast<std::size_t>(grid_points) * static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    for (int j = 0; j < grid_points; ++j) {
      const AngleSetting b{i * spacing, j * spacing};
      cells.emplace_back(q_axis_pair_residual(seed, b), b);
    }
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(refine_count), cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep), cells.end(),
                    [](const auto& x, const auto& y) { return x.first < y.first; });

  PairSearchResult result{cells.front().second, cells.front().first, {}};
  for (std::size_t i = 0; i < keep; ++i) {
    const AngleSetting refined = detail::refine_partner(seed, cells[i].second, spacing);
    const double r = q_axis_pair_residual(seed, refined);
    if (r < result.best_residual) {
      result.best_residual = r;
      result.best = refined;
    }
    if (r < tol) result.hits.push_back(refined);
  }
  return result;
}

}  // namespace polcomp
