/**
 * @file photon_sim.hpp
 * @brief Finite-statistics Monte Carlo of the tomography experiment.
 *
 * Every sub-setting of an arm receives an equal share of the arm's photons,
 * and its "+" count is drawn from Binomial(N_sub, (1 + r.s)/2) with r the
 * realized measurement vector. Each run draws from its own generator whose
 * seed is derived from (master seed, grid index, run index), so results do
 * not depend on scheduling.
 */
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "polcomp/ecm.hpp"
#include "polcomp/error_model.hpp"
#include "polcomp/tomography.hpp"

namespace polcomp {

struct ExperimentConfig {
  std::int64_t photons_per_arm = 3'000'000;
  int runs = 5;
  std::uint64_t seed = 0;
  QubitState state;
  TomographyScheme scheme = pauli_scheme(SchemeMode::NCM);
  DeviceError err;
};

struct SettingCounts {
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;

  std::int64_t total() const { return n_plus + n_minus; }
  bool operator==(const SettingCounts&) const = default;
};

/// Outcome counts per arm, per sub-setting (same order as the arm's settings).
struct CountRecord {
  std::array<std::vector<SettingCounts>, 3> arms;

  bool operator==(const CountRecord&) const = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream key for (master, grid point, run).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t run) {
  return mix64(mix64(mix64(master) ^ point) ^ (run + 0x632BE59BD9B4E019ULL));
}

/// Photons given to each sub-setting of `arm`. Throws unless the split is exact.
inline std::int64_t photons_per_setting(const CompositeMeasurement& arm, std::int64_t photons_per_arm) {
  if (photons_per_arm < 1) throw std::invalid_argument("photons_per_arm must be >= 1");
  const auto n = static_cast<std::int64_t>(arm.size());
  if (photons_per_arm % n != 0) {
    throw std::invalid_argument("photons_per_arm must be divisible by the number of sub-settings");
  }
  return photons_per_arm / n;
}

/// Probability of the "+" outcome; rejects values outside [0, 1] by more than 1e-12.
inline double plus_probability(const BlochVector& r, const QubitState& state) {
  const double p = 0.5 * (1.0 + r.dot(state.s));
  if (p < -1e-12 || p > 1.0 + 1e-12) {
    throw std::domain_error("outcome probability outside [0, 1]: invalid state or measurement vector");
  }
  return std::clamp(p, 0.0, 1.0);
}

template <class Rng>
CountRecord sample_counts(const ExperimentConfig& cfg, Rng& rng) {
  require_physical(cfg.state, "simulate_counts");
  CountRecord record;
  for (std::size_t a = 0; a < 3; ++a) {
    const CompositeMeasurement& arm = cfg.scheme.arms()[a];
    const std::int64_t n = photons_per_setting(arm, cfg.photons_per_arm);
    for (const auto& s : arm.settings()) {
      const double p = plus_probability(realized_vector(s.q, s.h, cfg.err), cfg.state);
      std::int64_t plus;
      if (p <= 0.0) {
        plus = 0;
      } else if (p >= 1.0) {
        plus = n;
      } else {
        plus = std::binomial_distribution<std::int64_t>(n, p)(rng);
      }
      record.arms[a].push_back({plus, n - plus});
    }
  }
  return record;
}

/// One experiment drawn from the stream keyed by cfg.seed.
inline CountRecord simulate_counts(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0, 0));
  return sample_counts(cfg, rng);
}

/// Frequency estimate 2 n+/N - 1 per sub-setting, averaged per arm, then linear inversion.
inline QubitState estimate_from_counts(const TomographyScheme& scheme, const CountRecord& counts) {
  ProjectionRecord record;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& arm_counts = counts.arms[a];
    if (arm_counts.size() != scheme.arms()[a].size()) {
      throw std::invalid_argument("estimate_from_counts: counts do not match the scheme");
    }
    double sum = 0.0;
    for (const auto& c : arm_counts) {
      if (c.total() <= 0) throw std::invalid_argument("estimate_from_counts: empty sub-setting");
      sum += 2.0 * static_cast<double>(c.n_plus) / static_cast<double>(c.total()) - 1.0;
    }
    record.m(static_cast<Eigen::Index>(a)) = sum / static_cast<double>(arm_counts.size());
  }
  return estimate(scheme, record);
}

/// Infinite-statistics limit: exact probabilities replace frequencies.
inline QubitState estimate_from_probabilities(const TomographyScheme& scheme, const QubitState& state,
                                              const DeviceError& err) {
  ProjectionRecord record;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& arm = scheme.arms()[a];
    double sum = 0.0;
    for (const auto& s : arm.settings()) {
      sum += 2.0 * plus_probability(realized_vector(s.q, s.h, err), state) - 1.0;
    }
    record.m(static_cast<Eigen::Index>(a)) = sum / static_cast<double>(arm.size());
  }
  return estimate(scheme, record);
}

/// |s_hat - s|^2 for each of cfg.runs runs at grid point `point`.
inline std::vector<double> run_errors(const ExperimentConfig& cfg, std::uint64_t point = 0) {
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(cfg.runs));
  for (int run = 0; run < cfg.runs; ++run) {
    std::mt19937_64 rng(derive_seed(cfg.seed, point, static_cast<std::uint64_t>(run)));
    const QubitState est = estimate_from_counts(cfg.scheme, sample_counts(cfg, rng));
    errors.push_back((est.s - cfg.state.s).squaredNorm());
  }
  return errors;
}

struct RunStatistics {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single run
};

inline RunStatistics summarize(const std::vector<double>& values) {
  RunStatistics st;
  if (values.empty()) return st;
  for (double v : values) st.mean += v;
  st.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return st;
}

struct SweepRow {
  double epsilon = 0.0;  // radians
  double mean_err_sq = 0.0;
  double std_err_sq = 0.0;
};

/**
 * For each eps in `grid`, overwrite the `channel` component of cfg.err with eps
 * and run the simulate-estimate pipeline cfg.runs times. Grid points are
 * distributed over `threads` workers; rows are merged by grid index.
 */
inline std::vector<SweepRow> error_sweep(const ExperimentConfig& cfg, ErrorChannel channel,
                                         const std::vector<double>& grid, unsigned threads = 1) {
  if (grid.empty()) throw std::invalid_argument("error_sweep: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("error_sweep: grid must be sorted");
  }
  if (cfg.runs < 1) throw std::invalid_argument("error_sweep: runs must be >= 1");
  require_physical(cfg.state, "error_sweep");
  for (const auto& arm : cfg.scheme.arms()) photons_per_setting(arm, cfg.photons_per_arm);

  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      ExperimentConfig point_cfg = cfg;
      component(point_cfg.err, channel) = grid[i];
      const RunStatistics st = summarize(run_errors(point_cfg, i));
      rows[i] = {grid[i], st.mean, st.std};
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

}  // namespace polcomp
