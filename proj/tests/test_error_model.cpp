#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polcomp/ecm.hpp"
#include "polcomp/error_model.hpp"

namespace polcomp {
namespace {

using testing::kDeg;

double RelativeGap(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

TEST(RealizedVector, IdealDeviceGivesIdealVector) {
  for (double q : {0.0, 0.3, 1.9})
    for (double h : {0.0, 0.7, -2.0})
      EXPECT_LE((realized_vector(q, h, {}) - ideal_vector(q, h)).norm(), 1e-12);
}

TEST(RealizedVector, AxisErrorIsAngleShift) {
  const double q = 0.4, h = -0.9, x = 0.013;
  const BlochVector expected = measured_bloch_general(q + x, kPi / 2, h, kPi);
  EXPECT_LE((realized_vector(q, h, single_channel(ErrorChannel::QAxis, x)) - expected).norm(), 1e-15);
}

TEST(RealizedVector, HwpPhaseErrorDeviationIsLinear) {
  const double q = 30 * kDeg, h = 13 * kDeg;
  // Independent slope estimate of the deviation along eps_dh.
  const Eigen::Vector3d slope = testing::richardson_derivative(
      [&](double e) { return realized_vector(q, h, single_channel(ErrorChannel::HPhase, e)); });
  for (double eps_deg : {0.01, 0.1, 1.2}) {
    const double eps = eps_deg * kDeg;
    const double dev =
        (realized_vector(q, h, single_channel(ErrorChannel::HPhase, eps)) - ideal_vector(q, h)).norm();
    EXPECT_NEAR(dev / eps, slope.norm(), 0.02 * slope.norm()) << eps_deg;
  }
}

TEST(RealizedVector, UnitNormAndPeriodic) {
  auto rng = testing::test_rng(21);
  std::uniform_real_distribution<double> angle(-kPi, kPi), small(-0.05, 0.05);
  for (int i = 0; i < 200; ++i) {
    const double q = angle(rng), h = angle(rng);
    const DeviceError err{small(rng), small(rng), small(rng), small(rng)};
    const BlochVector r = realized_vector(q, h, err);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_LE((realized_vector(q + kPi, h, err) - r).norm(), 1e-12);
    EXPECT_LE((realized_vector(q, h + kPi, err) - r).norm(), 1e-12);
  }
}

TEST(AnalyticPartial, PauliSettingColumns) {
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_LE((analytic_partial(45 * kDeg, 22.5 * kDeg, ErrorChannel::HAxis) -
             Eigen::Vector3d(0, 4, 0)).norm(), 1e-12);
  EXPECT_LE((analytic_partial(0, 0, ErrorChannel::QAxis) - Eigen::Vector3d(2, -2, 0)).norm(), 1e-12);
  EXPECT_LE((analytic_partial(45 * kDeg, 22.5 * kDeg, ErrorChannel::HPhase) -
             Eigen::Vector3d(0, 0, s)).norm(), 1e-12);
  EXPECT_LE(analytic_partial(0, 0, ErrorChannel::QPhase).norm(), 1e-15);
}

TEST(FdPartial, MatchesClosedFormAtExamples) {
  EXPECT_LE((fd_partial(45 * kDeg, 22.5 * kDeg, ErrorChannel::HAxis, 1e-5) -
             Eigen::Vector3d(0, 4, 0)).norm(), 1e-6);
  const Eigen::Vector3d a = analytic_partial(30 * kDeg, 13 * kDeg, ErrorChannel::QPhase);
  const Eigen::Vector3d f = fd_partial(30 * kDeg, 13 * kDeg, ErrorChannel::QPhase, 1e-5);
  EXPECT_LE((a - f).norm(), 1e-6 * a.norm());
  EXPECT_LE(fd_partial(0, 0, ErrorChannel::QPhase).norm(), 1e-6);
}

TEST(FdPartial, RejectsStepOutsideRange) {
  EXPECT_THROW(fd_partial(0, 0, ErrorChannel::HAxis, 1e-9), std::out_of_range);
  EXPECT_THROW(fd_partial(0, 0, ErrorChannel::HAxis, 0.1), std::out_of_range);
  EXPECT_THROW(fd_partial(0, 0, ErrorChannel::HAxis, -1e-5), std::out_of_range);
  EXPECT_NO_THROW(fd_partial(0, 0, ErrorChannel::HAxis, 1e-8));
  EXPECT_NO_THROW(fd_partial(0, 0, ErrorChannel::HAxis, 1e-2));
}

TEST(AnalyticPartial, AgreesWithFiniteDifferencesOnGrid) {
  double worst = 0.0;
  for (int i = 0; i < 36; ++i) {
    for (int j = 0; j < 36; ++j) {
      const double q = i * 5 * kDeg, h = j * 5 * kDeg;
      for (ErrorChannel ch : kAllChannels) {
        worst = std::max(worst, RelativeGap(fd_partial(q, h, ch, 1e-5), analytic_partial(q, h, ch)));
      }
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(AnalyticPartial, TaylorRemainderIsSecondOrder) {
  auto rng = testing::test_rng(5);
  std::uniform_real_distribution<double> angle(0, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const double q = angle(rng), h = angle(rng);
    for (ErrorChannel ch : kAllChannels) {
      auto remainder = [&](double eps) {
        return (realized_vector(q, h, single_channel(ch, eps)) - ideal_vector(q, h) -
                eps * analytic_partial(q, h, ch)).norm();
      };
      EXPECT_GE(scaling_exponent(remainder, 1e-4, 1e-2, 12), 1.95)
          << "channel " << channel_name(ch) << " q=" << q << " h=" << h;
    }
  }
}

TEST(ScalingExponent, RecoversPowerLaws) {
  EXPECT_NEAR(scaling_exponent([](double e) { return 3.0 * e; }, 1e-4, 1e-2, 8), 1.0, 1e-12);
  EXPECT_NEAR(scaling_exponent([](double e) { return 0.5 * e * e; }, 1e-4, 1e-2, 8), 2.0, 1e-12);
}

TEST(ScalingExponent, NcmIsLinearEcmIsQuadratic) {
  const AngleSetting seed{30 * kDeg, 13 * kDeg};
  const auto cm = ecm4(seed);
  const double lo = 0.01 * kDeg, hi = 2 * kDeg;
  auto ncm = [&](ErrorChannel ch) {
    return [=](double e) {
      return (realized_vector(seed.q, seed.h, single_channel(ch, e)) - seed.ideal()).norm();
    };
  };
  auto ecm = [&](ErrorChannel ch) {
    return [=, &cm](double e) { return (effective_vector(cm, single_channel(ch, e)) - cm.ideal()).norm(); };
  };
  EXPECT_NEAR(scaling_exponent(ncm(ErrorChannel::HPhase), lo, hi, 16), 1.0, 0.05);
  EXPECT_NEAR(scaling_exponent(ecm(ErrorChannel::HPhase), lo, hi, 16), 2.0, 0.10);
  EXPECT_NEAR(scaling_exponent(ecm(ErrorChannel::QAxis), lo, hi, 16), 1.0, 0.05);
}

TEST(ScalingExponent, RejectsBadInput) {
  auto lin = [](double e) { return e; };
  EXPECT_THROW(scaling_exponent(lin, 1e-3, 5e-3, 8), std::invalid_argument);
  EXPECT_THROW(scaling_exponent(lin, 1e-4, 1e-2, 7), std::invalid_argument);
  EXPECT_THROW(scaling_exponent([](double) { return 1e-20; }, 1e-4, 1e-2, 8), DegenerateFit);
  EXPECT_THROW(scaling_exponent([](double) { return 0.0; }, 1e-4, 1e-2, 8), DegenerateFit);
}

TEST(ErrorChannel, NamesRoundTrip) {
  for (ErrorChannel ch : kAllChannels) EXPECT_EQ(parse_channel(channel_name(ch)), ch);
  EXPECT_EQ(parse_channel("H-PHASE"), ErrorChannel::HPhase);
  EXPECT_THROW(parse_channel("x"), std::invalid_argument);
}

}  // namespace
}  // namespace polcomp
