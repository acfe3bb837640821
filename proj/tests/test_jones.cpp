#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polcomp/jones.hpp"

namespace polcomp {
namespace {

using testing::kDeg;

void ExpectVecNear(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol) {
  EXPECT_LE((a - b).lpNorm<Eigen::Infinity>(), tol) << "a = " << a.transpose()
                                                    << "\nb = " << b.transpose();
}

TEST(WaveplateUnitary, HalfWaveAtZeroIsDiagonal) {
  const JonesMatrix m = waveplate_unitary({0.0, kPi});
  EXPECT_NEAR(std::abs(m(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(1, 1) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(1, 0)), 0.0, 1e-15);
}

TEST(WaveplateUnitary, ZeroRetardanceIsIdentity) {
  for (double theta : {0.0, 0.3, -1.7, 12.0}) {
    const JonesMatrix m = waveplate_unitary({theta, 0.0});
    EXPECT_LE((m - JonesMatrix::Identity()).norm(), 1e-15);
  }
}

TEST(WaveplateUnitary, HalfWaveAt45IsSigmaX) {
  JonesMatrix sx;
  sx << 0, 1, 1, 0;
  EXPECT_LE((waveplate_unitary({kPi / 4, kPi}) - sx).norm(), 1e-15);
}

TEST(WaveplateUnitary, IsUnitary) {
  auto rng = testing::test_rng();
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const JonesMatrix m = waveplate_unitary({angle(rng), angle(rng)});
    EXPECT_LE((m.adjoint() * m - JonesMatrix::Identity()).norm(), 1e-12);
  }
}

TEST(Propagate, DiagonalPlatesLeaveHorizontal) {
  const JonesVector psi = propagate(0.0, kPi / 2, 0.0, kPi);
  EXPECT_LE(testing::phase_free_distance(psi, JonesVector(1.0, 0.0)), 1e-12);
}

TEST(Propagate, MatchesHandWrittenQwpHwpState) {
  auto rng = testing::test_rng(7);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const double q = angle(rng), h = angle(rng);
    const JonesVector psi = propagate(q, kPi / 2, h, kPi);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    EXPECT_LE(testing::phase_free_distance(psi, testing::qwp_hwp_state(q, h)), 1e-7);
    // Componentwise up to one global phase.
    const JonesVector ref = testing::qwp_hwp_state(q, h);
    const std::complex<double> phase = ref.dot(psi) / std::abs(ref.dot(psi));
    EXPECT_LE((psi - phase * ref).norm(), 1e-12);
  }
}

TEST(Propagate, SigmaXSetting) {
  const BlochVector r = bloch_from_jones(propagate(45 * kDeg, kPi / 2, 22.5 * kDeg, kPi));
  ExpectVecNear(r, BlochVector(1, 0, 0), 1e-12);
}

TEST(BlochFromJones, PauliEigenstates) {
  const double k = 1.0 / std::sqrt(2.0);
  const std::complex<double> i(0, 1);
  ExpectVecNear(bloch_from_jones(JonesVector(1, 0)), BlochVector(0, 0, 1), 1e-15);
  ExpectVecNear(bloch_from_jones(JonesVector(k, k)), BlochVector(1, 0, 0), 1e-15);
  ExpectVecNear(bloch_from_jones(JonesVector(k, i * k)), BlochVector(0, 1, 0), 1e-15);
}

TEST(BlochFromJones, AgreesWithTraceFormula) {
  auto rng = testing::test_rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    JonesVector psi(std::complex<double>(g(rng), g(rng)), std::complex<double>(g(rng), g(rng)));
    psi.normalize();
    const BlochVector r = bloch_from_jones(psi);
    ExpectVecNear(r, testing::bloch_by_trace(psi), 1e-12);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
  }
}

TEST(BlochFromJones, RejectsUnnormalizedInput) {
  EXPECT_THROW(bloch_from_jones(JonesVector(1.0, 1.0)), std::invalid_argument);
  EXPECT_NO_THROW(bloch_from_jones(JonesVector(1.0 + 1e-11, 0.0)));
}

TEST(MeasuredBlochGeneral, MatchesJonesPropagation) {
  auto rng = testing::test_rng(11);
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  for (int i = 0; i < 1000; ++i) {
    const double q = angle(rng), dq = angle(rng), h = angle(rng), dh = angle(rng);
    const BlochVector closed = measured_bloch_general(q, dq, h, dh);
    ExpectVecNear(closed, bloch_from_jones(propagate(q, dq, h, dh)), 1e-12);
    EXPECT_NEAR(closed.norm(), 1.0, 1e-12);
  }
}

TEST(MeasuredBlochGeneral, ReducesToIdealVector) {
  auto rng = testing::test_rng(12);
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  for (int i = 0; i < 200; ++i) {
    const double q = angle(rng), h = angle(rng);
    ExpectVecNear(measured_bloch_general(q, kPi / 2, h, kPi), ideal_vector(q, h), 1e-12);
  }
}

TEST(MeasuredBlochGeneral, ZeroRetardanceGivesHorizontal) {
  for (double q : {0.0, 0.4, 2.2})
    for (double h : {0.0, -1.1, 3.0})
      ExpectVecNear(measured_bloch_general(q, 0.0, h, 0.0), BlochVector(0, 0, 1), 1e-12);
}

TEST(IdealVector, PauliSettings) {
  ExpectVecNear(ideal_vector(45 * kDeg, 22.5 * kDeg), BlochVector(1, 0, 0), 1e-15);
  ExpectVecNear(ideal_vector(0, 22.5 * kDeg), BlochVector(0, 1, 0), 1e-15);
  ExpectVecNear(ideal_vector(0, 0), BlochVector(0, 0, 1), 1e-15);
}

TEST(IdealVector, PeriodicAndUnitNorm) {
  auto rng = testing::test_rng(13);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const double q = angle(rng), h = angle(rng);
    const BlochVector r = ideal_vector(q, h);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    ExpectVecNear(ideal_vector(q + kPi, h), r, 1e-12);
    ExpectVecNear(ideal_vector(q, h + kPi), r, 1e-12);
  }
}

TEST(Units, DegreeConversionRoundTrips) {
  for (double d : {0.0, 0.1, 1.2, 22.5, 45.0, 180.0, -13.0}) {
    EXPECT_DOUBLE_EQ(rad_to_deg(deg_to_rad(d)), d);
  }
  EXPECT_DOUBLE_EQ(deg_to_rad(180.0), kPi);
}

}  // namespace
}  // namespace polcomp
