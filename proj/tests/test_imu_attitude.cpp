#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "rio/error.hpp"
#include "rio/imu_attitude.hpp"

using namespace rio;

namespace {

std::vector<ImuSample> constant_stream(double seconds, double rate, const Eigen::Vector3d& omega,
                                       const Eigen::Vector3d& accel) {
  std::vector<ImuSample> out;
  const auto n = static_cast<int>(std::lround(seconds * rate));
  for (int i = 0; i <= n; ++i) {
    ImuSample s;
    s.t = static_cast<Timestamp>(std::llround(i * 1e9 / rate));
    s.omega = omega;
    s.accel = accel;
    out.push_back(s);
  }
  return out;
}

double tilt_error_deg(const UnitQuat& a, const UnitQuat& b) {
  const Rpy ra = quat_to_rpy(a), rb = quat_to_rpy(b);
  return rad2deg(std::max(std::abs(wrap_angle(ra.roll - rb.roll)), std::abs(ra.pitch - rb.pitch)));
}

}  // namespace

TEST(EstimateBias, ConstantGyroOffset) {
  const auto s = constant_stream(12, 200, {0.01, 0, 0}, {0, 0, 9.81});
  const ImuBias b = estimate_bias(s, 10.0);
  EXPECT_NEAR((b.gyro - Eigen::Vector3d(0.01, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(b.accel.norm(), 0.0, 1e-12);
}

TEST(EstimateBias, AccelMagnitudeError) {
  const auto s = constant_stream(12, 200, Eigen::Vector3d::Zero(), {0, 0, 10.0});
  const ImuBias b = estimate_bias(s, 10.0);
  EXPECT_NEAR(b.accel.z(), 0.19, 1e-12);
  EXPECT_NEAR(b.accel.x(), 0.0, 1e-12);
  EXPECT_NEAR(b.mean_accel.z(), kGravity, 1e-12);
}

TEST(EstimateBias, ShortStreamIsInsufficient) {
  const auto s = constant_stream(1, 200, Eigen::Vector3d::Zero(), {0, 0, 9.81});
  try {
    estimate_bias(s, 10.0);
    FAIL() << "expected InsufficientData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(EstimateBias, MovingVehicleIsNotStatic) {
  auto s = constant_stream(12, 200, Eigen::Vector3d::Zero(), {0, 0, 9.81});
  for (std::size_t i = 0; i < s.size(); ++i) s[i].omega.z() = (i % 2 ? 0.5 : -0.5);
  try {
    estimate_bias(s, 10.0);
    FAIL() << "expected NotStatic";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotStatic);
  }
}

TEST(Madgwick, IdentityIsFixedPoint) {
  for (double beta : {0.0, 0.1, 1.0}) {
    for (double dt : {0.001, 0.005, 0.1}) {
      const UnitQuat q = madgwick_step(UnitQuat::identity(), Eigen::Vector3d::Zero(), {0, 0, 9.81}, dt, beta);
      EXPECT_TRUE(q.approx_eq(UnitQuat::identity(), 1e-15));
    }
  }
}

TEST(Madgwick, PureGyroQuarterTurn) {
  UnitQuat q;
  for (int i = 0; i < 200; ++i) q = madgwick_step(q, {0, 0, kPi / 2}, {0, 0, 9.81}, 0.005, 0.0);
  EXPECT_NEAR(quat_to_rpy(q).yaw, kPi / 2, 1e-3);
}

TEST(Madgwick, ConvergesFromTwentyDegreeRollError) {
  // True attitude level; the accel-only oracle roll is atan2(a_y, a_z) = 0.
  const Eigen::Vector3d accel(0, 0, 9.81);
  UnitQuat q = UnitQuat::from_rpy(deg2rad(20), 0, 0);
  for (int i = 0; i < 2000; ++i) q = madgwick_step(q, Eigen::Vector3d::Zero(), accel, 0.005, 0.1);
  const double oracle_roll = std::atan2(accel.y(), accel.z());
  EXPECT_LT(std::abs(rad2deg(quat_to_rpy(q).roll - oracle_roll)), 0.5);
}

TEST(Madgwick, OutOfBandAccelIsIgnored) {
  gen::Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const UnitQuat q0 = rng.quat();
    const Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
    const UnitQuat gyro_only = madgwick_step(q0, w, Eigen::Vector3d::Zero(), 0.005, 0.0);
    EXPECT_TRUE(madgwick_step(q0, w, {0, 0, 40.0}, 0.005, 0.5).approx_eq(gyro_only, 1e-15));
    EXPECT_TRUE(madgwick_step(q0, w, {0, 0, 1.0}, 0.005, 0.5).approx_eq(gyro_only, 1e-15));
  }
}

TEST(Madgwick, BetaZeroMatchesExponentialMapPerStep) {
  gen::Rng rng(12);
  UnitQuat q = rng.quat();
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d w(rng.normal(0.5), rng.normal(0.5), rng.normal(0.5));
    const UnitQuat next = madgwick_step(q, w, {0, 0, 9.81}, 0.005, 0.0);
    const Eigen::Matrix3d expect = oracle::integrate_gyro(q.matrix(), w, 0.005);
    EXPECT_LT(oracle::angle_of(next.matrix().transpose() * expect), 1e-6);
    q = next;
  }
}

TEST(Madgwick, RollPitchConvergeMonotonicallyAfterOneSecond) {
  gen::Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const UnitQuat truth = rng.tilt(20.0);
    const Eigen::Vector3d accel = truth.matrix().transpose() * Eigen::Vector3d(0, 0, kGravity);
    // Initial tilt error up to 30 degrees.
    UnitQuat q = truth * UnitQuat::from_axis_angle({rng.normal(), rng.normal(), 0.0}, deg2rad(rng.uniform(5, 30)));
    double prev = 1e9;
    for (int i = 0; i < 200 * 15; ++i) {
      q = madgwick_step(q, Eigen::Vector3d::Zero(), accel, 0.005, 0.1);
      if (i >= 200 && i % 20 == 0) {
        const Eigen::Vector3d g_est = q.matrix().transpose() * Eigen::Vector3d::UnitZ();
        const double err = std::acos(std::clamp(g_est.dot(accel.normalized()), -1.0, 1.0));
        // The fixed-length gradient step chatters once within beta*dt of the optimum.
        if (prev > deg2rad(0.2)) {
          EXPECT_LE(err, prev + 1e-12);
        }
        prev = err;
      }
    }
    EXPECT_LT(rad2deg(prev), 0.5);
  }
}

TEST(Madgwick, YawOffsetDoesNotChangeRollPitch) {
  gen::Rng rng(14);
  std::vector<ImuSample> s;
  for (int i = 0; i < 2000; ++i) {
    ImuSample m;
    m.t = i * 5'000'000LL;
    m.omega = {0.3 * std::sin(i * 0.01), 0.2 * std::cos(i * 0.013), 0.1};
    m.accel = Eigen::Vector3d(0.3 * rng.normal(), 0.3 * rng.normal(), 9.81);
    s.push_back(m);
  }
  UnitQuat a = UnitQuat::from_rpy(0.1, -0.05, 0.0);
  UnitQuat b = UnitQuat::from_rpy(0.1, -0.05, 1.2);
  for (std::size_t i = 1; i < s.size(); ++i) {
    a = madgwick_step(a, s[i].omega, s[i].accel, 0.005, 0.1);
    b = madgwick_step(b, s[i].omega, s[i].accel, 0.005, 0.1);
    const Rpy ra = quat_to_rpy(a), rb = quat_to_rpy(b);
    ASSERT_NEAR(ra.roll, rb.roll, 1e-6);
    ASSERT_NEAR(ra.pitch, rb.pitch, 1e-6);
  }
}

TEST(AttitudeTrack, Lookup) {
  const UnitQuat q10 = UnitQuat::from_rpy(0, 0, deg2rad(10));
  const AttitudeTrack track({0, 100'000'000}, {UnitQuat::identity(), q10});
  EXPECT_TRUE(attitude_at(track, 100'000'000).approx_eq(q10, 1e-15));
  EXPECT_NEAR(quat_to_rpy(track.at(50'000'000)).yaw, deg2rad(5), 1e-12);
  EXPECT_TRUE(track.at(-40'000'000).approx_eq(UnitQuat::identity(), 0));
  EXPECT_TRUE(track.at(140'000'000).approx_eq(q10, 0));
  try {
    track.at(200'000'000);
    FAIL() << "expected ExtrapolationTooFar";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExtrapolationTooFar);
  }
}

TEST(AttitudeTrack, RejectsNonIncreasingTimes) {
  EXPECT_THROW(AttitudeTrack({0, 0}, {UnitQuat(), UnitQuat()}), Error);
}

TEST(AttitudeTrack, InterpolationStaysOnShortArc) {
  gen::Rng rng(15);
  std::vector<ImuSample> s;
  for (int i = 0; i < 4000; ++i) {
    ImuSample m;
    m.t = i * 5'000'000LL;
    m.omega = {rng.normal(), rng.normal(), 2.0};
    m.accel = {0, 0, 9.81};
    s.push_back(m);
  }
  ImuBias bias;
  const AttitudeTrack track = run_attitude_filter(s, bias, 0.1);
  const auto q = track.attitudes();
  const auto t = track.times();
  for (std::size_t i = 1; i < q.size(); ++i) {
    const double step = q[i - 1].angle_to(q[i]);
    ASSERT_LT(step, 0.05);
    const UnitQuat mid = track.at((t[i - 1] + t[i]) / 2);
    ASSERT_LT(q[i - 1].angle_to(mid), step);
  }
}

TEST(RunAttitudeFilter, WarmStartsFromStaticGravity) {
  const double roll = deg2rad(4), pitch = deg2rad(-3);
  const UnitQuat truth = UnitQuat::from_rpy(roll, pitch, 0);
  const Eigen::Vector3d f = truth.matrix().transpose() * Eigen::Vector3d(0, 0, kGravity);
  const auto s = constant_stream(12, 200, Eigen::Vector3d::Zero(), f);
  const AttitudeTrack track = run_attitude_filter(s, estimate_bias(s, 10.0), 0.1);
  EXPECT_LT(tilt_error_deg(track.attitudes().front(), truth), 1e-9);
  EXPECT_LT(tilt_error_deg(track.attitudes().back(), truth), 1e-3);
}
