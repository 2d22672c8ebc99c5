#include "rio/imu_attitude.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rio/error.hpp"

namespace rio {

ImuBias estimate_bias(std::span<const ImuSample> samples, double window_s) {
  const auto window_ns = static_cast<Timestamp>(std::llround(window_s * 1e9));
  if (samples.empty() || samples.back().t - samples.front().t < window_ns) {
    const double span = samples.empty() ? 0.0 : ns_to_s(samples.back().t - samples.front().t);
    throw Error(ErrorCode::InsufficientData, "IMU stream spans " + std::to_string(span) +
                                                 " s, static window needs " + std::to_string(window_s) + " s");
  }

  const Timestamp t0 = samples.front().t;
  Eigen::Vector3d sum_w = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_w2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_a = Eigen::Vector3d::Zero();
  std::size_t n = 0;
  for (const ImuSample& s : samples) {
    if (s.t - t0 > window_ns) break;
    sum_w += s.omega;
    sum_w2 += s.omega.cwiseProduct(s.omega);
    sum_a += s.accel;
    ++n;
  }
  const double inv = 1.0 / static_cast<double>(n);
  const Eigen::Vector3d mean_w = sum_w * inv;
  const Eigen::Vector3d var_w = (sum_w2 * inv - mean_w.cwiseProduct(mean_w)).cwiseMax(0.0);
  const Eigen::Vector3d mean_a = sum_a * inv;

  constexpr double kMaxGyroStd = 0.02;
  if (var_w.maxCoeff() > kMaxGyroStd * kMaxGyroStd) {
    throw Error(ErrorCode::NotStatic,
                "gyro variance " + std::to_string(var_w.maxCoeff()) + " exceeds (0.02 rad/s)^2");
  }
  if (mean_w.norm() >= 0.1) {
    throw Error(ErrorCode::NotStatic, "gyro bias " + std::to_string(mean_w.norm()) + " rad/s is implausible");
  }
  if (mean_a.norm() < 0.5 * kGravity) {
    throw Error(ErrorCode::NotStatic, "mean specific force too small to define gravity");
  }

  ImuBias bias;
  bias.gyro = mean_w;
  bias.mean_accel = kGravity * mean_a.normalized();
  bias.accel = mean_a - bias.mean_accel;
  return bias;
}

bool accel_usable(const Eigen::Vector3d& accel) {
  const double n = accel.norm();
  return n >= 0.5 * kGravity && n <= 3.0 * kGravity;
}

UnitQuat madgwick_step(const UnitQuat& q, const Eigen::Vector3d& omega, const Eigen::Vector3d& accel,
                       double dt, double beta) {
  const double q0 = q.w(), q1 = q.x(), q2 = q.y(), q3 = q.z();
  const double gx = omega.x(), gy = omega.y(), gz = omega.z();

  // q_dot = 0.5 * q ⊗ (0, omega)
  double d0 = 0.5 * (-q1 * gx - q2 * gy - q3 * gz);
  double d1 = 0.5 * (q0 * gx + q2 * gz - q3 * gy);
  double d2 = 0.5 * (q0 * gy - q1 * gz + q3 * gx);
  double d3 = 0.5 * (q0 * gz + q1 * gy - q2 * gx);

  if (beta > 0.0 && accel_usable(accel)) {
    const Eigen::Vector3d a = accel.normalized();
    // Objective: gravity predicted in the body frame minus measured direction.
    const double f0 = 2.0 * (q1 * q3 - q0 * q2) - a.x();
    const double f1 = 2.0 * (q0 * q1 + q2 * q3) - a.y();
    const double f2 = 2.0 * (0.5 - q1 * q1 - q2 * q2) - a.z();
    double s0 = -2.0 * q2 * f0 + 2.0 * q1 * f1;
    double s1 = 2.0 * q3 * f0 + 2.0 * q0 * f1 - 4.0 * q1 * f2;
    double s2 = -2.0 * q0 * f0 + 2.0 * q3 * f1 - 4.0 * q2 * f2;
    double s3 = 2.0 * q1 * f0 + 2.0 * q2 * f1;
    const double norm = std::sqrt(s0 * s0 + s1 * s1 + s2 * s2 + s3 * s3);
    if (norm > 0.0) {
      s0 /= norm;
      s1 /= norm;
      s2 /= norm;
      s3 /= norm;
      d0 -= beta * s0;
      d1 -= beta * s1;
      d2 -= beta * s2;
      d3 -= beta * s3;
    }
  }
  return UnitQuat(q0 + d0 * dt, q1 + d1 * dt, q2 + d2 * dt, q3 + d3 * dt);
}

UnitQuat attitude_from_gravity(const Eigen::Vector3d& accel) {
  const double roll = std::atan2(accel.y(), accel.z());
  const double pitch = std::atan2(-accel.x(), std::hypot(accel.y(), accel.z()));
  return UnitQuat::from_rpy(roll, pitch, 0.0);
}

AttitudeTrack::AttitudeTrack(std::vector<Timestamp> t, std::vector<UnitQuat> q)
    : t_(std::move(t)), q_(std::move(q)) {
  if (t_.size() != q_.size()) throw Error(ErrorCode::InsufficientData, "attitude track size mismatch");
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (t_[i] <= t_[i - 1]) {
      throw Error(ErrorCode::NonMonotonicTimestamp,
                  "attitude track entry " + std::to_string(i) + " is not after its predecessor");
    }
  }
}

UnitQuat AttitudeTrack::at(Timestamp t) const {
  if (t_.empty()) throw Error(ErrorCode::InsufficientData, "empty attitude track");
  if (t <= t_.front()) {
    if (t_.front() - t > kMaxExtrapolation) {
      throw Error(ErrorCode::ExtrapolationTooFar,
                  "t = " + std::to_string(t) + " ns precedes the attitude track by more than 50 ms");
    }
    return q_.front();
  }
  if (t >= t_.back()) {
    if (t - t_.back() > kMaxExtrapolation) {
      throw Error(ErrorCode::ExtrapolationTooFar,
                  "t = " + std::to_string(t) + " ns exceeds the attitude track by more than 50 ms");
    }
    return q_.back();
  }
  const auto hi = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  const std::size_t lo = hi - 1;
  if (t == t_[lo]) return q_[lo];
  const double u = static_cast<double>(t - t_[lo]) / static_cast<double>(t_[hi] - t_[lo]);
  return slerp(q_[lo], q_[hi], u);
}

AttitudeTrack run_attitude_filter(std::span<const ImuSample> samples, const ImuBias& bias, double beta) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "no IMU samples");
  std::vector<Timestamp> times;
  std::vector<UnitQuat> quats;
  times.reserve(samples.size());
  quats.reserve(samples.size());

  UnitQuat q = attitude_from_gravity(bias.mean_accel);
  times.push_back(samples.front().t);
  quats.push_back(q);

  constexpr double kMaxStep = 0.1;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const Timestamp dt_ns = samples[k].t - samples[k - 1].t;
    if (dt_ns <= 0) {
      throw Error(ErrorCode::NonMonotonicTimestamp, "IMU sample " + std::to_string(k) + " is not after its predecessor");
    }
    const Eigen::Vector3d omega = samples[k].omega - bias.gyro;
    const Eigen::Vector3d accel = samples[k].accel - bias.accel;
    const double dt = ns_to_s(dt_ns);
    const int steps = static_cast<int>(std::ceil(dt / kMaxStep));
    for (int i = 0; i < steps; ++i) q = madgwick_step(q, omega, accel, dt / steps, beta);
    times.push_back(samples[k].t);
    quats.push_back(q);
  }
  return AttitudeTrack(std::move(times), std::move(quats));
}

}  // namespace rio
