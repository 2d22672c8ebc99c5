#pragma once

#include <span>
#include <vector>

#include "rio/geometry.hpp"

namespace rio {

inline constexpr double kGravity = 9.81;

struct ImuSample {
  Timestamp t = 0;
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();  ///< rad/s, body frame
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  ///< specific force, m/s^2, body frame
};

struct ImuBias {
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  /// Debiased mean specific force over the static window (gravity direction).
  Eigen::Vector3d mean_accel = Eigen::Vector3d(0.0, 0.0, kGravity);
};

/// Averages the first `window_s` seconds of a stream assumed static.
/// Throws InsufficientData when the stream is shorter than the window and
/// NotStatic when gyro variance or the gyro mean is implausible for a vehicle
/// at rest.
ImuBias estimate_bias(std::span<const ImuSample> samples, double window_s);

/// Accelerometer norms outside [0.5 g, 3 g] are not used for gravity correction.
bool accel_usable(const Eigen::Vector3d& accel);

/// One Madgwick IMU update (gyro propagation plus beta-scaled gradient step
/// toward gravity alignment). Inputs must already be debiased.
UnitQuat madgwick_step(const UnitQuat& q, const Eigen::Vector3d& omega, const Eigen::Vector3d& accel,
                       double dt, double beta);

/// Roll/pitch from a gravity vector, yaw = 0.
UnitQuat attitude_from_gravity(const Eigen::Vector3d& accel);

/// Time-indexed attitude estimates. Immutable once built.
class AttitudeTrack {
 public:
  static constexpr Timestamp kMaxExtrapolation = 50'000'000;  // 50 ms

  AttitudeTrack() = default;
  /// Timestamps must be strictly increasing.
  AttitudeTrack(std::vector<Timestamp> t, std::vector<UnitQuat> q);

  bool empty() const { return t_.empty(); }
  std::size_t size() const { return t_.size(); }
  Timestamp front_time() const { return t_.front(); }
  Timestamp back_time() const { return t_.back(); }
  std::span<const Timestamp> times() const { return t_; }
  std::span<const UnitQuat> attitudes() const { return q_; }

  /// Slerp between bracketing entries, clamped at the ends; throws
  /// ExtrapolationTooFar beyond 50 ms outside the span.
  UnitQuat at(Timestamp t) const;

 private:
  std::vector<Timestamp> t_;
  std::vector<UnitQuat> q_;
};

inline UnitQuat attitude_at(const AttitudeTrack& track, Timestamp t) { return track.at(t); }

/// Debiases the stream with `bias`, warm-starts from the static gravity
/// direction and runs the Madgwick filter over every sample.
AttitudeTrack run_attitude_filter(std::span<const ImuSample> samples, const ImuBias& bias, double beta);

}  // namespace rio
