#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <numbers>

namespace rio {

using Timestamp = std::int64_t;  ///< nanoseconds

inline constexpr double kPi = std::numbers::pi;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }
inline constexpr double ns_to_s(Timestamp ns) { return static_cast<double>(ns) * 1e-9; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Unit quaternion, always renormalized and canonicalized to w >= 0 so that
/// q and -q serialize identically. Represents the body-to-world rotation.
class UnitQuat {
 public:
  UnitQuat() = default;
  UnitQuat(double w, double x, double y, double z);
  explicit UnitQuat(const Eigen::Quaterniond& q);

  static UnitQuat identity() { return {}; }
  static UnitQuat from_axis_angle(const Eigen::Vector3d& axis, double angle);
  /// Intrinsic ZYX: Rz(yaw) * Ry(pitch) * Rx(roll).
  static UnitQuat from_rpy(double roll, double pitch, double yaw);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  const Eigen::Quaterniond& eigen() const { return q_; }
  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const { return q_ * v; }

  UnitQuat inverse() const { return UnitQuat(q_.conjugate()); }
  UnitQuat operator*(const UnitQuat& rhs) const { return UnitQuat(q_ * rhs.q_); }

  double dot(const UnitQuat& other) const { return q_.coeffs().dot(other.q_.coeffs()); }
  /// Geodesic angle of the rotation taking this to other, in [0, pi].
  double angle_to(const UnitQuat& other) const;
  /// Equality up to the double cover.
  bool approx_eq(const UnitQuat& other, double tol = 1e-9) const;

 private:
  void canonicalize();

  Eigen::Quaterniond q_{Eigen::Quaterniond::Identity()};
};

struct Rpy {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// ZYX decomposition; at |pitch| = pi/2 roll is reported as 0.
Rpy quat_to_rpy(const UnitQuat& q);
UnitQuat rpy_to_quat(const Rpy& rpy);

/// The same attitude with yaw removed: Ry(pitch) * Rx(roll).
UnitQuat tilt_only(const UnitQuat& q);

/// Shorter-arc spherical interpolation; t must lie in [0, 1].
UnitQuat slerp(const UnitQuat& q0, const UnitQuat& q1, double t);

/// Planar rigid transform; yaw is kept in (-pi, pi].
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double yaw) : x_(x), y_(y), yaw_(wrap_angle(yaw)) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double yaw() const { return yaw_; }
  Eigen::Vector2d translation() const { return {x_, y_}; }
  Eigen::Matrix2d rotation() const;

  Pose2 inverse() const;
  Pose2 operator*(const Pose2& rhs) const;  ///< composition this ∘ rhs
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
  /// Rotates and translates x/y; z passes through unchanged.
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double yaw_ = 0.0;
};

inline Pose2 pose2_compose(const Pose2& a, const Pose2& b) { return a * b; }
bool approx_eq(const Pose2& a, const Pose2& b, double tol = 1e-9);

/// Pure tilt rotation: horizontal axis, non-negative angle.
struct RelativeTilt {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double angle = 0.0;

  Eigen::Matrix3d matrix() const;
};

/// Tilt of q_now relative to q_ref. The relative rotation q_ref^-1 * q_now is
/// split ZYX, its yaw discarded, and Ry(pitch) * Rx(roll) returned as an
/// axis-angle with the axis projected onto the horizontal plane.
RelativeTilt relative_tilt(const UnitQuat& q_now, const UnitQuat& q_ref);

}  // namespace rio
