#include "rio/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rio {

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

UnitQuat::UnitQuat(double w, double x, double y, double z) : q_(w, x, y, z) { canonicalize(); }

UnitQuat::UnitQuat(const Eigen::Quaterniond& q) : q_(q) { canonicalize(); }

void UnitQuat::canonicalize() {
  const double n = q_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    q_ = Eigen::Quaterniond::Identity();
    return;
  }
  q_.coeffs() /= n;
  // Lexicographic sign rule on (w, x, y, z) so w == 0 is also deterministic.
  const double c[4] = {q_.w(), q_.x(), q_.y(), q_.z()};
  for (double v : c) {
    if (v > 0.0) return;
    if (v < 0.0) {
      q_.coeffs() = -q_.coeffs();
      return;
    }
  }
}

UnitQuat UnitQuat::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return UnitQuat(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis / n)));
}

UnitQuat UnitQuat::from_rpy(double roll, double pitch, double yaw) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX());
  return UnitQuat(q);
}

double UnitQuat::angle_to(const UnitQuat& other) const {
  const double d = std::min(1.0, std::abs(dot(other)));
  return 2.0 * std::acos(d);
}

bool UnitQuat::approx_eq(const UnitQuat& other, double tol) const {
  const Eigen::Vector4d a = q_.coeffs();
  const Eigen::Vector4d b = other.q_.coeffs();
  return (a - b).cwiseAbs().maxCoeff() <= tol || (a + b).cwiseAbs().maxCoeff() <= tol;
}

Rpy quat_to_rpy(const UnitQuat& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double sinp = 2.0 * (w * y - z * x);
  Rpy out;
  if (std::abs(sinp) >= 1.0 - 1e-12) {
    out.pitch = std::copysign(kPi / 2.0, sinp);
    out.roll = 0.0;
    const Eigen::Matrix3d r = q.matrix();
    out.yaw = wrap_angle(std::atan2(-r(0, 1), r(1, 1)));
    return out;
  }
  out.roll = wrap_angle(std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)));
  out.pitch = std::asin(sinp);
  out.yaw = wrap_angle(std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)));
  return out;
}

UnitQuat rpy_to_quat(const Rpy& rpy) { return UnitQuat::from_rpy(rpy.roll, rpy.pitch, rpy.yaw); }

UnitQuat tilt_only(const UnitQuat& q) {
  const Rpy rpy = quat_to_rpy(q);
  return UnitQuat::from_rpy(rpy.roll, rpy.pitch, 0.0);
}

UnitQuat slerp(const UnitQuat& q0, const UnitQuat& q1, double t) {
  assert(t >= 0.0 && t <= 1.0);
  Eigen::Vector4d a = q0.eigen().coeffs();
  Eigen::Vector4d b = q1.eigen().coeffs();
  double d = a.dot(b);
  if (d < 0.0) {
    b = -b;
    d = -d;
  }
  Eigen::Vector4d r;
  if (d > 0.9995) {
    r = a + t * (b - a);
  } else {
    const double theta = std::acos(d);
    const double s = std::sin(theta);
    r = (std::sin((1.0 - t) * theta) / s) * a + (std::sin(t * theta) / s) * b;
  }
  // Eigen coeffs are (x, y, z, w).
  return UnitQuat(r[3], r[0], r[1], r[2]);
}

Eigen::Matrix2d Pose2::rotation() const {
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  return {-(c * x_ + s * y_), -(-s * x_ + c * y_), -yaw_};
}

Pose2 Pose2::operator*(const Pose2& rhs) const {
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  return {x_ + c * rhs.x_ - s * rhs.y_, y_ + s * rhs.x_ + c * rhs.y_, yaw_ + rhs.yaw_};
}

Eigen::Vector2d Pose2::apply(const Eigen::Vector2d& p) const {
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  return {x_ + c * p.x() - s * p.y(), y_ + s * p.x() + c * p.y()};
}

Eigen::Vector3d Pose2::apply(const Eigen::Vector3d& p) const {
  const double c = std::cos(yaw_), s = std::sin(yaw_);
  return {x_ + c * p.x() - s * p.y(), y_ + s * p.x() + c * p.y(), p.z()};
}

bool approx_eq(const Pose2& a, const Pose2& b, double tol) {
  return std::abs(a.x() - b.x()) <= tol && std::abs(a.y() - b.y()) <= tol &&
         std::abs(wrap_angle(a.yaw() - b.yaw())) <= tol;
}

Eigen::Matrix3d RelativeTilt::matrix() const {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

RelativeTilt relative_tilt(const UnitQuat& q_now, const UnitQuat& q_ref) {
  const Rpy rel = quat_to_rpy(q_ref.inverse() * q_now);
  const Eigen::AngleAxisd aa(UnitQuat::from_rpy(rel.roll, rel.pitch, 0.0).eigen());

  RelativeTilt out;
  Eigen::Vector3d axis = aa.axis();
  double angle = aa.angle();
  if (angle < 0.0) {
    angle = -angle;
    axis = -axis;
  }
  axis.z() = 0.0;
  const double n = axis.norm();
  if (angle < 1e-12 || n < 1e-12) return out;
  out.axis = axis / n;
  out.angle = angle;
  return out;
}

}  // namespace rio
