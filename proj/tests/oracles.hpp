#pragma once

// Independent reference implementations used to check the library.
// Deliberately naive: brute force, explicit matrices, no shared code paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "rio/radar_frontend.hpp"

namespace oracle {

inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
inline Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

/// Rodrigues' formula.
inline Eigen::Matrix3d axis_angle(Eigen::Vector3d axis, double angle) {
  axis.normalize();
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

/// Rotation angle of a rotation matrix.
inline double angle_of(const Eigen::Matrix3d& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

/// Top-k per azimuth by full sort of the qualifying bins.
struct Detection {
  std::size_t azimuth;
  std::size_t bin;
  std::uint8_t intensity;
};
inline std::vector<Detection> k_strongest(const rio::PolarScan& scan, int k, double r_min, double r_max,
                                          int tau) {
  std::vector<Detection> out;
  for (std::size_t a = 0; a < scan.azimuth_count; ++a) {
    std::vector<Detection> cand;
    for (std::size_t b = 0; b < scan.range_bin_count; ++b) {
      const std::uint8_t v = scan.intensity[a * scan.range_bin_count + b];
      const double r = (static_cast<double>(b) + 0.5) * scan.range_resolution;
      if (v > tau && r >= r_min && r <= r_max) cand.push_back({a, b, v});
    }
    std::sort(cand.begin(), cand.end(), [](const Detection& x, const Detection& y) {
      return x.intensity != y.intensity ? x.intensity > y.intensity : x.bin < y.bin;
    });
    if (cand.size() > static_cast<std::size_t>(k)) cand.resize(static_cast<std::size_t>(k));
    out.insert(out.end(), cand.begin(), cand.end());
  }
  return out;
}

/// All points sorted by (squared distance, index).
inline std::vector<std::pair<double, std::size_t>> knn(const std::vector<Eigen::Vector3d>& pts,
                                                       const Eigen::Vector3d& q, std::size_t k,
                                                       double max_sq = 1e300) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - q).squaredNorm();
    if (d <= max_sq) all.emplace_back(d, i);
  }
  std::sort(all.begin(), all.end());
  if (all.size() > k) all.resize(k);
  return all;
}

/// |e_z . (R p - p)| with R from Rodrigues.
inline double vertical_displacement(const Eigen::Vector3d& p, const Eigen::Vector3d& axis, double angle) {
  return std::abs((axis_angle(axis, angle) * p - p).z());
}

/// Centroid per floor-cell, keyed lexicographically.
inline std::map<std::tuple<long, long, long>, Eigen::Vector3d> voxel_centroids(
    const std::vector<Eigen::Vector3d>& pts, double d) {
  std::map<std::tuple<long, long, long>, std::pair<Eigen::Vector3d, int>> acc;
  for (const auto& p : pts) {
    const auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / d)), static_cast<long>(std::floor(p.y() / d)),
                                     static_cast<long>(std::floor(p.z() / d)));
    auto& [sum, n] = acc[key];
    if (n == 0) sum.setZero();
    sum += p;
    ++n;
  }
  std::map<std::tuple<long, long, long>, Eigen::Vector3d> out;
  for (const auto& [key, v] : acc) out[key] = v.first / v.second;
  return out;
}

/// Weighted planar Procrustes through the SVD (Kabsch), reflection guarded.
/// Returns (tx, ty, yaw).
inline Eigen::Vector3d procrustes(const std::vector<Eigen::Vector2d>& src, const std::vector<Eigen::Vector2d>& dst,
                                  const std::vector<double>& w) {
  double ws = 0.0;
  Eigen::Vector2d ms = Eigen::Vector2d::Zero(), md = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ws += w[i];
    ms += w[i] * src[i];
    md += w[i] * dst[i];
  }
  ms /= ws;
  md /= ws;
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += w[i] * (src[i] - ms) * (dst[i] - md).transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  d(1, 1) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix2d r = svd.matrixV() * d * svd.matrixU().transpose();
  const Eigen::Vector2d t = md - r * ms;
  return {t.x(), t.y(), std::atan2(r(1, 0), r(0, 0))};
}

/// Gyro-only integration by the exponential map, as a rotation matrix.
inline Eigen::Matrix3d integrate_gyro(Eigen::Matrix3d r, const Eigen::Vector3d& omega, double dt) {
  const double n = omega.norm();
  if (n * dt < 1e-15) return r;
  return r * axis_angle(omega / n, n * dt);
}

/// Sort-based percentile with linear interpolation (type 7).
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
