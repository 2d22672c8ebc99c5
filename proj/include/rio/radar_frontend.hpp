#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rio/geometry.hpp"
#include "rio/imu_attitude.hpp"

namespace rio {

/// One revolution of a rotating FMCW radar: an azimuth x range intensity grid.
struct PolarScan {
  std::uint32_t azimuth_count = 0;
  std::uint32_t range_bin_count = 0;
  double range_resolution = 0.0;           ///< meters per bin
  std::vector<double> azimuths;            ///< radians, increasing over [0, 2pi)
  std::vector<Timestamp> azimuth_times;    ///< one stamp per azimuth ray
  std::vector<std::uint8_t> intensity;     ///< row-major, azimuth_count x range_bin_count

  PolarScan() = default;
  PolarScan(std::uint32_t n_azimuth, std::uint32_t n_range, double resolution);

  std::span<const std::uint8_t> row(std::size_t a) const {
    return {intensity.data() + a * range_bin_count, range_bin_count};
  }
  std::span<std::uint8_t> row(std::size_t a) { return {intensity.data() + a * range_bin_count, range_bin_count}; }

  double bin_center_range(std::size_t bin) const { return (static_cast<double>(bin) + 0.5) * range_resolution; }
  bool operator==(const PolarScan&) const = default;
};

struct RadarPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::uint8_t intensity = 0;
  Timestamp t = 0;
  double weight = 1.0;  ///< tilt-gate weight, consumed by registration
  std::uint32_t count = 1;  ///< raw returns this point stands for after voxel compaction
};

enum class CloudStage { Raw, Deskewed, Filtered };

struct PointCloud {
  CloudStage stage = CloudStage::Raw;
  std::vector<RadarPoint> points;
  Timestamp t_ref = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct ExtractionParams {
  int k = 10;
  double r_min = 5.0;
  double r_max = 100.0;
  int tau_raw = 60;
};

/// Per azimuth keeps the k most intense bins whose center range lies in
/// [r_min, r_max] and whose intensity exceeds tau_raw. Ties go to the lower
/// bin index. Points are emitted in azimuth order, strongest first.
PointCloud k_strongest(const PolarScan& scan, const ExtractionParams& params);

inline Eigen::Vector2d polar_to_cartesian(double range, double azimuth) {
  return {range * std::cos(azimuth), range * std::sin(azimuth)};
}

/// Rotation-only motion compensation. Each point is re-expressed in the
/// sensor frame at `t_ref` (default: the earliest point) using the attitude
/// change between t_ref and its own timestamp.
PointCloud deskew(const PointCloud& raw, const AttitudeTrack& track, std::optional<Timestamp> t_ref = std::nullopt);

}  // namespace rio
