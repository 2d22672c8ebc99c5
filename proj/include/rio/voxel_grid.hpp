#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rio/radar_frontend.hpp"

namespace rio {

struct VoxelKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Accumulating voxel grid. Cells keep weighted sums so that repeated
/// insertions (submap merges) yield the exact weighted centroid of every
/// member point. Cell order follows first insertion, which keeps the output
/// deterministic.
class VoxelGrid {
 public:
  struct Cell {
    VoxelKey key;
    Eigen::Vector3d weighted_sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d plain_sum = Eigen::Vector3d::Zero();
    double weight_sum = 0.0;
    std::size_t count = 0;
    Timestamp min_t = 0;
    std::uint8_t max_intensity = 0;

    Eigen::Vector3d centroid() const;
    double mean_weight() const { return weight_sum / static_cast<double>(count); }
  };

  explicit VoxelGrid(double voxel_size);

  double voxel_size() const { return size_; }
  VoxelKey key_of(const Eigen::Vector3d& p) const;

  void insert(const RadarPoint& p);
  void insert(const PointCloud& cloud);

  std::size_t cell_count() const { return cells_.size(); }
  /// Raw returns inserted, counting each input point by its `count`.
  std::size_t point_count() const { return total_; }
  const std::vector<Cell>& cells() const { return cells_; }

  /// One point per occupied cell, at the centroid, carrying the mean weight,
  /// the member count and the earliest member timestamp.
  PointCloud to_cloud(CloudStage stage, Timestamp t_ref) const;

 private:
  double size_;
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index_;
  std::vector<Cell> cells_;
  std::size_t total_ = 0;
};

/// Centroid downsampling; empty in, empty out.
PointCloud voxel_downsample(const PointCloud& cloud, double d_voxel);

}  // namespace rio
