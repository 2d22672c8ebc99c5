#include "rio/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "rio/error.hpp"

namespace rio {

Eigen::Vector3d VoxelGrid::Cell::centroid() const {
  if (weight_sum > 0.0) return weighted_sum / weight_sum;
  return plain_sum / static_cast<double>(count);
}

VoxelGrid::VoxelGrid(double voxel_size) : size_(voxel_size) {
  if (!(voxel_size > 0.0)) throw Error(ErrorCode::InvalidConfig, "voxel size must be positive");
}

VoxelKey VoxelGrid::key_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / size_)), static_cast<std::int64_t>(std::floor(p.y() / size_)),
          static_cast<std::int64_t>(std::floor(p.z() / size_))};
}

void VoxelGrid::insert(const RadarPoint& p) {
  const VoxelKey key = key_of(p.position);
  auto [it, fresh] = index_.try_emplace(key, cells_.size());
  if (fresh) {
    Cell c;
    c.key = key;
    c.min_t = p.t;
    cells_.push_back(c);
  }
  Cell& c = cells_[it->second];
  const double m = static_cast<double>(p.count);
  c.weighted_sum += m * p.weight * p.position;
  c.plain_sum += m * p.position;
  c.weight_sum += m * p.weight;
  c.min_t = std::min(c.min_t, p.t);
  c.max_intensity = std::max(c.max_intensity, p.intensity);
  c.count += p.count;
  total_ += p.count;
}

void VoxelGrid::insert(const PointCloud& cloud) {
  for (const RadarPoint& p : cloud.points) insert(p);
}

PointCloud VoxelGrid::to_cloud(CloudStage stage, Timestamp t_ref) const {
  PointCloud out;
  out.stage = stage;
  out.t_ref = t_ref;
  out.points.reserve(cells_.size());
  for (const Cell& c : cells_) {
    RadarPoint p;
    p.position = c.centroid();
    p.weight = c.mean_weight();
    p.t = c.min_t;
    p.intensity = c.max_intensity;
    p.count = static_cast<std::uint32_t>(c.count);
    out.points.push_back(p);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double d_voxel) {
  VoxelGrid grid(d_voxel);
  grid.insert(cloud);
  return grid.to_cloud(cloud.stage, cloud.t_ref);
}

}  // namespace rio
