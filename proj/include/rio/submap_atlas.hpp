#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rio/geometry.hpp"
#include "rio/nn_index.hpp"
#include "rio/radar_frontend.hpp"
#include "rio/voxel_grid.hpp"

namespace rio {

struct AtlasParams {
  double r_submap = 20.0;    ///< m, search window and merge radius
  double theta_tilt = 3.0;   ///< deg, roll/pitch compatibility threshold
  double d_voxel = 1.0;      ///< m, compaction voxel size
  bool tilt_search = true;   ///< false: distance-only search and merge
};

struct Submap {
  int id = 0;
  Pose2 anchor;
  double roll = 0.0;   ///< signature at creation, rad
  double pitch = 0.0;  ///< signature at creation, rad
  UnitQuat attitude;   ///< full attitude at creation; relative tilt is measured against it
  std::size_t scan_count = 0;
  Timestamp last_update_t = 0;

  const PointCloud& cloud() const { return cloud_; }
  /// Lazily (re)built after merges.
  const KdTree& index() const;

 private:
  friend class Atlas;
  explicit Submap(double d_voxel) : grid_(d_voxel) {}

  VoxelGrid grid_;
  PointCloud cloud_;
  mutable std::shared_ptr<const KdTree> index_;
};

struct SubmapMatch {
  int id = 0;
  double distance = 0.0;
  RelativeTilt tilt;
};

struct AtlasUpdate {
  int id = 0;
  bool merged = false;
};

/// Euler roll and pitch of `now` minus those of `reference`; yaw is zero.
Rpy tilt_difference(const UnitQuat& now, const UnitQuat& reference);

class Atlas {
 public:
  Atlas() = default;
  explicit Atlas(const AtlasParams& params) : params_(params) {}

  const AtlasParams& params() const { return params_; }
  std::size_t size() const { return submaps_.size(); }
  bool empty() const { return submaps_.empty(); }
  const std::vector<Submap>& submaps() const { return submaps_; }
  const Submap& get(int id) const;

  /// Whether `q_now` lies within theta_tilt in roll and pitch of the submap.
  bool tilt_compatible(const Submap& s, const UnitQuat& q_now) const;

  /// Closest submap whose anchor lies within r_submap of `predicted` and
  /// whose tilt signature is compatible; ties go to the older submap.
  std::optional<SubmapMatch> find(const Pose2& predicted, const UnitQuat& q_now) const;

  /// Merges the scan into `matched` when still within range and tilt,
  /// otherwise starts a new submap. `deskewed` is in the scan frame.
  AtlasUpdate update(const PointCloud& deskewed, const Pose2& pose, const UnitQuat& q_now, Timestamp t,
                     std::optional<int> matched);

 private:
  AtlasParams params_;
  std::vector<Submap> submaps_;
};

}  // namespace rio
