#include "rio/submap_atlas.hpp"

#include <cmath>
#include <string>

#include "rio/error.hpp"

namespace rio {

const KdTree& Submap::index() const {
  if (!index_) index_ = std::make_shared<const KdTree>(build_nn_index(cloud_));
  return *index_;
}

Rpy tilt_difference(const UnitQuat& now, const UnitQuat& reference) {
  const Rpy a = quat_to_rpy(now);
  const Rpy b = quat_to_rpy(reference);
  return {wrap_angle(a.roll - b.roll), a.pitch - b.pitch, 0.0};
}

const Submap& Atlas::get(int id) const {
  // Ids equal positions: submaps are only ever appended.
  if (id < 0 || static_cast<std::size_t>(id) >= submaps_.size()) {
    throw Error(ErrorCode::InvalidConfig, "no submap with id " + std::to_string(id));
  }
  return submaps_[static_cast<std::size_t>(id)];
}

bool Atlas::tilt_compatible(const Submap& s, const UnitQuat& q_now) const {
  if (!params_.tilt_search) return true;
  const Rpy d = tilt_difference(q_now, s.attitude);
  const double limit = deg2rad(params_.theta_tilt);
  return std::abs(d.roll) < limit && std::abs(d.pitch) < limit;
}

std::optional<SubmapMatch> Atlas::find(const Pose2& predicted, const UnitQuat& q_now) const {
  std::optional<SubmapMatch> best;
  for (const Submap& s : submaps_) {
    const double dist = (s.anchor.translation() - predicted.translation()).norm();
    if (dist > params_.r_submap) continue;
    if (!tilt_compatible(s, q_now)) continue;
    if (!best || dist < best->distance) best = SubmapMatch{s.id, dist, {}};
  }
  if (best) best->tilt = relative_tilt(q_now, get(best->id).attitude);
  return best;
}

AtlasUpdate Atlas::update(const PointCloud& deskewed, const Pose2& pose, const UnitQuat& q_now, Timestamp t,
                          std::optional<int> matched) {
  if (deskewed.empty()) throw Error(ErrorCode::EmptyScan, "cannot add an empty scan to the atlas");
  PointCloud world;
  world.stage = deskewed.stage;
  world.t_ref = deskewed.t_ref;
  world.points.reserve(deskewed.size());
  for (const RadarPoint& p : deskewed.points) {
    RadarPoint w = p;
    w.position = pose.apply(p.position);
    world.points.push_back(w);
  }

  if (matched) {
    Submap& s = submaps_.at(static_cast<std::size_t>(*matched));
    const double dist = (s.anchor.translation() - pose.translation()).norm();
    if (dist <= params_.r_submap && tilt_compatible(s, q_now)) {
      s.grid_.insert(world);
      s.cloud_ = s.grid_.to_cloud(CloudStage::Deskewed, t);
      s.index_.reset();
      ++s.scan_count;
      s.last_update_t = t;
      return {s.id, true};
    }
  }

  Submap s(params_.d_voxel);
  s.id = static_cast<int>(submaps_.size());
  s.anchor = pose;
  const Rpy rpy = quat_to_rpy(q_now);
  s.roll = rpy.roll;
  s.pitch = rpy.pitch;
  s.attitude = q_now;
  s.scan_count = 1;
  s.last_update_t = t;
  s.grid_.insert(world);
  s.cloud_ = s.grid_.to_cloud(CloudStage::Deskewed, t);
  submaps_.push_back(std::move(s));
  return {submaps_.back().id, false};
}

}  // namespace rio
