#pragma once

#include <vector>

#include "rio/geometry.hpp"

namespace rio {

struct StampedPose {
  Timestamp t = 0;
  Pose2 pose;
};

/// Strictly increasing in time.
using Trajectory = std::vector<StampedPose>;

/// Throws NonMonotonicTimestamp unless timestamps strictly increase.
void check_trajectory(const Trajectory& traj, const char* name);

/// Linear position and shortest-arc yaw interpolation, clamped at the ends.
Pose2 interpolate(const Trajectory& traj, Timestamp t);

struct RteSegment {
  Timestamp start_t = 0;
  double length = 0.0;        ///< m, ground-truth arc length
  double error_pct = 0.0;
  double rot_deg_per_100m = 0.0;
};

struct RteReport {
  double segment_length = 0.0;
  std::vector<RteSegment> segments;
  double median = 0.0;  ///< percent
  double mean = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double rot_median = 0.0;  ///< deg / 100 m

  std::size_t count() const { return segments.size(); }
};

/// Percentile with linear interpolation between order statistics
/// (the common "type 7" definition); q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Relative translation error over overlapping ground-truth segments of the
/// given arc length, one per ground-truth sample inside the time overlap.
/// The estimate is resampled to ground-truth stamps. Throws
/// TrajectoryTooShort when no segment fits.
RteReport relative_translation_error(const Trajectory& est, const Trajectory& gt, double segment_length);

/// Planar distance between the final poses at the last common timestamp,
/// after aligning the estimate to ground truth at the first common one.
double endpoint_error(const Trajectory& est, const Trajectory& gt);

}  // namespace rio
