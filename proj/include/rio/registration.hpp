#pragma once

#include <span>
#include <vector>

#include "rio/geometry.hpp"
#include "rio/nn_index.hpp"
#include "rio/radar_frontend.hpp"
#include "rio/voxel_grid.hpp"

namespace rio {

struct IcpConfig {
  int k_nn = 4;
  int max_iterations = 40;
  double translation_epsilon = 1e-3;          ///< m
  double rotation_epsilon = 1e-4;             ///< rad
  double max_correspondence_distance = 5.0;   ///< m, gate on the first iteration
  double final_correspondence_distance = 1.5; ///< m, gate after the coarse-to-fine schedule
  double gate_decay = 0.7;                    ///< per-iteration gate shrink factor
  bool use_weights = true;                    ///< carry tilt-gate weights into residuals
  bool use_mass = true;                       ///< weight voxel centroids by their member counts
};

/// Throws InvalidConfig when a field is out of range.
void validate(const IcpConfig& cfg);

struct IcpResult {
  Pose2 delta;               ///< correction applied after the prior: pose = prior * delta
  int iterations = 0;
  double initial_cost = 0.0; ///< m^2, under the prior with the first correspondences
  double final_cost = 0.0;   ///< m^2, mean weighted squared planar residual
  double matched_fraction = 0.0;
  bool converged = false;
};

/// Point-to-point ICP of a scan-frame source against a world-frame
/// reference, solving x, y and yaw only. Correspondences are searched in 3D.
/// Throws NoCorrespondences when fewer than 20% of the source points find a
/// neighbour on the first iteration, EmptyReference on an empty reference.
IcpResult icp_point_to_point(const PointCloud& source, const PointCloud& reference, const Pose2& prior,
                             const IcpConfig& cfg);
IcpResult icp_point_to_point(const PointCloud& source, const KdTree& reference, const Pose2& prior,
                             const IcpConfig& cfg);

namespace detail {

struct Pair {
  Eigen::Vector2d src;
  Eigen::Vector2d ref;
  double w = 1.0;
};

/// Closed-form weighted planar alignment: the transform T minimising
/// sum w |T(src) - ref|^2. Falls back to translation only when the
/// cross-covariance vanishes.
Pose2 solve_se2(std::span<const Pair> pairs);

/// Mean weighted squared residual of the pairs after applying T to src.
double weighted_cost(std::span<const Pair> pairs, const Pose2& T = Pose2());

}  // namespace detail

}  // namespace rio
