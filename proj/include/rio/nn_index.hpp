#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rio/radar_frontend.hpp"

namespace rio {

struct Neighbor {
  std::uint32_t index = 0;
  double sq_dist = 0.0;
};

/// Exact k-nearest-neighbour search over a static 3D point set.
/// Results are sorted by distance, ties broken by lower point index.
class KdTree {
 public:
  KdTree() = default;
  /// Throws EmptyReference on an empty set. `masses` is either empty (all
  /// ones) or one positive value per point.
  explicit KdTree(std::vector<Eigen::Vector3d> points, std::vector<double> masses = {});

  std::size_t size() const { return points_.size(); }
  const Eigen::Vector3d& point(std::size_t i) const { return points_[i]; }
  double mass(std::size_t i) const { return masses_.empty() ? 1.0 : masses_[i]; }

  /// Up to k neighbours with squared distance <= max_sq_dist.
  void knn(const Eigen::Vector3d& query, std::size_t k, std::vector<Neighbor>& out,
           double max_sq_dist = std::numeric_limits<double>::infinity()) const;
  std::vector<Neighbor> knn(const Eigen::Vector3d& query, std::size_t k,
                            double max_sq_dist = std::numeric_limits<double>::infinity()) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& heap,
              double& bound) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<double> masses_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Index over the point positions; point counts become masses.
KdTree build_nn_index(const PointCloud& reference);

}  // namespace rio
