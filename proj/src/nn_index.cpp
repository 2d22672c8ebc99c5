#include "rio/nn_index.hpp"

#include <algorithm>
#include <numeric>

#include "rio/error.hpp"

namespace rio {

namespace {

constexpr std::uint32_t kLeafSize = 8;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist != b.sq_dist ? a.sq_dist < b.sq_dist : a.index < b.index;
}

}  // namespace

KdTree::KdTree(std::vector<Eigen::Vector3d> points, std::vector<double> masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.empty()) throw Error(ErrorCode::EmptyReference, "cannot index an empty reference cloud");
  if (!masses_.empty() && masses_.size() != points_.size()) {
    throw Error(ErrorCode::InvalidConfig, "one mass per indexed point required");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0U);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& heap,
                    double& bound) const {
  const Node& n = nodes_[static_cast<std::size_t>(node_id)];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d = (points_[idx] - q).squaredNorm();
      if (d > bound) continue;
      const Neighbor cand{idx, d};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      } else {
        continue;
      }
      if (heap.size() == k) bound = std::min(bound, heap.front().sq_dist);
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff <= 0.0 ? n.left : n.right;
  const std::int32_t far = diff <= 0.0 ? n.right : n.left;
  search(near, q, k, heap, bound);
  if (diff * diff <= bound) search(far, q, k, heap, bound);
}

void KdTree::knn(const Eigen::Vector3d& query, std::size_t k, std::vector<Neighbor>& out, double max_sq_dist) const {
  out.clear();
  if (k == 0 || points_.empty()) return;
  k = std::min(k, points_.size());
  double bound = max_sq_dist;
  search(0, query, k, out, bound);
  std::sort_heap(out.begin(), out.end(), closer);
}

std::vector<Neighbor> KdTree::knn(const Eigen::Vector3d& query, std::size_t k, double max_sq_dist) const {
  std::vector<Neighbor> out;
  out.reserve(k);
  knn(query, k, out, max_sq_dist);
  return out;
}

KdTree build_nn_index(const PointCloud& reference) {
  std::vector<Eigen::Vector3d> pts;
  std::vector<double> masses;
  pts.reserve(reference.size());
  masses.reserve(reference.size());
  bool unit = true;
  for (const RadarPoint& p : reference.points) {
    pts.push_back(p.position);
    masses.push_back(static_cast<double>(p.count));
    unit = unit && p.count == 1;
  }
  if (unit) masses.clear();
  return KdTree(std::move(pts), std::move(masses));
}

}  // namespace rio
