#include "rio/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rio/error.hpp"

namespace rio {

void validate(const IcpConfig& cfg) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "icp: " + what); };
  if (cfg.k_nn < 1) fail("k_nn must be >= 1");
  if (cfg.max_iterations < 1) fail("max_iterations must be >= 1");
  if (!(cfg.translation_epsilon > 0.0)) fail("translation_epsilon must be positive");
  if (!(cfg.rotation_epsilon > 0.0)) fail("rotation_epsilon must be positive");
  if (!(cfg.max_correspondence_distance > 0.0)) fail("max_correspondence_distance must be positive");
  if (!(cfg.final_correspondence_distance > 0.0)) fail("final_correspondence_distance must be positive");
  if (!(cfg.gate_decay > 0.0 && cfg.gate_decay <= 1.0)) fail("gate_decay must lie in (0, 1]");
}

namespace detail {

Pose2 solve_se2(std::span<const Pair> pairs) {
  double wsum = 0.0;
  Eigen::Vector2d ms = Eigen::Vector2d::Zero();
  Eigen::Vector2d mr = Eigen::Vector2d::Zero();
  for (const Pair& p : pairs) {
    wsum += p.w;
    ms += p.w * p.src;
    mr += p.w * p.ref;
  }
  if (!(wsum > 0.0)) return {};
  ms /= wsum;
  mr /= wsum;

  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  for (const Pair& p : pairs) H += p.w * (p.src - ms) * (p.ref - mr).transpose();

  const double num = H(0, 1) - H(1, 0);
  const double den = H(0, 0) + H(1, 1);
  double yaw = 0.0;
  if (std::hypot(num, den) > 1e-12 * wsum) yaw = std::atan2(num, den);
  const Eigen::Rotation2Dd rot(yaw);
  const Eigen::Vector2d t = mr - rot.toRotationMatrix() * ms;
  return {t.x(), t.y(), yaw};
}

double weighted_cost(std::span<const Pair> pairs, const Pose2& T) {
  double wsum = 0.0;
  double acc = 0.0;
  for (const Pair& p : pairs) {
    wsum += p.w;
    acc += p.w * (T.apply(p.src) - p.ref).squaredNorm();
  }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

}  // namespace detail

IcpResult icp_point_to_point(const PointCloud& source, const PointCloud& reference, const Pose2& prior,
                             const IcpConfig& cfg) {
  if (reference.empty()) throw Error(ErrorCode::EmptyReference, "reference cloud is empty");
  return icp_point_to_point(source, build_nn_index(reference), prior, cfg);
}

IcpResult icp_point_to_point(const PointCloud& source, const KdTree& reference, const Pose2& prior,
                             const IcpConfig& cfg) {
  validate(cfg);
  if (reference.size() == 0) throw Error(ErrorCode::EmptyReference, "reference cloud is empty");
  if (source.empty()) throw Error(ErrorCode::EmptyScan, "source cloud is empty");

  const auto k = static_cast<std::size_t>(cfg.k_nn);
  const double final_gate = std::min(cfg.final_correspondence_distance, cfg.max_correspondence_distance);
  double gate = cfg.max_correspondence_distance;

  IcpResult result;
  Pose2 T = prior;
  std::vector<detail::Pair> pairs;
  pairs.reserve(source.size() * k);
  std::vector<Neighbor> nbrs;
  nbrs.reserve(k);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    pairs.clear();
    std::size_t matched = 0;
    double nearest_sq = 0.0;
    const double gate_sq = gate * gate;
    for (const RadarPoint& p : source.points) {
      const Eigen::Vector3d q = T.apply(p.position);
      reference.knn(q, k, nbrs, gate_sq);
      if (nbrs.empty()) continue;
      ++matched;
      nearest_sq += nbrs.front().sq_dist;
      const double w = (cfg.use_weights ? p.weight : 1.0) / static_cast<double>(k);
      if (!cfg.use_mass) {
        for (const Neighbor& n : nbrs) pairs.push_back({q.head<2>(), reference.point(n.index).head<2>(), w});
        continue;
      }
      // Split the source mass over the neighbours in proportion to theirs.
      double nbr_mass = 0.0;
      for (const Neighbor& n : nbrs) nbr_mass += reference.mass(n.index);
      const double scale = w * static_cast<double>(p.count) * static_cast<double>(nbrs.size()) / nbr_mass;
      for (const Neighbor& n : nbrs) {
        pairs.push_back({q.head<2>(), reference.point(n.index).head<2>(), scale * reference.mass(n.index)});
      }
    }
    result.matched_fraction = static_cast<double>(matched) / static_cast<double>(source.size());
    if (it == 0) {
      if (result.matched_fraction < 0.2) {
        throw Error(ErrorCode::NoCorrespondences,
                    "only " + std::to_string(matched) + " of " + std::to_string(source.size()) +
                        " source points found a neighbour within " + std::to_string(gate) + " m");
      }
      result.initial_cost = detail::weighted_cost(pairs);
    }
    if (pairs.empty()) break;

    const double cost_before = detail::weighted_cost(pairs);
    result.iterations = it + 1;
    // Every source point already sits on a reference point: the estimate is
    // a fixed point, and the extra neighbours would only pull it off.
    if (matched == source.size() &&
        nearest_sq / static_cast<double>(matched) < cfg.translation_epsilon * cfg.translation_epsilon) {
      result.final_cost = cost_before;
      result.converged = true;
      break;
    }
    const Pose2 step = detail::solve_se2(pairs);
    T = step * T;
    result.final_cost = detail::weighted_cost(pairs, step);

    const bool small = step.translation().norm() < cfg.translation_epsilon &&
                       std::abs(step.yaw()) < cfg.rotation_epsilon;
    if (small && gate <= final_gate) {
      result.converged = true;
      break;
    }
    // A small step at a wide gate means the coarse stage has settled.
    gate = small ? final_gate : std::max(final_gate, gate * cfg.gate_decay);
  }

  result.delta = prior.inverse() * T;
  return result;
}

}  // namespace rio
