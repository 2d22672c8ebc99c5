#include "rio/tilt_gate.hpp"

#include <cmath>
#include <string>

#include "rio/error.hpp"

namespace rio {

double vertical_displacement(const Eigen::Vector3d& p, const RelativeTilt& tilt) {
  if (tilt.angle == 0.0) return 0.0;
  const Eigen::Vector3d moved = tilt.matrix() * p;
  return std::abs(moved.z() - p.z());
}

double displacement_cutoff(double gamma, double tau_tilt) { return gamma * std::sqrt(1.0 / tau_tilt - 1.0); }

PointCloud tilt_passthrough(const PointCloud& deskewed) {
  PointCloud out = deskewed;
  out.stage = CloudStage::Filtered;
  return out;
}

PointCloud tilt_filter(const PointCloud& deskewed, const RelativeTilt& tilt, const TiltGateParams& params) {
  if (tilt.angle < deg2rad(params.theta_tilt)) return tilt_passthrough(deskewed);

  PointCloud out;
  out.stage = CloudStage::Filtered;
  out.t_ref = deskewed.t_ref;
  out.points.reserve(deskewed.points.size());
  const Eigen::Matrix3d rot = tilt.matrix();
  for (const RadarPoint& p : deskewed.points) {
    const double dd = std::abs((rot * p.position).z() - p.position.z());
    const double w = cauchy_weight(dd, params.gamma);
    if (w >= params.tau_tilt) {
      RadarPoint kept = p;
      kept.weight = w;
      out.points.push_back(kept);
    }
  }
  if (out.points.empty() && !deskewed.points.empty()) {
    throw Error(ErrorCode::AllPointsRejected, "tilt gate removed all " + std::to_string(deskewed.size()) +
                                                  " points at " + std::to_string(rad2deg(tilt.angle)) + " deg");
  }
  return out;
}

}  // namespace rio
