#pragma once

#include "rio/geometry.hpp"
#include "rio/radar_frontend.hpp"

namespace rio {

struct TiltGateParams {
  double gamma = 3.5;       ///< Cauchy scale, meters
  double tau_tilt = 0.8;    ///< minimum weight a point needs to survive
  double theta_tilt = 3.0;  ///< degrees; below this relative tilt the gate is open
};

/// Vertical motion of p when the tilt rotation is applied about the
/// horizontal axis through the sensor origin.
double vertical_displacement(const Eigen::Vector3d& p, const RelativeTilt& tilt);

inline double cauchy_weight(double delta_d, double gamma) {
  const double u = delta_d / gamma;
  return 1.0 / (1.0 + u * u);
}

/// Largest displacement that still passes the weight threshold.
double displacement_cutoff(double gamma, double tau_tilt);

/// Weights every point by the Cauchy function of its vertical displacement
/// and drops those below tau_tilt. Passthrough when the tilt is under
/// theta_tilt. Throws AllPointsRejected when nothing survives.
PointCloud tilt_filter(const PointCloud& deskewed, const RelativeTilt& tilt, const TiltGateParams& params);

/// Advances the stage without touching points (gate disabled or inactive).
PointCloud tilt_passthrough(const PointCloud& deskewed);

}  // namespace rio
