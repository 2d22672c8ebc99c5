#include "rio/pipeline.hpp"

#include <cmath>
#include <string>

#include "rio/error.hpp"

namespace rio {

void validate(const Params& p) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (p.k < 1) fail("k must be >= 1");
  if (!(p.r_min >= 0.0 && p.r_min < p.r_max)) fail("need 0 <= r_min < r_max");
  if (p.tau_raw < 0 || p.tau_raw > 255) fail("tau_raw must lie in [0, 255]");
  if (!(p.d_voxel > 0.0)) fail("d_voxel must be positive");
  if (!(p.theta_tilt > 0.0)) fail("theta_tilt must be positive");
  if (!(p.gamma > 0.0)) fail("gamma must be positive");
  if (!(p.r_submap > 0.0)) fail("r_submap must be positive");
  if (!(p.tau_tilt > 0.0 && p.tau_tilt <= 1.0)) fail("tau_tilt must lie in (0, 1]");
  if (p.k_nn < 1) fail("k_nn must be >= 1");
}

Pose2 predict(const OdomState& state, Timestamp t_next, const AttitudeTrack& track) {
  if (t_next <= state.t) {
    throw Error(ErrorCode::NonMonotonicTimestamp,
                "prediction target " + std::to_string(t_next) + " ns is not after " + std::to_string(state.t));
  }
  const double dt = ns_to_s(t_next - state.t);
  const double yaw_then = quat_to_rpy(track.at(state.t)).yaw;
  const double yaw_next = quat_to_rpy(track.at(t_next)).yaw;
  const Eigen::Vector2d pos = state.pose.translation() + state.velocity * dt;
  return {pos.x(), pos.y(), state.pose.yaw() + wrap_angle(yaw_next - yaw_then)};
}

OdomState on_miss_velocity_reset(const OdomState& state) {
  OdomState out = state;
  out.velocity.setZero();
  out.yaw_rate = 0.0;
  return out;
}

StepResult process_scan(const OdomState& state, const PolarScan& scan, const AttitudeTrack& track, Atlas& atlas,
                        const Params& params, const IcpConfig& icp_cfg, const PipelineOptions& options) {
  StepResult out;
  ScanDiagnostics& diag = out.diagnostics;

  const PointCloud raw = k_strongest(scan, params.extraction());
  const Timestamp t = raw.t_ref;
  diag.t = t;
  diag.raw_count = raw.size();
  if (state.initialized && t <= state.t) {
    throw Error(ErrorCode::NonMonotonicTimestamp,
                "scan starting at " + std::to_string(t) + " ns is not after the previous scan");
  }

  const UnitQuat q_now = track.at(t);
  const PointCloud deskewed = deskew(raw, track, t);
  diag.deskewed_count = deskewed.size();

  const Pose2 prior = state.initialized ? predict(state, t, track) : Pose2();
  std::optional<SubmapMatch> match;
  std::optional<Pose2> corrected;

  if (!state.initialized) {
    diag.miss_reason = "cold start";
  } else if (deskewed.empty()) {
    diag.miss_reason = "empty scan";
  } else if (!(match = atlas.find(prior, q_now))) {
    diag.miss_reason = "no submap in range";
  } else {
    diag.tilt_deg = rad2deg(match->tilt.angle);
    PointCloud filtered;
    const TiltGateParams gate = params.gate();
    diag.gate_active = options.tilt_gate && match->tilt.angle >= deg2rad(gate.theta_tilt);
    if (!options.tilt_gate) {
      filtered = tilt_passthrough(deskewed);
    } else {
      try {
        filtered = tilt_filter(deskewed, match->tilt, gate);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllPointsRejected) throw;
        filtered = tilt_passthrough(deskewed);
      }
    }
    diag.filtered_count = filtered.size();

    const PointCloud source = voxel_downsample(filtered, params.d_voxel);
    diag.source_count = source.size();
    const Submap& submap = atlas.get(match->id);
    diag.reference_count = submap.cloud().size();

    IcpConfig cfg = icp_cfg;
    cfg.k_nn = params.k_nn;
    try {
      const IcpResult icp = icp_point_to_point(source, submap.index(), prior, cfg);
      diag.icp_iterations = icp.iterations;
      diag.icp_cost = icp.final_cost;
      diag.matched_fraction = icp.matched_fraction;
      corrected = prior * icp.delta;
    } catch (const Error& e) {
      diag.miss_reason = std::string(to_string(e.code()));
    }
  }

  OdomState next = state;
  next.t = t;
  next.attitude = q_now;
  next.initialized = true;

  if (corrected) {
    const double dt = ns_to_s(t - state.t);
    const Eigen::Vector2d v = (corrected->translation() - state.pose.translation()) / dt;
    if (v.norm() >= options.max_speed) {
      diag.miss_reason = "velocity bound";
      corrected.reset();
    } else {
      next.pose = *corrected;
      next.velocity = v;
      next.yaw_rate = wrap_angle(corrected->yaw() - state.pose.yaw()) / dt;
      diag.hit = true;
    }
  }
  if (!diag.hit) {
    if (state.initialized) {
      if (options.miss_prediction == MissPrediction::ConstantVelocity) {
        next.pose = prior;
      } else {
        OdomState held = on_miss_velocity_reset(state);
        next.pose = predict(held, t, track);
      }
    }
    next = on_miss_velocity_reset(next);
  }
  diag.vx = next.velocity.x();
  diag.vy = next.velocity.y();

  if (!deskewed.empty()) {
    std::optional<int> merge_into = diag.hit ? std::optional<int>(match->id) : std::nullopt;
    if (merge_into) {
      // Start the next submap before the following prior leaves this one's
      // search window; otherwise every r_submap of travel ends in a miss.
      const Eigen::Vector2d ahead = next.pose.translation() + next.velocity * ns_to_s(t - state.t);
      if ((ahead - atlas.get(*merge_into).anchor.translation()).norm() > params.r_submap) merge_into.reset();
    }
    diag.submap_id = atlas.update(deskewed, next.pose, q_now, t, merge_into).id;
  }
  out.state = next;
  return out;
}

Odometry::Odometry(AttitudeTrack track, const Params& params, const IcpConfig& icp, const PipelineOptions& options)
    : track_(std::move(track)),
      params_(params),
      icp_(icp),
      options_(options),
      atlas_(AtlasParams{params.r_submap, params.theta_tilt, params.d_voxel, options.tilt_search}) {
  validate(params_);
  validate(icp_);
}

const ScanDiagnostics& Odometry::step(const PolarScan& scan) {
  StepResult r = process_scan(state_, scan, track_, atlas_, params_, icp_, options_);
  r.diagnostics.scan_index = diagnostics_.size();
  state_ = r.state;
  const Rpy rpy = quat_to_rpy(state_.attitude);
  trajectory_.push_back({state_.t, state_.pose, rpy.roll, rpy.pitch});
  diagnostics_.push_back(std::move(r.diagnostics));
  return diagnostics_.back();
}

}  // namespace rio
