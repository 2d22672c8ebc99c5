#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rio/geometry.hpp"
#include "rio/imu_attitude.hpp"
#include "rio/radar_frontend.hpp"
#include "rio/registration.hpp"
#include "rio/submap_atlas.hpp"
#include "rio/tilt_gate.hpp"

namespace rio {

/// Pipeline parameters, defaults as in the reference configuration.
struct Params {
  int k = 10;
  double r_min = 5.0;
  double r_max = 100.0;
  int tau_raw = 60;
  double d_voxel = 1.0;
  double theta_tilt = 3.0;  ///< deg
  double gamma = 3.5;
  double r_submap = 20.0;
  double tau_tilt = 0.8;
  int k_nn = 4;

  ExtractionParams extraction() const { return {k, r_min, r_max, tau_raw}; }
  TiltGateParams gate() const { return {gamma, tau_tilt, theta_tilt}; }
};

void validate(const Params& p);

/// Pose published after a search miss.
enum class MissPrediction {
  ConstantVelocity,  ///< keep the constant-velocity prior, then reset velocity
  ZeroVelocity,      ///< hold position, only the IMU yaw advances
};

struct PipelineOptions {
  bool tilt_gate = true;    ///< false: the gate always passes through
  bool tilt_search = true;  ///< false: submap search and merge use distance only
  MissPrediction miss_prediction = MissPrediction::ConstantVelocity;
  double max_speed = 20.0;  ///< m/s, divergence guard
};

struct OdomState {
  Pose2 pose;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  ///< world frame, m/s
  double yaw_rate = 0.0;
  UnitQuat attitude;
  Timestamp t = 0;
  bool initialized = false;
};

struct ScanDiagnostics {
  Timestamp t = 0;
  std::size_t scan_index = 0;
  bool hit = false;
  int submap_id = -1;  ///< submap merged into or created
  std::size_t raw_count = 0;
  std::size_t deskewed_count = 0;
  std::size_t filtered_count = 0;
  std::size_t source_count = 0;
  std::size_t reference_count = 0;
  double tilt_deg = 0.0;
  bool gate_active = false;
  int icp_iterations = 0;
  double icp_cost = 0.0;
  double matched_fraction = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  std::string miss_reason;
};

/// Constant-velocity position, IMU-relative yaw.
Pose2 predict(const OdomState& state, Timestamp t_next, const AttitudeTrack& track);

OdomState on_miss_velocity_reset(const OdomState& state);

struct StepResult {
  OdomState state;
  ScanDiagnostics diagnostics;
};

/// One scan through extraction, deskew, submap search, tilt gate,
/// downsampling, ICP, state update and atlas update. Component failures
/// become a miss with a reason in the diagnostics.
StepResult process_scan(const OdomState& state, const PolarScan& scan, const AttitudeTrack& track, Atlas& atlas,
                        const Params& params, const IcpConfig& icp_cfg, const PipelineOptions& options = {});

struct TrajectoryRow {
  Timestamp t = 0;
  Pose2 pose;
  double roll = 0.0;
  double pitch = 0.0;
};

/// Streaming driver owning the state and the atlas.
class Odometry {
 public:
  Odometry(AttitudeTrack track, const Params& params, const IcpConfig& icp, const PipelineOptions& options = {});

  const ScanDiagnostics& step(const PolarScan& scan);

  const OdomState& state() const { return state_; }
  const Atlas& atlas() const { return atlas_; }
  const std::vector<TrajectoryRow>& trajectory() const { return trajectory_; }
  const std::vector<ScanDiagnostics>& diagnostics() const { return diagnostics_; }

 private:
  AttitudeTrack track_;
  Params params_;
  IcpConfig icp_;
  PipelineOptions options_;
  Atlas atlas_;
  OdomState state_;
  std::vector<TrajectoryRow> trajectory_;
  std::vector<ScanDiagnostics> diagnostics_;
};

}  // namespace rio
