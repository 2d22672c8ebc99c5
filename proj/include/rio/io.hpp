#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rio/eval_metrics.hpp"
#include "rio/imu_attitude.hpp"
#include "rio/pipeline.hpp"
#include "rio/radar_frontend.hpp"
#include "rio/submap_atlas.hpp"

namespace rio::io {

namespace fs = std::filesystem;

inline constexpr std::uint16_t kFradVersion = 1;

inline constexpr const char* kImuHeader = "t_ns,wx,wy,wz,ax,ay,az";
inline constexpr const char* kGroundTruthHeader = "t_ns,x,y,z,qw,qx,qy,qz";
inline constexpr const char* kTrajectoryHeader = "t_ns,x,y,yaw,roll,pitch";
inline constexpr const char* kRteHeader = "start_t_ns,length_m,err_pct,rot_deg_per_100m";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Binary polar scans (little-endian "FRAD" container).
std::vector<std::uint8_t> encode_polar_scan(const PolarScan& scan);
PolarScan decode_polar_scan(const std::vector<std::uint8_t>& bytes);
void write_polar_scan(const PolarScan& scan, const fs::path& path);
PolarScan read_polar_scan(const fs::path& path);

std::vector<ImuSample> read_imu_csv(const fs::path& path);
void write_imu_csv(const fs::path& path, const std::vector<ImuSample>& samples);

struct GroundTruthRow {
  Timestamp t = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  UnitQuat attitude;
};
std::vector<GroundTruthRow> read_ground_truth_csv(const fs::path& path);
void write_ground_truth_csv(const fs::path& path, const std::vector<GroundTruthRow>& rows);

std::vector<TrajectoryRow> read_trajectory_csv(const fs::path& path);
void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRow>& rows);

/// Planar trajectory from either a ground-truth or an odometry CSV, chosen by header.
Trajectory read_planar_trajectory(const fs::path& path);

void write_diagnostics_csv(const fs::path& path, const std::vector<ScanDiagnostics>& rows);
void write_rte_csv(const fs::path& path, const RteReport& report);
void write_atlas_csv(const fs::path& path, const Atlas& atlas);

// Dataset layout.
fs::path scan_path(const fs::path& dataset, std::size_t index);
/// Number of contiguous scan files starting at 000000.
std::size_t count_scans(const fs::path& dataset);
inline fs::path imu_path(const fs::path& dataset) { return dataset / "imu.csv"; }
inline fs::path ground_truth_path(const fs::path& dataset) { return dataset / "ground_truth.csv"; }
inline fs::path scenario_echo_path(const fs::path& dataset) { return dataset / "scenario.echo"; }

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace rio::io
