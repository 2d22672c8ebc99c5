#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rio/geometry.hpp"
#include "rio/imu_attitude.hpp"
#include "rio/radar_frontend.hpp"

namespace rio::sim {

struct Pole {
  double x = 0.0;
  double y = 0.0;
  double base_z = 0.0;
  double height = 3.0;
  double reflectivity = 200.0;  ///< 0..255
};

/// Planar reflector rising from the base line (x0,y0)-(x1,y1). A positive
/// lean tips the face toward the left of the base direction.
struct Wall {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double base_z = 0.0;
  double height = 5.0;
  double lean_deg = 0.0;
  double reflectivity = 150.0;
};

struct PathSegment {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  double length = 0.0;  ///< line length, m
  double radius = 0.0;  ///< arc radius, m
  double angle = 0.0;   ///< arc turn, rad, positive = left
  double speed = 1.0;   ///< horizontal speed, m/s

  double arc_length() const { return kind == Kind::Line ? length : radius * std::abs(angle); }
};

enum class TiltAxis { Pitch, Roll };

/// Tilt profile element as a function of path arc length. Transitions are
/// half-cosine blends, so the profile is C1.
struct TiltFeature {
  enum class Kind {
    Plateau,  ///< 0 -> amplitude over rise, hold, back to 0 over fall
    Ditch,    ///< 0 -> -amplitude -> +amplitude -> 0 over rise, hold, fall
    Wave,     ///< amplitude * sin over `hold` meters with the given wavelength
  };
  Kind kind = Kind::Plateau;
  TiltAxis axis = TiltAxis::Pitch;
  double start = 0.0;      ///< m along the path
  double rise = 1.0;       ///< m
  double hold = 0.0;       ///< m
  double fall = 1.0;       ///< m
  double amplitude = 0.0;  ///< rad
  double wavelength = 10.0;

  double value(double s) const;
  double extent() const { return kind == Kind::Wave ? hold : rise + hold + fall; }
};

struct RadarModel {
  std::uint32_t azimuth_count = 400;
  std::uint32_t range_bin_count = 1000;
  double range_resolution = 0.1;
  double rotation_period = 0.25;  ///< s
  double noise_mean = 40.0;
  double noise_sigma = 8.0;
  double elevation_half_width_deg = 2.0;
  double beam_width_deg = 1.8;
  double reference_range = 20.0;  ///< m, range at which amplitude equals reflectivity
};

struct ImuModel {
  double rate = 200.0;                ///< Hz
  double gyro_noise_density = 1e-4;   ///< rad/s/sqrt(Hz)
  double accel_noise_density = 1e-3;  ///< m/s^2/sqrt(Hz)
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double static_duration = 12.0;  ///< s at rest before moving
  double ramp_duration = 3.0;     ///< s to reach speed; also sets the braking distance
  double sensor_height = 1.5;     ///< m above the ground contact point, body z
  double start_x = 0.0;
  double start_y = 0.0;
  double start_heading = 0.0;  ///< rad
  std::vector<PathSegment> segments;
  std::vector<TiltFeature> tilt;
  std::vector<Pole> poles;
  std::vector<Wall> walls;
  RadarModel radar;
  ImuModel imu;
  std::optional<double> duration;  ///< s; default: until stopped plus one second
  double gt_output_rate = 100.0;   ///< Hz of the written ground-truth file
};

/// Throws InvalidScenario on inconsistent fields.
void validate(const Scenario& s);

/// Planar path with its speed profile.
class Path {
 public:
  explicit Path(const Scenario& s);

  double length() const { return length_; }
  Eigen::Vector2d position(double s) const;
  double heading(double s) const;
  double speed(double s) const;
  /// Path arc length of the point closest to (x, y), sampled every 0.5 m.
  double closest_arc_length(double x, double y) const;

 private:
  struct Piece {
    PathSegment seg;
    double s0 = 0.0;
    Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
    double h0 = 0.0;
  };
  std::size_t piece_at(double s) const;

  std::vector<Piece> pieces_;
  double length_ = 0.0;
};

/// Pitch and roll as functions of arc length, and the ground height they imply.
class TiltProfile {
 public:
  explicit TiltProfile(const Scenario& s, double path_length);

  double pitch(double s) const;
  double roll(double s) const;
  /// Ground height, integrated from dz/ds = -tan(pitch) on a 5 cm grid.
  double ground_z(double s) const;

 private:
  std::vector<TiltFeature> features_;
  double step_ = 0.05;
  std::vector<double> z_;
};

/// Sensor poses on a uniform 1 kHz clock.
struct GroundTruth {
  static constexpr Timestamp kStep = 1'000'000;  // 1 ms

  std::vector<Timestamp> t;
  std::vector<Eigen::Vector3d> position;
  std::vector<UnitQuat> attitude;
  std::vector<double> arc_length;  ///< path arc length of the ground contact point

  std::size_t size() const { return t.size(); }
  Timestamp begin() const { return t.front(); }
  Timestamp end() const { return t.back(); }

  struct Sample {
    Eigen::Vector3d position;
    UnitQuat attitude;
  };
  /// Linear position and slerped attitude, clamped at the ends.
  Sample at(Timestamp time) const;
};

/// Integrates the speed profile with RK4 and composes heading, pitch and roll.
/// Throws InvalidScenario for zero-length paths or a vehicle that never stops
/// when no duration is given.
GroundTruth generate_ground_truth(const Scenario& s, std::optional<double> duration = std::nullopt);

/// Number of complete radar revolutions inside the ground truth span.
std::size_t scan_count(const Scenario& s, const GroundTruth& gt);

/// Renders revolution `index`, which starts at index * rotation_period.
PolarScan render_scan(const Scenario& s, const GroundTruth& gt, std::size_t index);

/// Specific force and body rates from ground-truth finite differences plus
/// seeded white noise and constant biases.
std::vector<ImuSample> synthesize_imu(const Scenario& s, const GroundTruth& gt);

/// Scenario file handling (JSON). Generators such as random pole fields are
/// expanded at load time so that the echo lists every reflector.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

}  // namespace rio::sim
