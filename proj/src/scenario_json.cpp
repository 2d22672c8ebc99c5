#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>

#include "rio/error.hpp"
#include "rio/sim_world.hpp"

namespace rio::sim {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidScenario, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      invalid("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(std::string("bad value for '") + key + "': " + e.what());
  }
}

double read_deg(const json& j, const char* key, double fallback_rad) {
  double deg = rad2deg(fallback_rad);
  read(j, key, deg);
  return deg2rad(deg);
}

Eigen::Vector3d read_vec3(const json& j, const char* key) {
  std::vector<double> v{0.0, 0.0, 0.0};
  read(j, key, v);
  if (v.size() != 3) invalid(std::string(key) + " must have three entries");
  return {v[0], v[1], v[2]};
}

std::pair<double, double> read_range(const json& j, const char* key, std::pair<double, double> fallback) {
  std::vector<double> v{fallback.first, fallback.second};
  read(j, key, v);
  if (v.size() != 2 || v[0] > v[1]) invalid(std::string(key) + " must be [lo, hi]");
  return {v[0], v[1]};
}

/// Ground height under (x, y), taken at the closest path point.
double ground_under(const Path& path, const TiltProfile& profile, double x, double y) {
  return profile.ground_z(path.closest_arc_length(x, y));
}

double read_base_z(const json& j, const Path& path, const TiltProfile& profile, double x, double y) {
  if (!j.contains("base_z")) return 0.0;
  const json& v = j.at("base_z");
  if (v.is_string()) {
    if (v.get<std::string>() != "ground") invalid("base_z must be a number or \"ground\"");
    return ground_under(path, profile, x, y);
  }
  if (!v.is_number()) invalid("base_z must be a number or \"ground\"");
  return v.get<double>();
}

void parse_path(const json& j, Scenario& s) {
  only_keys(j, "path", {"start", "heading_deg", "segments"});
  std::vector<double> start{0.0, 0.0};
  read(j, "start", start);
  if (start.size() != 2) invalid("path.start must be [x, y]");
  s.start_x = start[0];
  s.start_y = start[1];
  s.start_heading = read_deg(j, "heading_deg", 0.0);
  if (!j.contains("segments") || !j.at("segments").is_array()) invalid("path.segments must be an array");
  for (const json& js : j.at("segments")) {
    only_keys(js, "path segment", {"type", "length", "radius", "angle_deg", "speed"});
    PathSegment seg;
    std::string type = "line";
    read(js, "type", type);
    if (type == "line") {
      seg.kind = PathSegment::Kind::Line;
    } else if (type == "arc") {
      seg.kind = PathSegment::Kind::Arc;
    } else {
      invalid("segment type must be line or arc, got " + type);
    }
    read(js, "length", seg.length);
    read(js, "radius", seg.radius);
    seg.angle = read_deg(js, "angle_deg", 0.0);
    read(js, "speed", seg.speed);
    s.segments.push_back(seg);
  }
}

void parse_tilt(const json& j, Scenario& s) {
  if (!j.is_array()) invalid("tilt must be an array");
  for (const json& jf : j) {
    only_keys(jf, "tilt feature",
              {"type", "axis", "start", "rise", "hold", "fall", "length", "wavelength", "amplitude_deg"});
    TiltFeature f;
    std::string type = "plateau";
    std::string axis = "pitch";
    read(jf, "type", type);
    read(jf, "axis", axis);
    if (type == "plateau") {
      f.kind = TiltFeature::Kind::Plateau;
    } else if (type == "ditch") {
      f.kind = TiltFeature::Kind::Ditch;
    } else if (type == "wave") {
      f.kind = TiltFeature::Kind::Wave;
    } else {
      invalid("tilt type must be plateau, ditch or wave, got " + type);
    }
    if (axis == "pitch") {
      f.axis = TiltAxis::Pitch;
    } else if (axis == "roll") {
      f.axis = TiltAxis::Roll;
    } else {
      invalid("tilt axis must be pitch or roll, got " + axis);
    }
    read(jf, "start", f.start);
    read(jf, "rise", f.rise);
    read(jf, "hold", f.hold);
    read(jf, "fall", f.fall);
    read(jf, "length", f.hold);
    read(jf, "wavelength", f.wavelength);
    f.amplitude = read_deg(jf, "amplitude_deg", 0.0);
    s.tilt.push_back(f);
  }
}

void parse_world(const json& j, Scenario& s) {
  only_keys(j, "world", {"poles", "walls", "random_poles"});
  const Path path(s);
  const TiltProfile profile(s, path.length());

  if (j.contains("poles")) {
    for (const json& jp : j.at("poles")) {
      only_keys(jp, "pole", {"x", "y", "base_z", "height", "reflectivity"});
      Pole p;
      read(jp, "x", p.x);
      read(jp, "y", p.y);
      p.base_z = read_base_z(jp, path, profile, p.x, p.y);
      read(jp, "height", p.height);
      read(jp, "reflectivity", p.reflectivity);
      s.poles.push_back(p);
    }
  }
  if (j.contains("walls")) {
    for (const json& jw : j.at("walls")) {
      only_keys(jw, "wall", {"x0", "y0", "x1", "y1", "base_z", "height", "lean_deg", "reflectivity"});
      Wall w;
      read(jw, "x0", w.x0);
      read(jw, "y0", w.y0);
      read(jw, "x1", w.x1);
      read(jw, "y1", w.y1);
      w.base_z = read_base_z(jw, path, profile, 0.5 * (w.x0 + w.x1), 0.5 * (w.y0 + w.y1));
      read(jw, "height", w.height);
      read(jw, "lean_deg", w.lean_deg);
      read(jw, "reflectivity", w.reflectivity);
      if (w.x0 == w.x1 && w.y0 == w.y1) invalid("wall base must have non-zero length");
      s.walls.push_back(w);
    }
  }
  if (j.contains("random_poles")) {
    std::uint32_t generator = 0;
    for (const json& jg : j.at("random_poles")) {
      only_keys(jg, "random_poles", {"count", "region", "height", "reflectivity", "min_path_clearance"});
      int count = 0;
      read(jg, "count", count);
      std::vector<double> region;
      read(jg, "region", region);
      if (region.size() != 4 || region[0] >= region[2] || region[1] >= region[3]) {
        invalid("random_poles.region must be [xmin, ymin, xmax, ymax]");
      }
      const auto height = read_range(jg, "height", {2.0, 6.0});
      const auto refl = read_range(jg, "reflectivity", {120.0, 255.0});
      double clearance = 2.0;
      read(jg, "min_path_clearance", clearance);

      std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0x9013u,
                        generator++};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> ux(region[0], region[2]);
      std::uniform_real_distribution<double> uy(region[1], region[3]);
      std::uniform_real_distribution<double> uh(height.first, height.second);
      std::uniform_real_distribution<double> ur(refl.first, refl.second);
      int placed = 0;
      for (int attempt = 0; placed < count && attempt < 100 * count; ++attempt) {
        Pole p;
        p.x = ux(rng);
        p.y = uy(rng);
        const double sc = path.closest_arc_length(p.x, p.y);
        if ((path.position(sc) - Eigen::Vector2d(p.x, p.y)).norm() < clearance) continue;
        p.base_z = profile.ground_z(sc);
        p.height = uh(rng);
        p.reflectivity = ur(rng);
        s.poles.push_back(p);
        ++placed;
      }
      if (placed < count) invalid("could not place " + std::to_string(count) + " random poles");
    }
  }
}

void parse_radar(const json& j, RadarModel& r) {
  only_keys(j, "radar",
            {"azimuth_count", "range_bin_count", "range_resolution", "rotation_period", "noise_mean", "noise_sigma",
             "elevation_half_width_deg", "beam_width_deg", "reference_range"});
  read(j, "azimuth_count", r.azimuth_count);
  read(j, "range_bin_count", r.range_bin_count);
  read(j, "range_resolution", r.range_resolution);
  read(j, "rotation_period", r.rotation_period);
  read(j, "noise_mean", r.noise_mean);
  read(j, "noise_sigma", r.noise_sigma);
  read(j, "elevation_half_width_deg", r.elevation_half_width_deg);
  read(j, "beam_width_deg", r.beam_width_deg);
  read(j, "reference_range", r.reference_range);
}

void parse_imu(const json& j, ImuModel& m) {
  only_keys(j, "imu", {"rate", "gyro_noise_density", "accel_noise_density", "gyro_bias", "accel_bias"});
  read(j, "rate", m.rate);
  read(j, "gyro_noise_density", m.gyro_noise_density);
  read(j, "accel_noise_density", m.accel_noise_density);
  if (j.contains("gyro_bias")) m.gyro_bias = read_vec3(j, "gyro_bias");
  if (j.contains("accel_bias")) m.accel_bias = read_vec3(j, "accel_bias");
}

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("scenario is not valid JSON: ") + e.what());
  }
  only_keys(j, "scenario",
            {"name", "seed", "static_duration", "ramp_duration", "sensor_height", "duration", "gt_output_rate", "path",
             "tilt", "world", "radar", "imu"});
  Scenario s;
  read(j, "name", s.name);
  read(j, "seed", s.seed);
  read(j, "static_duration", s.static_duration);
  read(j, "ramp_duration", s.ramp_duration);
  read(j, "sensor_height", s.sensor_height);
  read(j, "gt_output_rate", s.gt_output_rate);
  if (j.contains("duration") && !j.at("duration").is_null()) {
    double d = 0.0;
    read(j, "duration", d);
    s.duration = d;
  }
  if (!j.contains("path")) invalid("scenario needs a path");
  parse_path(j.at("path"), s);
  if (j.contains("tilt")) parse_tilt(j.at("tilt"), s);
  if (j.contains("radar")) parse_radar(j.at("radar"), s.radar);
  if (j.contains("imu")) parse_imu(j.at("imu"), s.imu);
  validate(s);
  if (j.contains("world")) parse_world(j.at("world"), s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["static_duration"] = s.static_duration;
  j["ramp_duration"] = s.ramp_duration;
  j["sensor_height"] = s.sensor_height;
  j["gt_output_rate"] = s.gt_output_rate;
  if (s.duration) j["duration"] = *s.duration;

  json segs = json::array();
  for (const PathSegment& seg : s.segments) {
    json js;
    if (seg.kind == PathSegment::Kind::Line) {
      js = {{"type", "line"}, {"length", seg.length}, {"speed", seg.speed}};
    } else {
      js = {{"type", "arc"}, {"radius", seg.radius}, {"angle_deg", rad2deg(seg.angle)}, {"speed", seg.speed}};
    }
    segs.push_back(js);
  }
  j["path"] = {{"start", {s.start_x, s.start_y}}, {"heading_deg", rad2deg(s.start_heading)}, {"segments", segs}};

  json tilt = json::array();
  for (const TiltFeature& f : s.tilt) {
    const char* type = f.kind == TiltFeature::Kind::Plateau ? "plateau"
                       : f.kind == TiltFeature::Kind::Ditch ? "ditch"
                                                            : "wave";
    json jf = {{"type", type},
               {"axis", f.axis == TiltAxis::Pitch ? "pitch" : "roll"},
               {"start", f.start},
               {"amplitude_deg", rad2deg(f.amplitude)}};
    if (f.kind == TiltFeature::Kind::Wave) {
      jf["length"] = f.hold;
      jf["wavelength"] = f.wavelength;
    } else {
      jf["rise"] = f.rise;
      jf["hold"] = f.hold;
      jf["fall"] = f.fall;
    }
    tilt.push_back(jf);
  }
  j["tilt"] = tilt;

  json poles = json::array();
  for (const Pole& p : s.poles) {
    poles.push_back({{"x", p.x}, {"y", p.y}, {"base_z", p.base_z}, {"height", p.height}, {"reflectivity", p.reflectivity}});
  }
  json walls = json::array();
  for (const Wall& w : s.walls) {
    walls.push_back({{"x0", w.x0},
                     {"y0", w.y0},
                     {"x1", w.x1},
                     {"y1", w.y1},
                     {"base_z", w.base_z},
                     {"height", w.height},
                     {"lean_deg", w.lean_deg},
                     {"reflectivity", w.reflectivity}});
  }
  j["world"] = {{"poles", poles}, {"walls", walls}};

  const RadarModel& r = s.radar;
  j["radar"] = {{"azimuth_count", r.azimuth_count},
                {"range_bin_count", r.range_bin_count},
                {"range_resolution", r.range_resolution},
                {"rotation_period", r.rotation_period},
                {"noise_mean", r.noise_mean},
                {"noise_sigma", r.noise_sigma},
                {"elevation_half_width_deg", r.elevation_half_width_deg},
                {"beam_width_deg", r.beam_width_deg},
                {"reference_range", r.reference_range}};
  j["imu"] = {{"rate", s.imu.rate},
              {"gyro_noise_density", s.imu.gyro_noise_density},
              {"accel_noise_density", s.imu.accel_noise_density},
              {"gyro_bias", vec3(s.imu.gyro_bias)},
              {"accel_bias", vec3(s.imu.accel_bias)}};
  return j.dump(2) + "\n";
}

}  // namespace rio::sim
