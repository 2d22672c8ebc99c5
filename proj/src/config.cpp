#include "rio/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rio/error.hpp"

namespace rio {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(int line, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(line, "'" + v + "' is not a number");
  return out;
}

int to_int(const std::string& v, int line) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(line, "'" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  bad(line, "'" + v + "' is not a boolean");
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"k", [](RunConfig& c, const std::string& v, int l) { c.params.k = to_int(v, l); }},
      {"r_min", [](RunConfig& c, const std::string& v, int l) { c.params.r_min = to_double(v, l); }},
      {"r_max", [](RunConfig& c, const std::string& v, int l) { c.params.r_max = to_double(v, l); }},
      {"tau_raw", [](RunConfig& c, const std::string& v, int l) { c.params.tau_raw = to_int(v, l); }},
      {"d_voxel", [](RunConfig& c, const std::string& v, int l) { c.params.d_voxel = to_double(v, l); }},
      {"theta_tilt", [](RunConfig& c, const std::string& v, int l) { c.params.theta_tilt = to_double(v, l); }},
      {"gamma", [](RunConfig& c, const std::string& v, int l) { c.params.gamma = to_double(v, l); }},
      {"r_submap", [](RunConfig& c, const std::string& v, int l) { c.params.r_submap = to_double(v, l); }},
      {"tau_tilt", [](RunConfig& c, const std::string& v, int l) { c.params.tau_tilt = to_double(v, l); }},
      {"k_nn", [](RunConfig& c, const std::string& v, int l) { c.params.k_nn = c.icp.k_nn = to_int(v, l); }},
      {"max_iterations", [](RunConfig& c, const std::string& v, int l) { c.icp.max_iterations = to_int(v, l); }},
      {"translation_epsilon",
       [](RunConfig& c, const std::string& v, int l) { c.icp.translation_epsilon = to_double(v, l); }},
      {"rotation_epsilon", [](RunConfig& c, const std::string& v, int l) { c.icp.rotation_epsilon = to_double(v, l); }},
      {"max_correspondence_distance",
       [](RunConfig& c, const std::string& v, int l) { c.icp.max_correspondence_distance = to_double(v, l); }},
      {"final_correspondence_distance",
       [](RunConfig& c, const std::string& v, int l) { c.icp.final_correspondence_distance = to_double(v, l); }},
      {"gate_decay", [](RunConfig& c, const std::string& v, int l) { c.icp.gate_decay = to_double(v, l); }},
      {"icp_use_weights", [](RunConfig& c, const std::string& v, int l) { c.icp.use_weights = to_bool(v, l); }},
      {"icp_use_mass", [](RunConfig& c, const std::string& v, int l) { c.icp.use_mass = to_bool(v, l); }},
      {"madgwick_beta", [](RunConfig& c, const std::string& v, int l) { c.madgwick_beta = to_double(v, l); }},
      {"static_window", [](RunConfig& c, const std::string& v, int l) { c.static_window = to_double(v, l); }},
      {"tilt_gate", [](RunConfig& c, const std::string& v, int l) { c.options.tilt_gate = to_bool(v, l); }},
      {"tilt_search", [](RunConfig& c, const std::string& v, int l) { c.options.tilt_search = to_bool(v, l); }},
      {"max_speed", [](RunConfig& c, const std::string& v, int l) { c.options.max_speed = to_double(v, l); }},
      {"miss_prediction",
       [](RunConfig& c, const std::string& v, int l) {
         if (v == "constant_velocity") {
           c.options.miss_prediction = MissPrediction::ConstantVelocity;
         } else if (v == "zero_velocity") {
           c.options.miss_prediction = MissPrediction::ZeroVelocity;
         } else {
           bad(l, "miss_prediction must be constant_velocity or zero_velocity");
         }
       }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) bad(line, "unknown key '" + key + "'");
    if (!seen.insert(key).second) bad(line, "duplicate key '" + key + "'");
    if (value.empty()) bad(line, "missing value for '" + key + "'");
    it->second(cfg, value, line);
  }
  validate(cfg.params);
  validate(cfg.icp);
  if (!(cfg.madgwick_beta >= 0.0)) throw Error(ErrorCode::InvalidConfig, "madgwick_beta must be non-negative");
  if (!(cfg.static_window > 0.0)) throw Error(ErrorCode::InvalidConfig, "static_window must be positive");
  if (!(cfg.options.max_speed > 0.0)) throw Error(ErrorCode::InvalidConfig, "max_speed must be positive");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  const auto b = [](bool v) { return v ? "true" : "false"; };
  o << "k = " << c.params.k << "\n"
    << "r_min = " << c.params.r_min << "\n"
    << "r_max = " << c.params.r_max << "\n"
    << "tau_raw = " << c.params.tau_raw << "\n"
    << "d_voxel = " << c.params.d_voxel << "\n"
    << "theta_tilt = " << c.params.theta_tilt << "\n"
    << "gamma = " << c.params.gamma << "\n"
    << "r_submap = " << c.params.r_submap << "\n"
    << "tau_tilt = " << c.params.tau_tilt << "\n"
    << "k_nn = " << c.params.k_nn << "\n"
    << "max_iterations = " << c.icp.max_iterations << "\n"
    << "translation_epsilon = " << c.icp.translation_epsilon << "\n"
    << "rotation_epsilon = " << c.icp.rotation_epsilon << "\n"
    << "max_correspondence_distance = " << c.icp.max_correspondence_distance << "\n"
    << "final_correspondence_distance = " << c.icp.final_correspondence_distance << "\n"
    << "gate_decay = " << c.icp.gate_decay << "\n"
    << "icp_use_weights = " << b(c.icp.use_weights) << "\n"
    << "icp_use_mass = " << b(c.icp.use_mass) << "\n"
    << "madgwick_beta = " << c.madgwick_beta << "\n"
    << "static_window = " << c.static_window << "\n"
    << "tilt_gate = " << b(c.options.tilt_gate) << "\n"
    << "tilt_search = " << b(c.options.tilt_search) << "\n"
    << "max_speed = " << c.options.max_speed << "\n"
    << "miss_prediction = "
    << (c.options.miss_prediction == MissPrediction::ConstantVelocity ? "constant_velocity" : "zero_velocity")
    << "\n";
  return o.str();
}

}  // namespace rio
