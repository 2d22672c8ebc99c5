// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "rio/cli.hpp"
#include "rio/config.hpp"
#include "rio/error.hpp"
#include "rio/eval_metrics.hpp"
#include "rio/imu_attitude.hpp"
#include "rio/io.hpp"
#include "rio/pipeline.hpp"
#include "rio/radar_frontend.hpp"
#include "rio/registration.hpp"
#include "rio/sim_world.hpp"
#include "rio/tilt_gate.hpp"

using namespace rio;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kFrontendBudgetS = 5.0;
constexpr double kIcpTransTol = 0.05;     // m
constexpr double kIcpYawTolDeg = 0.2;
constexpr double kIcpBudgetMs = 100.0;
constexpr int kIcpRequired = 98;
constexpr double kAttitudeTolDeg = 0.5;
constexpr double kSettleS = 3.0;          // s after the speed ramp
constexpr double kGyroOracleTol = 1e-6;  // rad per step
constexpr double kFlatMedianPct = 1.5;
constexpr double kFlatEndpointM = 5.0;
constexpr double kChainBudgetS = 180.0;
constexpr double kScaleMedian = 1.0;
constexpr double kScaleTol = 0.05;
// Quarry envelope: per-scan pitch/roll change and absolute pitch.
constexpr double kEnvPitchStepDeg = 13.0;
constexpr double kEnvRollStepDeg = 4.0;
constexpr double kEnvPitchAbsDeg = 30.0;
constexpr double kEnvSlackDeg = 0.5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<int> selected;  // empty: run everything

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " ("
            << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)" << std::endl;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(RIO_TEST_TMP) / "acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::vector<std::string>& args) { return cli_main(args); }

std::string scenario_file(const std::string& name) { return (fs::path(RIO_SCENARIO_DIR) / name).string(); }

std::pair<double, double> roll_pitch(const UnitQuat& q) {
  const Eigen::Matrix3d r = q.matrix();
  return {std::atan2(r(2, 1), r(2, 2)), -std::asin(std::clamp(r(2, 0), -1.0, 1.0))};
}

/// Ground truth decimated the way `simulate` writes it, as a planar trajectory.
Trajectory planar_ground_truth(const sim::Scenario& s, const sim::GroundTruth& gt) {
  const auto stride = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(1e9 / s.gt_output_rate / static_cast<double>(sim::GroundTruth::kStep))));
  Trajectory out;
  for (std::size_t k = 0; k < gt.size(); k += stride) {
    out.push_back({gt.t[k], Pose2(gt.position[k].x(), gt.position[k].y(), quat_to_rpy(gt.attitude[k]).yaw)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome frontend_oracle() {
  gen::Rng rng(1001);
  double lib_time = 0.0;
  std::size_t points = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PolarScan s = rng.scan(static_cast<std::uint32_t>(rng.integer(1, 400)),
                                 static_cast<std::uint32_t>(rng.integer(1, 1000)), rng.uniform(0.05, 0.5));
    const int k = rng.integer(1, 12);
    const double r_min = rng.uniform(0.0, 20.0);
    const double r_max = r_min + rng.uniform(0.1, 200.0);
    const int tau = rng.integer(0, 200);
    const auto t0 = Clock::now();
    const PointCloud got = k_strongest(s, {k, r_min, r_max, tau});
    lib_time += seconds_since(t0);
    const auto want = oracle::k_strongest(s, k, r_min, r_max, tau);
    if (got.size() != want.size()) return {false, "size mismatch on scan " + std::to_string(trial)};
    for (std::size_t i = 0; i < want.size(); ++i) {
      const double r = (static_cast<double>(want[i].bin) + 0.5) * s.range_resolution;
      const Eigen::Vector2d xy = polar_to_cartesian(r, s.azimuths[want[i].azimuth]);
      const RadarPoint& p = got.points[i];
      if (p.intensity != want[i].intensity || p.position.x() != xy.x() || p.position.y() != xy.y() ||
          p.t != s.azimuth_times[want[i].azimuth]) {
        return {false, "point mismatch on scan " + std::to_string(trial)};
      }
    }
    points += got.size();
  }
  return {lib_time < kFrontendBudgetS,
          "1000 scans, " + std::to_string(points) + " points identical, extraction " + fmt(lib_time) + " s"};
}

Outcome cauchy_kept_set() {
  if (cauchy_weight(3.5, 3.5) != 0.5) return {false, "cauchy_weight(3.5, 3.5) != 0.5"};
  const TiltGateParams params{};
  if (params.gamma != 3.5 || params.tau_tilt != 0.8) return {false, "unexpected gate defaults"};
  gen::Rng rng(1002);
  const double phi = rng.uniform(0, 2 * kPi);
  const RelativeTilt tilt{{std::cos(phi), std::sin(phi), 0.0}, deg2rad(9.0)};
  const PointCloud in = rng.point_cloud(10'000, 100, 3);
  const PointCloud out = tilt_filter(in, tilt, params);
  std::size_t j = 0, kept = 0, borderline = 0;
  for (const RadarPoint& p : in.points) {
    const double dd = oracle::vertical_displacement(p.position, tilt.axis, tilt.angle);
    const bool got = j < out.size() && out.points[j].position == p.position;
    if (got) ++j;
    if (std::abs(dd - 1.75) < 1e-9) {
      ++borderline;
      continue;
    }
    if (got != (dd <= 1.75)) return {false, "kept-set differs at dd = " + fmt(dd, 6)};
    kept += got;
  }
  if (j != out.size()) return {false, "filter output is not an ordered subset"};
  return {true, "w(3.5, 3.5) = 0.5, cutoff " + fmt(displacement_cutoff(3.5, 0.8), 4) + " m, kept " +
                    std::to_string(kept) + " of 10000 (" + std::to_string(borderline) + " on the boundary)"};
}

Outcome icp_recovery() {
  gen::Rng rng(1003);
  int ok = 0;
  double worst_ms = 0.0, worst_t = 0.0, worst_yaw = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud ref = rng.point_cloud(static_cast<std::size_t>(rng.integer(150, 400)), 50);
    const Pose2 truth(rng.uniform(-1, 1), rng.uniform(-1, 1), deg2rad(rng.uniform(-5, 5)));
    PointCloud src = ref;
    const Pose2 inv = truth.inverse();
    for (auto& p : src.points) p.position = inv.apply(p.position);
    const auto t0 = Clock::now();
    const IcpResult r = icp_point_to_point(src, ref, Pose2(), {});
    const double ms = 1e3 * seconds_since(t0);
    const double dt = (r.delta.translation() - truth.translation()).norm();
    const double dyaw = rad2deg(std::abs(wrap_angle(r.delta.yaw() - truth.yaw())));
    worst_ms = std::max(worst_ms, ms);
    worst_t = std::max(worst_t, dt);
    worst_yaw = std::max(worst_yaw, dyaw);
    if (dt < kIcpTransTol && dyaw < kIcpYawTolDeg && ms < kIcpBudgetMs) ++ok;
  }
  return {ok >= kIcpRequired, std::to_string(ok) + "/100 recovered, worst " + fmt(worst_t, 4) + " m, " +
                                  fmt(worst_yaw, 4) + " deg, slowest " + fmt(worst_ms, 1) + " ms"};
}

sim::Scenario tilt_profiled_scenario() {
  sim::Scenario s;
  s.name = "attitude_profile";
  s.static_duration = 12.0;
  s.ramp_duration = 3.0;
  sim::PathSegment line;
  line.length = 200;
  line.speed = 2.0;
  s.segments = {line};
  sim::TiltFeature bump;
  bump.axis = sim::TiltAxis::Pitch;
  bump.start = 15;
  bump.rise = 8;
  bump.hold = 10;
  bump.fall = 8;
  bump.amplitude = deg2rad(6);
  sim::TiltFeature wave;
  wave.kind = sim::TiltFeature::Kind::Wave;
  wave.axis = sim::TiltAxis::Roll;
  wave.start = 50;
  wave.hold = 40;
  wave.wavelength = 20;
  wave.amplitude = deg2rad(4);
  s.tilt = {bump, wave};
  s.imu.gyro_noise_density = 0.0;
  s.imu.accel_noise_density = 0.0;
  s.duration = 60.0;
  return s;
}

Outcome attitude_filter() {
  const sim::Scenario s = tilt_profiled_scenario();
  const sim::GroundTruth gt = sim::generate_ground_truth(s);
  const std::vector<ImuSample> imu = sim::synthesize_imu(s, gt);
  const ImuBias bias = estimate_bias(imu, 10.0);
  const AttitudeTrack track = run_attitude_filter(imu, bias, 0.1);

  // Converged once the vehicle cruises: forward acceleration during the speed
  // ramp tilts the apparent gravity, so the clock starts a settling time after it.
  const Timestamp converged =
      imu.front().t + static_cast<Timestamp>((s.static_duration + s.ramp_duration + kSettleS) * 1e9);
  double worst = 0.0, max_tilt = 0.0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    const Timestamp t = track.times()[i];
    if (t < converged) continue;
    const auto [r_est, p_est] = roll_pitch(track.attitudes()[i]);
    const auto [r_gt, p_gt] = roll_pitch(gt.at(t).attitude);
    worst = std::max({worst, std::abs(r_est - r_gt), std::abs(p_est - p_gt)});
    max_tilt = std::max({max_tilt, std::abs(r_gt), std::abs(p_gt)});
  }

  double worst_step = 0.0;
  UnitQuat q = gt.attitude.front();
  for (std::size_t i = 1; i < imu.size(); ++i) {
    const double dt = ns_to_s(imu[i].t - imu[i - 1].t);
    const Eigen::Matrix3d want = oracle::integrate_gyro(q.matrix(), imu[i].omega, dt);
    q = madgwick_step(q, imu[i].omega, imu[i].accel, dt, 0.0);
    worst_step = std::max(worst_step, oracle::angle_of(q.matrix().transpose() * want));
  }
  const bool pass = rad2deg(worst) < kAttitudeTolDeg && worst_step < kGyroOracleTol;
  return {pass, "60 s, checked from " + fmt(ns_to_s(converged - imu.front().t), 1) + " s, true tilt up to " + fmt(rad2deg(max_tilt), 1) + " deg, worst roll/pitch error " +
                    fmt(rad2deg(worst), 3) + " deg, beta=0 vs gyro oracle " + fmt(worst_step * 1e9, 3) +
                    "e-9 rad/step"};
}

struct ChainResult {
  double seconds = 0.0;
  RteReport rte;
  double endpoint = 0.0;
  fs::path traj, rte_csv;
};

ChainResult flat_loop_chain(const std::string& tag) {
  const fs::path dir = scratch(tag);
  const fs::path conf = dir / "default.conf";
  io::write_text(conf, to_text(RunConfig{}));
  ChainResult out;
  out.traj = dir / "traj.csv";
  out.rte_csv = dir / "rte.csv";
  const auto t0 = Clock::now();
  if (cli({"simulate", "--scenario", scenario_file("flat_loop.json"), "--out", (dir / "data").string()}) != 0 ||
      cli({"run", "--dataset", (dir / "data").string(), "--config", conf.string(), "--out", out.traj.string()}) != 0 ||
      cli({"eval", "--est", out.traj.string(), "--gt", io::ground_truth_path(dir / "data").string(), "--segment",
           "100", "--out", out.rte_csv.string()}) != 0) {
    throw std::runtime_error("CLI chain returned nonzero");
  }
  out.seconds = seconds_since(t0);
  const Trajectory est = io::read_planar_trajectory(out.traj);
  const Trajectory gt = io::read_planar_trajectory(io::ground_truth_path(dir / "data"));
  out.rte = relative_translation_error(est, gt, 100);
  out.endpoint = endpoint_error(est, gt);
  return out;
}

ChainResult first_chain;

Outcome flat_loop() {
  first_chain = flat_loop_chain("flat_a");
  const ChainResult& c = first_chain;
  const bool pass = c.rte.median < kFlatMedianPct && c.endpoint < kFlatEndpointM && c.seconds < kChainBudgetS;
  return {pass, "median RTE " + fmt(c.rte.median) + " % over " + std::to_string(c.rte.count()) +
                    " segments, endpoint " + fmt(c.endpoint) + " m, chain " + fmt(c.seconds, 1) + " s"};
}

struct Envelope {
  double pitch_step = 0.0, roll_step = 0.0, pitch_abs = 0.0;
};

Trajectory planar(const std::vector<TrajectoryRow>& rows) {
  Trajectory out;
  for (const TrajectoryRow& r : rows) out.push_back({r.t, r.pose});
  return out;
}

Envelope envelope(const sim::GroundTruth& gt, Timestamp period) {
  Envelope e;
  const auto lag = static_cast<std::size_t>(period / sim::GroundTruth::kStep);
  std::vector<std::pair<double, double>> rp(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) rp[k] = roll_pitch(gt.attitude[k]);
  for (std::size_t k = 0; k < gt.size(); ++k) {
    e.pitch_abs = std::max(e.pitch_abs, std::abs(rp[k].second));
    if (k < lag) continue;
    e.roll_step = std::max(e.roll_step, std::abs(rp[k].first - rp[k - lag].first));
    e.pitch_step = std::max(e.pitch_step, std::abs(rp[k].second - rp[k - lag].second));
  }
  e.pitch_step = rad2deg(e.pitch_step);
  e.roll_step = rad2deg(e.roll_step);
  e.pitch_abs = rad2deg(e.pitch_abs);
  return e;
}

bool near_bound(double got, double want) { return std::abs(got - want) <= kEnvSlackDeg; }

Outcome tilt_ablation() {
  const std::string text = io::read_text(scenario_file("quarry.json"));
  RunConfig full;
  RunConfig ablated;
  ablated.options.tilt_gate = false;
  ablated.options.tilt_search = false;

  std::vector<double> med_full, med_abl;
  std::ostringstream deltas;
  for (int seed = 1; seed <= 5; ++seed) {
    const sim::Scenario s =
        sim::parse_scenario(std::regex_replace(text, std::regex(R"("seed"\s*:\s*\d+)"), "\"seed\": " + std::to_string(seed)));
    const sim::GroundTruth gt = sim::generate_ground_truth(s);
    const Envelope env = envelope(gt, static_cast<Timestamp>(std::llround(s.radar.rotation_period * 1e9)));
    if (!near_bound(env.pitch_step, kEnvPitchStepDeg) || !near_bound(env.roll_step, kEnvRollStepDeg) ||
        !near_bound(env.pitch_abs, kEnvPitchAbsDeg)) {
      return {false, "seed " + std::to_string(seed) + " outside envelope: dpitch " + fmt(env.pitch_step, 2) +
                         ", droll " + fmt(env.roll_step, 2) + ", |pitch| " + fmt(env.pitch_abs, 2) + " deg"};
    }
    const std::vector<ImuSample> imu = sim::synthesize_imu(s, gt);
    const AttitudeTrack track = run_attitude_filter(imu, estimate_bias(imu, full.static_window), full.madgwick_beta);
    Odometry a(track, full.params, full.icp, full.options);
    Odometry b(track, ablated.params, ablated.icp, ablated.options);
    const std::size_t n = sim::scan_count(s, gt);
    for (std::size_t i = 0; i < n; ++i) {
      const PolarScan scan = sim::render_scan(s, gt, i);
      a.step(scan);
      b.step(scan);
    }
    const Trajectory ref = planar_ground_truth(s, gt);
    const double mf = relative_translation_error(planar(a.trajectory()), ref, 100).median;
    const double ma = relative_translation_error(planar(b.trajectory()), ref, 100).median;
    med_full.push_back(mf);
    med_abl.push_back(ma);
    deltas << (seed > 1 ? ", " : "") << "s" << seed << " " << fmt(mf, 2) << "/" << fmt(ma, 2) << " ("
           << (mf - ma >= 0 ? "+" : "") << fmt(mf - ma, 2) << ")";
  }
  const double f = quantile(med_full, 0.5);
  const double g = quantile(med_abl, 0.5);
  return {f <= g, "median RTE full " + fmt(f, 2) + " % vs ablated " + fmt(g, 2) + " %; per seed full/ablated (delta): " +
                      deltas.str()};
}

Outcome miss_path() {
  const fs::path dir = scratch("tilt_step");
  const fs::path conf = dir / "default.conf";
  io::write_text(conf, to_text(RunConfig{}));
  const fs::path traj = dir / "traj.csv";
  const fs::path diag = dir / "diag.csv";
  if (cli({"simulate", "--scenario", scenario_file("tilt_step.json"), "--out", (dir / "data").string()}) != 0 ||
      cli({"run", "--dataset", (dir / "data").string(), "--config", conf.string(), "--out", traj.string(),
           "--diagnostics", diag.string()}) != 0) {
    return {false, "CLI returned nonzero"};
  }
  std::ifstream in(diag);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0, misses = 0, new_submaps = 0, bad = 0;
  int last_submap = -1;
  while (std::getline(in, line)) {
    ++rows;
    std::string lower = line;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.find("nan") != std::string::npos || lower.find("inf") != std::string::npos) ++bad;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);  // a hit has no trailing reason
    if (f.size() < 16) return {false, "short diagnostics row " + std::to_string(rows)};
    const int submap = std::stoi(f[3]);
    if (rows > 1 && f[2] == "0") ++misses;
    if (submap > last_submap) {
      ++new_submaps;
      last_submap = submap;
    }
  }
  bool finite = true;
  const auto est = io::read_trajectory_csv(traj);
  for (const auto& r : est) {
    finite = finite && std::isfinite(r.pose.x()) && std::isfinite(r.pose.y()) && std::isfinite(r.pose.yaw());
  }
  const bool pass = rows > 0 && misses >= 1 && bad == 0 && finite && est.size() == rows;
  return {pass, std::to_string(rows) + " scans, " + std::to_string(misses) + " misses, " +
                    std::to_string(new_submaps) + " submaps, " + std::to_string(bad) +
                    " non-finite diagnostics rows, trajectory " + (finite ? "finite" : "NOT finite")};
}

Outcome determinism() {
  const ChainResult second = flat_loop_chain("flat_b");
  const bool traj_same = io::read_text(first_chain.traj) == io::read_text(second.traj);
  const bool rte_same = io::read_text(first_chain.rte_csv) == io::read_text(second.rte_csv);
  return {traj_same && rte_same, std::string("traj.csv ") + (traj_same ? "identical" : "DIFFERS") + ", rte.csv " +
                                     (rte_same ? "identical" : "DIFFERS")};
}

Outcome metric_sanity() {
  Trajectory gt;
  Pose2 p;
  for (int i = 0; i < 3000; ++i) {
    gt.push_back({static_cast<Timestamp>(i) * 100'000'000LL, p});
    p = p * Pose2(0.3, 0.0, 0.01 * std::sin(i * 0.01));
  }
  const RteReport self = relative_translation_error(gt, gt, 100);
  Trajectory line, scaled;
  for (int i = 0; i <= 1000; ++i) {
    const Timestamp t = static_cast<Timestamp>(i) * 100'000'000LL;
    line.push_back({t, Pose2(0.2 * i, 0.0, 0.0)});
    scaled.push_back({t, Pose2(1.01 * 0.2 * i, 0.0, 0.0)});
  }
  const double m = relative_translation_error(scaled, line, 100).median;
  const bool pass = self.median == 0.0 && self.mean == 0.0 && std::abs(m - kScaleMedian) <= kScaleTol;
  return {pass, "self RTE median " + fmt(self.median, 6) + " %, 1% scale median " + fmt(m, 4) + " %"};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  report(1, "frontend oracle equivalence", frontend_oracle);
  report(2, "cauchy weight and tilt kept-set", cauchy_kept_set);
  report(3, "ICP recovery", icp_recovery);
  report(4, "attitude filter", attitude_filter);
  report(5, "flat-loop odometry", flat_loop);
  report(6, "tilt ablation over 5 seeds", tilt_ablation);
  report(7, "miss-path robustness", miss_path);
  report(8, "determinism", determinism);
  report(9, "metric sanity", metric_sanity);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
