#include "rio/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>

#include "rio/config.hpp"
#include "rio/error.hpp"
#include "rio/eval_metrics.hpp"
#include "rio/io.hpp"
#include "rio/pipeline.hpp"
#include "rio/sim_world.hpp"

namespace rio {

namespace {

namespace fs = std::filesystem;

void simulate(const std::string& scenario_path, const fs::path& out, std::optional<double> duration) {
  const sim::Scenario scenario = sim::load_scenario(scenario_path);
  const sim::GroundTruth gt = sim::generate_ground_truth(scenario, duration);
  const std::vector<ImuSample> imu = sim::synthesize_imu(scenario, gt);
  const std::size_t n_scans = sim::scan_count(scenario, gt);

  fs::create_directories(out / "scans");
  for (const auto& entry : fs::directory_iterator(out / "scans")) {
    if (entry.path().extension() == ".frad") fs::remove(entry.path());
  }
  for (std::size_t i = 0; i < n_scans; ++i) {
    io::write_polar_scan(sim::render_scan(scenario, gt, i), io::scan_path(out, i));
  }
  io::write_imu_csv(io::imu_path(out), imu);

  const auto stride = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(1e9 / scenario.gt_output_rate / static_cast<double>(sim::GroundTruth::kStep))));
  std::vector<io::GroundTruthRow> rows;
  for (std::size_t k = 0; k < gt.size(); k += stride) rows.push_back({gt.t[k], gt.position[k], gt.attitude[k]});
  io::write_ground_truth_csv(io::ground_truth_path(out), rows);
  io::write_text(io::scenario_echo_path(out), sim::scenario_to_json(scenario));

  std::cerr << "simulate: " << scenario.name << ", " << ns_to_s(gt.end() - gt.begin()) << " s, " << n_scans
            << " scans, " << imu.size() << " imu samples, " << scenario.poles.size() << " poles, "
            << scenario.walls.size() << " walls\n";
}

void run(const fs::path& dataset, const std::string& config_path, const fs::path& out,
         const std::optional<fs::path>& diagnostics) {
  const RunConfig cfg = load_run_config(config_path);
  const std::vector<ImuSample> imu = io::read_imu_csv(io::imu_path(dataset));
  const ImuBias bias = estimate_bias(imu, cfg.static_window);
  Odometry odom(run_attitude_filter(imu, bias, cfg.madgwick_beta), cfg.params, cfg.icp, cfg.options);

  const std::size_t n = io::count_scans(dataset);
  if (n == 0) throw Error(ErrorCode::InsufficientData, "no scans under " + (dataset / "scans").string());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (odom.step(io::read_polar_scan(io::scan_path(dataset, i))).hit) ++hits;
  }
  io::write_trajectory_csv(out, odom.trajectory());
  if (diagnostics) io::write_diagnostics_csv(*diagnostics, odom.diagnostics());

  const Pose2& last = odom.state().pose;
  std::cerr << "run: " << n << " scans, " << hits << " hits, " << n - hits << " misses, " << odom.atlas().size()
            << " submaps, final pose (" << last.x() << ", " << last.y() << ", " << rad2deg(last.yaw()) << " deg)\n";
}

void evaluate(const fs::path& est_path, const fs::path& gt_path, double segment, const fs::path& out) {
  const Trajectory est = io::read_planar_trajectory(est_path);
  const Trajectory gt = io::read_planar_trajectory(gt_path);
  const RteReport report = relative_translation_error(est, gt, segment);
  io::write_rte_csv(out, report);
  std::cerr << "eval: " << report.count() << " segments of " << segment << " m, RTE median " << report.median
            << " %, mean " << report.mean << " %, quartiles [" << report.q1 << ", " << report.q3
            << "] %, rotation median " << report.rot_median << " deg/100m, endpoint error "
            << endpoint_error(est, gt) << " m\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Tilt-aware radar-inertial odometry toolkit"};
  app.name("rio");
  app.require_subcommand(1);

  std::string scenario;
  std::string sim_out;
  std::optional<double> duration;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Render a synthetic dataset from a scenario file");
  sim_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sim_out, "Output dataset directory")->required();
  sim_cmd->add_option("--duration", duration, "Seconds to simulate (default: until the vehicle stops)");

  std::string dataset;
  std::string config;
  std::string traj_out;
  std::optional<std::string> diag_out;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the odometry pipeline over a dataset");
  run_cmd->add_option("--dataset", dataset, "Dataset directory")->required();
  run_cmd->add_option("--config", config, "key = value parameter file")->required();
  run_cmd->add_option("--out", traj_out, "Trajectory CSV")->required();
  run_cmd->add_option("--diagnostics", diag_out, "Per-scan diagnostics CSV");

  std::string est;
  std::string gt;
  double segment = 100.0;
  std::string rte_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Relative translation error of a trajectory");
  eval_cmd->add_option("--est", est, "Estimated trajectory CSV")->required();
  eval_cmd->add_option("--gt", gt, "Ground-truth CSV")->required();
  eval_cmd->add_option("--segment", segment, "Segment length in meters")->capture_default_str();
  eval_cmd->add_option("--out", rte_out, "RTE report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, std::cerr, std::cerr);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, std::cerr, std::cerr);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    for (CLI::App* sub : {sim_cmd, run_cmd, eval_cmd}) {
      if (sub->parsed()) std::cerr << sub->help();
    }
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) {
      if (duration && !(*duration > 0.0)) {
        std::cerr << "error: --duration must be positive\n";
        return kExitUsage;
      }
      simulate(scenario, sim_out, duration);
    } else if (run_cmd->parsed()) {
      run(dataset, config, traj_out, diag_out ? std::optional<fs::path>(*diag_out) : std::nullopt);
    } else if (eval_cmd->parsed()) {
      if (!(segment > 0.0)) {
        std::cerr << "error: --segment must be positive\n";
        return kExitUsage;
      }
      evaluate(est, gt, segment, rte_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rio");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rio
