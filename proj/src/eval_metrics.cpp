#include "rio/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rio/error.hpp"

namespace rio {

void check_trajectory(const Trajectory& traj, const char* name) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj[i].t <= traj[i - 1].t) {
      throw Error(ErrorCode::NonMonotonicTimestamp,
                  std::string(name) + " trajectory entry " + std::to_string(i) + " is not after its predecessor");
    }
  }
}

Pose2 interpolate(const Trajectory& traj, Timestamp t) {
  if (traj.empty()) throw Error(ErrorCode::TrajectoryTooShort, "cannot interpolate an empty trajectory");
  if (t <= traj.front().t) return traj.front().pose;
  if (t >= traj.back().t) return traj.back().pose;
  const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                   [](Timestamp v, const StampedPose& p) { return v < p.t; });
  const auto lo = hi - 1;
  const double f = static_cast<double>(t - lo->t) / static_cast<double>(hi->t - lo->t);
  const Eigen::Vector2d p = lo->pose.translation() + f * (hi->pose.translation() - lo->pose.translation());
  const double yaw = lo->pose.yaw() + f * wrap_angle(hi->pose.yaw() - lo->pose.yaw());
  return {p.x(), p.y(), yaw};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Overlap {
  Timestamp begin;
  Timestamp end;
};

Overlap overlap(const Trajectory& est, const Trajectory& gt) {
  if (est.empty() || gt.empty()) throw Error(ErrorCode::TrajectoryTooShort, "empty trajectory");
  const Timestamp b = std::max(est.front().t, gt.front().t);
  const Timestamp e = std::min(est.back().t, gt.back().t);
  if (b > e) throw Error(ErrorCode::TrajectoryTooShort, "trajectories do not overlap in time");
  return {b, e};
}

}  // namespace

RteReport relative_translation_error(const Trajectory& est, const Trajectory& gt, double segment_length) {
  if (!(segment_length > 0.0)) throw Error(ErrorCode::InvalidConfig, "segment length must be positive");
  check_trajectory(est, "estimated");
  check_trajectory(gt, "ground-truth");
  const Overlap ov = overlap(est, gt);

  std::vector<Pose2> g;
  std::vector<Pose2> e;
  std::vector<Timestamp> t;
  for (const StampedPose& sp : gt) {
    if (sp.t < ov.begin || sp.t > ov.end) continue;
    g.push_back(sp.pose);
    e.push_back(interpolate(est, sp.t));
    t.push_back(sp.t);
  }
  std::vector<double> arc(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    arc[i] = arc[i - 1] + (g[i].translation() - g[i - 1].translation()).norm();
  }
  if (g.empty() || arc.back() < segment_length) {
    throw Error(ErrorCode::TrajectoryTooShort, "ground truth covers " + std::to_string(g.empty() ? 0.0 : arc.back()) +
                                                   " m, segment needs " + std::to_string(segment_length) + " m");
  }

  RteReport report;
  report.segment_length = segment_length;
  std::size_t j = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    j = std::max(j, i);
    while (j < g.size() && arc[j] - arc[i] < segment_length) ++j;
    if (j == g.size()) break;
    const double len = arc[j] - arc[i];
    const Pose2 dg = g[i].inverse() * g[j];
    const Pose2 de = e[i].inverse() * e[j];
    RteSegment seg;
    seg.start_t = t[i];
    seg.length = len;
    seg.error_pct = (dg.translation() - de.translation()).norm() / len * 100.0;
    seg.rot_deg_per_100m = rad2deg(std::abs(wrap_angle(dg.yaw() - de.yaw()))) / len * 100.0;
    report.segments.push_back(seg);
  }

  std::vector<double> errs;
  std::vector<double> rots;
  errs.reserve(report.segments.size());
  rots.reserve(report.segments.size());
  for (const RteSegment& s : report.segments) {
    errs.push_back(s.error_pct);
    rots.push_back(s.rot_deg_per_100m);
  }
  report.median = quantile(errs, 0.5);
  report.q1 = quantile(errs, 0.25);
  report.q3 = quantile(errs, 0.75);
  report.mean = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
  report.rot_median = quantile(rots, 0.5);
  return report;
}

double endpoint_error(const Trajectory& est, const Trajectory& gt) {
  check_trajectory(est, "estimated");
  check_trajectory(gt, "ground-truth");
  const Overlap ov = overlap(est, gt);
  const Pose2 align = interpolate(gt, ov.begin) * interpolate(est, ov.begin).inverse();
  const Pose2 e = align * interpolate(est, ov.end);
  return (e.translation() - interpolate(gt, ov.end).translation()).norm();
}

}  // namespace rio
