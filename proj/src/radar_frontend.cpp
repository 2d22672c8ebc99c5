#include "rio/radar_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rio/error.hpp"

namespace rio {

PolarScan::PolarScan(std::uint32_t n_azimuth, std::uint32_t n_range, double resolution)
    : azimuth_count(n_azimuth),
      range_bin_count(n_range),
      range_resolution(resolution),
      azimuths(n_azimuth, 0.0),
      azimuth_times(n_azimuth, 0),
      intensity(static_cast<std::size_t>(n_azimuth) * n_range, 0) {
  for (std::uint32_t a = 0; a < n_azimuth; ++a) azimuths[a] = 2.0 * kPi * a / n_azimuth;
}

PointCloud k_strongest(const PolarScan& scan, const ExtractionParams& params) {
  PointCloud cloud;
  cloud.stage = CloudStage::Raw;
  if (scan.azimuth_count == 0) return cloud;
  cloud.t_ref = *std::min_element(scan.azimuth_times.begin(), scan.azimuth_times.end());
  if (params.k < 1 || !(params.r_min < params.r_max)) return cloud;

  // Bin window whose centers fall inside [r_min, r_max].
  std::size_t first = 0;
  while (first < scan.range_bin_count && scan.bin_center_range(first) < params.r_min) ++first;
  std::size_t last_excl = first;
  while (last_excl < scan.range_bin_count && scan.bin_center_range(last_excl) <= params.r_max) ++last_excl;

  const auto k = static_cast<std::size_t>(params.k);
  std::vector<std::uint32_t> candidates;
  cloud.points.reserve(static_cast<std::size_t>(scan.azimuth_count) * std::min<std::size_t>(k, 16));

  for (std::size_t a = 0; a < scan.azimuth_count; ++a) {
    const auto row = scan.row(a);
    candidates.clear();
    for (std::size_t b = first; b < last_excl; ++b) {
      if (row[b] > params.tau_raw) candidates.push_back(static_cast<std::uint32_t>(b));
    }
    const auto stronger = [&row](std::uint32_t lhs, std::uint32_t rhs) {
      return row[lhs] != row[rhs] ? row[lhs] > row[rhs] : lhs < rhs;
    };
    const std::size_t keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      stronger);

    const double c = std::cos(scan.azimuths[a]);
    const double s = std::sin(scan.azimuths[a]);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::uint32_t b = candidates[i];
      const double r = scan.bin_center_range(b);
      RadarPoint p;
      p.position = {r * c, r * s, 0.0};
      p.intensity = row[b];
      p.t = scan.azimuth_times[a];
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

PointCloud deskew(const PointCloud& raw, const AttitudeTrack& track, std::optional<Timestamp> t_ref) {
  PointCloud out;
  out.stage = CloudStage::Deskewed;
  if (raw.points.empty()) {
    out.t_ref = t_ref.value_or(raw.t_ref);
    return out;
  }
  Timestamp ref = std::numeric_limits<Timestamp>::max();
  for (const RadarPoint& p : raw.points) ref = std::min(ref, p.t);
  if (t_ref) ref = *t_ref;
  out.t_ref = ref;

  const UnitQuat q_ref_inv = track.at(ref).inverse();
  out.points.reserve(raw.points.size());

  // Points of one azimuth share a stamp; reuse the rotation.
  Timestamp cached_t = std::numeric_limits<Timestamp>::min();
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  for (const RadarPoint& p : raw.points) {
    if (p.t != cached_t) {
      rot = (q_ref_inv * track.at(p.t)).matrix();
      cached_t = p.t;
    }
    RadarPoint q = p;
    q.position = rot * p.position;
    out.points.push_back(q);
  }
  return out;
}

}  // namespace rio
