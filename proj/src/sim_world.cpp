#include "rio/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rio/error.hpp"

namespace rio::sim {

namespace {

double blend(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return 0.5 * (1.0 - std::cos(kPi * u));
}

Timestamp to_ns(double seconds) { return static_cast<Timestamp>(std::llround(seconds * 1e9)); }

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidScenario, what); }

}  // namespace

double TiltFeature::value(double s) const {
  const double u = s - start;
  if (u <= 0.0) return 0.0;
  switch (kind) {
    case Kind::Plateau:
      if (u < rise) return amplitude * blend(u / rise);
      if (u < rise + hold) return amplitude;
      if (u < rise + hold + fall) return amplitude * (1.0 - blend((u - rise - hold) / fall));
      return 0.0;
    case Kind::Ditch:
      if (u < rise) return -amplitude * blend(u / rise);
      if (u < rise + hold) return amplitude * (2.0 * blend((u - rise) / hold) - 1.0);
      if (u < rise + hold + fall) return amplitude * (1.0 - blend((u - rise - hold) / fall));
      return 0.0;
    case Kind::Wave: {
      if (u >= hold) return 0.0;
      const double edge = 0.5 * wavelength;
      const double taper = std::min(blend(u / edge), blend((hold - u) / edge));
      return amplitude * taper * std::sin(2.0 * kPi * u / wavelength);
    }
  }
  return 0.0;
}

void validate(const Scenario& s) {
  if (s.segments.empty()) invalid("path has no segments");
  double total = 0.0;
  for (const PathSegment& seg : s.segments) {
    if (!(seg.speed > 0.0)) invalid("segment speeds must be positive");
    if (seg.kind == PathSegment::Kind::Arc && !(seg.radius > 0.0)) invalid("arc radius must be positive");
    if (seg.arc_length() < 0.0) invalid("negative segment length");
    total += seg.arc_length();
  }
  if (!(total > 0.0)) invalid("path has zero length");
  for (const TiltFeature& f : s.tilt) {
    if (f.kind == TiltFeature::Kind::Wave) {
      if (!(f.wavelength > 0.0) || f.hold < 0.0) invalid("wave needs a positive wavelength and length");
    } else if (!(f.rise > 0.0) || !(f.fall > 0.0) || f.hold < 0.0 ||
               (f.kind == TiltFeature::Kind::Ditch && !(f.hold > 0.0))) {
      invalid("tilt feature transitions must be positive");
    }
    if (std::abs(f.amplitude) >= 0.5 * kPi) invalid("tilt amplitude must stay below 90 degrees");
  }
  const RadarModel& r = s.radar;
  if (r.azimuth_count == 0 || r.range_bin_count == 0) invalid("radar grid must be non-empty");
  if (!(r.range_resolution > 0.0) || !(r.rotation_period > 0.0)) invalid("radar resolution and period must be positive");
  if (r.noise_sigma < 0.0 || !(r.reference_range > 0.0) || !(r.beam_width_deg > 0.0) ||
      r.elevation_half_width_deg < 0.0) {
    invalid("radar noise, beam and reference range are out of range");
  }
  if (!(s.imu.rate > 0.0) || s.imu.gyro_noise_density < 0.0 || s.imu.accel_noise_density < 0.0) {
    invalid("imu rate must be positive and noise densities non-negative");
  }
  if (s.static_duration < 0.0 || s.ramp_duration < 0.0) invalid("durations must be non-negative");
  if (s.duration && !(*s.duration > 0.0)) invalid("duration must be positive");
  if (!(s.gt_output_rate > 0.0)) invalid("gt_output_rate must be positive");
}

// ---------------------------------------------------------------- Path

Path::Path(const Scenario& s) {
  Eigen::Vector2d p(s.start_x, s.start_y);
  double h = s.start_heading;
  double s0 = 0.0;
  for (const PathSegment& seg : s.segments) {
    pieces_.push_back({seg, s0, p, h});
    const double len = seg.arc_length();
    if (seg.kind == PathSegment::Kind::Line) {
      p += len * Eigen::Vector2d(std::cos(h), std::sin(h));
    } else {
      const double side = seg.angle >= 0.0 ? 1.0 : -1.0;
      const Eigen::Vector2d center = p + side * seg.radius * Eigen::Vector2d(-std::sin(h), std::cos(h));
      h += seg.angle;
      p = center - side * seg.radius * Eigen::Vector2d(-std::sin(h), std::cos(h));
    }
    s0 += len;
  }
  length_ = s0;
  if (!(length_ > 0.0)) invalid("path has zero length");
}

std::size_t Path::piece_at(double s) const {
  std::size_t i = 0;
  while (i + 1 < pieces_.size() && s >= pieces_[i + 1].s0) ++i;
  return i;
}

Eigen::Vector2d Path::position(double s) const {
  s = std::clamp(s, 0.0, length_);
  const Piece& pc = pieces_[piece_at(s)];
  const double u = s - pc.s0;
  const double h = pc.h0;
  if (pc.seg.kind == PathSegment::Kind::Line) return pc.p0 + u * Eigen::Vector2d(std::cos(h), std::sin(h));
  const double side = pc.seg.angle >= 0.0 ? 1.0 : -1.0;
  const double r = pc.seg.radius;
  const Eigen::Vector2d center = pc.p0 + side * r * Eigen::Vector2d(-std::sin(h), std::cos(h));
  const double h1 = h + side * u / r;
  return center - side * r * Eigen::Vector2d(-std::sin(h1), std::cos(h1));
}

double Path::heading(double s) const {
  s = std::clamp(s, 0.0, length_);
  const Piece& pc = pieces_[piece_at(s)];
  if (pc.seg.kind == PathSegment::Kind::Line) return pc.h0;
  const double side = pc.seg.angle >= 0.0 ? 1.0 : -1.0;
  return pc.h0 + side * (s - pc.s0) / pc.seg.radius;
}

double Path::speed(double s) const {
  constexpr double kBlend = 5.0;  // m over which speed changes between segments
  s = std::clamp(s, 0.0, length_);
  const std::size_t i = piece_at(s);
  const double v = pieces_[i].seg.speed;
  if (i == 0) return v;
  const double prev = pieces_[i - 1].seg.speed;
  return prev + (v - prev) * blend((s - pieces_[i].s0) / kBlend);
}

double Path::closest_arc_length(double x, double y) const {
  const Eigen::Vector2d q(x, y);
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::ceil(length_ / 0.5));
  for (int i = 0; i <= n; ++i) {
    const double s = std::min(length_, 0.5 * i);
    const double d = (position(s) - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  return best_s;
}

// ---------------------------------------------------------------- TiltProfile

TiltProfile::TiltProfile(const Scenario& s, double path_length) : features_(s.tilt) {
  const auto n = static_cast<std::size_t>(std::ceil(path_length / step_)) + 2;
  z_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double a = std::tan(pitch(step_ * static_cast<double>(i - 1)));
    const double b = std::tan(pitch(step_ * static_cast<double>(i)));
    z_[i] = z_[i - 1] - 0.5 * (a + b) * step_;
  }
}

double TiltProfile::pitch(double s) const {
  double v = 0.0;
  for (const TiltFeature& f : features_) {
    if (f.axis == TiltAxis::Pitch) v += f.value(s);
  }
  return v;
}

double TiltProfile::roll(double s) const {
  double v = 0.0;
  for (const TiltFeature& f : features_) {
    if (f.axis == TiltAxis::Roll) v += f.value(s);
  }
  return v;
}

double TiltProfile::ground_z(double s) const {
  if (s <= 0.0) return 0.0;
  const double u = s / step_;
  const auto i = std::min(static_cast<std::size_t>(u), z_.size() - 2);
  const double f = std::min(1.0, u - static_cast<double>(i));
  return z_[i] + f * (z_[i + 1] - z_[i]);
}

// ---------------------------------------------------------------- GroundTruth

GroundTruth::Sample GroundTruth::at(Timestamp time) const {
  if (time <= t.front()) return {position.front(), attitude.front()};
  if (time >= t.back()) return {position.back(), attitude.back()};
  const auto i = static_cast<std::size_t>((time - t.front()) / kStep);
  const double f = static_cast<double>(time - t[i]) / static_cast<double>(kStep);
  if (f == 0.0) return {position[i], attitude[i]};
  return {position[i] + f * (position[i + 1] - position[i]), slerp(attitude[i], attitude[i + 1], f)};
}

GroundTruth generate_ground_truth(const Scenario& sc, std::optional<double> duration) {
  validate(sc);
  const Path path(sc);
  const TiltProfile profile(sc, path.length());
  const double L = path.length();
  if (!duration) duration = sc.duration;

  const double v_end = sc.segments.back().speed;
  const double d_stop = sc.ramp_duration > 0.0 ? std::max(0.5, 0.5 * v_end * sc.ramp_duration) : 0.0;

  const auto rate = [&](double t, double s) {
    if (s >= L) return 0.0;
    double g = 1.0;
    if (t < sc.static_duration) return 0.0;
    if (sc.ramp_duration > 0.0) g = blend((t - sc.static_duration) / sc.ramp_duration);
    if (d_stop > 0.0) g *= std::sqrt(std::clamp((L - s) / d_stop, 0.0, 1.0));
    return path.speed(s) * g;
  };

  GroundTruth gt;
  const double h = ns_to_s(GroundTruth::kStep);
  const double cap = sc.static_duration + sc.ramp_duration + 20.0 * L / 0.1 + 600.0;
  const double limit = duration ? *duration : cap;
  const auto n_max = static_cast<std::size_t>(std::floor(limit / h + 1e-9)) + 1;

  double s = 0.0;
  double z = 0.0;
  std::optional<std::size_t> stop_index;
  for (std::size_t k = 0; k < n_max; ++k) {
    const double t = h * static_cast<double>(k);
    if (k > 0) {
      // RK4 on (s, z); z follows the slope of the pitch profile.
      const double tp = t - h;
      const auto f = [&](double tt, double ss) {
        const double ds = rate(tt, std::min(ss, L));
        return Eigen::Vector2d(ds, -std::tan(profile.pitch(ss)) * ds);
      };
      const Eigen::Vector2d k1 = f(tp, s);
      const Eigen::Vector2d k2 = f(tp + 0.5 * h, s + 0.5 * h * k1.x());
      const Eigen::Vector2d k3 = f(tp + 0.5 * h, s + 0.5 * h * k2.x());
      const Eigen::Vector2d k4 = f(tp + h, s + h * k3.x());
      const Eigen::Vector2d d = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      s += d.x();
      z += d.y();
      if (s >= L - 1e-6) s = L;
    }
    const Eigen::Vector2d xy = path.position(s);
    const UnitQuat q = UnitQuat::from_rpy(profile.roll(s), profile.pitch(s), path.heading(s));
    const Eigen::Vector3d ground(xy.x(), xy.y(), z);
    gt.t.push_back(static_cast<Timestamp>(k) * GroundTruth::kStep);
    gt.position.push_back(ground + q.rotate(Eigen::Vector3d(0.0, 0.0, sc.sensor_height)));
    gt.attitude.push_back(q);
    gt.arc_length.push_back(s);

    if (!duration) {
      if (!stop_index && s >= L) stop_index = k;
      if (stop_index && k >= *stop_index + 1000) break;
    }
  }
  if (!duration && !stop_index) invalid("vehicle never reaches the end of the path");
  return gt;
}

std::size_t scan_count(const Scenario& s, const GroundTruth& gt) {
  const Timestamp period = to_ns(s.radar.rotation_period);
  return static_cast<std::size_t>((gt.end() - gt.begin()) / period);
}

// ---------------------------------------------------------------- rendering

namespace {

void deposit(std::vector<double>& signal, double range, double amplitude, double resolution) {
  const auto b0 = static_cast<long>(std::floor(range / resolution));
  for (long b = b0 - 3; b <= b0 + 3; ++b) {
    if (b < 0 || b >= static_cast<long>(signal.size())) continue;
    const double d = static_cast<double>(b - b0);
    const double v = amplitude * std::exp(-0.5 * d * d);
    auto& cell = signal[static_cast<std::size_t>(b)];
    cell = std::max(cell, v);
  }
}

double echo_amplitude(double reflectivity, double range, double reference_range) {
  return std::min(255.0, reflectivity * reference_range / range);
}

struct WallGeom {
  Eigen::Vector3d a;
  Eigen::Vector3d e1;  // along the base
  Eigen::Vector3d e2;  // up the face, full height
  double reflectivity;
};

WallGeom wall_geometry(const Wall& w) {
  WallGeom g;
  g.a = {w.x0, w.y0, w.base_z};
  g.e1 = {w.x1 - w.x0, w.y1 - w.y0, 0.0};
  const Eigen::Vector2d dir = g.e1.head<2>().normalized();
  const Eigen::Vector3d left(-dir.y(), dir.x(), 0.0);
  const double lean = deg2rad(w.lean_deg);
  g.e2 = w.height * (std::cos(lean) * Eigen::Vector3d::UnitZ() + std::sin(lean) * left);
  g.reflectivity = w.reflectivity;
  return g;
}

/// Ray parameter of the hit with the wall quad, or a negative value.
double intersect(const WallGeom& g, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  Eigen::Matrix3d m;
  m.col(0) = dir;
  m.col(1) = -g.e1;
  m.col(2) = -g.e2;
  const double det = m.determinant();
  if (std::abs(det) < 1e-12) return -1.0;
  const Eigen::Vector3d sol = m.inverse() * (g.a - origin);
  if (sol.x() <= 0.0 || sol.y() < 0.0 || sol.y() > 1.0 || sol.z() < 0.0 || sol.z() > 1.0) return -1.0;
  return sol.x();
}

}  // namespace

PolarScan render_scan(const Scenario& s, const GroundTruth& gt, std::size_t index) {
  const RadarModel& rm = s.radar;
  PolarScan scan(rm.azimuth_count, rm.range_bin_count, rm.range_resolution);
  const Timestamp period = to_ns(rm.rotation_period);
  const Timestamp t0 = gt.begin() + static_cast<Timestamp>(index) * period;
  const double max_range = rm.range_resolution * rm.range_bin_count + 1.0;
  const double half_beam = 0.5 * deg2rad(rm.beam_width_deg);
  const double half_elev = deg2rad(rm.elevation_half_width_deg);

  // Cull reflectors far from the sensor for the whole revolution.
  const Eigen::Vector3d mid = gt.at(t0 + period / 2).position;
  const double reach = max_range + 5.0;
  std::vector<const Pole*> poles;
  for (const Pole& p : s.poles) {
    if (std::hypot(p.x - mid.x(), p.y - mid.y()) < reach) poles.push_back(&p);
  }
  std::vector<WallGeom> walls;
  for (const Wall& w : s.walls) {
    const WallGeom g = wall_geometry(w);
    // Distance from the sensor to the base segment, in the plane.
    const Eigen::Vector2d a = g.a.head<2>();
    const Eigen::Vector2d ab = g.e1.head<2>();
    const double u = std::clamp((mid.head<2>() - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    if ((a + u * ab - mid.head<2>()).norm() < reach + std::abs(g.e2.head<2>().norm())) walls.push_back(g);
  }

  std::vector<double> signal(rm.range_bin_count);
  std::array<double, 5> elevations{};
  for (std::size_t i = 0; i < elevations.size(); ++i) {
    elevations[i] = -half_elev + 2.0 * half_elev * static_cast<double>(i) / (elevations.size() - 1);
  }

  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5CA7u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (std::uint32_t a = 0; a < rm.azimuth_count; ++a) {
    const Timestamp ta = t0 + static_cast<Timestamp>(a) * period / rm.azimuth_count;
    scan.azimuth_times[a] = ta;
    const double az = scan.azimuths[a];
    const GroundTruth::Sample pose = gt.at(ta);
    const Eigen::Matrix3d R = pose.attitude.matrix();
    const Eigen::Vector3d& o = pose.position;
    const Eigen::Vector3d n = R.col(2);
    std::fill(signal.begin(), signal.end(), 0.0);

    for (const Pole* p : poles) {
      const Eigen::Vector3d base(p->x, p->y, p->base_z);
      const Eigen::Vector3d top(p->x, p->y, p->base_z + p->height);
      const Eigen::Vector3d db = base - o;
      const Eigen::Vector3d dt = top - o;
      const double eb = std::asin(std::clamp(n.dot(db) / db.norm(), -1.0, 1.0));
      const double et = std::asin(std::clamp(n.dot(dt) / dt.norm(), -1.0, 1.0));
      if (std::max(eb, et) < -half_elev || std::min(eb, et) > half_elev) continue;
      // Point of the pole closest to the sensor plane.
      double zc = p->base_z;
      if (std::abs(n.z()) > 1e-9) {
        zc = o.z() - (n.x() * (p->x - o.x()) + n.y() * (p->y - o.y())) / n.z();
      }
      zc = std::clamp(zc, p->base_z, p->base_z + p->height);
      const Eigen::Vector3d rel = Eigen::Vector3d(p->x, p->y, zc) - o;
      const Eigen::Vector3d body = R.transpose() * rel;
      if (std::abs(wrap_angle(std::atan2(body.y(), body.x()) - az)) > half_beam) continue;
      const double range = rel.norm();
      if (range >= max_range || range <= 0.0) continue;
      deposit(signal, range, echo_amplitude(p->reflectivity, range, rm.reference_range), rm.range_resolution);
    }

    for (const WallGeom& w : walls) {
      double best = -1.0;
      for (double e : elevations) {
        const Eigen::Vector3d d = R * Eigen::Vector3d(std::cos(e) * std::cos(az), std::cos(e) * std::sin(az), std::sin(e));
        const double lambda = intersect(w, o, d);
        if (lambda > 0.0 && (best < 0.0 || lambda < best)) best = lambda;
      }
      if (best > 0.0 && best < max_range) {
        deposit(signal, best, echo_amplitude(w.reflectivity, best, rm.reference_range), rm.range_resolution);
      }
    }

    auto row = scan.row(a);
    for (std::size_t b = 0; b < signal.size(); ++b) {
      double v = signal[b] + rm.noise_mean;
      if (rm.noise_sigma > 0.0) v += rm.noise_sigma * noise(rng);
      row[b] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
  }
  return scan;
}

// ---------------------------------------------------------------- IMU

std::vector<ImuSample> synthesize_imu(const Scenario& s, const GroundTruth& gt) {
  const Timestamp dt_ns = to_ns(1.0 / s.imu.rate);
  const double dt = ns_to_s(dt_ns);
  const Timestamp h_ns = GroundTruth::kStep;
  const double h = ns_to_s(h_ns);
  const Eigen::Vector3d g(0.0, 0.0, kGravity);
  const double gyro_sigma = s.imu.gyro_noise_density * std::sqrt(s.imu.rate);
  const double accel_sigma = s.imu.accel_noise_density * std::sqrt(s.imu.rate);

  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0x1A4u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<ImuSample> out;
  for (Timestamp t = gt.begin(); t <= gt.end(); t += dt_ns) {
    ImuSample m;
    m.t = t;
    const UnitQuat q = gt.at(t).attitude;

    // Mean body rate over the preceding interval.
    UnitQuat q0 = t - dt_ns >= gt.begin() ? gt.at(t - dt_ns).attitude : q;
    UnitQuat q1 = t - dt_ns >= gt.begin() ? q : gt.at(t + dt_ns).attitude;
    const Eigen::AngleAxisd delta((q0.inverse() * q1).eigen());
    m.omega = delta.axis() * delta.angle() / dt;

    const Timestamp tm = std::max(gt.begin(), t - h_ns);
    const Timestamp tp = std::min(gt.end(), t + h_ns);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    if (tp - tm == 2 * h_ns) acc = (gt.at(tp).position - 2.0 * gt.at(t).position + gt.at(tm).position) / (h * h);
    m.accel = q.matrix().transpose() * (acc + g);

    m.omega += s.imu.gyro_bias;
    m.accel += s.imu.accel_bias;
    if (gyro_sigma > 0.0) {
      for (int i = 0; i < 3; ++i) m.omega[i] += gyro_sigma * noise(rng);
    }
    if (accel_sigma > 0.0) {
      for (int i = 0; i < 3; ++i) m.accel[i] += accel_sigma * noise(rng);
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace rio::sim
