#include "rio/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "rio/error.hpp"

namespace rio::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

// ---------------------------------------------------------------- binary scans

namespace {

constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4 + 8;

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get(const std::vector<std::uint8_t>& in, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in[offset + i]) << (8 * i));
  return v;
}

[[noreturn]] void truncated(std::size_t offset, std::size_t need, std::size_t have, const char* what) {
  throw Error(ErrorCode::TruncatedFile, std::string(what) + " at byte offset " + std::to_string(offset) + " needs " +
                                            std::to_string(need) + " bytes, file has " + std::to_string(have));
}

}  // namespace

std::vector<std::uint8_t> encode_polar_scan(const PolarScan& scan) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + scan.azimuth_count * (16 + static_cast<std::size_t>(scan.range_bin_count)));
  for (char c : {'F', 'R', 'A', 'D'}) out.push_back(static_cast<std::uint8_t>(c));
  put<std::uint16_t>(out, kFradVersion);
  put<std::uint32_t>(out, scan.azimuth_count);
  put<std::uint32_t>(out, scan.range_bin_count);
  put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(scan.range_resolution));
  for (std::size_t a = 0; a < scan.azimuth_count; ++a) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(scan.azimuth_times[a]));
    put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(scan.azimuths[a]));
    const auto row = scan.row(a);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

PolarScan decode_polar_scan(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) truncated(0, 4, bytes.size(), "magic");
  if (bytes[0] != 'F' || bytes[1] != 'R' || bytes[2] != 'A' || bytes[3] != 'D') {
    throw Error(ErrorCode::BadMagic, "expected FRAD at byte offset 0");
  }
  if (bytes.size() < 6) truncated(4, 2, bytes.size(), "version");
  const auto version = get<std::uint16_t>(bytes, 4);
  if (version != kFradVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "version " + std::to_string(version) + " at byte offset 4, only 1 is supported");
  }
  if (bytes.size() < kHeaderBytes) truncated(6, kHeaderBytes - 6, bytes.size(), "header");
  const auto n_az = get<std::uint32_t>(bytes, 6);
  const auto n_r = get<std::uint32_t>(bytes, 10);
  const double res = std::bit_cast<double>(get<std::uint64_t>(bytes, 14));

  const std::size_t record = 16 + static_cast<std::size_t>(n_r);
  PolarScan scan(n_az, n_r, res);
  for (std::size_t a = 0; a < n_az; ++a) {
    const std::size_t off = kHeaderBytes + a * record;
    if (bytes.size() < off + record) {
      truncated(off, record, bytes.size(),
                ("azimuth record " + std::to_string(a) + " of " + std::to_string(n_az)).c_str());
    }
    scan.azimuth_times[a] = static_cast<Timestamp>(get<std::uint64_t>(bytes, off));
    scan.azimuths[a] = std::bit_cast<double>(get<std::uint64_t>(bytes, off + 8));
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off + 16), n_r,
                scan.intensity.begin() + static_cast<std::ptrdiff_t>(a * n_r));
  }
  const std::size_t expected = kHeaderBytes + n_az * record;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::Io, std::to_string(bytes.size() - expected) + " trailing bytes after offset " +
                                   std::to_string(expected));
  }
  return scan;
}

void write_polar_scan(const PolarScan& scan, const fs::path& path) {
  const std::vector<std::uint8_t> bytes = encode_polar_scan(scan);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

PolarScan read_polar_scan(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_polar_scan(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

// ---------------------------------------------------------------- CSV

namespace {

class CsvReader {
 public:
  CsvReader(const fs::path& path, std::string_view expected_header) : path_(path.string()), in_(path) {
    if (!in_) throw Error(ErrorCode::Io, "cannot open " + path_);
    std::string header;
    if (!next_line(header)) fail("missing header");
    if (header != expected_header) fail("expected header '" + std::string(expected_header) + "'");
  }

  /// Fields of the next non-empty row; false at end of file.
  bool row(std::vector<std::string_view>& fields) {
    while (next_line(line_)) {
      if (line_.empty()) continue;
      fields.clear();
      std::string_view rest(line_);
      while (true) {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedRow, path_ + " line " + std::to_string(line_no_) + ": " + what);
  }
  [[noreturn]] void non_monotonic() const {
    throw Error(ErrorCode::NonMonotonicTimestamp,
                path_ + " line " + std::to_string(line_no_) + ": timestamp is not after the previous row");
  }

  void expect_fields(const std::vector<std::string_view>& f, std::size_t n) const {
    if (f.size() != n) fail("expected " + std::to_string(n) + " fields, found " + std::to_string(f.size()));
  }

  double number(std::string_view s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("'" + std::string(s) + "' is not a number");
    return v;
  }

  Timestamp stamp(std::string_view s) const {
    Timestamp v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("'" + std::string(s) + "' is not an integer");
    return v;
  }

 private:
  bool next_line(std::string& out) {
    if (!std::getline(in_, out)) return false;
    ++line_no_;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  }

  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::string_view header) : path_(path.string()), out_(path) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path_);
    buf_.append(header);
    buf_.push_back('\n');
  }
  ~CsvWriter() noexcept(false) {
    flush();
    out_.close();
    if (!out_ && std::uncaught_exceptions() == 0) throw Error(ErrorCode::Io, "short write to " + path_);
  }

  CsvWriter& field(double v) { return raw(format_double(v)); }
  CsvWriter& field(Timestamp v) { return raw(std::to_string(v)); }
  CsvWriter& field(std::size_t v) { return raw(std::to_string(v)); }
  CsvWriter& field(int v) { return raw(std::to_string(v)); }
  CsvWriter& field(bool v) { return raw(v ? "1" : "0"); }
  CsvWriter& field(std::string_view v) { return raw(v); }
  void end_row() {
    buf_.push_back('\n');
    first_ = true;
    if (buf_.size() > (1U << 20)) flush();
  }

 private:
  CsvWriter& raw(std::string_view v) {
    if (!first_) buf_.push_back(',');
    buf_.append(v);
    first_ = false;
    return *this;
  }
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

  std::string path_;
  std::ofstream out_;
  std::string buf_;
  bool first_ = true;
};

}  // namespace

std::vector<ImuSample> read_imu_csv(const fs::path& path) {
  CsvReader csv(path, kImuHeader);
  std::vector<ImuSample> out;
  std::vector<std::string_view> f;
  while (csv.row(f)) {
    csv.expect_fields(f, 7);
    ImuSample s;
    s.t = csv.stamp(f[0]);
    s.omega = {csv.number(f[1]), csv.number(f[2]), csv.number(f[3])};
    s.accel = {csv.number(f[4]), csv.number(f[5]), csv.number(f[6])};
    if (!out.empty() && s.t <= out.back().t) csv.non_monotonic();
    out.push_back(s);
  }
  return out;
}

void write_imu_csv(const fs::path& path, const std::vector<ImuSample>& samples) {
  CsvWriter csv(path, kImuHeader);
  for (const ImuSample& s : samples) {
    csv.field(s.t).field(s.omega.x()).field(s.omega.y()).field(s.omega.z());
    csv.field(s.accel.x()).field(s.accel.y()).field(s.accel.z());
    csv.end_row();
  }
}

std::vector<GroundTruthRow> read_ground_truth_csv(const fs::path& path) {
  CsvReader csv(path, kGroundTruthHeader);
  std::vector<GroundTruthRow> out;
  std::vector<std::string_view> f;
  while (csv.row(f)) {
    csv.expect_fields(f, 8);
    GroundTruthRow r;
    r.t = csv.stamp(f[0]);
    r.position = {csv.number(f[1]), csv.number(f[2]), csv.number(f[3])};
    r.attitude = UnitQuat(csv.number(f[4]), csv.number(f[5]), csv.number(f[6]), csv.number(f[7]));
    if (!out.empty() && r.t <= out.back().t) csv.non_monotonic();
    out.push_back(r);
  }
  return out;
}

void write_ground_truth_csv(const fs::path& path, const std::vector<GroundTruthRow>& rows) {
  CsvWriter csv(path, kGroundTruthHeader);
  for (const GroundTruthRow& r : rows) {
    csv.field(r.t).field(r.position.x()).field(r.position.y()).field(r.position.z());
    csv.field(r.attitude.w()).field(r.attitude.x()).field(r.attitude.y()).field(r.attitude.z());
    csv.end_row();
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(const fs::path& path) {
  CsvReader csv(path, kTrajectoryHeader);
  std::vector<TrajectoryRow> out;
  std::vector<std::string_view> f;
  while (csv.row(f)) {
    csv.expect_fields(f, 6);
    TrajectoryRow r;
    r.t = csv.stamp(f[0]);
    r.pose = Pose2(csv.number(f[1]), csv.number(f[2]), csv.number(f[3]));
    r.roll = csv.number(f[4]);
    r.pitch = csv.number(f[5]);
    if (!out.empty() && r.t <= out.back().t) csv.non_monotonic();
    out.push_back(r);
  }
  return out;
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRow>& rows) {
  CsvWriter csv(path, kTrajectoryHeader);
  for (const TrajectoryRow& r : rows) {
    csv.field(r.t).field(r.pose.x()).field(r.pose.y()).field(r.pose.yaw()).field(r.roll).field(r.pitch);
    csv.end_row();
  }
}

Trajectory read_planar_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  in.close();

  Trajectory out;
  if (header == kGroundTruthHeader) {
    for (const GroundTruthRow& r : read_ground_truth_csv(path)) {
      out.push_back({r.t, Pose2(r.position.x(), r.position.y(), quat_to_rpy(r.attitude).yaw)});
    }
  } else {
    for (const TrajectoryRow& r : read_trajectory_csv(path)) out.push_back({r.t, r.pose});
  }
  return out;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<ScanDiagnostics>& rows) {
  CsvWriter csv(path,
                "t_ns,scan_index,hit,submap_id,raw_count,deskewed_count,filtered_count,source_count,reference_count,"
                "tilt_deg,gate_active,icp_iterations,icp_cost,matched_fraction,vx,vy,miss_reason");
  for (const ScanDiagnostics& d : rows) {
    csv.field(d.t).field(d.scan_index).field(d.hit).field(d.submap_id);
    csv.field(d.raw_count).field(d.deskewed_count).field(d.filtered_count).field(d.source_count);
    csv.field(d.reference_count).field(d.tilt_deg).field(d.gate_active).field(d.icp_iterations);
    csv.field(d.icp_cost).field(d.matched_fraction).field(d.vx).field(d.vy).field(d.miss_reason);
    csv.end_row();
  }
}

void write_rte_csv(const fs::path& path, const RteReport& report) {
  CsvWriter csv(path, kRteHeader);
  for (const RteSegment& s : report.segments) {
    csv.field(s.start_t).field(s.length).field(s.error_pct).field(s.rot_deg_per_100m);
    csv.end_row();
  }
  csv.field(std::string_view("summary")).field(report.segment_length).field(report.median).field(report.rot_median);
  csv.end_row();
}

void write_atlas_csv(const fs::path& path, const Atlas& atlas) {
  CsvWriter csv(path, "id,x,y,yaw,roll,pitch,scan_count,point_count");
  for (const Submap& s : atlas.submaps()) {
    csv.field(s.id).field(s.anchor.x()).field(s.anchor.y()).field(s.anchor.yaw()).field(s.roll).field(s.pitch);
    csv.field(s.scan_count).field(s.cloud().size());
    csv.end_row();
  }
}

// ---------------------------------------------------------------- dataset layout

fs::path scan_path(const fs::path& dataset, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu.frad", index);
  return dataset / "scans" / name;
}

std::size_t count_scans(const fs::path& dataset) {
  std::size_t n = 0;
  while (fs::exists(scan_path(dataset, n))) ++n;
  return n;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rio::io
