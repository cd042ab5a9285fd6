#include "pointfuse/scene_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pointfuse/errors.hpp"

namespace pointfuse {

namespace {

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw IoError("read failed for " + path.string());
  }
  return std::move(buf).str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out.good()) {
    throw IoError("write failed for " + path.string());
  }
}

void append_f32_le(std::string& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xFF));
  out.push_back(static_cast<char>((u >> 8) & 0xFF));
  out.push_back(static_cast<char>((u >> 16) & 0xFF));
  out.push_back(static_cast<char>((u >> 24) & 0xFF));
}

float f32_from_le(const unsigned char* p) {
  const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

/// Shortest exact decimal form, stable across runs for equal doubles.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

DensePointmap read_pointmap(const std::filesystem::path& path, int view_id) {
  const std::string bytes = read_file_bytes(path);
  constexpr std::string_view magic = "PMAP1\n";
  if (bytes.size() < magic.size() || std::string_view(bytes).substr(0, magic.size()) != magic) {
    throw MalformedFileError(path.string() + ": bad pointmap magic");
  }
  const auto header_end = bytes.find('\n', magic.size());
  if (header_end == std::string::npos) {
    throw MalformedFileError(path.string() + ": missing pointmap dimension line");
  }
  std::istringstream dims(bytes.substr(magic.size(), header_end - magic.size()));
  long long w = -1;
  long long h = -1;
  std::string extra;
  if (!(dims >> w >> h) || (dims >> extra) || w < 0 || h < 0) {
    throw MalformedFileError(path.string() + ": bad pointmap dimensions");
  }
  const std::size_t grid = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t expected = grid * 3 * 4;
  const std::size_t data_at = header_end + 1;
  if (bytes.size() - data_at != expected) {
    throw MalformedFileError(path.string() + ": pointmap payload size mismatch");
  }

  DensePointmap map;
  map.view_id = view_id;
  map.width = static_cast<int>(w);
  map.height = static_cast<int>(h);
  map.points.resize(grid);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + data_at;
  for (std::size_t i = 0; i < grid; ++i, p += 12) {
    const double x = f32_from_le(p);
    const double y = f32_from_le(p + 4);
    const double z = f32_from_le(p + 8);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw NonFiniteDataError(path.string() + ": pointmap contains non-finite coordinates");
    }
    map.points[i] = Point3(x, y, z);
  }
  return map;
}

void write_pointmap(const DensePointmap& map, const std::filesystem::path& path) {
  const std::size_t grid =
      static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height);
  if (map.points.size() != grid) {
    throw InvariantViolationError("pointmap grid length does not match its dimensions");
  }
  std::string out;
  out.reserve(32 + grid * 12);
  out += "PMAP1\n";
  out += std::to_string(map.width) + " " + std::to_string(map.height) + "\n";
  for (const Point3& pt : map.points) {
    if (!is_finite(pt)) {
      throw NonFiniteDataError("pointmap contains non-finite coordinates");
    }
    append_f32_le(out, static_cast<float>(pt.x()));
    append_f32_le(out, static_cast<float>(pt.y()));
    append_f32_le(out, static_cast<float>(pt.z()));
  }
  write_file_bytes(path, out);
}

std::vector<CameraView> read_cameras_file(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::istringstream in(bytes);
  std::vector<CameraView> cameras;
  std::set<int> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (is_blank(body)) continue;
    std::istringstream fields(body);
    CameraView cam;
    double qw, qx, qy, qz, tx, ty, tz;
    std::string extra;
    if (!(fields >> cam.view_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >>
          cam.fx >> cam.fy >> cam.cx >> cam.cy >> cam.width >> cam.height) ||
        (fields >> extra)) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": expected 14 camera fields");
    }
    const double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-6) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": camera quaternion is not unit length");
    }
    Quaternion q{qw / qn, qx / qn, qy / qn, qz / qn};
    cam.world_to_camera.scale = 1.0;
    cam.world_to_camera.rotation = rotation_from_quat(q);
    cam.world_to_camera.translation = Point3(tx, ty, tz);
    if (!is_finite(cam.world_to_camera.translation) || !std::isfinite(cam.fx) ||
        !std::isfinite(cam.fy) || !std::isfinite(cam.cx) || !std::isfinite(cam.cy)) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": non-finite camera parameters");
    }
    if (cam.width <= 0 || cam.height <= 0 || cam.fx <= 0.0 || cam.fy <= 0.0 ||
        cam.cx < 0.0 || cam.cx >= cam.width || cam.cy < 0.0 || cam.cy >= cam.height) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": camera intrinsics out of range");
    }
    if (!seen_ids.insert(cam.view_id).second) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate view id");
    }
    cameras.push_back(cam);
  }
  return cameras;
}

void write_cameras_file(std::span<const CameraView> cameras,
                        const std::filesystem::path& path) {
  std::string out = "# VIEW_ID QW QX QY QZ TX TY TZ FX FY CX CY W H\n";
  for (const CameraView& cam : cameras) {
    const Quaternion q = quat_from_rotation(cam.world_to_camera.rotation);
    const Point3& t = cam.world_to_camera.translation;
    out += std::to_string(cam.view_id);
    for (double v : {q.w, q.x, q.y, q.z, t.x(), t.y(), t.z(), cam.fx, cam.fy,
                     cam.cx, cam.cy}) {
      out += " " + fmt_double(v);
    }
    out += " " + std::to_string(cam.width) + " " + std::to_string(cam.height) + "\n";
  }
  write_file_bytes(path, out);
}

void write_points_file(std::span<const SfMPoint> points,
                       const std::filesystem::path& path) {
  std::string out = "# POINT_ID X Y Z R G B [VIEW_ID U V]*\n";
  for (const SfMPoint& p : points) {
    out += std::to_string(p.id);
    for (double v : {p.position.x(), p.position.y(), p.position.z()}) {
      out += " " + fmt_double(v);
    }
    for (int c : p.color) out += " " + std::to_string(c);
    for (const TrackEntry& te : p.track) {
      out += " " + std::to_string(te.view_id) + " " + fmt_double(te.u) + " " +
             fmt_double(te.v);
    }
    out += "\n";
  }
  write_file_bytes(path, out);
}

SfMScene read_sfm_scene(const std::filesystem::path& points_path,
                        const std::filesystem::path& cameras_path) {
  SfMScene scene;
  scene.cameras = read_cameras_file(cameras_path);

  const std::string bytes = read_file_bytes(points_path);
  std::istringstream in(bytes);
  std::set<std::int64_t> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (is_blank(body)) continue;
    std::istringstream fields(body);
    SfMPoint p;
    double x, y, z;
    int r, g, b;
    if (!(fields >> p.id >> x >> y >> z >> r >> g >> b)) {
      throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                               ": expected POINT_ID X Y Z R G B");
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                               ": non-finite point position");
    }
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                               ": color out of range");
    }
    p.position = Point3(x, y, z);
    p.color = Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                  static_cast<std::uint8_t>(b)};

    TrackEntry te;
    while (fields >> te.view_id) {
      if (!(fields >> te.u >> te.v)) {
        throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                                 ": truncated track triplet");
      }
      p.track.push_back(te);
    }
    if (!fields.eof()) {
      throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                               ": unparseable track data");
    }
    if (!seen_ids.insert(p.id).second) {
      throw MalformedFileError(points_path.string() + ":" + std::to_string(line_no) +
                               ": duplicate point id");
    }
    scene.points.push_back(std::move(p));
  }

  for (const SfMPoint& p : scene.points) {
    for (const TrackEntry& te : p.track) {
      const CameraView* cam = scene.find_camera(te.view_id);
      if (cam == nullptr) {
        throw DanglingTrackError("point " + std::to_string(p.id) +
                                 " tracks missing view " + std::to_string(te.view_id));
      }
      if (!(te.u >= 0.0) || !(te.u < cam->width) || !(te.v >= 0.0) ||
          !(te.v < cam->height)) {
        throw OutOfBoundsPixelError("point " + std::to_string(p.id) +
                                    " track pixel outside view " +
                                    std::to_string(te.view_id));
      }
    }
  }
  return scene;
}

void write_ply(std::span<const ColoredPoint> cloud, const std::filesystem::path& path) {
  if (cloud.empty()) {
    throw EmptyInputError("refusing to write an empty point cloud");
  }
  std::string out;
  out.reserve(256 + cloud.size() * 15);
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out +=
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      "end_header\n";
  for (const ColoredPoint& cp : cloud) {
    append_f32_le(out, static_cast<float>(cp.position.x()));
    append_f32_le(out, static_cast<float>(cp.position.y()));
    append_f32_le(out, static_cast<float>(cp.position.z()));
    for (std::uint8_t c : cp.color) out.push_back(static_cast<char>(c));
  }
  write_file_bytes(path, out);
}

std::vector<ColoredPoint> read_ply(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::istringstream in(bytes);
  std::string line;
  std::size_t vertex_count = 0;
  std::vector<std::string> expected = {
      "ply",
      "format binary_little_endian 1.0",
      "element vertex ",
      "property float x",
      "property float y",
      "property float z",
      "property uchar red",
      "property uchar green",
      "property uchar blue",
      "end_header",
  };
  std::size_t header_bytes = 0;
  for (const std::string& want : expected) {
    if (!std::getline(in, line)) {
      throw MalformedFileError(path.string() + ": truncated PLY header");
    }
    header_bytes += line.size() + 1;
    if (want == "element vertex ") {
      if (line.rfind(want, 0) != 0) {
        throw MalformedFileError(path.string() + ": expected vertex element");
      }
      std::istringstream cnt(line.substr(want.size()));
      long long n = -1;
      if (!(cnt >> n) || n < 0) {
        throw MalformedFileError(path.string() + ": bad vertex count");
      }
      vertex_count = static_cast<std::size_t>(n);
    } else if (line != want) {
      throw MalformedFileError(path.string() + ": unsupported PLY layout: " + line);
    }
  }
  if (bytes.size() - header_bytes != vertex_count * 15) {
    throw MalformedFileError(path.string() + ": PLY payload size mismatch");
  }
  std::vector<ColoredPoint> cloud(vertex_count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + header_bytes;
  for (std::size_t i = 0; i < vertex_count; ++i, p += 15) {
    cloud[i].position =
        Point3(f32_from_le(p), f32_from_le(p + 4), f32_from_le(p + 8));
    cloud[i].color = Rgb{p[12], p[13], p[14]};
  }
  return cloud;
}

namespace {

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_at = 0;
};

/// Parses "P5", dimensions, maxval. '#' comments allowed in the header per
/// the PGM spec; a single whitespace byte separates maxval from the raster.
PgmHeader parse_pgm_header(const std::string& bytes, const std::filesystem::path& path) {
  std::size_t pos = 0;
  const auto fail = [&](const std::string& why) -> PgmHeader {
    throw MalformedFileError(path.string() + ": " + why);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    fail("not a P5 PGM");
  }
  pos = 2;
  int fields[3];
  for (int f = 0; f < 3; ++f) {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
      fail("bad PGM header field");
    }
    long long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000LL) fail("PGM header field out of range");
      ++pos;
    }
    fields[f] = static_cast<int>(v);
  }
  if (pos >= bytes.size() || !(bytes[pos] == ' ' || bytes[pos] == '\t' ||
                               bytes[pos] == '\r' || bytes[pos] == '\n')) {
    fail("missing whitespace after maxval");
  }
  ++pos;
  PgmHeader h;
  h.width = fields[0];
  h.height = fields[1];
  h.maxval = fields[2];
  h.data_at = pos;
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    fail("PGM dimensions or maxval out of range");
  }
  return h;
}

void check_expected_dims(const PgmHeader& h, int ew, int eh,
                         const std::filesystem::path& path) {
  if ((ew >= 0 && h.width != ew) || (eh >= 0 && h.height != eh)) {
    throw DimensionMismatchError(path.string() + ": expected " + std::to_string(ew) +
                                 "x" + std::to_string(eh) + ", file is " +
                                 std::to_string(h.width) + "x" +
                                 std::to_string(h.height));
  }
}

}  // namespace

BinaryMask read_mask(const std::filesystem::path& path, int expected_width,
                     int expected_height) {
  const std::string bytes = read_file_bytes(path);
  const PgmHeader h = parse_pgm_header(bytes, path);
  if (h.maxval > 255) {
    throw MalformedFileError(path.string() + ": binary mask must be 8-bit PGM");
  }
  check_expected_dims(h, expected_width, expected_height, path);
  const std::size_t grid =
      static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() - h.data_at != grid) {
    throw MalformedFileError(path.string() + ": PGM payload size mismatch");
  }
  BinaryMask mask = BinaryMask::empty(h.width, h.height);
  for (std::size_t i = 0; i < grid; ++i) {
    mask.bits[i] = bytes[h.data_at + i] != 0 ? 1 : 0;
  }
  return mask;
}

LabelMap read_labelmap(const std::filesystem::path& path, int expected_width,
                       int expected_height) {
  const std::string bytes = read_file_bytes(path);
  const PgmHeader h = parse_pgm_header(bytes, path);
  if (h.maxval <= 255) {
    throw MalformedFileError(path.string() + ": label map must be 16-bit PGM");
  }
  check_expected_dims(h, expected_width, expected_height, path);
  const std::size_t grid =
      static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (bytes.size() - h.data_at != grid * 2) {
    throw MalformedFileError(path.string() + ": PGM payload size mismatch");
  }
  LabelMap map;
  map.width = h.width;
  map.height = h.height;
  map.labels.resize(grid);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.data_at;
  for (std::size_t i = 0; i < grid; ++i, p += 2) {
    map.labels[i] = static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  }
  return map;
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  out.reserve(out.size() + mask.bits.size());
  for (std::uint8_t b : mask.bits) out.push_back(b ? '\xFF' : '\0');
  write_file_bytes(path, out);
}

void write_labelmap(const LabelMap& map, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(map.width) + " " +
                    std::to_string(map.height) + "\n65535\n";
  out.reserve(out.size() + map.labels.size() * 2);
  for (std::uint16_t v : map.labels) {
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  write_file_bytes(path, out);
}

namespace {

nlohmann::ordered_json sim_to_json(const SimTransform& t) {
  nlohmann::ordered_json j;
  j["s"] = t.scale;
  const Eigen::Matrix3d& m = t.rotation.matrix();
  nlohmann::ordered_json r = nlohmann::ordered_json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(m(row, col));
  }
  j["R"] = std::move(r);
  j["t"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j;
}

SimTransform sim_from_json(const nlohmann::json& j) {
  SimTransform t;
  t.scale = j.at("s").get<double>();
  const auto& r = j.at("R");
  if (!r.is_array() || r.size() != 9) {
    throw MalformedFileError("transform R must hold 9 values");
  }
  Eigen::Matrix3d m;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      m(row, col) = r[static_cast<std::size_t>(row * 3 + col)].get<double>();
    }
  }
  t.rotation = Rotation3::nearest(m);
  const auto& tr = j.at("t");
  if (!tr.is_array() || tr.size() != 3) {
    throw MalformedFileError("transform t must hold 3 values");
  }
  t.translation = Point3(tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>());
  return t;
}

}  // namespace

std::string render_transforms_report(const TransformsReport& report) {
  nlohmann::ordered_json j;
  j["global"] = sim_to_json(report.global);
  nlohmann::ordered_json locals = nlohmann::ordered_json::array();
  for (const TransformsReport::LocalEntry& e : report.locals) {
    nlohmann::ordered_json le = sim_to_json(e.transform);
    le["mask_id"] = e.mask_id;
    le["support_count"] = e.support_count;
    locals.push_back(std::move(le));
  }
  j["locals"] = std::move(locals);
  j["inlier_count"] = report.inlier_count;
  j["outlier_count"] = report.outlier_count;
  return j.dump(2) + "\n";
}

void write_transforms_report(const TransformsReport& report,
                             const std::filesystem::path& path) {
  write_file_bytes(path, render_transforms_report(report));
}

TransformsReport read_transforms_report(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFileError(path.string() + ": " + e.what());
  }
  try {
    TransformsReport report;
    report.global = sim_from_json(j.at("global"));
    for (const auto& le : j.at("locals")) {
      TransformsReport::LocalEntry e;
      e.transform = sim_from_json(le);
      e.mask_id = le.at("mask_id").get<int>();
      e.support_count = le.at("support_count").get<std::int64_t>();
      report.locals.push_back(e);
    }
    report.inlier_count = j.at("inlier_count").get<std::int64_t>();
    report.outlier_count = j.at("outlier_count").get<std::int64_t>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFileError(path.string() + ": " + e.what());
  }
}

}  // namespace pointfuse
