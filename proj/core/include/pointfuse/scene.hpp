#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pointfuse/geometry.hpp"

namespace pointfuse {

/// Integer pixel coordinate, x right (u), y down (v).
struct Pixel {
  int u = 0;
  int v = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Per-view dense grid: each pixel carries a 3D point in the shared world
/// frame. Grid is row-major, index v * width + u.
struct DensePointmap {
  int view_id = 0;
  int width = 0;
  int height = 0;
  std::vector<Point3> points;

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  const Point3& at(int u, int v) const { return points[index(u, v)]; }
  Point3& at(int u, int v) { return points[index(u, v)]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

/// Pinhole camera. world_to_camera maps world points into the camera frame
/// (scale fixed at 1; the SimTransform carrier keeps pose math uniform).
struct CameraView {
  int view_id = 0;
  SimTransform world_to_camera;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
};

/// One observation of an SfM point in a camera image.
struct TrackEntry {
  int view_id = 0;
  double u = 0.0;
  double v = 0.0;
};

struct SfMPoint {
  std::int64_t id = 0;
  Point3 position = Point3::Zero();
  Rgb color{255, 255, 255};
  std::vector<TrackEntry> track;
};

struct SfMScene {
  std::vector<SfMPoint> points;
  std::vector<CameraView> cameras;

  const CameraView* find_camera(int view_id) const {
    for (const CameraView& c : cameras) {
      if (c.view_id == view_id) return &c;
    }
    return nullptr;
  }
};

/// Row-major grid of region labels; 0 means unlabeled.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  std::uint16_t at(int u, int v) const { return labels[index(u, v)]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

/// Row-major boolean grid over one view.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  static BinaryMask empty(int width, int height) {
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.bits.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
    return m;
  }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  bool contains(int u, int v) const { return bits[index(u, v)] != 0; }
  void set(int u, int v, bool on = true) { bits[index(u, v)] = on ? 1 : 0; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += (b != 0);
    return n;
  }
  bool is_empty() const { return count() == 0; }

  /// Removes every pixel that is set in `other`. Dimensions must match.
  void subtract(const BinaryMask& other);
};

}  // namespace pointfuse
