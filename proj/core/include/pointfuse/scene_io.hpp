#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pointfuse/scene.hpp"

namespace pointfuse {

/// PMAP container: magic "PMAP1\n", ASCII "width height\n", then
/// width*height*3 little-endian float32, row-major, xyz interleaved.
/// The view binding is not part of the file; callers pass it in.
DensePointmap read_pointmap(const std::filesystem::path& path, int view_id = 0);
void write_pointmap(const DensePointmap& map, const std::filesystem::path& path);

/// cameras.txt: one camera per line,
///   VIEW_ID QW QX QY QZ TX TY TZ FX FY CX CY W H
/// with the quaternion/translation giving the world-to-camera map.
/// '#' starts a comment. Quaternions are normalized on read; a norm off
/// by more than 1e-6 is rejected as malformed.
std::vector<CameraView> read_cameras_file(const std::filesystem::path& path);
void write_cameras_file(std::span<const CameraView> cameras,
                        const std::filesystem::path& path);

/// points.txt: one point per line,
///   POINT_ID X Y Z R G B [VIEW_ID U V]*
/// '#' starts a comment.
void write_points_file(std::span<const SfMPoint> points,
                       const std::filesystem::path& path);

/// Loads points + cameras and cross-validates: every track view must
/// resolve to a camera (DanglingTrackError), track pixels must lie within
/// that camera's image (OutOfBoundsPixelError), point ids must be unique.
SfMScene read_sfm_scene(const std::filesystem::path& points_path,
                        const std::filesystem::path& cameras_path);

struct ColoredPoint {
  Point3 position = Point3::Zero();
  Rgb color{255, 255, 255};
};

/// Binary little-endian PLY with float32 x,y,z and uchar red,green,blue.
/// The reader accepts exactly this layout. Writing an empty cloud is an
/// EmptyInputError.
void write_ply(std::span<const ColoredPoint> cloud, const std::filesystem::path& path);
std::vector<ColoredPoint> read_ply(const std::filesystem::path& path);

/// PGM P5. Masks are 8-bit (maxval <= 255), nonzero meaning set; label
/// maps are 16-bit (maxval > 255), big-endian samples, pixel value =
/// label. Pass expected dimensions to enforce them (DimensionMismatchError);
/// -1 skips the check.
BinaryMask read_mask(const std::filesystem::path& path, int expected_width = -1,
                     int expected_height = -1);
LabelMap read_labelmap(const std::filesystem::path& path, int expected_width = -1,
                       int expected_height = -1);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);
void write_labelmap(const LabelMap& map, const std::filesystem::path& path);

/// Alignment summary persisted next to the fused cloud.
struct TransformsReport {
  struct LocalEntry {
    int mask_id = 0;
    SimTransform transform;
    std::int64_t support_count = 0;
  };

  SimTransform global;
  std::vector<LocalEntry> locals;
  std::int64_t inlier_count = 0;
  std::int64_t outlier_count = 0;
};

/// JSON rendering with fields global {s, R (9 floats row-major), t (3)},
/// locals [{mask_id, s, R, t, support_count}], inlier_count, outlier_count.
/// Rendering is byte-deterministic for equal reports.
std::string render_transforms_report(const TransformsReport& report);
void write_transforms_report(const TransformsReport& report,
                             const std::filesystem::path& path);
TransformsReport read_transforms_report(const std::filesystem::path& path);

}  // namespace pointfuse
