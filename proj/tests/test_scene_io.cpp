#include "pointfuse/scene_io.hpp"

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pointfuse/errors.hpp"
#include "pointfuse/rng.hpp"
#include "test_util.hpp"

namespace pointfuse {
namespace {

using testutil::ScopedTempDir;
using testutil::slurp;
using testutil::spit;

std::string le32(float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  std::string out;
  out.push_back(static_cast<char>(u & 0xFF));
  out.push_back(static_cast<char>((u >> 8) & 0xFF));
  out.push_back(static_cast<char>((u >> 16) & 0xFF));
  out.push_back(static_cast<char>((u >> 24) & 0xFF));
  return out;
}

std::string pmap_fixture_bytes() {
  std::string bytes = "PMAP1\n2 2\n";
  const float vals[12] = {1.5f,  -2.0f, 3.25f, 0.0f,  0.5f, 1.0f,
                          -1.0f, -1.0f, 2.0f,  7.0f,  8.0f, 9.5f};
  for (float v : vals) bytes += le32(v);
  return bytes;
}

TEST(Pointmap, ReadsHandAssembledFixture) {
  ScopedTempDir dir("pmap");
  spit(dir / "grid.pmap", pmap_fixture_bytes());
  const DensePointmap map = read_pointmap(dir / "grid.pmap", 5);
  EXPECT_EQ(map.view_id, 5);
  EXPECT_EQ(map.width, 2);
  EXPECT_EQ(map.height, 2);
  ASSERT_EQ(map.points.size(), 4u);
  EXPECT_EQ(map.at(0, 0), Point3(1.5, -2.0, 3.25));
  EXPECT_EQ(map.at(1, 0), Point3(0.0, 0.5, 1.0));
  EXPECT_EQ(map.at(0, 1), Point3(-1.0, -1.0, 2.0));
  EXPECT_EQ(map.at(1, 1), Point3(7.0, 8.0, 9.5));
}

TEST(Pointmap, RejectsBadMagic) {
  ScopedTempDir dir("pmap");
  std::string bytes = pmap_fixture_bytes();
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  spit(dir / "bad.pmap", bytes);
  EXPECT_THROW(read_pointmap(dir / "bad.pmap"), MalformedFileError);
}

TEST(Pointmap, RejectsTruncationAndTrailingJunk) {
  ScopedTempDir dir("pmap");
  const std::string bytes = pmap_fixture_bytes();
  spit(dir / "short.pmap", bytes.substr(0, bytes.size() - 4));
  EXPECT_THROW(read_pointmap(dir / "short.pmap"), MalformedFileError);
  spit(dir / "long.pmap", bytes + "zz");
  EXPECT_THROW(read_pointmap(dir / "long.pmap"), MalformedFileError);
}

TEST(Pointmap, RejectsBadHeaders) {
  ScopedTempDir dir("pmap");
  spit(dir / "a.pmap", "PMAP1\n2\n");
  EXPECT_THROW(read_pointmap(dir / "a.pmap"), MalformedFileError);
  spit(dir / "b.pmap", "PMAP1\n2 2 2\n");
  EXPECT_THROW(read_pointmap(dir / "b.pmap"), MalformedFileError);
  spit(dir / "c.pmap", "PMAP1\n-1 2\n");
  EXPECT_THROW(read_pointmap(dir / "c.pmap"), MalformedFileError);
  spit(dir / "d.pmap", "PMAP1\n2 2");
  EXPECT_THROW(read_pointmap(dir / "d.pmap"), MalformedFileError);
}

TEST(Pointmap, RejectsNonFiniteCoordinates) {
  ScopedTempDir dir("pmap");
  std::string bytes = "PMAP1\n1 1\n";
  bytes += le32(1.0f);
  bytes += le32(std::numeric_limits<float>::infinity());
  bytes += le32(0.0f);
  spit(dir / "inf.pmap", bytes);
  EXPECT_THROW(read_pointmap(dir / "inf.pmap"), NonFiniteDataError);
}

TEST(Pointmap, MissingFileIsIoError) {
  ScopedTempDir dir("pmap");
  EXPECT_THROW(read_pointmap(dir / "absent.pmap"), IoError);
}

TEST(Pointmap, WriteReadRoundTrip) {
  ScopedTempDir dir("pmap");
  SplitMix64 rng(41);
  DensePointmap map;
  map.view_id = 2;
  map.width = 7;
  map.height = 5;
  for (int i = 0; i < 35; ++i) {
    // Store float32-representable values so the round trip is exact.
    map.points.push_back(Point3(testutil::float32_exact(rng),
                                testutil::float32_exact(rng),
                                testutil::float32_exact(rng)));
  }
  write_pointmap(map, dir / "rt.pmap");
  const DensePointmap back = read_pointmap(dir / "rt.pmap", 2);
  EXPECT_EQ(back.width, map.width);
  EXPECT_EQ(back.height, map.height);
  for (std::size_t i = 0; i < map.points.size(); ++i) {
    EXPECT_EQ(back.points[i], map.points[i]);
  }
}

TEST(Cameras, RoundTripPreservesEveryField) {
  ScopedTempDir dir("cams");
  SplitMix64 rng(42);
  std::vector<CameraView> cams;
  for (int i = 0; i < 4; ++i) {
    CameraView c;
    c.view_id = i * 3;
    c.world_to_camera.rotation = testutil::random_rotation(rng);
    c.world_to_camera.translation = testutil::random_point(rng, 4.0);
    c.fx = rng.uniform(50.0, 500.0);
    c.fy = rng.uniform(50.0, 500.0);
    c.width = 640;
    c.height = 480;
    c.cx = rng.uniform(0.0, 639.0);
    c.cy = rng.uniform(0.0, 479.0);
    cams.push_back(c);
  }
  write_cameras_file(cams, dir / "cameras.txt");
  const std::vector<CameraView> back = read_cameras_file(dir / "cameras.txt");
  ASSERT_EQ(back.size(), cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    EXPECT_EQ(back[i].view_id, cams[i].view_id);
    EXPECT_LT((back[i].world_to_camera.rotation.matrix() -
               cams[i].world_to_camera.rotation.matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_EQ(back[i].world_to_camera.translation,
              cams[i].world_to_camera.translation);
    EXPECT_EQ(back[i].fx, cams[i].fx);
    EXPECT_EQ(back[i].fy, cams[i].fy);
    EXPECT_EQ(back[i].cx, cams[i].cx);
    EXPECT_EQ(back[i].cy, cams[i].cy);
    EXPECT_EQ(back[i].width, cams[i].width);
    EXPECT_EQ(back[i].height, cams[i].height);
  }
}

TEST(Cameras, RejectsMalformedLines) {
  ScopedTempDir dir("cams");
  // 13 fields (height missing).
  spit(dir / "short.txt", "0 1 0 0 0 0 0 0 100 100 50 50 100\n");
  EXPECT_THROW(read_cameras_file(dir / "short.txt"), MalformedFileError);
  // Non-unit quaternion.
  spit(dir / "quat.txt", "0 2 0 0 0 0 0 0 100 100 50 50 100 100\n");
  EXPECT_THROW(read_cameras_file(dir / "quat.txt"), MalformedFileError);
  // Principal point outside the image.
  spit(dir / "cx.txt", "0 1 0 0 0 0 0 0 100 100 120 50 100 100\n");
  EXPECT_THROW(read_cameras_file(dir / "cx.txt"), MalformedFileError);
  // Duplicate view ids.
  spit(dir / "dup.txt",
       "0 1 0 0 0 0 0 0 100 100 50 50 100 100\n"
       "0 1 0 0 0 0 0 0 100 100 50 50 100 100\n");
  EXPECT_THROW(read_cameras_file(dir / "dup.txt"), MalformedFileError);
  // Negative focal length.
  spit(dir / "fx.txt", "0 1 0 0 0 0 0 0 -100 100 50 50 100 100\n");
  EXPECT_THROW(read_cameras_file(dir / "fx.txt"), MalformedFileError);
}

TEST(Cameras, CommentsAndBlankLinesIgnored) {
  ScopedTempDir dir("cams");
  spit(dir / "c.txt",
       "# header comment\n"
       "\n"
       "3 1 0 0 0 0.5 -0.25 4 100 120 50 60 100 128  # trailing comment\n");
  const std::vector<CameraView> cams = read_cameras_file(dir / "c.txt");
  ASSERT_EQ(cams.size(), 1u);
  EXPECT_EQ(cams[0].view_id, 3);
  EXPECT_EQ(cams[0].world_to_camera.translation, Point3(0.5, -0.25, 4.0));
  EXPECT_EQ(cams[0].fx, 100.0);
  EXPECT_EQ(cams[0].fy, 120.0);
  EXPECT_EQ(cams[0].height, 128);
}

TEST(SfmScene, MinimalFixtureParsesExactly) {
  ScopedTempDir dir("sfm");
  spit(dir / "cameras.txt", "0 1 0 0 0 0 0 4.5 100 120 50 60 100 128\n");
  spit(dir / "points.txt", "7 1.5 -2 3 255 128 0 0 12.5 30.25\n");
  const SfMScene scene = read_sfm_scene(dir / "points.txt", dir / "cameras.txt");
  ASSERT_EQ(scene.cameras.size(), 1u);
  ASSERT_EQ(scene.points.size(), 1u);
  const SfMPoint& p = scene.points[0];
  EXPECT_EQ(p.id, 7);
  EXPECT_EQ(p.position, Point3(1.5, -2.0, 3.0));
  EXPECT_EQ(p.color, (Rgb{255, 128, 0}));
  ASSERT_EQ(p.track.size(), 1u);
  EXPECT_EQ(p.track[0].view_id, 0);
  EXPECT_EQ(p.track[0].u, 12.5);
  EXPECT_EQ(p.track[0].v, 30.25);
}

TEST(SfmScene, EmptyPointsFileGivesEmptyScene) {
  ScopedTempDir dir("sfm");
  spit(dir / "cameras.txt", "0 1 0 0 0 0 0 0 100 100 50 50 100 100\n");
  spit(dir / "points.txt", "# nothing yet\n");
  const SfMScene scene = read_sfm_scene(dir / "points.txt", dir / "cameras.txt");
  EXPECT_EQ(scene.points.size(), 0u);
  EXPECT_EQ(scene.cameras.size(), 1u);
}

TEST(SfmScene, CrossValidation) {
  ScopedTempDir dir("sfm");
  spit(dir / "cameras.txt", "0 1 0 0 0 0 0 0 100 100 50 50 100 100\n");

  spit(dir / "dangling.txt", "1 0 0 0 10 10 10 99 5 5\n");
  EXPECT_THROW(read_sfm_scene(dir / "dangling.txt", dir / "cameras.txt"),
               DanglingTrackError);

  // u == width is already outside the image.
  spit(dir / "oob.txt", "1 0 0 0 10 10 10 0 100 5\n");
  EXPECT_THROW(read_sfm_scene(dir / "oob.txt", dir / "cameras.txt"),
               OutOfBoundsPixelError);

  spit(dir / "dupid.txt", "1 0 0 0 10 10 10\n1 1 1 1 10 10 10\n");
  EXPECT_THROW(read_sfm_scene(dir / "dupid.txt", dir / "cameras.txt"),
               MalformedFileError);

  spit(dir / "truncated.txt", "1 0 0 0 10 10 10 0 5\n");
  EXPECT_THROW(read_sfm_scene(dir / "truncated.txt", dir / "cameras.txt"),
               MalformedFileError);

  spit(dir / "color.txt", "1 0 0 0 10 10 300\n");
  EXPECT_THROW(read_sfm_scene(dir / "color.txt", dir / "cameras.txt"),
               MalformedFileError);
}

TEST(SfmScene, PointsRoundTripThroughWriter) {
  ScopedTempDir dir("sfm");
  spit(dir / "cameras.txt", "0 1 0 0 0 0 0 0 100 100 50 50 640 480\n");
  std::vector<SfMPoint> pts;
  SplitMix64 rng(43);
  for (int i = 0; i < 25; ++i) {
    SfMPoint p;
    p.id = i * 7;
    p.position = testutil::random_point(rng, 9.0);
    p.color = Rgb{static_cast<std::uint8_t>(rng.below(256)),
                  static_cast<std::uint8_t>(rng.below(256)),
                  static_cast<std::uint8_t>(rng.below(256))};
    p.track.push_back(TrackEntry{0, rng.uniform(0.0, 639.0), rng.uniform(0.0, 479.0)});
    pts.push_back(p);
  }
  write_points_file(pts, dir / "points.txt");
  const SfMScene scene = read_sfm_scene(dir / "points.txt", dir / "cameras.txt");
  ASSERT_EQ(scene.points.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(scene.points[i].id, pts[i].id);
    EXPECT_EQ(scene.points[i].position, pts[i].position);
    EXPECT_EQ(scene.points[i].color, pts[i].color);
    ASSERT_EQ(scene.points[i].track.size(), pts[i].track.size());
    EXPECT_EQ(scene.points[i].track[0].u, pts[i].track[0].u);
    EXPECT_EQ(scene.points[i].track[0].v, pts[i].track[0].v);
  }
}

TEST(Ply, SinglePointRoundTrips) {
  ScopedTempDir dir("ply");
  const std::vector<ColoredPoint> cloud = {ColoredPoint{}};
  write_ply(cloud, dir / "one.ply");
  const std::vector<ColoredPoint> back = read_ply(dir / "one.ply");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].position, Point3::Zero());
  EXPECT_EQ(back[0].color, (Rgb{255, 255, 255}));
}

TEST(Ply, LargeCloudRoundTripsExactlyAtFloat32) {
  ScopedTempDir dir("ply");
  SplitMix64 rng(44);
  std::vector<ColoredPoint> cloud(100000);
  for (ColoredPoint& cp : cloud) {
    // Float32-representable coordinates make the round trip exact.
    cp.position = Point3(testutil::float32_exact(rng),
                         testutil::float32_exact(rng),
                         testutil::float32_exact(rng));
    cp.color = Rgb{static_cast<std::uint8_t>(rng.below(256)),
                   static_cast<std::uint8_t>(rng.below(256)),
                   static_cast<std::uint8_t>(rng.below(256))};
  }
  write_ply(cloud, dir / "big.ply");
  const std::vector<ColoredPoint> back = read_ply(dir / "big.ply");
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    ASSERT_EQ(back[i].position, cloud[i].position) << "at " << i;
    ASSERT_EQ(back[i].color, cloud[i].color) << "at " << i;
  }
}

TEST(Ply, EmptyCloudRejected) {
  ScopedTempDir dir("ply");
  const std::vector<ColoredPoint> cloud;
  EXPECT_THROW(write_ply(cloud, dir / "empty.ply"), EmptyInputError);
}

TEST(Ply, RejectsForeignLayouts) {
  ScopedTempDir dir("ply");
  spit(dir / "ascii.ply",
       "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float "
       "y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty "
       "uchar blue\nend_header\n0 0 0 255 255 255\n");
  EXPECT_THROW(read_ply(dir / "ascii.ply"), MalformedFileError);

  write_ply(std::vector<ColoredPoint>{ColoredPoint{}}, dir / "ok.ply");
  std::string bytes = slurp(dir / "ok.ply");
  spit(dir / "trunc.ply", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_ply(dir / "trunc.ply"), MalformedFileError);
}

TEST(Pgm, AllZero16BitReadsAsZeroLabels) {
  ScopedTempDir dir("pgm");
  LabelMap map;
  map.width = 4;
  map.height = 4;
  map.labels.assign(16, 0);
  write_labelmap(map, dir / "zeros.pgm");
  const LabelMap back = read_labelmap(dir / "zeros.pgm");
  EXPECT_EQ(back.width, 4);
  EXPECT_EQ(back.height, 4);
  for (std::uint16_t v : back.labels) EXPECT_EQ(v, 0);
}

TEST(Pgm, CheckerboardMaskRoundTrips) {
  ScopedTempDir dir("pgm");
  BinaryMask mask = BinaryMask::empty(4, 3);
  for (int v = 0; v < 3; ++v) {
    for (int u = 0; u < 4; ++u) mask.set(u, v, (u + v) % 2 == 0);
  }
  write_mask(mask, dir / "checker.pgm");
  const BinaryMask back = read_mask(dir / "checker.pgm");
  ASSERT_EQ(back.width, 4);
  ASSERT_EQ(back.height, 3);
  for (int v = 0; v < 3; ++v) {
    for (int u = 0; u < 4; ++u) {
      EXPECT_EQ(back.contains(u, v), (u + v) % 2 == 0);
    }
  }
}

TEST(Pgm, LabelMapRoundTripsArbitraryLabels) {
  ScopedTempDir dir("pgm");
  SplitMix64 rng(45);
  LabelMap map;
  map.width = 9;
  map.height = 6;
  for (int i = 0; i < 54; ++i) {
    map.labels.push_back(static_cast<std::uint16_t>(rng.below(65536)));
  }
  write_labelmap(map, dir / "labels.pgm");
  const LabelMap back = read_labelmap(dir / "labels.pgm");
  EXPECT_EQ(back.labels, map.labels);
}

TEST(Pgm, RejectsAsciiAndWrongDepth) {
  ScopedTempDir dir("pgm");
  spit(dir / "ascii.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  EXPECT_THROW(read_mask(dir / "ascii.pgm"), MalformedFileError);
  EXPECT_THROW(read_labelmap(dir / "ascii.pgm"), MalformedFileError);

  // An 8-bit file is not a label map; a 16-bit file is not a mask.
  BinaryMask mask = BinaryMask::empty(2, 2);
  write_mask(mask, dir / "mask.pgm");
  EXPECT_THROW(read_labelmap(dir / "mask.pgm"), MalformedFileError);
  LabelMap map;
  map.width = 2;
  map.height = 2;
  map.labels.assign(4, 300);
  write_labelmap(map, dir / "labels.pgm");
  EXPECT_THROW(read_mask(dir / "labels.pgm"), MalformedFileError);
}

TEST(Pgm, HeaderCommentsAccepted) {
  ScopedTempDir dir("pgm");
  std::string bytes = "P5\n# a comment\n2 2\n# another\n255\n";
  bytes += std::string("\x01\x00\x00\x01", 4);
  spit(dir / "commented.pgm", bytes);
  const BinaryMask mask = read_mask(dir / "commented.pgm");
  EXPECT_TRUE(mask.contains(0, 0));
  EXPECT_FALSE(mask.contains(1, 0));
  EXPECT_TRUE(mask.contains(1, 1));
}

TEST(Pgm, ExpectedDimensionEnforcement) {
  ScopedTempDir dir("pgm");
  BinaryMask mask = BinaryMask::empty(4, 3);
  write_mask(mask, dir / "m.pgm");
  EXPECT_NO_THROW(read_mask(dir / "m.pgm", 4, 3));
  EXPECT_NO_THROW(read_mask(dir / "m.pgm", -1, -1));
  EXPECT_THROW(read_mask(dir / "m.pgm", 5, 3), DimensionMismatchError);
  EXPECT_THROW(read_mask(dir / "m.pgm", 4, 4), DimensionMismatchError);
}

TEST(Pgm, RejectsPayloadSizeMismatch) {
  ScopedTempDir dir("pgm");
  spit(dir / "short.pgm", std::string("P5\n2 2\n255\n") + "\x01\x01\x01");
  EXPECT_THROW(read_mask(dir / "short.pgm"), MalformedFileError);
  spit(dir / "long.pgm", std::string("P5\n2 2\n255\n") + "\x01\x01\x01\x01\x01");
  EXPECT_THROW(read_mask(dir / "long.pgm"), MalformedFileError);
}

TEST(TransformsReport, RoundTripAndDeterminism) {
  ScopedTempDir dir("report");
  SplitMix64 rng(46);
  TransformsReport report;
  report.global = testutil::random_transform(rng);
  for (int k = 1; k <= 2; ++k) {
    TransformsReport::LocalEntry e;
    e.mask_id = k;
    e.transform = testutil::random_transform(rng);
    e.support_count = 10 * k + 1;
    report.locals.push_back(e);
  }
  report.inlier_count = 120;
  report.outlier_count = 30;

  const std::string a = render_transforms_report(report);
  const std::string b = render_transforms_report(report);
  EXPECT_EQ(a, b);

  write_transforms_report(report, dir / "t.json");
  EXPECT_EQ(slurp(dir / "t.json"), a);

  const TransformsReport back = read_transforms_report(dir / "t.json");
  EXPECT_EQ(back.inlier_count, 120);
  EXPECT_EQ(back.outlier_count, 30);
  EXPECT_LT(testutil::transform_difference(back.global, report.global), 1e-12);
  ASSERT_EQ(back.locals.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.locals[i].mask_id, report.locals[i].mask_id);
    EXPECT_EQ(back.locals[i].support_count, report.locals[i].support_count);
    EXPECT_LT(testutil::transform_difference(back.locals[i].transform,
                                             report.locals[i].transform),
              1e-12);
  }
}

TEST(TransformsReport, RejectsMalformedJson) {
  ScopedTempDir dir("report");
  spit(dir / "broken.json", "{ not json");
  EXPECT_THROW(read_transforms_report(dir / "broken.json"), MalformedFileError);
  spit(dir / "shortr.json",
       R"({"global":{"s":1.0,"R":[1,0,0,0,1,0,0,0],"t":[0,0,0]},"locals":[],)"
       R"("inlier_count":0,"outlier_count":0})");
  EXPECT_THROW(read_transforms_report(dir / "shortr.json"), MalformedFileError);
  spit(dir / "missing.json", R"({"locals":[],"inlier_count":0,"outlier_count":0})");
  EXPECT_THROW(read_transforms_report(dir / "missing.json"), MalformedFileError);
}

// Single-byte corruption must never silently change parsed dimensions;
// either the reader throws or the structure is unchanged.
TEST(FuzzSafety, ByteFlipsNeverMisparseDimensions) {
  ScopedTempDir dir("fuzz");
  SplitMix64 rng(47);

  const std::string pmap = pmap_fixture_bytes();

  BinaryMask mask = BinaryMask::empty(3, 2);
  mask.set(1, 0);
  write_mask(mask, dir / "mask.pgm");
  const std::string mask_bytes = slurp(dir / "mask.pgm");

  LabelMap lmap;
  lmap.width = 3;
  lmap.height = 2;
  lmap.labels = {0, 1, 2, 3, 400, 5};
  write_labelmap(lmap, dir / "labels.pgm");
  const std::string lmap_bytes = slurp(dir / "labels.pgm");

  std::vector<ColoredPoint> cloud(3);
  cloud[1].position = Point3(1.0, 2.0, 3.0);
  write_ply(cloud, dir / "cloud.ply");
  const std::string ply_bytes = slurp(dir / "cloud.ply");

  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    {
      std::string flipped = pmap;
      flipped[rng.below(flipped.size())] ^= static_cast<char>(1 + rng.below(255));
      spit(dir / "f.pmap", flipped);
      try {
        const DensePointmap m = read_pointmap(dir / "f.pmap");
        EXPECT_EQ(m.width, 2);
        EXPECT_EQ(m.height, 2);
      } catch (const Error&) {
      }
    }
    {
      std::string flipped = mask_bytes;
      flipped[rng.below(flipped.size())] ^= static_cast<char>(1 + rng.below(255));
      spit(dir / "f.pgm", flipped);
      try {
        const BinaryMask m = read_mask(dir / "f.pgm");
        EXPECT_EQ(m.width, 3);
        EXPECT_EQ(m.height, 2);
      } catch (const Error&) {
      }
    }
    {
      std::string flipped = lmap_bytes;
      flipped[rng.below(flipped.size())] ^= static_cast<char>(1 + rng.below(255));
      spit(dir / "fl.pgm", flipped);
      try {
        const LabelMap m = read_labelmap(dir / "fl.pgm");
        EXPECT_EQ(m.width, 3);
        EXPECT_EQ(m.height, 2);
      } catch (const Error&) {
      }
    }
    {
      std::string flipped = ply_bytes;
      flipped[rng.below(flipped.size())] ^= static_cast<char>(1 + rng.below(255));
      spit(dir / "f.ply", flipped);
      try {
        const std::vector<ColoredPoint> c = read_ply(dir / "f.ply");
        EXPECT_EQ(c.size(), 3u);
      } catch (const Error&) {
      }
    }
  }
}

TEST(BinaryMaskOps, SubtractAndCount) {
  BinaryMask a = BinaryMask::empty(3, 3);
  a.set(0, 0);
  a.set(1, 1);
  a.set(2, 2);
  BinaryMask b = BinaryMask::empty(3, 3);
  b.set(1, 1);
  a.subtract(b);
  EXPECT_EQ(a.count(), 2u);
  EXPECT_FALSE(a.contains(1, 1));
  EXPECT_TRUE(a.contains(0, 0));

  BinaryMask wrong = BinaryMask::empty(2, 3);
  EXPECT_THROW(a.subtract(wrong), MaskDimensionMismatchError);
}

}  // namespace
}  // namespace pointfuse
