#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pointfuse/camera_align.hpp"
#include "pointfuse/correspondence.hpp"
#include "pointfuse/errors.hpp"
#include "pointfuse/procrustes.hpp"
#include "pointfuse/ransac.hpp"
#include "pointfuse/rng.hpp"
#include "pointfuse/scene_io.hpp"
#include "pointfuse/semantic.hpp"
#include "pointfuse/synth.hpp"

namespace pf = pointfuse;

namespace {

/// Named pipeline stage for error reporting; every failure message says
/// where in the run it happened.
struct Stage {
  std::string name = "startup";
};

int exit_code_for(const std::exception& e) {
  // 1: bad usage or inconsistent inputs; 2: file and data problems;
  // 3: degenerate geometry.
  if (dynamic_cast<const pf::InvalidSpecError*>(&e) ||
      dynamic_cast<const pf::ViewMismatchError*>(&e) ||
      dynamic_cast<const pf::CountMismatchError*>(&e) ||
      dynamic_cast<const pf::InvariantViolationError*>(&e)) {
    return 1;
  }
  if (dynamic_cast<const pf::DegenerateConfigurationError*>(&e) ||
      dynamic_cast<const pf::AllSamplesDegenerateError*>(&e) ||
      dynamic_cast<const pf::TooFewCorrespondencesError*>(&e) ||
      dynamic_cast<const pf::EmptySceneError*>(&e) ||
      dynamic_cast<const pf::EmptyInputError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const pf::Error*>(&e)) {
    return 2;
  }
  return 1;
}

struct AlignConfig {
  std::string points_path;
  std::string cameras_path;
  std::vector<std::string> pointmap_paths;
  std::vector<int> pointmap_views;
  std::string labelmap_path;
  std::string mask_dir;
  bool global_only = false;
  double epsilon = 0.0;  // 0 = derive from SfM spacing
  int sample_size = 4;
  int iterations = 1000;
  int min_support = 10;
  bool refit = false;
  std::uint64_t seed = 0;
  std::string out_ply;
  std::string out_report;
};

double mean_residual(const pf::SimTransform& t,
                     const std::vector<pf::Correspondence>& pairs,
                     const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i : indices) {
    sum += (pf::apply_sim3(t, pairs[i].dense_point) - pairs[i].sfm_point).norm();
  }
  return sum / static_cast<double>(indices.size());
}

int cmd_align(const AlignConfig& cfg, Stage& stage) {
  stage.name = "read-inputs";
  const pf::SfMScene scene = pf::read_sfm_scene(cfg.points_path, cfg.cameras_path);

  std::vector<int> views = cfg.pointmap_views;
  if (views.empty()) {
    for (std::size_t i = 0; i < cfg.pointmap_paths.size(); ++i) {
      views.push_back(static_cast<int>(i));
    }
  } else if (views.size() != cfg.pointmap_paths.size()) {
    throw pf::InvalidSpecError("--pointmap-view count must match --pointmap count");
  }
  std::vector<pf::DensePointmap> pointmaps;
  for (std::size_t i = 0; i < cfg.pointmap_paths.size(); ++i) {
    pointmaps.push_back(pf::read_pointmap(cfg.pointmap_paths[i], views[i]));
  }

  stage.name = "reference-view";
  const int ref_view = pf::select_reference_view(scene);
  const pf::DensePointmap* ref_map = nullptr;
  for (const pf::DensePointmap& m : pointmaps) {
    if (m.view_id == ref_view) ref_map = &m;
  }
  if (ref_map == nullptr) {
    throw pf::ViewMismatchError("no pointmap supplied for reference view " +
                                std::to_string(ref_view));
  }

  stage.name = "correspondences";
  const pf::CorrespondenceSet corr = pf::build_correspondences(scene, *ref_map, ref_view);

  stage.name = "global-alignment";
  pf::RansacParams params;
  params.sample_size = cfg.sample_size;
  params.iterations = cfg.iterations;
  params.seed = pf::derive_stream(cfg.seed, 0);
  if (cfg.epsilon > 0.0) {
    params.epsilon = cfg.epsilon;
  } else {
    std::vector<pf::Point3> sfm_positions;
    sfm_positions.reserve(scene.points.size());
    for (const pf::SfMPoint& p : scene.points) sfm_positions.push_back(p.position);
    params.epsilon = 0.05 * pf::median_nn_spacing(sfm_positions);
    std::cerr << "align: derived epsilon " << params.epsilon
              << " from SfM nearest-neighbor spacing\n";
  }
  pf::GlobalAlignment alignment = pf::ransac_align(corr, params);
  if (cfg.refit) {
    alignment = pf::refit_on_inliers(corr, alignment, params.epsilon);
  }

  stage.name = "semantic-grouping";
  std::vector<pf::OutlierGroup> groups;
  if (!cfg.global_only) {
    std::unique_ptr<pf::MaskProvider> provider;
    if (!cfg.labelmap_path.empty()) {
      provider = pf::oracle_provider(
          pf::read_labelmap(cfg.labelmap_path, ref_map->width, ref_map->height));
    } else if (!cfg.mask_dir.empty()) {
      provider = pf::file_provider(cfg.mask_dir, ref_map->width, ref_map->height);
    } else {
      throw pf::InvalidSpecError(
          "need --labelmap or --mask-dir unless --global-only is set");
    }
    std::vector<pf::OutlierPixel> outlier_pixels;
    outlier_pixels.reserve(alignment.outliers.size());
    for (std::size_t idx : alignment.outliers) {
      outlier_pixels.push_back(pf::OutlierPixel{corr.pairs[idx].pixel, idx});
    }
    const std::vector<pf::BinaryMask> masks =
        pf::group_outliers(outlier_pixels, *provider, cfg.min_support,
                           pf::derive_stream(cfg.seed, 1), ref_map->width,
                           ref_map->height);
    stage.name = "local-alignment";
    groups = pf::align_outlier_groups(corr, alignment, masks);
  }

  stage.name = "fusion";
  const pf::FusedCloud fused = pf::fuse(*ref_map, {}, alignment, groups, scene);

  stage.name = "write-outputs";
  std::vector<pf::ColoredPoint> cloud;
  const std::size_t ref_grid = static_cast<std::size_t>(ref_map->width) *
                               static_cast<std::size_t>(ref_map->height);
  cloud.reserve(fused.points.size() + pointmaps.size() * ref_grid);
  // Reference-view dense points (piecewise transformed) first, then the
  // other views under the global transform only, then the SfM points.
  for (std::size_t i = 0; i < ref_grid; ++i) {
    cloud.push_back(pf::ColoredPoint{fused.points[i].position, fused.points[i].color});
  }
  for (const pf::DensePointmap& m : pointmaps) {
    if (m.view_id == ref_view) continue;
    for (const pf::Point3& p : m.points) {
      cloud.push_back(pf::ColoredPoint{pf::apply_sim3(alignment.transform, p), {255, 255, 255}});
    }
  }
  for (std::size_t i = ref_grid; i < fused.points.size(); ++i) {
    cloud.push_back(pf::ColoredPoint{fused.points[i].position, fused.points[i].color});
  }
  pf::write_ply(cloud, cfg.out_ply);

  pf::TransformsReport report;
  report.global = alignment.transform;
  report.inlier_count = static_cast<std::int64_t>(alignment.inliers.size());
  report.outlier_count = static_cast<std::int64_t>(alignment.outliers.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!groups[k].local_transform) continue;
    pf::TransformsReport::LocalEntry entry;
    entry.mask_id = static_cast<int>(k) + 1;
    entry.transform = *groups[k].local_transform;
    entry.support_count = static_cast<std::int64_t>(groups[k].member_indices.size());
    report.locals.push_back(entry);
  }
  std::string report_path = cfg.out_report;
  if (report_path.empty()) {
    report_path =
        std::filesystem::path(cfg.out_ply).replace_extension(".transforms.json").string();
  }
  pf::write_transforms_report(report, report_path);

  std::printf("reference view    %d\n", ref_view);
  std::printf("correspondences   %zu\n", corr.pairs.size());
  std::printf("epsilon           %.9g\n", params.epsilon);
  std::printf("inliers           %zu\n", alignment.inliers.size());
  std::printf("outliers          %zu\n", alignment.outliers.size());
  std::printf("global            s=%.9g inlier residual mean=%.9g\n",
              alignment.transform.scale,
              mean_residual(alignment.transform, corr.pairs, alignment.inliers));
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const pf::OutlierGroup& g = groups[k];
    if (g.local_transform) {
      std::printf("mask %zu            members=%zu residual mean %.9g -> %.9g\n",
                  k + 1, g.member_indices.size(),
                  mean_residual(alignment.transform, corr.pairs, g.member_indices),
                  mean_residual(*g.local_transform, corr.pairs, g.member_indices));
    } else {
      std::printf("mask %zu            members=%zu degenerate, kept on global\n",
                  k + 1, g.member_indices.size());
    }
  }
  std::printf("fused points      %zu\n", cloud.size());
  std::printf("wrote %s\n", cfg.out_ply.c_str());
  std::printf("wrote %s\n", report_path.c_str());
  return 0;
}

struct EvalPoseConfig {
  std::string est_path;
  std::string ref_path;
  double epsilon = 0.0;  // 0 = derive from reference cloud scale
  int sample_cameras = 3;
  int iterations = 1000;
  std::uint64_t seed = 0;
  std::string json_out;
  std::string out_ply;
};

std::vector<pf::CameraPose> load_poses(const std::string& path) {
  std::vector<pf::CameraView> views = pf::read_cameras_file(path);
  std::sort(views.begin(), views.end(),
            [](const pf::CameraView& a, const pf::CameraView& b) {
              return a.view_id < b.view_id;
            });
  std::vector<pf::CameraPose> poses;
  poses.reserve(views.size());
  for (const pf::CameraView& v : views) poses.push_back(pf::camera_pose_from_view(v));
  return poses;
}

int cmd_eval_pose(const EvalPoseConfig& cfg, Stage& stage) {
  stage.name = "read-inputs";
  std::vector<pf::CameraView> est_views = pf::read_cameras_file(cfg.est_path);
  std::vector<pf::CameraView> ref_views = pf::read_cameras_file(cfg.ref_path);
  if (est_views.size() != ref_views.size()) {
    throw pf::CountMismatchError("estimated set has " +
                                 std::to_string(est_views.size()) +
                                 " cameras, reference has " +
                                 std::to_string(ref_views.size()));
  }
  const auto by_view = [](const pf::CameraView& a, const pf::CameraView& b) {
    return a.view_id < b.view_id;
  };
  std::sort(est_views.begin(), est_views.end(), by_view);
  std::sort(ref_views.begin(), ref_views.end(), by_view);
  for (std::size_t i = 0; i < est_views.size(); ++i) {
    if (est_views[i].view_id != ref_views[i].view_id) {
      throw pf::CountMismatchError("view ids differ between the two sets");
    }
  }
  std::vector<pf::CameraPose> est;
  std::vector<pf::CameraPose> ref;
  for (const pf::CameraView& v : est_views) est.push_back(pf::camera_pose_from_view(v));
  for (const pf::CameraView& v : ref_views) ref.push_back(pf::camera_pose_from_view(v));

  stage.name = "camera-alignment";
  pf::RansacParams ransac;
  ransac.sample_size = cfg.sample_cameras;
  ransac.iterations = cfg.iterations;
  ransac.seed = cfg.seed;
  ransac.epsilon =
      cfg.epsilon > 0.0 ? cfg.epsilon : 0.1 * pf::camera_cloud_scale(ref);

  struct Variant {
    const char* name;
    pf::CameraAlignOptions opts;
  };
  const std::vector<Variant> variants = {
      {"plain", {false, std::nullopt}},
      {"+ransac", {false, ransac}},
      {"+rotation-points", {true, std::nullopt}},
      {"+both", {true, ransac}},
  };

  nlohmann::ordered_json out_json;
  std::printf("%-18s %14s %14s\n", "variant", "E_R mean (rad)", "E_T mean");
  pf::SimTransform best_transform;
  for (const Variant& v : variants) {
    const auto [transform, report] = pf::align_camera_sets(est, ref, v.opts);
    std::printf("%-18s %14.9f %14.9f\n", v.name, report.rotation_error_mean,
                report.translation_error_mean);
    nlohmann::ordered_json vj;
    vj["rotation_error_mean_rad"] = report.rotation_error_mean;
    vj["translation_error_mean"] = report.translation_error_mean;
    vj["rotation_errors_rad"] = report.rotation_errors;
    vj["translation_errors"] = report.translation_errors;
    out_json["variants"][v.name] = std::move(vj);
    best_transform = transform;
  }

  stage.name = "relative-pose-error";
  const auto [rpe_t, rpe_r_deg] = pf::relative_pose_error(est, ref);
  std::printf("RPE_t %.9f  RPE_r %.9f deg\n", rpe_t, rpe_r_deg);
  out_json["rpe_translation"] = rpe_t;
  out_json["rpe_rotation_deg"] = rpe_r_deg;

  stage.name = "write-outputs";
  if (!cfg.json_out.empty()) {
    std::ofstream out(cfg.json_out, std::ios::binary | std::ios::trunc);
    if (!out) throw pf::IoError("cannot open " + cfg.json_out + " for writing");
    out << out_json.dump(2) << "\n";
    if (!out.good()) throw pf::IoError("write failed for " + cfg.json_out);
  }
  if (!cfg.out_ply.empty()) {
    // Aligned estimated centers (red) next to reference centers (green),
    // using the last variant's transform (rotation points + robust fit).
    std::vector<pf::ColoredPoint> cloud;
    for (const pf::CameraPose& p : est) {
      cloud.push_back(
          pf::ColoredPoint{pf::apply_sim3(best_transform, p.position), {220, 40, 40}});
    }
    for (const pf::CameraPose& p : ref) {
      cloud.push_back(pf::ColoredPoint{p.position, {40, 200, 40}});
    }
    pf::write_ply(cloud, cfg.out_ply);
  }
  return 0;
}

struct SynthConfig {
  int regions = 3;
  int points_per_region = 40;
  double noise = 0.0;
  double outlier_fraction = 0.0;
  int cameras = 4;
  int width = 96;
  int height = 96;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_synth(const SynthConfig& cfg, Stage& stage) {
  stage.name = "generate";
  pf::SceneSpec spec;
  spec.num_regions = cfg.regions;
  spec.points_per_region = cfg.points_per_region;
  spec.region_transforms = pf::default_region_transforms(cfg.seed, cfg.regions);
  spec.noise_sigma = cfg.noise;
  spec.outlier_fraction = cfg.outlier_fraction;
  spec.num_cameras = cfg.cameras;
  spec.image_width = cfg.width;
  spec.image_height = cfg.height;
  spec.seed = cfg.seed;
  const pf::GroundTruthBundle bundle = pf::generate(spec);

  stage.name = "write-outputs";
  pf::write_bundle(bundle, cfg.out_dir);
  std::printf("regions           %d\n", spec.num_regions);
  std::printf("sfm points        %zu\n", bundle.scene.points.size());
  std::printf("cameras           %zu\n", bundle.scene.cameras.size());
  std::printf("pointmap          %dx%d\n", bundle.pointmap.width, bundle.pointmap.height);
  std::printf("wrote bundle to %s\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pointfuse: fuses a dense per-pixel point cloud with a sparse SfM cloud "
      "via robust global alignment plus mask-guided local alignment"};
  app.require_subcommand(1);

  AlignConfig align_cfg;
  CLI::App* align = app.add_subcommand(
      "align", "Align a dense pointmap onto an SfM cloud and write the fused cloud");
  align->add_option("--points", align_cfg.points_path, "SfM points file (points.txt schema)")
      ->required();
  align->add_option("--cameras", align_cfg.cameras_path, "camera file (cameras.txt schema)")
      ->required();
  align->add_option("--pointmap", align_cfg.pointmap_paths,
                    "dense pointmap file (.pmap); repeat for multiple views")
      ->required();
  align->add_option("--pointmap-view", align_cfg.pointmap_views,
                    "view id bound to each --pointmap, in order (default 0,1,...)");
  align->add_option("--labelmap", align_cfg.labelmap_path,
                    "16-bit PGM label map backing the segmentation oracle");
  align->add_option("--mask-dir", align_cfg.mask_dir,
                    "directory of PGM masks with an index.txt of `U V file` lines");
  align->add_flag("--global-only", align_cfg.global_only,
                  "skip the mask-guided local stage");
  align->add_option("--epsilon", align_cfg.epsilon,
                    "inlier threshold in scene units (default: 0.05 x median "
                    "nearest-neighbor spacing of the SfM cloud)");
  align->add_option("--sample-size", align_cfg.sample_size,
                    "points per robust-fit sample (default 4)");
  align->add_option("--iterations", align_cfg.iterations,
                    "robust-fit rounds (default 1000)");
  align->add_option("--min-support", align_cfg.min_support,
                    "min outliers per kept mask, strict (default 10, floor 3)");
  align->add_flag("--refit", align_cfg.refit,
                  "refit the global transform on the final inlier set");
  align->add_option("--seed", align_cfg.seed, "random seed (64-bit)")->required();
  align->add_option("--out-ply", align_cfg.out_ply, "fused cloud output path")
      ->required();
  align->add_option("--out-report", align_cfg.out_report,
                    "transforms report path (default: out-ply with .transforms.json)");

  EvalPoseConfig eval_cfg;
  CLI::App* eval = app.add_subcommand(
      "eval-pose", "Align an estimated camera set to a reference and report pose errors");
  eval->add_option("--est", eval_cfg.est_path, "estimated cameras file")->required();
  eval->add_option("--ref", eval_cfg.ref_path, "reference cameras file")->required();
  eval->add_option("--epsilon", eval_cfg.epsilon,
                   "camera inlier threshold in scene units (default: 0.1 x "
                   "reference camera-cloud scale)");
  eval->add_option("--sample-cameras", eval_cfg.sample_cameras,
                   "cameras per robust-fit sample (default 3)");
  eval->add_option("--iterations", eval_cfg.iterations,
                   "robust-fit rounds (default 1000)");
  eval->add_option("--seed", eval_cfg.seed, "random seed (64-bit)")->required();
  eval->add_option("--json-out", eval_cfg.json_out, "machine-readable metrics path");
  eval->add_option("--out-ply", eval_cfg.out_ply,
                   "aligned-versus-reference camera centers as a point cloud");

  SynthConfig synth_cfg;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a ground-truth-annotated synthetic scene bundle");
  synth->add_option("--regions", synth_cfg.regions, "label regions (default 3)");
  synth->add_option("--points-per-region", synth_cfg.points_per_region,
                    "SfM samples per region (default 40; region 0 gets 2x)");
  synth->add_option("--noise", synth_cfg.noise,
                    "dense-point Gaussian noise sigma in scene units (default 0)");
  synth->add_option("--outlier-fraction", synth_cfg.outlier_fraction,
                    "fraction of correspondences made gross outliers (default 0)");
  synth->add_option("--cameras", synth_cfg.cameras, "ring cameras (default 4)");
  synth->add_option("--width", synth_cfg.width, "image width in pixels (default 96)");
  synth->add_option("--height", synth_cfg.height, "image height in pixels (default 96)");
  synth->add_option("--seed", synth_cfg.seed, "random seed (64-bit)")->required();
  synth->add_option("--out", synth_cfg.out_dir, "bundle output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Stage stage;
  try {
    if (align->parsed()) return cmd_align(align_cfg, stage);
    if (eval->parsed()) return cmd_eval_pose(eval_cfg, stage);
    if (synth->parsed()) return cmd_synth(synth_cfg, stage);
  } catch (const std::exception& e) {
    std::cerr << "error at stage " << stage.name << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
