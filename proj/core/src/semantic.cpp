#include "pointfuse/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "pointfuse/errors.hpp"
#include "pointfuse/procrustes.hpp"
#include "pointfuse/rng.hpp"
#include "pointfuse/scene_io.hpp"

namespace pointfuse {

namespace {

class OracleProvider final : public MaskProvider {
 public:
  explicit OracleProvider(LabelMap labelmap) : map_(std::move(labelmap)) {}

  BinaryMask prompt(std::span<const Pixel> pixels) override {
    std::map<std::uint16_t, std::size_t> votes;
    for (const Pixel& px : pixels) {
      if (!map_.in_bounds(px.u, px.v)) {
        throw ProviderFailureError("prompt pixel outside the label map");
      }
      ++votes[map_.at(px.u, px.v)];
    }
    // std::map iterates labels ascending, so strict > resolves vote ties
    // to the lowest label id.
    std::uint16_t winner = 0;
    std::size_t winner_votes = 0;
    for (const auto& [label, n] : votes) {
      if (n > winner_votes) {
        winner = label;
        winner_votes = n;
      }
    }
    BinaryMask mask = BinaryMask::empty(map_.width, map_.height);
    if (winner == 0 || pixels.empty()) {
      return mask;  // unlabeled: refusal
    }
    for (int v = 0; v < map_.height; ++v) {
      for (int u = 0; u < map_.width; ++u) {
        if (map_.at(u, v) == winner) mask.set(u, v);
      }
    }
    return mask;
  }

 private:
  LabelMap map_;
};

class FileProvider final : public MaskProvider {
 public:
  FileProvider(const std::filesystem::path& dir, int expected_width,
               int expected_height)
      : dir_(dir), expected_width_(expected_width), expected_height_(expected_height) {
    const std::filesystem::path index = dir / "index.txt";
    std::ifstream in(index);
    if (!in) {
      throw IoError("cannot open " + index.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      std::istringstream fields(line);
      Entry e;
      std::string extra;
      if (!(fields >> e.u >> e.v >> e.filename) || (fields >> extra)) {
        throw MalformedFileError(index.string() + ":" + std::to_string(line_no) +
                                 ": expected U V mask_filename.pgm");
      }
      entries_.push_back(std::move(e));
    }
  }

  BinaryMask prompt(std::span<const Pixel> pixels) override {
    if (pixels.empty() || entries_.empty()) {
      return refusal();
    }
    // Nearest entry: minimum distance from the entry's anchor to any
    // prompt pixel; strict < keeps the earliest index line among ties.
    std::size_t best = entries_.size();
    double best_d2 = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      double d2 = std::numeric_limits<double>::infinity();
      for (const Pixel& px : pixels) {
        const double du = entries_[i].u - px.u;
        const double dv = entries_[i].v - px.v;
        d2 = std::min(d2, du * du + dv * dv);
      }
      if (best == entries_.size() || d2 < best_d2) {
        best = i;
        best_d2 = d2;
      }
    }
    const BinaryMask& mask = load(best);
    for (const Pixel& px : pixels) {
      if (!mask.in_bounds(px.u, px.v) || !mask.contains(px.u, px.v)) {
        return refusal();
      }
    }
    return mask;
  }

 private:
  struct Entry {
    double u = 0.0;
    double v = 0.0;
    std::string filename;
  };

  BinaryMask refusal() const {
    const int w = expected_width_ > 0 ? expected_width_ : 0;
    const int h = expected_height_ > 0 ? expected_height_ : 0;
    return BinaryMask::empty(w, h);
  }

  const BinaryMask& load(std::size_t i) {
    auto it = cache_.find(i);
    if (it == cache_.end()) {
      it = cache_
               .emplace(i, read_mask(dir_ / entries_[i].filename, expected_width_,
                                     expected_height_))
               .first;
    }
    return it->second;
  }

  std::filesystem::path dir_;
  int expected_width_;
  int expected_height_;
  std::vector<Entry> entries_;
  std::map<std::size_t, BinaryMask> cache_;
};

}  // namespace

std::unique_ptr<MaskProvider> oracle_provider(LabelMap labelmap) {
  return std::make_unique<OracleProvider>(std::move(labelmap));
}

std::unique_ptr<MaskProvider> file_provider(const std::filesystem::path& mask_dir,
                                            int expected_width, int expected_height) {
  return std::make_unique<FileProvider>(mask_dir, expected_width, expected_height);
}

namespace {

constexpr int kMaxReprompts = 8;

BinaryMask checked_prompt(MaskProvider& provider, std::span<const Pixel> pixels,
                          int width, int height) {
  BinaryMask mask;
  try {
    mask = provider.prompt(pixels);
  } catch (const std::exception& e) {
    throw ProviderFailureError(std::string("mask provider failed: ") + e.what());
  }
  if (mask.is_empty()) {
    return BinaryMask::empty(width, height);  // refusal, normalized shape
  }
  if (mask.width != width || mask.height != height) {
    throw MaskDimensionMismatchError("provider mask is " + std::to_string(mask.width) +
                                     "x" + std::to_string(mask.height) +
                                     ", reference view is " + std::to_string(width) +
                                     "x" + std::to_string(height));
  }
  return mask;
}

std::vector<std::size_t> members_inside(std::span<const OutlierPixel> outliers,
                                        const BinaryMask& mask) {
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < outliers.size(); ++i) {
    const Pixel& px = outliers[i].pixel;
    if (mask.in_bounds(px.u, px.v) && mask.contains(px.u, px.v)) {
      inside.push_back(i);
    }
  }
  return inside;
}

}  // namespace

std::vector<BinaryMask> group_outliers(std::span<const OutlierPixel> outliers,
                                       MaskProvider& provider, int min_support,
                                       std::uint64_t seed, int width, int height) {
  if (min_support < 3) {
    throw InvariantViolationError("minimum mask support must be at least 3");
  }
  if (width <= 0 || height <= 0) {
    if (!outliers.empty()) {
      throw InvariantViolationError("outliers supplied for an empty view");
    }
    return {};
  }
  for (const OutlierPixel& o : outliers) {
    if (o.pixel.u < 0 || o.pixel.u >= width || o.pixel.v < 0 || o.pixel.v >= height) {
      throw InvariantViolationError("outlier pixel outside the reference view");
    }
  }

  SplitMix64 rng(seed);
  std::vector<BinaryMask> kept;
  BinaryMask kept_union = BinaryMask::empty(width, height);
  // An outlier leaves the pool by consumption (inside a kept mask) or by
  // discard (inside a failed mask); either way it is never picked again.
  std::vector<std::uint8_t> in_pool(outliers.size(), 1);
  std::size_t pool_count = outliers.size();

  const auto remove_from_pool = [&](std::span<const std::size_t> indices) {
    for (std::size_t i : indices) {
      if (in_pool[i]) {
        in_pool[i] = 0;
        --pool_count;
      }
    }
  };

  while (pool_count > 0) {
    // Seeded uniform pick among pool survivors.
    std::uint64_t pick = rng.below(pool_count);
    std::size_t seed_index = 0;
    for (std::size_t i = 0; i < outliers.size(); ++i) {
      if (in_pool[i] && pick-- == 0) {
        seed_index = i;
        break;
      }
    }

    const Pixel seed_pixel = outliers[seed_index].pixel;
    BinaryMask mask = checked_prompt(provider, std::span(&seed_pixel, 1), width, height);
    if (mask.is_empty() || !mask.contains(seed_pixel.u, seed_pixel.v)) {
      remove_from_pool(std::vector<std::size_t>{seed_index});
      continue;
    }
    mask.subtract(kept_union);
    std::vector<std::size_t> members = members_inside(outliers, mask);

    bool keep = false;
    for (int attempt = 0;; ++attempt) {
      if (members.size() > static_cast<std::size_t>(min_support)) {
        keep = true;
        break;
      }
      if (attempt >= kMaxReprompts) break;

      std::vector<Pixel> prompt_pixels;
      prompt_pixels.reserve(members.size());
      for (std::size_t i : members) prompt_pixels.push_back(outliers[i].pixel);
      BinaryMask next = checked_prompt(provider, prompt_pixels, width, height);
      if (next.is_empty()) break;
      next.subtract(kept_union);
      std::vector<std::size_t> next_members = members_inside(outliers, next);
      const bool grew = next_members.size() > members.size();
      mask = std::move(next);
      members = std::move(next_members);
      if (!grew) break;
    }

    // The seed pixel always leaves the pool, even when re-prompting walked
    // the mask away from it; otherwise the same pick could recur forever.
    remove_from_pool(std::vector<std::size_t>{seed_index});
    remove_from_pool(members);
    if (keep) {
      for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
          if (mask.contains(u, v)) kept_union.set(u, v);
        }
      }
      kept.push_back(std::move(mask));
    }
  }
  return kept;
}

SimTransform solve_local(std::span<const Correspondence> members) {
  std::vector<Point3> src;
  std::vector<Point3> dst;
  src.reserve(members.size());
  dst.reserve(members.size());
  for (const Correspondence& c : members) {
    src.push_back(c.dense_point);
    dst.push_back(c.sfm_point);
  }
  return solve_similarity(src, dst);
}

std::vector<OutlierGroup> align_outlier_groups(const CorrespondenceSet& corr,
                                               const GlobalAlignment& alignment,
                                               std::span<const BinaryMask> masks) {
  std::vector<OutlierGroup> groups;
  groups.reserve(masks.size());
  for (const BinaryMask& mask : masks) {
    OutlierGroup g;
    g.mask = mask;
    std::vector<Correspondence> members;
    for (std::size_t idx : alignment.outliers) {
      const Pixel& px = corr.pairs[idx].pixel;
      if (mask.in_bounds(px.u, px.v) && mask.contains(px.u, px.v)) {
        g.member_indices.push_back(idx);
        members.push_back(corr.pairs[idx]);
      }
    }
    try {
      g.local_transform = solve_local(members);
    } catch (const DegenerateConfigurationError&) {
      g.local_transform = std::nullopt;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

FusedCloud fuse(const DensePointmap& pointmap, std::span<const Rgb> colors,
                const GlobalAlignment& alignment, std::span<const OutlierGroup> groups,
                const SfMScene& sfm) {
  const std::size_t grid =
      static_cast<std::size_t>(pointmap.width) * static_cast<std::size_t>(pointmap.height);
  if (!colors.empty() && colors.size() != grid) {
    throw DimensionMismatchError("color grid does not match the pointmap dimensions");
  }
  for (const OutlierGroup& g : groups) {
    if (g.mask.width != pointmap.width || g.mask.height != pointmap.height) {
      throw MaskDimensionMismatchError("group mask does not match the pointmap dimensions");
    }
  }

  // Owner per pixel: 1-based group number, 0 for the global region. Masks
  // are disjoint, so assignment order does not matter; groups without a
  // local fit stay global.
  std::vector<int> owner(grid, 0);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!groups[k].local_transform) continue;
    const BinaryMask& mask = groups[k].mask;
    for (std::size_t i = 0; i < grid; ++i) {
      if (mask.bits[i]) owner[i] = static_cast<int>(k) + 1;
    }
  }

  FusedCloud out;
  out.points.reserve(grid + sfm.points.size());
  for (std::size_t i = 0; i < grid; ++i) {
    FusedPoint fp;
    const int k = owner[i];
    if (k == 0) {
      fp.position = apply_sim3(alignment.transform, pointmap.points[i]);
      fp.origin = PointOrigin::DenseGlobal;
    } else {
      fp.position =
          apply_sim3(*groups[static_cast<std::size_t>(k - 1)].local_transform,
                     pointmap.points[i]);
      fp.origin = PointOrigin::DenseLocal;
      fp.local_id = k;
    }
    if (!colors.empty()) fp.color = colors[i];
    out.points.push_back(fp);
  }
  for (const SfMPoint& p : sfm.points) {
    FusedPoint fp;
    fp.position = p.position;
    fp.color = p.color;
    fp.origin = PointOrigin::Sfm;
    out.points.push_back(fp);
  }
  return out;
}

}  // namespace pointfuse
