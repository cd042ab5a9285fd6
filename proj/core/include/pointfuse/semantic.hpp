#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pointfuse/ransac.hpp"
#include "pointfuse/scene.hpp"

namespace pointfuse {

/// Prompt-to-mask segmentation oracle over the reference view. An empty
/// mask is a refusal, which callers treat as "no mask here". Providers
/// are called one prompt at a time; no concurrent use.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual BinaryMask prompt(std::span<const Pixel> pixels) = 0;
};

/// Label-map-backed provider: prompting returns the footprint of the
/// prompted pixels' label. Mixed-label prompts resolve to the majority
/// label, ties to the lowest label id; label 0 is unlabeled and yields a
/// refusal.
std::unique_ptr<MaskProvider> oracle_provider(LabelMap labelmap);

/// Directory-backed provider for externally computed masks. `mask_dir`
/// must hold an index.txt of lines `U V mask_filename.pgm`; a prompt picks
/// the entry nearest any prompt pixel (ties to the earlier line) and
/// refuses when that mask does not contain every prompt pixel. Pass the
/// reference-view dimensions to reject wrong-size mask files on load.
std::unique_ptr<MaskProvider> file_provider(const std::filesystem::path& mask_dir,
                                            int expected_width = -1,
                                            int expected_height = -1);

/// An alignment outlier addressed by pixel, carrying its index into the
/// correspondence set.
struct OutlierPixel {
  Pixel pixel;
  std::size_t corr_index = 0;
};

/// Groups outlier pixels into provider masks. Repeatedly: pick a random
/// unconsumed outlier (seeded), prompt with that single pixel, and keep
/// the mask when it holds strictly more than `min_support` outliers;
/// otherwise re-prompt with all within-mask outliers until the criterion
/// is met or the within-mask set stops growing (then the mask and the
/// outliers within are discarded). Kept masks have previously kept pixels
/// subtracted before the support test, so the result is pairwise disjoint.
///
/// Provider exceptions propagate wrapped as ProviderFailureError.
std::vector<BinaryMask> group_outliers(std::span<const OutlierPixel> outliers,
                                       MaskProvider& provider, int min_support,
                                       std::uint64_t seed, int width, int height);

/// One semantic region: its mask, the outlier correspondences inside it,
/// and the local similarity fit (absent when the fit was degenerate, in
/// which case the region falls back to the global transform).
struct OutlierGroup {
  BinaryMask mask;
  std::vector<std::size_t> member_indices;
  std::optional<SimTransform> local_transform;
};

/// Local similarity fit over a group's correspondences (dense -> SfM).
SimTransform solve_local(std::span<const Correspondence> members);

/// Builds one OutlierGroup per mask: members are the alignment's outlier
/// correspondences whose pixel falls inside the mask; degenerate local
/// fits leave local_transform empty.
std::vector<OutlierGroup> align_outlier_groups(const CorrespondenceSet& corr,
                                               const GlobalAlignment& alignment,
                                               std::span<const BinaryMask> masks);

enum class PointOrigin { DenseGlobal, DenseLocal, Sfm };

struct FusedPoint {
  Point3 position = Point3::Zero();
  Rgb color{255, 255, 255};
  PointOrigin origin = PointOrigin::DenseGlobal;
  /// 1-based kept-group number when origin == DenseLocal, else 0.
  int local_id = 0;
};

struct FusedCloud {
  std::vector<FusedPoint> points;
};

/// Piecewise transform and concatenation: every pointmap pixel goes
/// through its owning group's local transform, or the global transform
/// where no group claims it (including discarded groups); SfM points are
/// appended untransformed. `colors` is an optional row-major sibling grid
/// for the dense points (empty means white).
FusedCloud fuse(const DensePointmap& pointmap, std::span<const Rgb> colors,
                const GlobalAlignment& alignment, std::span<const OutlierGroup> groups,
                const SfMScene& sfm);

}  // namespace pointfuse
