// Copyright 2026 The poseact authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "poseact/policy.hpp"

namespace poseact {

/// The five pose-seed clusters. small/large offset a single parameter (or
/// none, for the stop label); mixed pairs one large axis with small draws on
/// the rest; the random groups draw every axis independently.
enum class SeedGroup { small, large, mixed, random_small, random_large };

const char* seed_group_name(SeedGroup group);
SeedGroup seed_group_from_name(const std::string& name);
inline constexpr std::array<SeedGroup, 5> kAllSeedGroups = {
    SeedGroup::small, SeedGroup::large, SeedGroup::mixed,
    SeedGroup::random_small, SeedGroup::random_large};

/// Inclusive per-axis action-count ranges of a cluster.
struct GroupRanges {
  int tx_min, tx_max;  // also ty
  int tz_min, tz_max;
  int rot_min, rot_max;
};
GroupRanges group_ranges(bool large);

/// Draws the signed per-parameter action counts for one training seed.
///  - small/large: one of the 13 options uniformly (12 signed axes plus the
///    all-zero stop seed), magnitude uniform in the group range;
///  - mixed: one large-magnitude axis, the rest drawn as in the small group
///    per axis (zero with the stop chance of 1/13);
///  - random_small/random_large: every axis gets an independent magnitude
///    and sign from the group ranges.
ActionOffset sample_seed_offset(SeedGroup group, Rng& rng);

/// Augmentation branch probabilities and parameter ranges.
struct AugmentConfig {
  double motion_blur_fraction = 0.75;  // else radial blur
  double noise_sigma = 0.05;
  double jitter_min = 0.95, jitter_max = 1.25;  // brightness/contrast/saturation
  double unlit_fraction = 0.20;
  double metallic_max = 0.85;
  double smoothness_max = 0.80;
  int light_count = 5;
  double light_intensity_min = 0.5, light_intensity_max = 1.5;
  int resize_crop_min = 96, resize_crop_max = 128;
  int resize_down_min = 32, resize_down_max = 64;
  double no_occluder_fraction = 0.50;  // then 12.5% each for 1..4
  double masked_crop_fraction = 0.25;
  int masked_crop_min = 72, masked_crop_max = 96;
};

/// Which branches fired and which factors were drawn; lets tests validate
/// the pipeline statistics without reaching into the rng.
struct AugmentMeta {
  bool motion_blur = false;
  int occluder_count = 0;
  bool masked_crop = false;
  double brightness = 1.0, contrast = 1.0, saturation = 1.0;
  int resize_crop_side = 0, resize_down_side = 0;
};

/// Pre-rendered occluder patches (RGB + mask at patch resolution).
struct OccluderPool {
  std::vector<ImageRGB> rgb;
  std::vector<Plane> masks;

  bool empty() const { return rgb.empty(); }
  /// Renders `count` random-pose patches of the mesh.
  static OccluderPool render(const Mesh& mesh, int count, std::uint64_t seed,
                             int patch_side = 128);
};

/// Patch-level augmentation: blur (+ additive noise), color jitter,
/// crop/downscale/upscale, occluders, masked-region cutout. Bit-determined
/// by the rng stream.
ImageRGB augment_patch(const ImageRGB& patch, const AugmentConfig& cfg,
                       const OccluderPool& occluders, Rng& rng,
                       AugmentMeta* meta = nullptr);

/// Uniform draw from a directory of images, center-cropped and resized to
/// the target size. Unreadable files are skipped with a warning; an empty
/// usable pool is an error.
class BackgroundPool {
 public:
  /// Empty path -> procedural backgrounds only.
  explicit BackgroundPool(const std::string& directory = "");
  ImageRGB sample(Rng& rng, int width, int height) const;
  std::size_t size() const { return paths_.size(); }

 private:
  std::vector<std::string> paths_;
  mutable std::map<std::string, ImageRGB> cache_;
  mutable std::mutex mutex_;
};

/// Procedural background: smooth color gradient plus random rectangles,
/// disks and grain. Stands in for real photographs in hermetic runs.
ImageRGB synthesize_background(Rng& rng, int width, int height);

/// Random light rig for the augmented ground-truth rendering.
LightConfig sample_lights(const AugmentConfig& cfg, const Vec3& object_center, Rng& rng);
MaterialConfig sample_material(const AugmentConfig& cfg, Rng& rng);

/// Ground-truth pose sampling: uniform rotation, depth in [0.5, 2] m, image
/// placement keeping the projected bounding box inside the frame.
Pose sample_gt_pose(const Mesh& mesh, const CameraIntrinsics& K, Rng& rng,
                    double depth_min = 0.5, double depth_max = 2.0);

/// One training sample: augmented observation, clean hypothesis channels,
/// oracle label.
struct Sample {
  PatchStack stack;
  Plane depth_m;  // hypothesis depth crop, meters (stack carries depth/z)
  int label = ActionVector::kStopIndex;
  Pose gt, hypothesis;
  ActionOffset offset = ActionOffset::Zero();
  SeedGroup group = SeedGroup::small;
  std::uint64_t seed = 0;
  AugmentMeta augment;
};

struct DatagenConfig {
  StepSizes steps;
  AugmentConfig augment;
  double crop_margin = 1.2;
  int patch_side = 128;
  double depth_min = 0.5, depth_max = 2.0;
};

Sample generate_sample(const Mesh& mesh, const CameraIntrinsics& K,
                       const DatagenConfig& cfg, SeedGroup group,
                       const BackgroundPool& backgrounds,
                       const OccluderPool& occluders, Rng& rng);

/// Clean composite of the ground truth over a background; the episode-level
/// evaluation counterpart of the training stream.
Scene make_clean_scene(const Mesh& mesh, const CameraIntrinsics& K,
                       const Pose& gt, const BackgroundPool& backgrounds, Rng& rng);

struct DatasetManifest {
  struct Entry {
    std::string id;
    SeedGroup group;
    std::uint64_t seed;
    int label;
    Pose gt, hypothesis;
  };
  std::uint64_t base_seed = 0;
  int patch_side = 128;
  CameraIntrinsics intrinsics;
  std::map<std::string, int> group_counts;
  std::vector<Entry> entries;
};

/// Renders `counts[g]` samples per group into `output_dir` as
/// <id>_obs.png / <id>_rgb.png / <id>_depth.png (16-bit mm) / <id>_mask.png
/// / <id>.json plus manifest.json. Sample i owns the rng stream
/// (base_seed, i), so reruns and any worker count produce byte-identical
/// output.
DatasetManifest generate_dataset(const Mesh& mesh, const CameraIntrinsics& K,
                                 const DatagenConfig& cfg,
                                 const std::map<SeedGroup, int>& counts,
                                 const std::string& output_dir,
                                 const std::string& background_dir,
                                 int occluder_pool_size, int workers,
                                 std::uint64_t base_seed);

DatasetManifest load_manifest(const std::string& dataset_dir);

/// Training-side dataset access: samples decoded once into compact 8-bit /
/// 16-bit buffers, batches materialized on demand.
class TrainingPool {
 public:
  void load(const std::string& dataset_dir);
  std::size_t size() const { return records_.size(); }
  int patch_side() const { return patch_side_; }
  int label(std::size_t i) const { return records_[i].label; }

  /// Writes sample i into column block `slot` of a (8, batch * n * n) input.
  void fill_input(std::size_t i, Eigen::Ref<MatX<float>> input, int slot) const;

  /// Reconstructs the stack of sample i (for episode-style inspection).
  PatchStack stack(std::size_t i) const;

 private:
  struct Record {
    std::vector<std::uint8_t> obs, rgb;   // 3 * n * n, channel-major
    std::vector<std::uint16_t> depth_mm;  // n * n
    std::vector<std::uint8_t> mask;       // n * n
    float inv_depth = 1.0f;               // 1 / hypothesis depth
    int label = 0;
  };
  std::vector<Record> records_;
  int patch_side_ = 0;
};

}  // namespace poseact
