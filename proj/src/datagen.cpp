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

#include "poseact/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "poseact/image_io.hpp"
#include "poseact/serialization.hpp"
#include "poseact/threading.hpp"

namespace fs = std::filesystem;

namespace poseact {

const char* seed_group_name(SeedGroup group) {
  switch (group) {
    case SeedGroup::small: return "small";
    case SeedGroup::large: return "large";
    case SeedGroup::mixed: return "mixed";
    case SeedGroup::random_small: return "random_small";
    case SeedGroup::random_large: return "random_large";
  }
  return "unknown";
}

SeedGroup seed_group_from_name(const std::string& name) {
  for (SeedGroup g : kAllSeedGroups)
    if (name == seed_group_name(g)) return g;
  throw Error(ErrorCode::bad_config, "unknown seed group: " + name);
}

GroupRanges group_ranges(bool large) {
  if (large) return GroupRanges{5, 30, 1, 15, 4, 20};
  return GroupRanges{1, 5, 1, 4, 1, 4};
}

namespace {

int axis_magnitude(const GroupRanges& r, int axis, Rng& rng) {
  if (axis <= 1) return static_cast<int>(rng.uniform_int(r.tx_min, r.tx_max));
  if (axis == 2) return static_cast<int>(rng.uniform_int(r.tz_min, r.tz_max));
  return static_cast<int>(rng.uniform_int(r.rot_min, r.rot_max));
}

ActionOffset single_axis_offset(const GroupRanges& ranges, Rng& rng) {
  ActionOffset offset = ActionOffset::Zero();
  // 13 equally likely options: 12 signed axes plus the stop seed.
  const int option = static_cast<int>(rng.uniform_int(0, 12));
  if (option == 12) return offset;
  const int axis = option / 2;
  const int dir = option % 2 == 0 ? 1 : -1;
  offset[axis] = dir * axis_magnitude(ranges, axis, rng);
  return offset;
}

}  // namespace

ActionOffset sample_seed_offset(SeedGroup group, Rng& rng) {
  const GroupRanges small = group_ranges(false);
  const GroupRanges large = group_ranges(true);
  ActionOffset offset = ActionOffset::Zero();
  switch (group) {
    case SeedGroup::small:
      return single_axis_offset(small, rng);
    case SeedGroup::large:
      return single_axis_offset(large, rng);
    case SeedGroup::mixed: {
      const int big_axis = static_cast<int>(rng.uniform_int(0, 5));
      for (int axis = 0; axis < 6; ++axis) {
        if (axis == big_axis) {
          offset[axis] = rng.sign() * axis_magnitude(large, axis, rng);
        } else if (!rng.bernoulli(1.0 / 13.0)) {  // small groups keep a stop chance
          offset[axis] = rng.sign() * axis_magnitude(small, axis, rng);
        }
      }
      return offset;
    }
    case SeedGroup::random_small:
      for (int axis = 0; axis < 6; ++axis)
        offset[axis] = rng.sign() * axis_magnitude(small, axis, rng);
      return offset;
    case SeedGroup::random_large:
      for (int axis = 0; axis < 6; ++axis)
        offset[axis] = rng.sign() * axis_magnitude(large, axis, rng);
      return offset;
  }
  return offset;
}

namespace {

ImageRGB blur_motion(const ImageRGB& img, Rng& rng) {
  // 9-tap line kernel at a random angle, bilinear taps.
  const double angle = rng.uniform(0.0, kPi);
  const double dx = std::cos(angle), dy = std::sin(angle);
  ImageRGB out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double r = 0.0, g = 0.0, b = 0.0;
      for (int t = -4; t <= 4; ++t) {
        const double sx = x + 0.5 + t * dx;
        const double sy = y + 0.5 + t * dy;
        r += sample_bilinear(img.r, sx, sy);
        g += sample_bilinear(img.g, sx, sy);
        b += sample_bilinear(img.b, sx, sy);
      }
      out.r(y, x) = static_cast<float>(r / 9.0);
      out.g(y, x) = static_cast<float>(g / 9.0);
      out.b(y, x) = static_cast<float>(b / 9.0);
    }
  }
  return out;
}

ImageRGB blur_radial(const ImageRGB& img) {
  // 5-step zoom average about the patch centre.
  const double cx = img.width() / 2.0, cy = img.height() / 2.0;
  ImageRGB out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double r = 0.0, g = 0.0, b = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double s = 1.0 - 0.01 * k;
        const double sx = cx + (x + 0.5 - cx) * s;
        const double sy = cy + (y + 0.5 - cy) * s;
        r += sample_bilinear(img.r, sx, sy);
        g += sample_bilinear(img.g, sx, sy);
        b += sample_bilinear(img.b, sx, sy);
      }
      out.r(y, x) = static_cast<float>(r / 5.0);
      out.g(y, x) = static_cast<float>(g / 5.0);
      out.b(y, x) = static_cast<float>(b / 5.0);
    }
  }
  return out;
}

void add_noise(ImageRGB& img, double sigma, Rng& rng) {
  for (int c = 0; c < 3; ++c) {
    Plane& p = img.channel(c);
    for (int y = 0; y < p.rows(); ++y)
      for (int x = 0; x < p.cols(); ++x)
        p(y, x) = std::clamp(
            p(y, x) + static_cast<float>(sigma * rng.gaussian()), 0.0f, 1.0f);
  }
}

void color_jitter(ImageRGB& img, double brightness, double contrast,
                  double saturation) {
  Plane luma = 0.299f * img.r + 0.587f * img.g + 0.114f * img.b;
  const float mean_luma = luma.mean();
  for (int c = 0; c < 3; ++c) {
    Plane& p = img.channel(c);
    p = p * static_cast<float>(brightness);
    p = mean_luma * static_cast<float>(brightness) +
        (p - mean_luma * static_cast<float>(brightness)) * static_cast<float>(contrast);
  }
  luma = 0.299f * img.r + 0.587f * img.g + 0.114f * img.b;
  for (int c = 0; c < 3; ++c) {
    Plane& p = img.channel(c);
    p = luma + (p - luma) * static_cast<float>(saturation);
    p = p.cwiseMin(1.0f).cwiseMax(0.0f);
  }
}

ImageRGB resize_square(const ImageRGB& img, int from_x, int from_y, int from_side,
                       int to_side) {
  CropState crop;
  crop.center = {from_x + from_side / 2.0, from_y + from_side / 2.0};
  crop.diameter = from_side;
  crop.patch_side = to_side;
  return crop_resize(img, crop);
}

void paste_occluder(ImageRGB& img, const ImageRGB& occ, const Plane& mask,
                    int off_x, int off_y) {
  for (int y = 0; y < occ.height(); ++y) {
    const int ty = y + off_y;
    if (ty < 0 || ty >= img.height()) continue;
    for (int x = 0; x < occ.width(); ++x) {
      const int tx = x + off_x;
      if (tx < 0 || tx >= img.width()) continue;
      if (mask(y, x) <= 0.0f) continue;
      img.r(ty, tx) = occ.r(y, x);
      img.g(ty, tx) = occ.g(y, x);
      img.b(ty, tx) = occ.b(y, x);
    }
  }
}

}  // namespace

OccluderPool OccluderPool::render(const Mesh& mesh, int count, std::uint64_t seed,
                                  int patch_side) {
  OccluderPool pool;
  pool.rgb.reserve(count);
  pool.masks.reserve(count);
  CameraIntrinsics K;
  K.width = patch_side;
  K.height = patch_side;
  K.fx = K.fy = patch_side * 2.0;
  K.cx = K.cy = patch_side / 2.0;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const Pose pose = sample_gt_pose(mesh, K, rng, 0.8, 2.5);
    AugmentConfig acfg;
    const LightConfig lights = sample_lights(acfg, pose.translation, rng);
    const MaterialConfig material = sample_material(acfg, rng);
    RenderPatch patch = rasterize(mesh, pose, K, lights, material);
    pool.rgb.push_back(std::move(patch.rgb));
    pool.masks.push_back(std::move(patch.mask));
  }
  return pool;
}

ImageRGB augment_patch(const ImageRGB& patch, const AugmentConfig& cfg,
                       const OccluderPool& occluders, Rng& rng, AugmentMeta* meta) {
  AugmentMeta local;
  const int n = patch.width();

  // Blur split, then additive channel noise.
  local.motion_blur = rng.bernoulli(cfg.motion_blur_fraction);
  ImageRGB out = local.motion_blur ? blur_motion(patch, rng) : blur_radial(patch);
  add_noise(out, cfg.noise_sigma, rng);

  local.brightness = rng.uniform(cfg.jitter_min, cfg.jitter_max);
  local.contrast = rng.uniform(cfg.jitter_min, cfg.jitter_max);
  local.saturation = rng.uniform(cfg.jitter_min, cfg.jitter_max);
  color_jitter(out, local.brightness, local.contrast, local.saturation);

  // Crop to [96,128], squash to [32,64], back to full resolution.
  local.resize_crop_side =
      static_cast<int>(rng.uniform_int(cfg.resize_crop_min, cfg.resize_crop_max));
  local.resize_down_side =
      static_cast<int>(rng.uniform_int(cfg.resize_down_min, cfg.resize_down_max));
  const int max_off = n - local.resize_crop_side;
  const int ox = static_cast<int>(rng.uniform_int(0, max_off));
  const int oy = static_cast<int>(rng.uniform_int(0, max_off));
  ImageRGB small = resize_square(out, ox, oy, local.resize_crop_side,
                                 local.resize_down_side);
  out = resize_square(small, 0, 0, local.resize_down_side, n);

  // Occluders: none half of the time, otherwise 1..4 with equal chance.
  if (!rng.bernoulli(cfg.no_occluder_fraction))
    local.occluder_count = static_cast<int>(rng.uniform_int(1, 4));
  for (int k = 0; k < local.occluder_count && !occluders.empty(); ++k) {
    const std::size_t pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(occluders.rgb.size()) - 1));
    ImageRGB occ = occluders.rgb[pick];
    // Occluders run through the same blur / jitter scheme.
    occ = rng.bernoulli(cfg.motion_blur_fraction) ? blur_motion(occ, rng)
                                                  : blur_radial(occ);
    color_jitter(occ, rng.uniform(cfg.jitter_min, cfg.jitter_max),
                 rng.uniform(cfg.jitter_min, cfg.jitter_max),
                 rng.uniform(cfg.jitter_min, cfg.jitter_max));
    const int off_x = static_cast<int>(rng.uniform_int(-n / 2, n / 2));
    const int off_y = static_cast<int>(rng.uniform_int(-n / 2, n / 2));
    paste_occluder(out, occ, occluders.masks[pick], off_x, off_y);
  }

  // Masked-region cutout.
  local.masked_crop = rng.bernoulli(cfg.masked_crop_fraction);
  if (local.masked_crop) {
    const int side =
        static_cast<int>(rng.uniform_int(cfg.masked_crop_min, cfg.masked_crop_max));
    const int mx = static_cast<int>(rng.uniform_int(0, n - side));
    const int my = static_cast<int>(rng.uniform_int(0, n - side));
    for (int c = 0; c < 3; ++c)
      out.channel(c).block(my, mx, side, side).setZero();
  }

  if (meta) *meta = local;
  return out;
}

BackgroundPool::BackgroundPool(const std::string& directory) {
  if (directory.empty()) return;
  if (!fs::is_directory(directory))
    throw Error(ErrorCode::empty_pool, "background directory missing: " + directory);
  std::vector<std::string> candidates;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.is_regular_file()) candidates.push_back(entry.path().string());
  std::sort(candidates.begin(), candidates.end());
  for (const auto& path : candidates) {
    try {
      read_png_rgb(path);
      paths_.push_back(path);
    } catch (const Error&) {
      std::cerr << "warning: skipping non-image file " << path << "\n";
    }
  }
  if (paths_.empty())
    throw Error(ErrorCode::empty_pool, "no readable images in " + directory);
}

ImageRGB BackgroundPool::sample(Rng& rng, int width, int height) const {
  if (paths_.empty()) return synthesize_background(rng, width, height);
  const std::size_t pick = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(paths_.size()) - 1));
  ImageRGB img;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(paths_[pick]);
    if (it == cache_.end())
      it = cache_.emplace(paths_[pick], read_png_rgb(paths_[pick])).first;
    img = it->second;
  }
  // Center-crop to the target aspect, then resample.
  const double scale = std::max(static_cast<double>(width) / img.width(),
                                static_cast<double>(height) / img.height());
  const double src_w = width / scale, src_h = height / scale;
  const double x0 = (img.width() - src_w) / 2.0, y0 = (img.height() - src_h) / 2.0;
  ImageRGB out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double sx = x0 + (x + 0.5) * src_w / width;
      const double sy = y0 + (y + 0.5) * src_h / height;
      out.r(y, x) = sample_bilinear(img.r, sx, sy);
      out.g(y, x) = sample_bilinear(img.g, sx, sy);
      out.b(y, x) = sample_bilinear(img.b, sx, sy);
    }
  return out;
}

ImageRGB synthesize_background(Rng& rng, int width, int height) {
  ImageRGB img(height, width);
  // Two-corner gradient.
  Vec3 c0(rng.uniform(), rng.uniform(), rng.uniform());
  Vec3 c1(rng.uniform(), rng.uniform(), rng.uniform());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = (static_cast<double>(x) / width +
                        static_cast<double>(y) / height) / 2.0;
      const Vec3 c = c0 + t * (c1 - c0);
      img.r(y, x) = static_cast<float>(c.x());
      img.g(y, x) = static_cast<float>(c.y());
      img.b(y, x) = static_cast<float>(c.z());
    }
  // Random rectangles and disks for structure.
  const int shapes = static_cast<int>(rng.uniform_int(6, 14));
  for (int s = 0; s < shapes; ++s) {
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    const bool disk = rng.bernoulli(0.5);
    const int cx = static_cast<int>(rng.uniform_int(0, width - 1));
    const int cy = static_cast<int>(rng.uniform_int(0, height - 1));
    const int extent = static_cast<int>(rng.uniform_int(10, std::max(11, width / 4)));
    for (int y = std::max(0, cy - extent); y < std::min(height, cy + extent); ++y)
      for (int x = std::max(0, cx - extent); x < std::min(width, cx + extent); ++x) {
        if (disk && (x - cx) * (x - cx) + (y - cy) * (y - cy) > extent * extent)
          continue;
        img.r(y, x) = static_cast<float>(c.x());
        img.g(y, x) = static_cast<float>(c.y());
        img.b(y, x) = static_cast<float>(c.z());
      }
  }
  // Grain.
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const float noise = static_cast<float>(0.03 * rng.gaussian());
      img.r(y, x) = std::clamp(img.r(y, x) + noise, 0.0f, 1.0f);
      img.g(y, x) = std::clamp(img.g(y, x) + noise, 0.0f, 1.0f);
      img.b(y, x) = std::clamp(img.b(y, x) + noise, 0.0f, 1.0f);
    }
  return img;
}

LightConfig sample_lights(const AugmentConfig& cfg, const Vec3& object_center,
                          Rng& rng) {
  LightConfig lights;
  lights.ambient = 0.2;
  // One palette colour shared by all lights, brightness mildly enhanced.
  const Vec3 palette =
      kLightPalette[static_cast<std::size_t>(rng.uniform_int(0, 6))];
  const double enhance = rng.uniform(1.0, 1.3);
  const Vec3 color = (palette * enhance).cwiseMin(1.0);
  for (int i = 0; i < cfg.light_count; ++i) {
    PointLight light;
    Vec3 dir(rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (dir.norm() < 1e-9) dir = Vec3(0, 0, -1);
    dir.normalize();
    light.position = object_center + dir * rng.uniform(0.3, 1.5);
    light.intensity = rng.uniform(cfg.light_intensity_min, cfg.light_intensity_max);
    light.color = color;
    lights.lights.push_back(light);
  }
  return lights;
}

MaterialConfig sample_material(const AugmentConfig& cfg, Rng& rng) {
  MaterialConfig material;
  if (rng.bernoulli(cfg.unlit_fraction)) {
    material.mode = MaterialConfig::Mode::unlit;
    return material;
  }
  material.mode = MaterialConfig::Mode::standard;
  material.metallic = rng.uniform(0.0, cfg.metallic_max);
  material.smoothness = rng.uniform(0.0, cfg.smoothness_max);
  return material;
}

Pose sample_gt_pose(const Mesh& mesh, const CameraIntrinsics& K, Rng& rng,
                    double depth_min, double depth_max) {
  double radius = 0.0;
  for (const Vec3& v : mesh.vertices) radius = std::max(radius, v.norm());

  for (int attempt = 0; attempt < 256; ++attempt) {
    Quat q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
    if (q.norm() < 1e-9) continue;
    q.normalize();
    const double z = rng.uniform(depth_min, depth_max);
    // Conservative projected radius bound keeps the box inside the frame.
    const double proj_r = std::max(K.fx, K.fy) * radius / z * 1.1;
    const double margin_u = proj_r + 2.0;
    const double margin_v = proj_r + 2.0;
    if (margin_u * 2 >= K.width || margin_v * 2 >= K.height) continue;
    const double u = rng.uniform(margin_u, K.width - margin_u);
    const double v = rng.uniform(margin_v, K.height - margin_v);
    Pose pose;
    pose.rotation = q;
    pose.translation = {(u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z};
    return pose;
  }
  throw Error(ErrorCode::bad_config,
              "could not place the object inside the frame; check intrinsics");
}

namespace {

ImageRGB composite(const ImageRGB& background, const RenderPatch& render) {
  ImageRGB out = background;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (render.mask(y, x) > 0.0f) {
        out.r(y, x) = render.rgb.r(y, x);
        out.g(y, x) = render.rgb.g(y, x);
        out.b(y, x) = render.rgb.b(y, x);
      }
  return out;
}

}  // namespace

Sample generate_sample(const Mesh& mesh, const CameraIntrinsics& K,
                       const DatagenConfig& cfg, SeedGroup group,
                       const BackgroundPool& backgrounds,
                       const OccluderPool& occluders, Rng& rng) {
  Sample sample;
  sample.group = group;
  sample.gt = sample_gt_pose(mesh, K, rng, cfg.depth_min, cfg.depth_max);

  // Augmented ground-truth appearance over a background.
  const LightConfig lights = sample_lights(cfg.augment, sample.gt.translation, rng);
  const MaterialConfig material = sample_material(cfg.augment, rng);
  const RenderPatch gt_render = rasterize(mesh, sample.gt, K, lights, material);
  const ImageRGB background = backgrounds.sample(rng, K.width, K.height);
  const ImageRGB observed = composite(background, gt_render);

  // Hypothesis = ground truth displaced by the sampled seed.
  sample.offset = sample_seed_offset(group, rng);
  sample.hypothesis = apply_offset(sample.gt, sample.offset, cfg.steps, K, rng);

  const CropState crop = compute_crop(sample.hypothesis, K, mesh.vertices,
                                      cfg.crop_margin, cfg.patch_side);
  const ImageRGB obs_patch = crop_resize(observed, crop);
  const ImageRGB obs_augmented =
      augment_patch(obs_patch, cfg.augment, occluders, rng, &sample.augment);

  // Clean hypothesis rendering under the canonical rig.
  const RenderPatch hyp_render =
      rasterize(mesh, sample.hypothesis, K, LightConfig::canonical(), MaterialConfig{});
  sample.stack = assemble_patch_stack(observed, hyp_render, sample.hypothesis, crop);
  sample.stack.channels[0] = obs_augmented.r;
  sample.stack.channels[1] = obs_augmented.g;
  sample.stack.channels[2] = obs_augmented.b;
  sample.depth_m = crop_resize_plane(hyp_render.depth, crop, /*nearest=*/true);

  sample.label =
      oracle_decide(sample.hypothesis, sample.gt, crop, cfg.steps, K).index;
  return sample;
}

Scene make_clean_scene(const Mesh& mesh, const CameraIntrinsics& K,
                       const Pose& gt, const BackgroundPool& backgrounds,
                       Rng& rng) {
  const RenderPatch render =
      rasterize(mesh, gt, K, LightConfig::canonical(), MaterialConfig{});
  Scene scene;
  scene.observed = composite(backgrounds.sample(rng, K.width, K.height), render);
  scene.mesh = &mesh;
  scene.K = K;
  scene.gt = gt;
  return scene;
}

namespace {

std::string sample_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

}  // namespace

DatasetManifest generate_dataset(const Mesh& mesh, const CameraIntrinsics& K,
                                 const DatagenConfig& cfg,
                                 const std::map<SeedGroup, int>& counts,
                                 const std::string& output_dir,
                                 const std::string& background_dir,
                                 int occluder_pool_size, int workers,
                                 std::uint64_t base_seed) {
  fs::create_directories(output_dir);
  const BackgroundPool backgrounds(background_dir);
  const OccluderPool occluders =
      OccluderPool::render(mesh, occluder_pool_size, base_seed ^ 0x0cc1ULL,
                           cfg.patch_side);

  std::vector<SeedGroup> plan;
  for (SeedGroup g : kAllSeedGroups) {
    auto it = counts.find(g);
    const int n = it == counts.end() ? 0 : it->second;
    for (int i = 0; i < n; ++i) plan.push_back(g);
  }

  DatasetManifest manifest;
  manifest.base_seed = base_seed;
  manifest.patch_side = cfg.patch_side;
  manifest.intrinsics = K;
  manifest.entries.resize(plan.size());

  parallel_for(plan.size(), workers, [&](std::size_t i) {
    Rng rng = Rng::stream(base_seed, i);
    const Sample sample =
        generate_sample(mesh, K, cfg, plan[i], backgrounds, occluders, rng);
    const std::string id = sample_id(static_cast<int>(i));
    const std::string stem = (fs::path(output_dir) / id).string();

    ImageRGB obs(cfg.patch_side, cfg.patch_side), rgb(cfg.patch_side, cfg.patch_side);
    for (int c = 0; c < 3; ++c) {
      obs.channel(c) = sample.stack.channels[c];
      rgb.channel(c) = sample.stack.channels[3 + c];
    }
    write_png_rgb(stem + "_obs.png", obs);
    write_png_rgb(stem + "_rgb.png", rgb);
    write_png_depth_mm(stem + "_depth.png", sample.depth_m);
    write_png_gray(stem + "_mask.png", sample.stack.mask());
    write_sample_json(stem + ".json", id, sample);

    DatasetManifest::Entry entry;
    entry.id = id;
    entry.group = sample.group;
    entry.seed = i;
    entry.label = sample.label;
    entry.gt = sample.gt;
    entry.hypothesis = sample.hypothesis;
    manifest.entries[i] = entry;
  });

  for (const auto& e : manifest.entries)
    manifest.group_counts[seed_group_name(e.group)] += 1;
  write_manifest_json((fs::path(output_dir) / "manifest.json").string(), manifest);
  return manifest;
}

DatasetManifest load_manifest(const std::string& dataset_dir) {
  return read_manifest_json((fs::path(dataset_dir) / "manifest.json").string());
}

void TrainingPool::load(const std::string& dataset_dir) {
  const DatasetManifest manifest = load_manifest(dataset_dir);
  patch_side_ = manifest.patch_side;
  records_.clear();
  records_.resize(manifest.entries.size());
  const int n = patch_side_;

  parallel_for(manifest.entries.size(), default_workers(), [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const std::string stem = (fs::path(dataset_dir) / entry.id).string();
    Record rec;
    rec.label = entry.label;
    rec.inv_depth = static_cast<float>(1.0 / entry.hypothesis.depth());

    const ImageRGB obs = read_png_rgb(stem + "_obs.png");
    const ImageRGB rgb = read_png_rgb(stem + "_rgb.png");
    const Plane depth = read_png_depth_mm(stem + "_depth.png");
    rec.obs.resize(static_cast<std::size_t>(3) * n * n);
    rec.rgb.resize(static_cast<std::size_t>(3) * n * n);
    rec.depth_mm.resize(static_cast<std::size_t>(n) * n);
    rec.mask.resize(static_cast<std::size_t>(n) * n);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const std::size_t k = static_cast<std::size_t>(c) * n * n + y * n + x;
          rec.obs[k] = static_cast<std::uint8_t>(
              std::clamp(obs.channel(c)(y, x), 0.0f, 1.0f) * 255.0f + 0.5f);
          rec.rgb[k] = static_cast<std::uint8_t>(
              std::clamp(rgb.channel(c)(y, x), 0.0f, 1.0f) * 255.0f + 0.5f);
        }
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * n + x;
        rec.depth_mm[k] =
            static_cast<std::uint16_t>(depth(y, x) * 1000.0f + 0.5f);
        rec.mask[k] = rec.depth_mm[k] > 0 ? 1 : 0;
      }
    records_[i] = std::move(rec);
  });
}

void TrainingPool::fill_input(std::size_t i, Eigen::Ref<MatX<float>> input,
                              int slot) const {
  const Record& rec = records_[i];
  const int n = patch_side_;
  const int base = slot * n * n;
  for (int p = 0; p < n * n; ++p) {
    for (int c = 0; c < 3; ++c) {
      input(c, base + p) = rec.obs[static_cast<std::size_t>(c) * n * n + p] / 255.0f;
      input(3 + c, base + p) =
          rec.rgb[static_cast<std::size_t>(c) * n * n + p] / 255.0f;
    }
    input(6, base + p) = rec.depth_mm[p] / 1000.0f * rec.inv_depth;
    input(7, base + p) = static_cast<float>(rec.mask[p]);
  }
}

PatchStack TrainingPool::stack(std::size_t i) const {
  const Record& rec = records_[i];
  const int n = patch_side_;
  PatchStack stack;
  stack.side = n;
  for (int c = 0; c < 8; ++c) stack.channels[c].setZero(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * n + x;
      for (int c = 0; c < 3; ++c) {
        stack.channels[c](y, x) =
            rec.obs[static_cast<std::size_t>(c) * n * n + p] / 255.0f;
        stack.channels[3 + c](y, x) =
            rec.rgb[static_cast<std::size_t>(c) * n * n + p] / 255.0f;
      }
      stack.channels[6](y, x) = rec.depth_mm[p] / 1000.0f * rec.inv_depth;
      stack.channels[7](y, x) = static_cast<float>(rec.mask[p]);
    }
  return stack;
}

}  // namespace poseact
