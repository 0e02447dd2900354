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

#include "poseact/detection.hpp"

#include <algorithm>
#include <cmath>

#include "poseact/threading.hpp"

namespace poseact {

SeedField seed_translation_field(const Scene& scene, Policy& policy,
                                 double grid_spacing, const Pose& probe_pose,
                                 const StepSizes& steps, Rng& /*rng*/,
                                 int workers) {
  if (grid_spacing <= 0.0)
    throw Error(ErrorCode::bad_config, "grid spacing must be positive");
  SeedField field;
  field.spacing = grid_spacing;
  field.cols = std::max(2, static_cast<int>(scene.K.width / grid_spacing));
  field.rows = std::max(2, static_cast<int>(scene.K.height / grid_spacing));
  // Center the grid on the image.
  field.origin = {(scene.K.width - (field.cols - 1) * grid_spacing) / 2.0,
                  (scene.K.height - (field.rows - 1) * grid_spacing) / 2.0};
  field.vectors.assign(static_cast<std::size_t>(field.rows) * field.cols,
                       Vec2::Zero());
  field.valid.assign(field.vectors.size(), 0);

  const double z = probe_pose.depth();
  parallel_for(field.vectors.size(), workers, [&](std::size_t i) {
    const int row = static_cast<int>(i) / field.cols;
    const int col = static_cast<int>(i) % field.cols;
    const Vec2 center = field.node_center(row, col);

    Pose probe = probe_pose;
    probe.translation = {(center.x() - scene.K.cx) * z / scene.K.fx,
                         (center.y() - scene.K.cy) * z / scene.K.fy, z};

    CropState crop;
    PatchStack stack;
    DecisionContext ctx{probe, crop, steps, scene.K, nullptr,
                        scene.gt ? &*scene.gt : nullptr};
    if (policy.needs_patches()) {
      crop = compute_crop(probe, scene.K, scene.mesh->vertices);
      stack = render_patch_stack(scene.observed, *scene.mesh, probe, scene.K, crop);
      ctx.patches = &stack;
    }
    const ActionVector action = policy.decide(ctx);

    if (!action.is_stop() && action.axis() <= 1) {
      const double dir = action.direction();
      field.vectors[i] = action.axis() == 0 ? Vec2(dir, 0.0) : Vec2(0.0, dir);
      field.valid[i] = 1;
    }
  });
  return field;
}

namespace {

Eigen::ArrayXXd gaussian_smooth(const Eigen::ArrayXXd& grid, double sigma_cells) {
  if (sigma_cells <= 0.0) return grid;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
  Eigen::ArrayXd kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    kernel(k + radius) = std::exp(-0.5 * (k / sigma_cells) * (k / sigma_cells));

  const int rows = static_cast<int>(grid.rows());
  const int cols = static_cast<int>(grid.cols());
  Eigen::ArrayXXd tmp(rows, cols), out(rows, cols);
  // Separable passes, kernel renormalized where it overlaps the boundary.
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0, wsum = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = c + k;
        if (cc < 0 || cc >= cols) continue;
        acc += kernel(k + radius) * grid(r, cc);
        wsum += kernel(k + radius);
      }
      tmp(r, c) = acc / wsum;
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0, wsum = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = r + k;
        if (rr < 0 || rr >= rows) continue;
        acc += kernel(k + radius) * tmp(rr, c);
        wsum += kernel(k + radius);
      }
      out(r, c) = acc / wsum;
    }
  return out;
}

}  // namespace

DivergenceMap divergence(const SeedField& field, double smoothing_radius_px) {
  int valid_count = 0;
  for (std::uint8_t v : field.valid) valid_count += v;
  if (valid_count < 4)
    throw Error(ErrorCode::too_few_seeds,
                "divergence needs at least 4 valid seeds, got " +
                    std::to_string(valid_count));

  const int rows = field.rows, cols = field.cols;
  Eigen::ArrayXXd vx = Eigen::ArrayXXd::Zero(rows, cols);
  Eigen::ArrayXXd vy = Eigen::ArrayXXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = field.node_index(r, c);
      if (!field.valid[i]) continue;
      vx(r, c) = field.vectors[i].x();
      vy(r, c) = field.vectors[i].y();
    }

  const double sigma_cells = smoothing_radius_px / field.spacing;
  vx = gaussian_smooth(vx, sigma_cells);
  vy = gaussian_smooth(vy, sigma_cells);

  DivergenceMap map;
  map.origin = field.origin;
  map.spacing = field.spacing;
  map.w.setZero(rows, cols);
  const double h = field.spacing;
  auto dx = [&](int r, int c) {
    if (c == 0) return (vx(r, 1) - vx(r, 0)) / h;
    if (c == cols - 1) return (vx(r, c) - vx(r, c - 1)) / h;
    return (vx(r, c + 1) - vx(r, c - 1)) / (2.0 * h);
  };
  auto dy = [&](int r, int c) {
    if (r == 0) return (vy(1, c) - vy(0, c)) / h;
    if (r == rows - 1) return (vy(r, c) - vy(r - 1, c)) / h;
    return (vy(r + 1, c) - vy(r - 1, c)) / (2.0 * h);
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) map.w(r, c) = dx(r, c) + dy(r, c);
  return map;
}

namespace {

// Parabolic sub-cell refinement along one axis; offset clamped to half a cell.
double parabolic_offset(double left, double center, double right) {
  const double denom = left - 2.0 * center + right;
  if (std::abs(denom) < 1e-12) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

// Distance from the peak to the half-maximum level along one direction,
// in cells, linearly interpolated.
double half_extent(const Eigen::ArrayXXd& score, int r, int c, int dr, int dc,
                   double level) {
  const int rows = static_cast<int>(score.rows());
  const int cols = static_cast<int>(score.cols());
  double prev = score(r, c);
  for (int k = 1;; ++k) {
    const int rr = r + k * dr, cc = c + k * dc;
    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols)
      return static_cast<double>(k - 1) + 0.5;  // lobe runs off the grid
    const double cur = score(rr, cc);
    if (cur < level) {
      const double t = prev > cur ? (prev - level) / (prev - cur) : 0.5;
      return static_cast<double>(k - 1) + t;
    }
    prev = cur;
  }
}

}  // namespace

CropState detect_center_and_scale(const DivergenceMap& map, const SeedField& field,
                                  const CameraIntrinsics& K, int patch_side) {
  // Inward flux means a negative-divergence sink; score the negation.
  const Eigen::ArrayXXd score = -map.w;
  const int rows = static_cast<int>(score.rows());
  const int cols = static_cast<int>(score.cols());

  int best_r = 0, best_c = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (score(r, c) > best) {  // strict: lowest raster order wins ties
        best = score(r, c);
        best_r = r;
        best_c = c;
      }

  const double mean = score.mean();
  const double sd = std::sqrt((score - mean).square().mean());
  if (!(best > mean + 3.0 * sd))
    throw Error(ErrorCode::flat_map, "no distinct divergence extremum");

  double off_c = 0.0, off_r = 0.0;
  if (best_c > 0 && best_c < cols - 1)
    off_c = parabolic_offset(score(best_r, best_c - 1), best,
                             score(best_r, best_c + 1));
  if (best_r > 0 && best_r < rows - 1)
    off_r = parabolic_offset(score(best_r - 1, best_c), best,
                             score(best_r + 1, best_c));

  const double level = 0.5 * best;
  const double ext_c = half_extent(score, best_r, best_c, 0, -1, level) +
                       half_extent(score, best_r, best_c, 0, 1, level);
  const double ext_r = half_extent(score, best_r, best_c, -1, 0, level) +
                       half_extent(score, best_r, best_c, 1, 0, level);

  CropState crop;
  crop.center = map.origin + Vec2((best_c + off_c) * map.spacing,
                                  (best_r + off_r) * map.spacing);
  const double image_side = std::min(K.width, K.height);
  crop.diameter =
      std::clamp(std::max(ext_c, ext_r) * map.spacing, 16.0, image_side);
  crop.patch_side = patch_side;
  (void)field;
  return crop;
}

std::vector<Quat> rotation_grid(int count) {
  // Super-Fibonacci spiral (Alexa 2022): deterministic low-discrepancy
  // covering of SO(3).
  const double phi = std::sqrt(2.0);
  const double psi = 1.533751168755204288118041;
  std::vector<Quat> grid;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double s = i + 0.5;
    const double t = s / count;
    const double d = 2.0 * kPi * s;
    const double r = std::sqrt(t);
    const double R = std::sqrt(1.0 - t);
    const double alpha = d / phi;
    const double beta = d / psi;
    Quat q(R * std::cos(beta), r * std::sin(alpha), r * std::cos(alpha),
           R * std::sin(beta));
    grid.push_back(q.normalized());
  }
  return grid;
}

Vec3 translation_from_crop(const CropState& crop, const CameraIntrinsics& K,
                           double model_diameter_m, double crop_margin) {
  const double projected = crop.diameter / crop_margin;  // pre-margin pixels
  const double z = std::max(K.fx, K.fy) * model_diameter_m / projected;
  return {(crop.center.x() - K.cx) * z / K.fx,
          (crop.center.y() - K.cy) * z / K.fy, z};
}

Vec3 translation_for_rotation(const CropState& crop, const CameraIntrinsics& K,
                              const Mesh& mesh, const Quat& rotation,
                              double crop_margin) {
  const double target = crop.diameter / crop_margin;  // pre-margin pixels

  // Orthographic first guess from the rotated in-plane extents.
  std::vector<Vec3> rotated(mesh.vertices.size());
  double lo_x = 1e18, hi_x = -1e18, lo_y = 1e18, hi_y = -1e18;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    rotated[i] = rotation * mesh.vertices[i];
    lo_x = std::min(lo_x, rotated[i].x());
    hi_x = std::max(hi_x, rotated[i].x());
    lo_y = std::min(lo_y, rotated[i].y());
    hi_y = std::max(hi_y, rotated[i].y());
  }
  const double extent =
      std::max(K.fx * (hi_x - lo_x), K.fy * (hi_y - lo_y));
  double z = std::max(extent / target, 1e-3);

  auto place = [&](double depth) {
    return Vec3{(crop.center.x() - K.cx) * depth / K.fx,
                (crop.center.y() - K.cy) * depth / K.fy, depth};
  };

  // Refine against the exact perspective box.
  for (int iter = 0; iter < 2; ++iter) {
    const Vec3 t = place(z);
    double lo_u = 1e18, hi_u = -1e18, lo_v = 1e18, hi_v = -1e18;
    bool ok = true;
    for (const Vec3& p : rotated) {
      const Vec3 cam = p + t;
      if (cam.z() <= 1e-6) {
        ok = false;
        break;
      }
      const double u = K.fx * cam.x() / cam.z();
      const double v = K.fy * cam.y() / cam.z();
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
    if (!ok) break;
    const double measured = std::max(hi_u - lo_u, hi_v - lo_v);
    z *= measured / target;
  }
  return place(z);
}

std::vector<int> rotation_step_counts(const Scene& scene, Policy& policy,
                                      const CropState& crop,
                                      const std::vector<Quat>& rotations,
                                      const LoopConfig& cfg, const StepSizes& steps,
                                      int workers) {
  if (rotations.empty())
    throw Error(ErrorCode::bad_config, "rotation grid is empty");
  std::vector<int> counts(rotations.size(), 0);
  parallel_for(rotations.size(), workers, [&](std::size_t i) {
    Pose init;
    init.rotation = rotations[i];
    init.translation =
        translation_for_rotation(crop, scene.K, *scene.mesh, rotations[i]);
    const EpisodeResult episode = run_episode(policy, scene, init, cfg, steps);
    counts[i] = static_cast<int>(episode.trace.length());
  });
  return counts;
}

Pose init_rotation(const Scene& scene, Policy& policy, const CropState& crop,
                   const std::vector<Quat>& rotations, const LoopConfig& cfg,
                   const StepSizes& steps, int workers) {
  if (rotations.empty())
    throw Error(ErrorCode::bad_config, "rotation grid is empty");

  std::vector<int> counts(rotations.size(), 0);
  std::vector<Pose> finals(rotations.size());
  parallel_for(rotations.size(), workers, [&](std::size_t i) {
    Pose init;
    init.rotation = rotations[i];
    init.translation =
        translation_for_rotation(crop, scene.K, *scene.mesh, rotations[i]);
    const EpisodeResult episode = run_episode(policy, scene, init, cfg, steps);
    counts[i] = static_cast<int>(episode.trace.length());
    finals[i] = episode.final_pose;
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < rotations.size(); ++i)
    if (counts[i] < counts[best]) best = i;  // strict: lowest index wins ties
  return finals[best];
}

DetectResult detect_pose(const Scene& scene, Policy& policy,
                         const DetectConfig& cfg, const StepSizes& steps,
                         const Pose& probe_pose) {
  DetectResult result;
  Rng rng(0);
  result.field = seed_translation_field(scene, policy, cfg.grid_spacing,
                                        probe_pose, steps, rng, cfg.workers);
  result.map =
      divergence(result.field, cfg.smoothing_factor * cfg.grid_spacing);
  result.crop = detect_center_and_scale(result.map, result.field, scene.K);

  LoopConfig loop;
  loop.max_steps = cfg.rotation_cap;
  result.pose = init_rotation(scene, policy, result.crop,
                              rotation_grid(cfg.rotation_count), loop, steps,
                              cfg.workers);
  return result;
}

}  // namespace poseact
