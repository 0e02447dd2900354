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

#include <vector>

#include "poseact/policy.hpp"

namespace poseact {

/// First-step translation decisions probed over an image grid. Vectors are
/// unit-length in image coordinates (x right, y down) and point in the
/// direction the probed hypothesis was asked to move; seeds whose first
/// decision was a stop, depth or rotation action are flagged invalid.
struct SeedField {
  Vec2 origin = Vec2::Zero();  // pixel position of grid node (0, 0)
  double spacing = 0.0;        // pixels between nodes
  int rows = 0, cols = 0;
  std::vector<Vec2> vectors;         // rows * cols, row-major
  std::vector<std::uint8_t> valid;   // rows * cols

  Vec2 node_center(int row, int col) const {
    return origin + Vec2(col * spacing, row * spacing);
  }
  int node_index(int row, int col) const { return row * cols + col; }
};

/// Scalar divergence field over the seed grid.
struct DivergenceMap {
  Eigen::ArrayXXd w;  // (rows, cols)
  Vec2 origin = Vec2::Zero();
  double spacing = 0.0;
};

/// Plants the probe pose at every grid node (adjusting tx/ty only, keeping
/// the probe depth and rotation), runs exactly one decision per node and
/// records the normalized in-plane component of the chosen action.
SeedField seed_translation_field(const Scene& scene, Policy& policy,
                                 double grid_spacing, const Pose& probe_pose,
                                 const StepSizes& steps, Rng& rng,
                                 int workers = 1);

/// Gaussian-smooths both vector components (kernel renormalized at the grid
/// boundary), then applies central-difference divergence; one-sided
/// differences on the border. Requires at least 4 valid seeds.
DivergenceMap divergence(const SeedField& field, double smoothing_radius_px);

/// The object centre is the extremum of -W (an inward-pointing field has
/// negative divergence at its sink); the crop diameter is the full width at
/// half maximum of the extremum lobe, clamped to [16 px, image side]. Throws
/// flat_map when no distinct extremum exists (max < mean + 3 sigma). Ties
/// resolve to the lowest raster-order cell.
CropState detect_center_and_scale(const DivergenceMap& map, const SeedField& field,
                                  const CameraIntrinsics& K, int patch_side = 128);

/// Deterministic low-discrepancy covering of rotation space
/// (super-Fibonacci spiral).
std::vector<Quat> rotation_grid(int count = 60);

/// Runs a capped episode from every grid rotation at the translation implied
/// by the detected crop and returns the final pose of the run that needed
/// the fewest steps (ties: lowest grid index).
Pose init_rotation(const Scene& scene, Policy& policy, const CropState& crop,
                   const std::vector<Quat>& rotations, const LoopConfig& cfg,
                   const StepSizes& steps, int workers = 1);

/// Step counts of the init_rotation runs, exposed for basin analysis.
std::vector<int> rotation_step_counts(const Scene& scene, Policy& policy,
                                      const CropState& crop,
                                      const std::vector<Quat>& rotations,
                                      const LoopConfig& cfg, const StepSizes& steps,
                                      int workers = 1);

struct DetectConfig {
  double grid_spacing = 16.0;       // pixels
  double smoothing_factor = 1.5;    // sigma = factor * grid_spacing
  double probe_depth = 1.0;         // meters
  int rotation_count = 60;
  int rotation_cap = 40;            // episode cap per rotation seed
  int workers = 1;
};

struct DetectResult {
  CropState crop;
  SeedField field;
  DivergenceMap map;
  Pose pose;
};

/// Full pipeline: field -> divergence -> centre/scale -> rotation search.
DetectResult detect_pose(const Scene& scene, Policy& policy,
                         const DetectConfig& cfg, const StepSizes& steps,
                         const Pose& probe_pose);

/// Translation whose projection sits at `center` with the depth implied by
/// the crop diameter and the physical model diameter.
Vec3 translation_from_crop(const CropState& crop, const CameraIntrinsics& K,
                           double model_diameter_m, double crop_margin = 1.2);

/// Rotation-aware version: the depth is chosen so that the model, oriented
/// by `rotation`, projects to the detected crop diameter. Two fixed-point
/// refinements against the exact perspective bounding box.
Vec3 translation_for_rotation(const CropState& crop, const CameraIntrinsics& K,
                              const Mesh& mesh, const Quat& rotation,
                              double crop_margin = 1.2);

}  // namespace poseact
