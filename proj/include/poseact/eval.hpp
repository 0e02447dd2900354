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

#include <optional>
#include <vector>

#include "poseact/policy.hpp"

namespace poseact {

/// Surface points used by the distance metrics, with the object diameter
/// they are measured against.
struct ModelPoints {
  std::vector<Vec3> points;
  double diameter = 0.0;  // max pairwise distance, meters

  static ModelPoints from_mesh(const Mesh& mesh, int max_points = 4096);
};

/// Mean distance between corresponding transformed model points, meters.
double add_metric(const Pose& p, const Pose& gt, const ModelPoints& pts);

/// Mean distance from each gt-transformed point to its nearest p-transformed
/// point; the symmetric-object variant. Never exceeds add_metric.
double adi_metric(const Pose& p, const Pose& gt, const ModelPoints& pts);

/// Percentage of errors strictly below fraction * diameter.
double success_rate(const std::vector<double>& errors_m, double diameter,
                    double fraction = 0.10);

/// Area under the accuracy-vs-threshold curve for thresholds in
/// [0, max_threshold] meters, in percent. Closed form of the step-curve
/// integral: mean over errors of max(0, 1 - e / max_threshold) * 100.
double add_auc(const std::vector<double>& errors_m, double max_threshold = 0.1);

/// Convergence-basin test configuration, all defaults per the protocol the
/// harness reproduces.
struct RobustnessConfig {
  int deviation_multiplier = 6;  // Delta: action units per unit of m
  int m_max = 45;
  StepSizes steps;               // "stepsize three" defaults
  int fail_cap = 200;            // steps before a run counts as failed
  double subsample_25_30 = 0.25; // keyframe keep-rate for m in [25,30]
  double subsample_31_45 = 0.10; // keyframe keep-rate for m in [31,45]
  double success_add_fraction = 0.10;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// The signed per-parameter action counts of one corruption draw: magnitude
/// Delta * m on every axis, sign from an independent U(-1, 1) draw.
ActionOffset corrupt_offset(int m, const RobustnessConfig& cfg, Rng& rng);

/// Offsets every pose parameter by Delta * m action units with an
/// independent uniform random sign, applied as unit actions in a shuffled
/// order. m = 0 returns gt unchanged.
Pose corrupt_pose(const Pose& gt, int m, const RobustnessConfig& cfg,
                  const CropState& crop, const CameraIntrinsics& K, Rng& rng);

struct RobustnessScene {
  Scene scene;      // must carry gt
  ModelPoints points;
};

struct RobustnessEntry {
  int m = 0;
  int runs = 0;
  double success_rate = 0.0;        // percent: stop fired and ADD below threshold
  std::optional<double> mean_steps; // over successful runs
  double fail_fraction = 0.0;       // runs that never fired stop
};

/// For every m in 0..cfg.m_max: subsample the scenes at the configured
/// keep-rate, corrupt each ground truth, run an episode capped at
/// cfg.fail_cap, and aggregate. Fully determined by cfg.seed, independent of
/// cfg.workers; the policy must be reentrant when workers > 1.
std::vector<RobustnessEntry> robustness_sweep(Policy& policy,
                                              const std::vector<RobustnessScene>& scenes,
                                              const RobustnessConfig& cfg);

/// Constant translation minimizing the mean squared residual between the
/// two pose sequences: the mean of per-frame (gt - pred) translations.
/// Reported alongside corrected metrics, never applied silently.
Vec3 estimate_shift(const std::vector<Pose>& pred, const std::vector<Pose>& gt);

struct RuntimeProfile {
  double mean_preprocess_ms = 0.0;
  double mean_inference_ms = 0.0;
  double mean_total_ms = 0.0;
  double mean_actions_per_episode = 0.0;
  int cycles = 0;
};

/// Wall-clock split of the decision cycle into patch preparation and
/// decision computation, averaged over all cycles of episodes started from
/// the given initial poses. At least 32 cycles must be measured.
RuntimeProfile runtime_profile(Policy& policy, const Scene& scene,
                               const std::vector<Pose>& inits,
                               const LoopConfig& cfg, const StepSizes& steps);

/// Draws the silhouette contour of the hypothesis onto the image, for
/// qualitative inspection.
ImageRGB render_overlay(const ImageRGB& image, const Mesh& mesh, const Pose& pose,
                        const CameraIntrinsics& K,
                        const Vec3& color = Vec3(1.0, 0.2, 0.1));

}  // namespace poseact
