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

#include "poseact/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "poseact/stats.hpp"
#include "poseact/threading.hpp"

namespace poseact {

ModelPoints ModelPoints::from_mesh(const Mesh& mesh, int max_points) {
  ModelPoints mp;
  mp.points = sample_model_points(mesh, max_points);
  mp.diameter = model_diameter(mp.points);
  if (mp.points.size() < 2 || mp.diameter <= 0.0)
    throw Error(ErrorCode::invalid_mesh, "model points degenerate");
  return mp;
}

double add_metric(const Pose& p, const Pose& gt, const ModelPoints& pts) {
  const Mat3 Rp = p.rotation.toRotationMatrix();
  const Mat3 Rg = gt.rotation.toRotationMatrix();
  double acc = 0.0;
  for (const Vec3& x : pts.points)
    acc += (Rp * x + p.translation - (Rg * x + gt.translation)).norm();
  return acc / static_cast<double>(pts.points.size());
}

double adi_metric(const Pose& p, const Pose& gt, const ModelPoints& pts) {
  const std::size_t n = pts.points.size();
  // Transform both clouds once, then vectorize the nearest-point search.
  Eigen::Matrix3Xd a(3, n), b(3, n);
  const Mat3 Rp = p.rotation.toRotationMatrix();
  const Mat3 Rg = gt.rotation.toRotationMatrix();
  for (std::size_t i = 0; i < n; ++i) {
    a.col(i) = Rp * pts.points[i] + p.translation;
    b.col(i) = Rg * pts.points[i] + gt.translation;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += (a.colwise() - b.col(i)).colwise().norm().minCoeff();
  }
  return acc / static_cast<double>(n);
}

double success_rate(const std::vector<double>& errors_m, double diameter,
                    double fraction) {
  if (errors_m.empty()) return 0.0;
  const double threshold = fraction * diameter;
  std::size_t hits = 0;
  for (double e : errors_m)
    if (e < threshold) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(errors_m.size());
}

double add_auc(const std::vector<double>& errors_m, double max_threshold) {
  if (errors_m.empty()) return 0.0;
  double acc = 0.0;
  for (double e : errors_m) {
    if (e < 0.0)
      throw Error(ErrorCode::bad_config, "add_auc: negative error");
    acc += std::max(0.0, 1.0 - e / max_threshold);
  }
  return 100.0 * acc / static_cast<double>(errors_m.size());
}

ActionOffset corrupt_offset(int m, const RobustnessConfig& cfg, Rng& rng) {
  ActionOffset offset;
  for (int axis = 0; axis < 6; ++axis) {
    const double x = rng.uniform(-1.0, 1.0);
    offset[axis] = cfg.deviation_multiplier * m * (x >= 0.0 ? 1 : -1);
  }
  return offset;
}

Pose corrupt_pose(const Pose& gt, int m, const RobustnessConfig& cfg,
                  const CropState& /*crop*/, const CameraIntrinsics& K, Rng& rng) {
  const ActionOffset offset = corrupt_offset(m, cfg, rng);
  if (m == 0) return gt;
  return apply_offset(gt, offset, cfg.steps, K, rng);
}

std::vector<RobustnessEntry> robustness_sweep(Policy& policy,
                                              const std::vector<RobustnessScene>& scenes,
                                              const RobustnessConfig& cfg) {
  if (scenes.empty())
    throw Error(ErrorCode::bad_config, "robustness_sweep: no scenes");
  for (const auto& s : scenes)
    if (!s.scene.gt)
      throw Error(ErrorCode::missing_gt, "robustness scene without annotation");

  struct Task {
    int m;
    std::size_t scene_index;
    std::uint64_t stream;
  };
  std::vector<Task> tasks;
  for (int m = 0; m <= cfg.m_max; ++m) {
    double keep = 1.0;
    if (m >= 25 && m <= 30) keep = cfg.subsample_25_30;
    else if (m >= 31) keep = cfg.subsample_31_45;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(m) * 1000003ULL + s;
      Rng pick = Rng::stream(cfg.seed ^ 0x5eedULL, stream);
      if (keep < 1.0 && !pick.bernoulli(keep)) continue;
      tasks.push_back(Task{m, s, stream});
    }
  }

  struct RunOutcome {
    bool success = false;
    bool stopped = false;
    int steps = 0;
  };
  std::vector<RunOutcome> outcomes(tasks.size());

  LoopConfig loop;
  loop.max_steps = cfg.fail_cap;

  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const RobustnessScene& rs = scenes[task.scene_index];
    Rng rng = Rng::stream(cfg.seed, task.stream);
    const Pose init = corrupt_pose(*rs.scene.gt, task.m, cfg, CropState{},
                                   rs.scene.K, rng);
    const EpisodeResult episode =
        run_episode(policy, rs.scene, init, loop, cfg.steps);
    RunOutcome out;
    out.stopped = episode.trace.terminal_reason == TerminalReason::stop_action;
    out.steps = static_cast<int>(episode.trace.length());
    const double add = add_metric(episode.final_pose, *rs.scene.gt, rs.points);
    out.success = out.stopped && add < cfg.success_add_fraction * rs.points.diameter;
    outcomes[i] = out;
  });

  std::vector<RobustnessEntry> entries;
  for (int m = 0; m <= cfg.m_max; ++m) {
    RobustnessEntry e;
    e.m = m;
    double step_sum = 0.0;
    int successes = 0, fails = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].m != m) continue;
      ++e.runs;
      if (outcomes[i].success) {
        ++successes;
        step_sum += outcomes[i].steps;
      }
      if (!outcomes[i].stopped) ++fails;
    }
    if (e.runs > 0) {
      e.success_rate = 100.0 * successes / e.runs;
      e.fail_fraction = static_cast<double>(fails) / e.runs;
      if (successes > 0) e.mean_steps = step_sum / successes;
    }
    entries.push_back(e);
  }
  return entries;
}

Vec3 estimate_shift(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  if (pred.empty() || pred.size() != gt.size())
    throw Error(ErrorCode::bad_config, "estimate_shift: length mismatch");
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < pred.size(); ++i)
    acc += gt[i].translation - pred[i].translation;
  return acc / static_cast<double>(pred.size());
}

RuntimeProfile runtime_profile(Policy& policy, const Scene& scene,
                               const std::vector<Pose>& inits,
                               const LoopConfig& cfg, const StepSizes& steps) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0, clock::time_point t1) {
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };

  RuntimeProfile profile;
  double preprocess = 0.0, inference = 0.0, total = 0.0;
  int cycles = 0;

  for (const Pose& init : inits) {
    Pose current = init;
    int episode_cycles = 0;
    for (int step = 0; step < cfg.max_steps; ++step) {
      const auto t0 = clock::now();
      const CropState crop = compute_crop(current, scene.K, scene.mesh->vertices);
      PatchStack stack;
      DecisionContext ctx{current, crop, steps, scene.K, nullptr,
                          scene.gt ? &*scene.gt : nullptr};
      if (policy.needs_patches()) {
        stack = render_patch_stack(scene.observed, *scene.mesh, current, scene.K, crop);
        ctx.patches = &stack;
      }
      const auto t1 = clock::now();
      const ActionVector action = policy.decide(ctx);
      const auto t2 = clock::now();

      preprocess += ms_since(t0, t1);
      inference += ms_since(t1, t2);
      total += ms_since(t0, t2);
      ++cycles;
      ++episode_cycles;
      if (action.is_stop()) break;
      current = apply_action(current, crop, action, steps, scene.K);
    }
    profile.mean_actions_per_episode += episode_cycles;
  }

  if (cycles < 32)
    throw Error(ErrorCode::bad_config,
                "runtime_profile measured fewer than 32 cycles");
  profile.mean_preprocess_ms = preprocess / cycles;
  profile.mean_inference_ms = inference / cycles;
  profile.mean_total_ms = total / cycles;
  profile.mean_actions_per_episode /= static_cast<double>(inits.size());
  profile.cycles = cycles;
  return profile;
}

ImageRGB render_overlay(const ImageRGB& image, const Mesh& mesh, const Pose& pose,
                        const CameraIntrinsics& K, const Vec3& color) {
  const RenderPatch patch = rasterize(mesh, pose, K, LightConfig::canonical(),
                                      MaterialConfig{}, image.width(), image.height());
  ImageRGB out = image;
  const int h = out.height(), w = out.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (patch.mask(y, x) <= 0.0f) continue;
      const bool boundary = x == 0 || y == 0 || x == w - 1 || y == h - 1 ||
                            patch.mask(y, x - 1) == 0.0f ||
                            patch.mask(y, x + 1) == 0.0f ||
                            patch.mask(y - 1, x) == 0.0f ||
                            patch.mask(y + 1, x) == 0.0f;
      if (boundary) {
        out.r(y, x) = static_cast<float>(color.x());
        out.g(y, x) = static_cast<float>(color.y());
        out.b(y, x) = static_cast<float>(color.z());
      }
    }
  }
  return out;
}

}  // namespace poseact
