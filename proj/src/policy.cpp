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

#include "poseact/policy.hpp"

#include <set>

namespace poseact {

ActionVector oracle_decide(const Pose& current, const Pose& gt,
                           const CropState& crop, const StepSizes& steps,
                           const CameraIntrinsics& K) {
  int best_index = 0;
  double best_error = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ActionVector::kCount; ++i) {
    const Pose candidate = apply_action(current, crop, ActionVector{i}, steps, K);
    const double err = pose_error(candidate, gt, steps, crop, K);
    if (err < best_error) {  // strict: ties keep the lowest index
      best_error = err;
      best_index = i;
    }
  }
  return ActionVector{best_index};
}

ActionVector OraclePolicy::decide(const DecisionContext& ctx) {
  if (ctx.gt == nullptr)
    throw Error(ErrorCode::missing_gt, "oracle policy needs a ground-truth pose");
  return oracle_decide(ctx.current, *ctx.gt, ctx.crop, ctx.steps, ctx.K);
}

const char* terminal_reason_name(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::stop_action: return "stop_action";
    case TerminalReason::oscillation: return "oscillation";
    case TerminalReason::max_steps: return "max_steps";
  }
  return "unknown";
}

EpisodeResult run_episode(Policy& policy, const Scene& scene, const Pose& init,
                          const LoopConfig& cfg, const StepSizes& steps) {
  if (cfg.max_steps < 1)
    throw Error(ErrorCode::bad_config, "max_steps must be at least 1");
  if (scene.mesh == nullptr)
    throw Error(ErrorCode::bad_config, "scene has no mesh");

  EpisodeResult result;
  result.final_pose = init;
  result.trace.terminal_reason = TerminalReason::max_steps;

  const double key_resolution =
      std::max(cfg.revisit_resolution, 1e-6);
  std::set<std::array<std::int64_t, 6>> visited;

  Pose current = init;
  for (int step = 0; step < cfg.max_steps; ++step) {
    if (cfg.oscillation_check) {
      const auto key =
          quantized_pose_key(current, init, steps, scene.K, key_resolution);
      if (!visited.insert(key).second) {
        // Revisit: keep the most recent pose and stop early.
        result.trace.terminal_reason = TerminalReason::oscillation;
        result.final_pose = current;
        return result;
      }
    }

    const CropState crop = policy.needs_patches()
                               ? compute_crop(current, scene.K, scene.mesh->vertices)
                               : CropState{};
    PatchStack stack;
    DecisionContext ctx{current, crop, steps, scene.K, nullptr,
                        scene.gt ? &*scene.gt : nullptr};
    if (policy.needs_patches()) {
      stack = render_patch_stack(scene.observed, *scene.mesh, current, scene.K, crop);
      ctx.patches = &stack;
    }

    const ActionVector action = policy.decide(ctx);
    DecisionTrace::Step record{current, action, std::nullopt};
    if (scene.gt)
      record.error = pose_error(current, *scene.gt, steps, crop, scene.K);
    result.trace.steps.push_back(record);

    if (action.is_stop()) {
      result.trace.terminal_reason = TerminalReason::stop_action;
      result.final_pose = current;
      return result;
    }
    current = apply_action(current, crop, action, steps, scene.K);
  }
  result.final_pose = current;
  return result;
}

std::vector<FrameResult> track_sequence(Policy& policy, const std::vector<Frame>& frames,
                                        const Mesh& mesh, const CameraIntrinsics& K,
                                        const Pose& init,
                                        std::optional<int> reset_every,
                                        const LoopConfig& cfg, const StepSizes& steps) {
  if (frames.empty())
    throw Error(ErrorCode::bad_config, "track_sequence: no frames");

  std::vector<FrameResult> results;
  results.reserve(frames.size());
  Pose carry = init;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    Pose start = carry;
    bool reset = f == 0;
    if (f > 0 && reset_every && *reset_every > 0 &&
        f % static_cast<std::size_t>(*reset_every) == 0) {
      if (!frames[f].gt)
        throw Error(ErrorCode::missing_gt,
                    "reset frame " + std::to_string(f) + " has no annotation");
      start = *frames[f].gt;
      reset = true;
    }
    Scene scene{frames[f].image, &mesh, K, frames[f].gt};
    EpisodeResult episode = run_episode(policy, scene, start, cfg, steps);
    carry = episode.final_pose;
    results.push_back(FrameResult{episode.final_pose, std::move(episode.trace), reset});
  }
  return results;
}

}  // namespace poseact
