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

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "poseact/geometry.hpp"
#include "poseact/renderer.hpp"

namespace poseact {

/// Everything a policy may look at when deciding the next move. `patches` is
/// only assembled for policies that ask for it; `gt` is present when the
/// scene carries an annotation (the oracle requires it).
struct DecisionContext {
  const Pose& current;
  const CropState& crop;
  const StepSizes& steps;
  const CameraIntrinsics& K;
  const PatchStack* patches = nullptr;
  const Pose* gt = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Whether run_episode must render and crop before each decision.
  virtual bool needs_patches() const = 0;
  virtual ActionVector decide(const DecisionContext& ctx) = 0;
};

/// Greedy best decision against the ground truth: evaluates all 13 candidate
/// actions through apply_action + pose_error and returns the argmin, ties
/// broken by the lowest action index.
ActionVector oracle_decide(const Pose& current, const Pose& gt,
                           const CropState& crop, const StepSizes& steps,
                           const CameraIntrinsics& K);

/// Policy wrapper over oracle_decide; reads the ground truth from the
/// context and never touches pixels.
class OraclePolicy : public Policy {
 public:
  bool needs_patches() const override { return false; }
  ActionVector decide(const DecisionContext& ctx) override;
};

/// Fixed decision sequence looped forever; test double for termination
/// behavior.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<ActionVector> script)
      : script_(std::move(script)) {}
  bool needs_patches() const override { return false; }
  ActionVector decide(const DecisionContext&) override {
    const ActionVector a = script_[cursor_ % script_.size()];
    ++cursor_;
    return a;
  }

 private:
  std::vector<ActionVector> script_;
  std::size_t cursor_ = 0;
};

enum class TerminalReason { stop_action, oscillation, max_steps };

const char* terminal_reason_name(TerminalReason reason);

/// One episode record: the pose each decision was taken from, the decision,
/// and the pose error against the annotation when one is known.
struct DecisionTrace {
  struct Step {
    Pose pose_before;
    ActionVector action;
    std::optional<double> error;
  };
  std::vector<Step> steps;
  TerminalReason terminal_reason = TerminalReason::max_steps;

  std::size_t length() const { return steps.size(); }
};

struct LoopConfig {
  int max_steps = 30;
  bool oscillation_check = true;
  /// Revisit detection resolution as a fraction of one action step.
  double revisit_resolution = 0.25;
};

/// The scene an episode runs against. `observed` may be empty for policies
/// that do not look at pixels. `gt` is optional and used for the oracle, for
/// per-step error records and for evaluation.
struct Scene {
  ImageRGB observed;
  const Mesh* mesh = nullptr;
  CameraIntrinsics K;
  std::optional<Pose> gt;
};

struct EpisodeResult {
  Pose final_pose;
  DecisionTrace trace;
};

/// Runs the decision loop from `init`: compute crop, assemble the patch
/// stack (when the policy wants pixels), decide, apply. Terminates on a stop
/// action, on revisiting a quantized pose within the episode, or after
/// cfg.max_steps decisions.
EpisodeResult run_episode(Policy& policy, const Scene& scene, const Pose& init,
                          const LoopConfig& cfg, const StepSizes& steps);

struct Frame {
  ImageRGB image;
  std::optional<Pose> gt;
};

struct FrameResult {
  Pose pose;
  DecisionTrace trace;
  bool reset_from_gt = false;
};

/// Video mode: frame 0 starts from `init`, later frames from the previous
/// result, except that every `reset_every`-th frame restarts from its
/// annotation (missing-gt error if absent there).
std::vector<FrameResult> track_sequence(Policy& policy, const std::vector<Frame>& frames,
                                        const Mesh& mesh, const CameraIntrinsics& K,
                                        const Pose& init,
                                        std::optional<int> reset_every,
                                        const LoopConfig& cfg, const StepSizes& steps);

}  // namespace poseact
