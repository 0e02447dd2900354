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

#include <doctest.h>

#include <set>

#include "poseact/mesh.hpp"
#include "poseact/policy.hpp"
#include "test_helpers.hpp"

using namespace poseact;

namespace {

struct OracleFixture {
  CameraIntrinsics K = test_camera();
  StepSizes steps;
  Mesh cube = make_textured_cube();
  OraclePolicy oracle;

  Scene scene_for(const Pose& gt) {
    Scene scene;
    scene.mesh = &cube;
    scene.K = K;
    scene.gt = gt;
    return scene;
  }
};

}  // namespace

TEST_CASE("oracle stops when the hypothesis matches the truth") {
  OracleFixture fx;
  Rng rng(211);
  const Pose gt = random_pose(rng);
  const ActionVector a = oracle_decide(gt, gt, CropState{}, fx.steps, fx.K);
  CHECK(a.is_stop());
}

TEST_CASE("oracle picks the in-plane pull for a pure pixel offset") {
  OracleFixture fx;
  Pose gt;
  gt.translation = {0.0, 0.0, 1.0};
  // Hypothesis 5 px to the right of the truth.
  Pose current = gt;
  current.translation.x() += 5.0 * gt.depth() / fx.K.fx;
  const ActionVector a = oracle_decide(current, gt, CropState{}, fx.steps, fx.K);
  CHECK(a == ActionVector::from_name("-tx"));
}

TEST_CASE("oracle prefers the largest per-step reduction") {
  OracleFixture fx;
  Pose gt;
  gt.translation = {0.0, 0.0, 1.0};
  Pose current = gt;
  current.translation.x() += 2.0 * gt.depth() / fx.K.fx;  // 2 px
  current.rotation =
      Quat(Eigen::AngleAxisd(deg_to_rad(10.0), Vec3::UnitZ())) * gt.rotation;
  const ActionVector a = oracle_decide(current, gt, CropState{}, fx.steps, fx.K);
  CHECK(a == ActionVector::from_name("-rz"));

  // Independent route: enumerate the 13 candidate errors by hand.
  double best = 1e18;
  int best_index = -1;
  for (int i = 0; i < 13; ++i) {
    const Pose candidate =
        apply_action(current, CropState{}, ActionVector{i}, fx.steps, fx.K);
    const double err = pose_error(candidate, gt, fx.steps, CropState{}, fx.K);
    if (err < best) {
      best = err;
      best_index = i;
    }
  }
  CHECK(best_index == a.index);
}

TEST_CASE("episode from the truth stops immediately") {
  OracleFixture fx;
  Rng rng(223);
  const Pose gt = random_pose(rng);
  const Scene scene = fx.scene_for(gt);
  const EpisodeResult r =
      run_episode(fx.oracle, scene, gt, LoopConfig{}, fx.steps);
  CHECK(r.trace.length() == 1);
  CHECK(r.trace.steps[0].action.is_stop());
  CHECK(r.trace.terminal_reason == TerminalReason::stop_action);
  CHECK((r.final_pose.translation - gt.translation).norm() == 0.0);
}

TEST_CASE("oracle undoes k single-axis steps in exactly k+1 decisions") {
  OracleFixture fx;
  Rng rng(227);
  LoopConfig cfg;
  cfg.max_steps = 40;
  for (int k = 1; k <= 25; ++k) {
    const int axis = k % 6;
    const Pose gt = random_pose(rng);
    ActionOffset offset = ActionOffset::Zero();
    offset[axis] = (k % 2 == 0) ? k : -k;
    const Pose init = apply_offset(gt, offset, fx.steps, fx.K, rng);

    const Scene scene = fx.scene_for(gt);
    const EpisodeResult r = run_episode(fx.oracle, scene, init, cfg, fx.steps);
    CHECK(r.trace.length() == static_cast<std::size_t>(k) + 1);
    CHECK(r.trace.terminal_reason == TerminalReason::stop_action);
    CHECK(pose_error(r.final_pose, gt, fx.steps, CropState{}, fx.K) < 0.5);
  }
}

TEST_CASE("pose error never increases along an oracle trace") {
  OracleFixture fx;
  Rng rng(229);
  LoopConfig cfg;
  cfg.max_steps = 60;
  for (int trial = 0; trial < 20; ++trial) {
    const Pose gt = random_pose(rng);
    ActionOffset offset;
    for (int axis = 0; axis < 6; ++axis)
      offset[axis] = static_cast<int>(rng.uniform_int(-8, 8));
    const Pose init = apply_offset(gt, offset, fx.steps, fx.K, rng);
    const Scene scene = fx.scene_for(gt);
    const EpisodeResult r = run_episode(fx.oracle, scene, init, cfg, fx.steps);
    for (std::size_t s = 1; s < r.trace.length(); ++s)
      CHECK(*r.trace.steps[s].error <= *r.trace.steps[s - 1].error + 1e-9);
  }
}

TEST_CASE("an alternating adversary terminates via oscillation within 3 moves") {
  OracleFixture fx;
  Rng rng(233);
  const Pose gt = random_pose(rng);
  ScriptedPolicy alternator({ActionVector::from_name("+tx"),
                             ActionVector::from_name("-tx")});
  const Scene scene = fx.scene_for(gt);
  const EpisodeResult r = run_episode(alternator, scene, gt, LoopConfig{}, fx.steps);
  CHECK(r.trace.terminal_reason == TerminalReason::oscillation);
  CHECK(r.trace.length() <= 3);
}

TEST_CASE("episodes never exceed the step budget") {
  OracleFixture fx;
  Rng rng(239);
  // A policy that never stops and never revisits: always +tx.
  ScriptedPolicy runner({ActionVector::from_name("+tx")});
  LoopConfig cfg;
  cfg.max_steps = 17;
  const Pose gt = random_pose(rng);
  const Scene scene = fx.scene_for(gt);
  const EpisodeResult r = run_episode(runner, scene, gt, cfg, fx.steps);
  CHECK(r.trace.length() == 17);
  CHECK(r.trace.terminal_reason == TerminalReason::max_steps);
}

TEST_CASE("no trace revisits a quantized pose except to terminate") {
  OracleFixture fx;
  Rng rng(241);
  LoopConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose gt = random_pose(rng);
    ActionOffset offset;
    for (int axis = 0; axis < 6; ++axis)
      offset[axis] = static_cast<int>(rng.uniform_int(-4, 4));
    const Pose init = apply_offset(gt, offset, fx.steps, fx.K, rng);
    const Scene scene = fx.scene_for(gt);
    const EpisodeResult r = run_episode(fx.oracle, scene, init, cfg, fx.steps);

    std::set<std::array<std::int64_t, 6>> seen;
    for (const auto& step : r.trace.steps) {
      const auto key = quantized_pose_key(step.pose_before, init, fx.steps,
                                          fx.K, cfg.revisit_resolution);
      CHECK(seen.insert(key).second);
    }
  }
}

TEST_CASE("static-scene tracking stops once per frame") {
  OracleFixture fx;
  Rng rng(251);
  const Pose gt = random_pose(rng);
  std::vector<Frame> frames(20);
  for (auto& f : frames) f.gt = gt;
  const auto results = track_sequence(fx.oracle, frames, fx.cube, fx.K, gt,
                                      std::nullopt, LoopConfig{}, fx.steps);
  for (const auto& r : results) {
    CHECK(r.trace.length() == 1);
    CHECK(r.trace.steps[0].action.is_stop());
  }
}

TEST_CASE("uniform in-plane motion costs one move and one stop per frame") {
  OracleFixture fx;
  Pose gt0;
  gt0.translation = {0.0, 0.0, 1.2};
  std::vector<Frame> frames(12);
  Pose gt = gt0;
  for (auto& f : frames) {
    f.gt = gt;
    gt.translation.x() += fx.steps.tx_ty * gt.depth() / fx.K.fx;  // +3 px
  }
  const auto results = track_sequence(fx.oracle, frames, fx.cube, fx.K, gt0,
                                      std::nullopt, LoopConfig{}, fx.steps);
  CHECK(results[0].trace.length() == 1);  // starts on the truth
  for (std::size_t f = 1; f < results.size(); ++f)
    CHECK(results[f].trace.length() == 2);
}

TEST_CASE("tracking resets from the annotation on schedule") {
  OracleFixture fx;
  Rng rng(257);
  std::vector<Frame> frames(45);
  for (auto& f : frames) f.gt = random_pose(rng);
  const auto results = track_sequence(fx.oracle, frames, fx.cube, fx.K,
                                      *frames[0].gt, 15, LoopConfig{}, fx.steps);
  for (std::size_t f = 0; f < results.size(); ++f)
    CHECK(results[f].reset_from_gt == (f == 0 || f == 15 || f == 30));
}

TEST_CASE("a reset frame without annotation is an error") {
  OracleFixture fx;
  Rng rng(263);
  std::vector<Frame> frames(4);
  frames[0].gt = random_pose(rng);
  frames[1].gt = frames[0].gt;
  frames[3].gt = frames[0].gt;  // frame 2 (the reset) lacks gt
  try {
    track_sequence(fx.oracle, frames, fx.cube, fx.K, *frames[0].gt, 2,
                   LoopConfig{}, fx.steps);
    FAIL("expected missing_gt");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_gt);
  }
}
