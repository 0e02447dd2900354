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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poseact/datagen.hpp"
#include "poseact/eval.hpp"
#include "poseact/policy.hpp"

namespace poseact {

using Json = nlohmann::ordered_json;

// Pose wire format: {"q": [w, x, y, z], "t": [x, y, z]}, meters.
Json pose_to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

Json intrinsics_to_json(const CameraIntrinsics& K);
CameraIntrinsics intrinsics_from_json(const Json& j);

/// Trace lines: one JSON object per decision,
/// {"frame", "step", "action", "pose", "error"?}.
std::string trace_to_jsonl(const DecisionTrace& trace, int frame);
void write_trace_jsonl(const std::string& path,
                       const std::vector<DecisionTrace>& traces);

Json robustness_report_to_json(const std::vector<RobustnessEntry>& entries);

struct EvalReport {
  std::string object_name;
  double add_auc = 0.0;
  double success_at_01d = 0.0;
  Vec3 shift_m = Vec3::Zero();
  double mean_steps = 0.0;
  int frames = 0;
};
Json eval_report_to_json(const EvalReport& report,
                         const std::vector<RobustnessEntry>* sweep = nullptr);

// Dataset files.
void write_sample_json(const std::string& path, const std::string& id,
                       const Sample& sample);
void write_manifest_json(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest_json(const std::string& path);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

/// Pose-annotated sequence loader. Layout:
///   <dir>/intrinsics.json              camera parameters
///   <dir>/mesh.obj                     object model (vertex colors honored)
///   <dir>/frames/<index>.png           frames, consecutive from 0
///   <dir>/poses.json                   [{"frame": i, "pose": {...}}, ...]
/// Frames without an entry in poses.json carry no annotation.
struct SequenceData {
  CameraIntrinsics K;
  Mesh mesh;
  std::vector<Frame> frames;
};
SequenceData load_sequence(const std::string& directory);

}  // namespace poseact
