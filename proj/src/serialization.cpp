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

#include "poseact/serialization.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "poseact/image_io.hpp"

namespace fs = std::filesystem;

namespace poseact {

Json pose_to_json(const Pose& pose) {
  Json j;
  j["q"] = {pose.rotation.w(), pose.rotation.x(), pose.rotation.y(),
            pose.rotation.z()};
  j["t"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  return j;
}

Pose pose_from_json(const Json& j) {
  Pose pose;
  const auto& q = j.at("q");
  const auto& t = j.at("t");
  pose.rotation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                       q[3].get<double>());
  pose.rotation.normalize();
  pose.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  return pose;
}

Json intrinsics_to_json(const CameraIntrinsics& K) {
  Json j;
  j["fx"] = K.fx;
  j["fy"] = K.fy;
  j["cx"] = K.cx;
  j["cy"] = K.cy;
  j["width"] = K.width;
  j["height"] = K.height;
  return j;
}

CameraIntrinsics intrinsics_from_json(const Json& j) {
  CameraIntrinsics K;
  K.fx = j.at("fx").get<double>();
  K.fy = j.at("fy").get<double>();
  K.cx = j.at("cx").get<double>();
  K.cy = j.at("cy").get<double>();
  K.width = j.at("width").get<int>();
  K.height = j.at("height").get<int>();
  K.validate();
  return K;
}

std::string trace_to_jsonl(const DecisionTrace& trace, int frame) {
  std::ostringstream out;
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const auto& step = trace.steps[s];
    Json j;
    j["frame"] = frame;
    j["step"] = s;
    j["action"] = step.action.name();
    j["pose"] = pose_to_json(step.pose_before);
    if (step.error) j["error"] = *step.error;
    if (s + 1 == trace.steps.size())
      j["terminal"] = terminal_reason_name(trace.terminal_reason);
    out << j.dump() << "\n";
  }
  return out.str();
}

void write_trace_jsonl(const std::string& path,
                       const std::vector<DecisionTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  for (std::size_t f = 0; f < traces.size(); ++f)
    out << trace_to_jsonl(traces[f], static_cast<int>(f));
}

Json robustness_report_to_json(const std::vector<RobustnessEntry>& entries) {
  Json sweep = Json::array();
  for (const auto& e : entries) {
    Json j;
    j["m"] = e.m;
    j["runs"] = e.runs;
    j["success"] = e.success_rate;
    if (e.mean_steps)
      j["mean_steps"] = *e.mean_steps;
    else
      j["mean_steps"] = nullptr;
    j["fails"] = e.fail_fraction;
    sweep.push_back(j);
  }
  Json root;
  root["sweep"] = sweep;
  return root;
}

Json eval_report_to_json(const EvalReport& report,
                         const std::vector<RobustnessEntry>* sweep) {
  Json per_object;
  Json object;
  object["add_auc"] = report.add_auc;
  object["success_at_0.1d"] = report.success_at_01d;
  object["shift_mm"] = {report.shift_m.x() * 1000.0, report.shift_m.y() * 1000.0,
                        report.shift_m.z() * 1000.0};
  object["mean_steps"] = report.mean_steps;
  object["frames"] = report.frames;
  per_object[report.object_name] = object;
  Json root;
  root["per_object"] = per_object;
  if (sweep) root["sweep"] = robustness_report_to_json(*sweep)["sweep"];
  return root;
}

void write_sample_json(const std::string& path, const std::string& id,
                       const Sample& sample) {
  Json j;
  j["id"] = id;
  j["group"] = seed_group_name(sample.group);
  j["seed"] = sample.seed;
  j["label"] = ActionVector{sample.label}.name();
  j["gt_pose"] = pose_to_json(sample.gt);
  j["hypothesis_pose"] = pose_to_json(sample.hypothesis);
  Json offset = Json::array();
  for (int i = 0; i < 6; ++i) offset.push_back(sample.offset[i]);
  j["offset"] = offset;
  write_json_file(path, j);
}

void write_manifest_json(const std::string& path, const DatasetManifest& manifest) {
  Json j;
  j["version"] = 1;
  j["base_seed"] = manifest.base_seed;
  j["patch_side"] = manifest.patch_side;
  j["intrinsics"] = intrinsics_to_json(manifest.intrinsics);
  Json counts;
  for (const auto& [name, count] : manifest.group_counts) counts[name] = count;
  j["group_counts"] = counts;
  Json samples = Json::array();
  for (const auto& e : manifest.entries) {
    Json s;
    s["id"] = e.id;
    s["group"] = seed_group_name(e.group);
    s["seed"] = e.seed;
    s["label"] = ActionVector{e.label}.name();
    s["gt_pose"] = pose_to_json(e.gt);
    s["hypothesis_pose"] = pose_to_json(e.hypothesis);
    samples.push_back(s);
  }
  j["samples"] = samples;
  write_json_file(path, j);
}

DatasetManifest read_manifest_json(const std::string& path) {
  const Json j = read_json_file(path);
  DatasetManifest manifest;
  manifest.base_seed = j.at("base_seed").get<std::uint64_t>();
  manifest.patch_side = j.at("patch_side").get<int>();
  manifest.intrinsics = intrinsics_from_json(j.at("intrinsics"));
  for (const auto& [name, count] : j.at("group_counts").items())
    manifest.group_counts[name] = count.get<int>();
  for (const auto& s : j.at("samples")) {
    DatasetManifest::Entry e;
    e.id = s.at("id").get<std::string>();
    e.group = seed_group_from_name(s.at("group").get<std::string>());
    e.seed = s.at("seed").get<std::uint64_t>();
    e.label = ActionVector::from_name(s.at("label").get<std::string>()).index;
    e.gt = pose_from_json(s.at("gt_pose"));
    e.hypothesis = pose_from_json(s.at("hypothesis_pose"));
    manifest.entries.push_back(e);
  }
  return manifest;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << j.dump(2) << "\n";
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  Json j;
  in >> j;
  return j;
}

SequenceData load_sequence(const std::string& directory) {
  SequenceData data;
  data.K = intrinsics_from_json(
      read_json_file((fs::path(directory) / "intrinsics.json").string()));
  data.mesh = load_obj((fs::path(directory) / "mesh.obj").string());

  const Json poses = read_json_file((fs::path(directory) / "poses.json").string());
  std::map<int, Pose> by_frame;
  for (const auto& entry : poses)
    by_frame[entry.at("frame").get<int>()] = pose_from_json(entry.at("pose"));

  const fs::path frame_dir = fs::path(directory) / "frames";
  std::vector<fs::path> files;
  if (fs::is_directory(frame_dir))
    for (const auto& f : fs::directory_iterator(frame_dir))
      if (f.path().extension() == ".png") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw Error(ErrorCode::io_error, "no frames under " + frame_dir.string());

  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame frame;
    frame.image = read_png_rgb(files[i].string());
    auto it = by_frame.find(static_cast<int>(i));
    if (it != by_frame.end()) frame.gt = it->second;
    data.frames.push_back(std::move(frame));
  }
  return data;
}

}  // namespace poseact
