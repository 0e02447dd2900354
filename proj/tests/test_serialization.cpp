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

#include <fstream>
#include <sstream>

#include "poseact/image_io.hpp"
#include "poseact/serialization.hpp"
#include "test_helpers.hpp"

using namespace poseact;

TEST_CASE("poses round-trip through the wire format") {
  Rng rng(701);
  for (int i = 0; i < 20; ++i) {
    const Pose pose = random_pose(rng);
    const Pose back = pose_from_json(pose_to_json(pose));
    CHECK((back.translation - pose.translation).norm() < 1e-15);
    CHECK(rotation_angle(back, pose) < 1e-12);
  }
  const Json j = pose_to_json(Pose{});
  CHECK(j.contains("q"));
  CHECK(j["q"].size() == 4);
  CHECK(j["t"].size() == 3);
}

TEST_CASE("intrinsics round-trip and validate") {
  const CameraIntrinsics K = test_camera();
  const CameraIntrinsics back = intrinsics_from_json(intrinsics_to_json(K));
  CHECK(back.fx == K.fx);
  CHECK(back.width == K.width);

  Json bad = intrinsics_to_json(K);
  bad["fx"] = -1.0;
  CHECK_THROWS_AS(intrinsics_from_json(bad), Error);
}

TEST_CASE("trace lines carry frame, step, action and pose") {
  DecisionTrace trace;
  trace.terminal_reason = TerminalReason::stop_action;
  Pose pose;
  pose.translation = {0.0, 0.0, 1.0};
  trace.steps.push_back({pose, ActionVector::from_name("+tx"), 2.0});
  trace.steps.push_back({pose, ActionVector::stop(), 0.0});

  const std::string lines = trace_to_jsonl(trace, 3);
  std::istringstream in(lines);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    CHECK(j["frame"] == 3);
    CHECK(j["step"] == row);
    if (row == 0) CHECK(j["action"] == "+tx");
    if (row == 1) {
      CHECK(j["action"] == "stop");
      CHECK(j["terminal"] == "stop_action");
    }
    CHECK(j.contains("pose"));
    ++row;
  }
  CHECK(row == 2);
}

TEST_CASE("action names round-trip") {
  for (int i = 0; i < ActionVector::kCount; ++i) {
    const ActionVector a{i};
    CHECK(ActionVector::from_name(a.name()) == a);
  }
  CHECK_THROWS_AS(ActionVector::from_name("+qq"), Error);
}

TEST_CASE("sequence directories load frames, poses and the mesh") {
  TempDir dir("seq");
  const CameraIntrinsics K{100.0, 100.0, 32.0, 32.0, 64, 64};
  write_json_file(dir.str() + "/intrinsics.json", intrinsics_to_json(K));
  save_obj(make_textured_cube(0.1, 1), dir.str() + "/mesh.obj");

  std::filesystem::create_directories(dir.path() / "frames");
  ImageRGB frame(64, 64);
  frame.r.setConstant(0.25f);
  for (int i = 0; i < 3; ++i)
    write_png_rgb((dir.path() / "frames" /
                   (std::string("0000") + std::to_string(i) + ".png")).string(),
                  frame);

  Json poses = Json::array();
  Rng rng(709);
  const Pose gt = random_pose(rng);
  Json entry;
  entry["frame"] = 1;
  entry["pose"] = pose_to_json(gt);
  poses.push_back(entry);
  write_json_file(dir.str() + "/poses.json", poses);

  const SequenceData data = load_sequence(dir.str());
  CHECK(data.frames.size() == 3);
  CHECK(!data.frames[0].gt.has_value());
  REQUIRE(data.frames[1].gt.has_value());
  CHECK((data.frames[1].gt->translation - gt.translation).norm() < 1e-12);
  CHECK(data.K.fx == 100.0);
  CHECK(data.mesh.triangles.size() == 12);
}

TEST_CASE("obj files round-trip geometry and colors") {
  TempDir dir("obj");
  const Mesh cube = make_textured_cube(0.12, 2);
  const std::string path = dir.str() + "/cube.obj";
  save_obj(cube, path);
  const Mesh loaded = load_obj(path);
  // The loader renumbers vertices in face order, so compare corner-wise.
  REQUIRE(loaded.triangles.size() == cube.triangles.size());
  CHECK(loaded.has_colors());
  for (std::size_t t = 0; t < cube.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 expect_v = cube.vertices[cube.triangles[t][k]];
      const Vec3 expect_c = cube.vertex_colors[cube.triangles[t][k]];
      const Vec3 got_v = loaded.vertices[loaded.triangles[t][k]];
      const Vec3 got_c = loaded.vertex_colors[loaded.triangles[t][k]];
      CHECK((got_v - expect_v).norm() < 1e-7);
      CHECK((got_c - expect_c).norm() < 1e-7);
    }
  }
}

TEST_CASE("depth png round-trips meters at millimeter resolution") {
  TempDir dir("png");
  Plane depth(8, 8);
  Rng rng(719);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      depth(y, x) = static_cast<float>(rng.uniform(0.0, 3.0));
  depth(0, 0) = 0.0f;
  const std::string path = dir.str() + "/depth.png";
  write_png_depth_mm(path, depth);
  const Plane back = read_png_depth_mm(path);
  CHECK((back - depth).abs().maxCoeff() < 0.001f);
  CHECK(back(0, 0) == 0.0f);
}

TEST_CASE("robustness reports serialize with one entry per m") {
  std::vector<RobustnessEntry> entries(3);
  for (int m = 0; m < 3; ++m) {
    entries[m].m = m;
    entries[m].runs = 10;
    entries[m].success_rate = 100.0 - m;
    entries[m].mean_steps = 1.0 + m;
  }
  const Json j = robustness_report_to_json(entries);
  REQUIRE(j["sweep"].size() == 3);
  CHECK(j["sweep"][2]["m"] == 2);
  CHECK(j["sweep"][2]["success"] == 98.0);
}
