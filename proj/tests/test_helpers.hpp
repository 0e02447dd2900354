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

#include <filesystem>
#include <string>
#include <vector>

#include "poseact/geometry.hpp"
#include "poseact/rng.hpp"

namespace poseact {

inline CameraIntrinsics test_camera() {
  return CameraIntrinsics{550.0, 550.0, 320.0, 240.0, 640, 480};
}

inline Pose random_pose(Rng& rng, double z_min = 0.6, double z_max = 1.8) {
  Pose pose;
  Quat q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  while (q.norm() < 1e-9)
    q = Quat(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  pose.rotation = q.normalized();
  const double z = rng.uniform(z_min, z_max);
  pose.translation = {rng.uniform(-0.15, 0.15) * z, rng.uniform(-0.1, 0.1) * z, z};
  return pose;
}

inline std::vector<Vec3> cube_corners(double side) {
  const double h = side / 2.0;
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i)
    corners.emplace_back((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
  return corners;
}

/// Unique scratch directory under the build tree; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("poseact_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace poseact
