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

#include "poseact/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poseact {

namespace {

constexpr const char* kActionNames[ActionVector::kCount] = {
    "+tx", "-tx", "+ty", "-ty", "+tz", "-tz",
    "+rx", "-rx", "+ry", "-ry", "+rz", "-rz", "stop"};

void check_action(const ActionVector& a) {
  if (a.index < 0 || a.index >= ActionVector::kCount)
    throw Error(ErrorCode::invalid_action,
                "action index out of range: " + std::to_string(a.index));
}

Vec3 rotation_vector(const Quat& q) {
  Eigen::AngleAxisd aa(q);
  return aa.angle() * aa.axis();
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (fx <= 0.0 || fy <= 0.0)
    throw Error(ErrorCode::bad_config, "focal lengths must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw Error(ErrorCode::bad_config, "principal point outside image");
}

const char* ActionVector::name() const { return kActionNames[index]; }

ActionVector ActionVector::from_name(const std::string& name) {
  for (int i = 0; i < kCount; ++i)
    if (name == kActionNames[i]) return ActionVector{i};
  throw Error(ErrorCode::invalid_action, "unknown action name: " + name);
}

Vec2 project_camera_point(const Vec3& p_cam, const CameraIntrinsics& K) {
  if (p_cam.z() <= 0.0)
    throw Error(ErrorCode::point_behind_camera,
                "point at z = " + std::to_string(p_cam.z()));
  return {K.fx * p_cam.x() / p_cam.z() + K.cx,
          K.fy * p_cam.y() / p_cam.z() + K.cy};
}

std::vector<Vec2> project_points(const Pose& pose, const CameraIntrinsics& K,
                                 const std::vector<Vec3>& model_points) {
  std::vector<Vec2> out;
  out.reserve(model_points.size());
  for (const Vec3& p : model_points)
    out.push_back(project_camera_point(pose.transform(p), K));
  return out;
}

Vec2 project_center(const Pose& pose, const CameraIntrinsics& K) {
  return project_camera_point(pose.translation, K);
}

CropState compute_crop(const Pose& pose, const CameraIntrinsics& K,
                       const std::vector<Vec3>& model_points, double margin,
                       int patch_side) {
  if (model_points.empty())
    throw Error(ErrorCode::invalid_mesh, "compute_crop: empty model");
  double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
  double lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v;
  for (const Vec3& p : model_points) {
    const Vec2 uv = project_camera_point(pose.transform(p), K);
    lo_u = std::min(lo_u, uv.x());
    hi_u = std::max(hi_u, uv.x());
    lo_v = std::min(lo_v, uv.y());
    hi_v = std::max(hi_v, uv.y());
  }
  const double w = hi_u - lo_u;
  const double h = hi_v - lo_v;
  if (w <= 0.0 || h <= 0.0)
    throw Error(ErrorCode::degenerate_projection,
                "projected bounding box has zero area");
  CropState crop;
  crop.center = {0.5 * (lo_u + hi_u), 0.5 * (lo_v + hi_v)};
  crop.diameter = std::max(w, h) * margin;
  crop.patch_side = patch_side;
  return crop;
}

Pose apply_action(const Pose& pose, const CropState& /*crop*/,
                  const ActionVector& action, const StepSizes& steps,
                  const CameraIntrinsics& K) {
  check_action(action);
  if (action.is_stop()) return pose;
  if (pose.depth() <= 0.0)
    throw Error(ErrorCode::depth_underflow,
                "apply_action: hypothesis depth must be positive");

  Pose out = pose;
  const int axis = action.axis();
  const double dir = action.direction();
  switch (axis) {
    case 0:  // tx: in-plane shift moving the projected centre +-tx_ty px in u
      out.translation.x() += dir * steps.tx_ty * pose.depth() / K.fx;
      break;
    case 1:  // ty
      out.translation.y() += dir * steps.tx_ty * pose.depth() / K.fy;
      break;
    case 2: {  // tz: slide along the viewing ray; +tz moves away
      const double scale = dir > 0 ? (1.0 + steps.tz) : 1.0 / (1.0 + steps.tz);
      out.translation *= scale;
      if (out.depth() <= 0.0)
        throw Error(ErrorCode::depth_underflow, "tz action crossed the camera");
      break;
    }
    case 3:
    case 4:
    case 5: {  // rotation about a camera axis through the object centre
      Vec3 axis_vec = Vec3::Zero();
      axis_vec[axis - 3] = 1.0;
      const Quat delta(Eigen::AngleAxisd(dir * steps.rot_rad(), axis_vec));
      out.rotation = (delta * pose.rotation).normalized();
      break;
    }
    default:
      throw Error(ErrorCode::invalid_action, "unreachable");
  }
  return out;
}

Vec6 action_delta(const Pose& a, const Pose& b, const StepSizes& steps,
                  const CameraIntrinsics& K) {
  const Vec2 ca = project_center(a, K);
  const Vec2 cb = project_center(b, K);
  Vec6 d;
  d[0] = (ca.x() - cb.x()) / steps.tx_ty;
  d[1] = (ca.y() - cb.y()) / steps.tx_ty;
  d[2] = std::log(a.depth() / b.depth()) / std::log1p(steps.tz);
  const Vec3 w = rotation_vector(a.rotation * b.rotation.conjugate());
  d.tail<3>() = w / steps.rot_rad();
  return d;
}

double pose_error(const Pose& p, const Pose& gt, const StepSizes& steps,
                  const CropState& /*crop*/, const CameraIntrinsics& K) {
  // L2 over the unit-scaled offsets. A plain sum would tie every
  // one-step improvement at exactly -1 and the argmin would degenerate to
  // the lowest-index axis; the Euclidean norm prefers the dominant axis
  // while one step from the reference still costs exactly 1.
  return action_delta(p, gt, steps, K).norm();
}

std::array<std::int64_t, 6> quantized_pose_key(const Pose& p, const Pose& reference,
                                               const StepSizes& steps,
                                               const CameraIntrinsics& K,
                                               double resolution) {
  const Vec6 d = action_delta(p, reference, steps, K);
  std::array<std::int64_t, 6> key;
  for (int i = 0; i < 6; ++i)
    key[i] = static_cast<std::int64_t>(std::llround(d[i] / resolution));
  return key;
}

std::vector<ActionVector> offset_to_actions(const ActionOffset& offset) {
  std::vector<ActionVector> actions;
  for (int axis = 0; axis < 6; ++axis) {
    const int dir = offset[axis] > 0 ? 1 : -1;
    for (int k = 0; k < std::abs(offset[axis]); ++k)
      actions.push_back(ActionVector::move(axis, dir));
  }
  return actions;
}

Pose apply_offset(const Pose& pose, const ActionOffset& offset,
                  const StepSizes& steps, const CameraIntrinsics& K, Rng& rng) {
  std::vector<ActionVector> actions = offset_to_actions(offset);
  // Fisher-Yates with our own rng so the order is reproducible.
  for (std::size_t i = actions.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(actions[i - 1], actions[j]);
  }
  Pose out = pose;
  const CropState unused_crop;
  for (const ActionVector& a : actions)
    out = apply_action(out, unused_crop, a, steps, K);
  return out;
}

}  // namespace poseact
