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

#include <array>
#include <cstdint>
#include <vector>

#include "poseact/rng.hpp"
#include "poseact/types.hpp"

namespace poseact {

/// Rigid transform from model frame to camera frame. The camera looks down
/// +z; x goes right, y goes down, matching image axes.
struct Pose {
  Quat rotation = Quat::Identity();   // unit quaternion (w, x, y, z)
  Vec3 translation = Vec3::Zero();    // meters, camera frame

  Vec3 transform(const Vec3& model_point) const {
    return rotation * model_point + translation;
  }

  double depth() const { return translation.z(); }

  Pose normalized() const {
    Pose p = *this;
    p.rotation.normalize();
    return p;
  }
};

/// Geodesic angle between the two orientations, radians in [0, pi].
inline double rotation_angle(const Pose& a, const Pose& b) {
  return a.rotation.angularDistance(b.rotation);
}

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int width = 0, height = 0;  // image size, pixels

  void validate() const;
};

/// Projected bounding box of the model under the current hypothesis. The
/// diameter already includes the crop margin; it is the side of the square
/// window that gets resampled to a patch_side x patch_side patch, and the
/// reference length for depth actions.
struct CropState {
  Vec2 center = Vec2::Zero();  // pixels
  double diameter = 0.0;       // pixels, post-margin
  int patch_side = 128;
};

/// One of the 13 discrete decisions. Index layout:
///   0 +tx  1 -tx  2 +ty  3 -ty  4 +tz  5 -tz
///   6 +rx  7 -rx  8 +ry  9 -ry  10 +rz  11 -rz  12 stop
struct ActionVector {
  int index = 12;

  static constexpr int kCount = 13;
  static constexpr int kStopIndex = 12;

  static ActionVector stop() { return ActionVector{kStopIndex}; }
  /// Move action for parameter axis 0..5 (tx, ty, tz, rx, ry, rz).
  static ActionVector move(int axis, int direction) {
    return ActionVector{2 * axis + (direction > 0 ? 0 : 1)};
  }

  bool is_stop() const { return index == kStopIndex; }
  int axis() const { return index / 2; }                     // moves only
  int direction() const { return index % 2 == 0 ? 1 : -1; }  // moves only

  const char* name() const;
  static ActionVector from_name(const std::string& name);

  bool operator==(const ActionVector& o) const { return index == o.index; }
};

/// Units of one action step. In-plane translations are measured in pixels of
/// projected-center motion, depth as a fraction of the current projected
/// diameter, rotations in degrees about camera axes through the object
/// center.
struct StepSizes {
  double tx_ty = 3.0;        // pixels per action
  double tz = 1.0 / 30.0;    // diameter fraction per action
  double rot_deg = 3.0;      // degrees per action

  double rot_rad() const { return deg_to_rad(rot_deg); }
};

/// Pinhole projection of one camera-frame point. Throws point_behind_camera
/// for z <= 0.
Vec2 project_camera_point(const Vec3& p_cam, const CameraIntrinsics& K);

/// Pinhole projection of model-frame points under `pose`.
std::vector<Vec2> project_points(const Pose& pose, const CameraIntrinsics& K,
                                 const std::vector<Vec3>& model_points);

/// Projection of the object centre (the model-frame origin).
Vec2 project_center(const Pose& pose, const CameraIntrinsics& K);

/// Axis-aligned projected bounding box -> crop window. The window is square
/// with side max(bbox w, bbox h) * margin, centred on the bbox midpoint.
CropState compute_crop(const Pose& pose, const CameraIntrinsics& K,
                       const std::vector<Vec3>& model_points,
                       double margin = 1.2, int patch_side = 128);

/// Applies one discrete action:
///  - +-tx/+-ty shift the object parallel to the image plane so the projected
///    centre moves exactly steps.tx_ty pixels along u or v;
///  - +-tz slides the object along the viewing ray through its centre,
///    scaling depth by (1 + steps.tz)^{+-1}; +tz moves away. The projected
///    centre is invariant and the projected diameter changes by
///    steps.tz * crop.diameter to first order, with +step and -step exact
///    inverses;
///  - +-rx/+-ry/+-rz rotate by steps.rot_deg about the camera axis through
///    the object centre, leaving the translation untouched;
///  - stop returns the pose unchanged.
Pose apply_action(const Pose& pose, const CropState& crop,
                  const ActionVector& action, const StepSizes& steps,
                  const CameraIntrinsics& K);

/// Signed offset between two poses in action units, one entry per parameter
/// (tx, ty, tz, rx, ry, rz):
///   [du, dv] / steps.tx_ty,
///   log(z_a / z_b) / log(1 + steps.tz),
///   rotation vector of R_a R_b^-1 / steps.rot.
/// Each single action moves exactly one coordinate by exactly +-1.
Vec6 action_delta(const Pose& a, const Pose& b, const StepSizes& steps,
                  const CameraIntrinsics& K);

/// Pose discrepancy in action units: the Euclidean norm of action_delta.
/// Symmetric, non-negative, zero only for identical parameter sets; one
/// action step from the reference pose always costs exactly 1, and a greedy
/// argmin over single steps reduces the dominant parameter first.
double pose_error(const Pose& p, const Pose& gt, const StepSizes& steps,
                  const CropState& crop, const CameraIntrinsics& K);

/// Key for oscillation detection: action_delta against a reference pose,
/// each coordinate rounded to `resolution` action units.
std::array<std::int64_t, 6> quantized_pose_key(const Pose& p, const Pose& reference,
                                               const StepSizes& steps,
                                               const CameraIntrinsics& K,
                                               double resolution);

/// Signed per-parameter action counts (tx, ty, tz, rx, ry, rz).
using ActionOffset = Eigen::Matrix<int, 6, 1>;

/// Expands an offset into its unit actions, ordered axis by axis.
std::vector<ActionVector> offset_to_actions(const ActionOffset& offset);

/// Applies an offset as unit actions in a shuffled order. Rotation actions
/// do not commute, so the draw order is part of the sampled state.
Pose apply_offset(const Pose& pose, const ActionOffset& offset,
                  const StepSizes& steps, const CameraIntrinsics& K, Rng& rng);

}  // namespace poseact
