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
#include <vector>

#include "poseact/geometry.hpp"
#include "poseact/image.hpp"
#include "poseact/mesh.hpp"

namespace poseact {

struct PointLight {
  Vec3 position = Vec3::Zero();  // meters, camera frame
  double intensity = 1.0;
  Vec3 color = Vec3::Ones();
};

/// The seven light colors sampled during augmentation.
extern const std::array<Vec3, 7> kLightPalette;

struct LightConfig {
  std::vector<PointLight> lights;
  double ambient = 0.2;

  /// One white light at the camera origin. Hypothesis renderings always use
  /// this so the policy sees a stable appearance.
  static LightConfig canonical();
};

struct MaterialConfig {
  enum class Mode { unlit, standard };
  Mode mode = Mode::standard;
  double metallic = 0.0;    // Blinn-Phong specular strength, [0, 0.85]
  double smoothness = 0.0;  // sharpens the specular lobe, [0, 0.8]
};

/// Rendered channels. mask(p) = 1 exactly where depth(p) > 0.
struct RenderPatch {
  ImageRGB rgb;
  Plane depth;  // camera-frame z of the nearest surface, meters; 0 = none
  Plane mask;   // 1 where covered

  int height() const { return static_cast<int>(depth.rows()); }
  int width() const { return static_cast<int>(depth.cols()); }
};

/// Z-buffered triangle rasterization with Lambertian shading (plus an
/// optional Blinn-Phong term for standard materials) under the point lights.
/// Unlit mode returns plain albedo. Off-screen and behind-camera geometry
/// clips silently; ties in depth keep the earlier triangle.
RenderPatch rasterize(const Mesh& mesh, const Pose& pose,
                      const CameraIntrinsics& K, const LightConfig& lights,
                      const MaterialConfig& material, int width, int height);

/// Renders with the camera's own width/height.
inline RenderPatch rasterize(const Mesh& mesh, const Pose& pose,
                             const CameraIntrinsics& K,
                             const LightConfig& lights,
                             const MaterialConfig& material) {
  return rasterize(mesh, pose, K, lights, material, K.width, K.height);
}

/// Square window of side crop.diameter centred on crop.center, bilinearly
/// resampled to patch_side x patch_side. Samples outside the image are zero.
ImageRGB crop_resize(const ImageRGB& image, const CropState& crop);

/// Same resampling for one plane; `nearest` disables interpolation, which is
/// what depth and mask channels need to stay physical.
Plane crop_resize_plane(const Plane& plane, const CropState& crop, bool nearest);

/// Network input: 8 channels of patch_side x patch_side.
///   0..2 observed RGB crop, 3..5 rendered RGB, 6 rendered depth divided by
///   the hypothesis depth, 7 rendered mask.
struct PatchStack {
  int side = 0;
  std::array<Plane, 8> channels;

  const Plane& observed(int c) const { return channels[c]; }
  const Plane& rendered(int c) const { return channels[3 + c]; }
  const Plane& depth() const { return channels[6]; }
  const Plane& mask() const { return channels[7]; }
};

/// Assembles the decision input for one hypothesis: crops the observed frame
/// and a fresh rendering of the hypothesis with the same window. RGB uses
/// bilinear sampling on both sides; depth and mask use nearest so the mask
/// stays binary and mask == (depth > 0) holds exactly.
PatchStack render_patch_stack(const ImageRGB& observed, const Mesh& mesh,
                              const Pose& pose, const CameraIntrinsics& K,
                              const CropState& crop,
                              const LightConfig& lights = LightConfig::canonical(),
                              const MaterialConfig& material = MaterialConfig{});

/// Stack assembly from an already rendered frame (saves the rasterization
/// when the caller composites and renders itself).
PatchStack assemble_patch_stack(const ImageRGB& observed,
                                const RenderPatch& rendered, const Pose& pose,
                                const CropState& crop);

}  // namespace poseact
