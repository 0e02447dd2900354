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

#include "poseact/renderer.hpp"

#include <algorithm>
#include <cmath>

namespace poseact {

const std::array<Vec3, 7> kLightPalette = {{
    {0.0, 0.0, 1.0},  // blue
    {0.0, 1.0, 1.0},  // cyan
    {0.0, 1.0, 0.0},  // green
    {1.0, 0.0, 1.0},  // magenta
    {1.0, 0.0, 0.0},  // red
    {1.0, 1.0, 0.0},  // yellow
    {1.0, 1.0, 1.0},  // white
}};

LightConfig LightConfig::canonical() {
  LightConfig cfg;
  cfg.lights.push_back(PointLight{Vec3::Zero(), 1.0, Vec3::Ones()});
  cfg.ambient = 0.2;
  return cfg;
}

namespace {

constexpr double kNearPlane = 1e-4;

// Camera-space vertex with its shading attributes, the unit the clipper and
// rasterizer work on.
struct ClipVertex {
  Vec3 position;  // camera frame
  Vec3 albedo;
  Vec2 uv;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.position + t * (b.position - a.position),
          a.albedo + t * (b.albedo - a.albedo), a.uv + t * (b.uv - a.uv)};
}

// Sutherland-Hodgman against z >= near. Returns 0..4 vertices.
int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.position.z() >= kNearPlane;
    const bool nxt_in = nxt.position.z() >= kNearPlane;
    if (cur_in) out[n++] = cur;
    if (cur_in != nxt_in) {
      const double t =
          (kNearPlane - cur.position.z()) / (nxt.position.z() - cur.position.z());
      out[n++] = lerp(cur, nxt, t);
    }
  }
  return n;
}

Vec3 shade(const Vec3& albedo, const Vec3& point, const Vec3& face_normal,
           const LightConfig& lights, const MaterialConfig& material) {
  if (material.mode == MaterialConfig::Mode::unlit) return albedo;
  // Two-sided shading: the normal always faces the camera.
  Vec3 n = face_normal;
  if (n.dot(point) > 0.0) n = -n;
  Vec3 color = albedo * lights.ambient;
  const Vec3 view = -point.normalized();
  for (const PointLight& light : lights.lights) {
    Vec3 to_light = light.position - point;
    const double dist = to_light.norm();
    if (dist < 1e-12) to_light = n;
    else to_light /= dist;
    const double diffuse = std::max(0.0, n.dot(to_light));
    color += light.intensity * diffuse * albedo.cwiseProduct(light.color);
    if (material.metallic > 0.0) {
      const Vec3 half = (to_light + view).normalized();
      const double exponent = std::exp2(1.0 + 7.0 * material.smoothness);
      const double spec = std::pow(std::max(0.0, n.dot(half)), exponent);
      color += material.metallic * light.intensity * spec * light.color;
    }
  }
  return color.cwiseMin(1.0).cwiseMax(0.0);
}

}  // namespace

RenderPatch rasterize(const Mesh& mesh, const Pose& pose,
                      const CameraIntrinsics& K, const LightConfig& lights,
                      const MaterialConfig& material, int width, int height) {
  mesh.validate();
  RenderPatch out;
  out.rgb.resize(height, width);
  out.depth.setZero(height, width);
  out.mask.setZero(height, width);

  // All vertices to camera frame once.
  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    cam[i] = pose.transform(mesh.vertices[i]);

  const bool textured = mesh.has_texture();
  Plane zbuf = Plane::Constant(height, width, std::numeric_limits<float>::infinity());

  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    ClipVertex cv[3];
    for (int k = 0; k < 3; ++k) {
      const int vi = tri[k];
      cv[k].position = cam[vi];
      cv[k].albedo = textured ? Vec3::Zero() : mesh.vertex_albedo(vi);
      cv[k].uv = mesh.uvs.empty() ? Vec2::Zero() : mesh.uvs[vi];
    }
    ClipVertex poly[4];
    const int npoly = clip_near(cv, poly);
    if (npoly < 3) continue;

    for (int f = 2; f < npoly; ++f) {
      const ClipVertex* v[3] = {&poly[0], &poly[f - 1], &poly[f]};
      Vec2 s[3];
      for (int k = 0; k < 3; ++k)
        s[k] = {K.fx * v[k]->position.x() / v[k]->position.z() + K.cx,
                K.fy * v[k]->position.y() / v[k]->position.z() + K.cy};

      const double area = (s[1].x() - s[0].x()) * (s[2].y() - s[0].y()) -
                          (s[1].y() - s[0].y()) * (s[2].x() - s[0].x());
      if (std::abs(area) < 1e-12) continue;

      const double min_u = std::min({s[0].x(), s[1].x(), s[2].x()});
      const double max_u = std::max({s[0].x(), s[1].x(), s[2].x()});
      const double min_v = std::min({s[0].y(), s[1].y(), s[2].y()});
      const double max_v = std::max({s[0].y(), s[1].y(), s[2].y()});
      const int x0 = std::max(0, static_cast<int>(std::floor(min_u - 0.5)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_u - 0.5)));
      const int y0 = std::max(0, static_cast<int>(std::floor(min_v - 0.5)));
      const int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_v - 0.5)));
      if (x0 > x1 || y0 > y1) continue;

      const Vec3 face_normal =
          (v[1]->position - v[0]->position).cross(v[2]->position - v[0]->position);
      const double inv_z[3] = {1.0 / v[0]->position.z(), 1.0 / v[1]->position.z(),
                               1.0 / v[2]->position.z()};

      for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
          const double px = x + 0.5;
          // Signed barycentric coordinates; coverage includes edges.
          const double w0 = ((s[1].x() - px) * (s[2].y() - py) -
                             (s[1].y() - py) * (s[2].x() - px)) / area;
          const double w1 = ((s[2].x() - px) * (s[0].y() - py) -
                             (s[2].y() - py) * (s[0].x() - px)) / area;
          const double w2 = 1.0 - w0 - w1;
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;

          const double z = 1.0 / (w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2]);
          if (!(static_cast<float>(z) < zbuf(y, x))) continue;
          zbuf(y, x) = static_cast<float>(z);

          // Perspective-correct attribute weights.
          const double q0 = w0 * inv_z[0] * z;
          const double q1 = w1 * inv_z[1] * z;
          const double q2 = w2 * inv_z[2] * z;
          const Vec3 point = q0 * v[0]->position + q1 * v[1]->position +
                             q2 * v[2]->position;
          Vec3 albedo;
          if (textured) {
            const Vec2 uv = q0 * v[0]->uv + q1 * v[1]->uv + q2 * v[2]->uv;
            const double tx = uv.x() * mesh.texture.width();
            const double ty = (1.0 - uv.y()) * mesh.texture.height();
            albedo = {sample_bilinear(mesh.texture.r, tx, ty),
                      sample_bilinear(mesh.texture.g, tx, ty),
                      sample_bilinear(mesh.texture.b, tx, ty)};
          } else {
            albedo = q0 * v[0]->albedo + q1 * v[1]->albedo + q2 * v[2]->albedo;
          }
          const Vec3 color = shade(albedo, point, face_normal, lights, material);
          out.rgb.r(y, x) = static_cast<float>(color.x());
          out.rgb.g(y, x) = static_cast<float>(color.y());
          out.rgb.b(y, x) = static_cast<float>(color.z());
          out.depth(y, x) = static_cast<float>(z);
          out.mask(y, x) = 1.0f;
        }
      }
    }
  }
  return out;
}

namespace {

// Source position in the image for patch pixel (row i, col j).
inline Vec2 crop_sample_position(const CropState& crop, int side, int i, int j) {
  const double step = crop.diameter / side;
  const double x0 = crop.center.x() - 0.5 * crop.diameter;
  const double y0 = crop.center.y() - 0.5 * crop.diameter;
  return {x0 + (j + 0.5) * step, y0 + (i + 0.5) * step};
}

}  // namespace

ImageRGB crop_resize(const ImageRGB& image, const CropState& crop) {
  if (crop.diameter <= 0.0)
    throw Error(ErrorCode::degenerate_projection, "crop diameter must be positive");
  const int n = crop.patch_side;
  ImageRGB out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 p = crop_sample_position(crop, n, i, j);
      out.r(i, j) = sample_bilinear(image.r, p.x(), p.y());
      out.g(i, j) = sample_bilinear(image.g, p.x(), p.y());
      out.b(i, j) = sample_bilinear(image.b, p.x(), p.y());
    }
  }
  return out;
}

Plane crop_resize_plane(const Plane& plane, const CropState& crop, bool nearest) {
  if (crop.diameter <= 0.0)
    throw Error(ErrorCode::degenerate_projection, "crop diameter must be positive");
  const int n = crop.patch_side;
  Plane out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 p = crop_sample_position(crop, n, i, j);
      out(i, j) = nearest ? sample_nearest(plane, p.x(), p.y())
                          : sample_bilinear(plane, p.x(), p.y());
    }
  }
  return out;
}

PatchStack assemble_patch_stack(const ImageRGB& observed,
                                const RenderPatch& rendered, const Pose& pose,
                                const CropState& crop) {
  PatchStack stack;
  stack.side = crop.patch_side;
  const ImageRGB obs = crop_resize(observed, crop);
  const ImageRGB ren = crop_resize(rendered.rgb, crop);
  stack.channels[0] = obs.r;
  stack.channels[1] = obs.g;
  stack.channels[2] = obs.b;
  stack.channels[3] = ren.r;
  stack.channels[4] = ren.g;
  stack.channels[5] = ren.b;
  Plane depth = crop_resize_plane(rendered.depth, crop, /*nearest=*/true);
  stack.channels[7] = (depth > 0.0f).cast<float>();
  stack.channels[6] = depth / static_cast<float>(pose.depth());
  return stack;
}

PatchStack render_patch_stack(const ImageRGB& observed, const Mesh& mesh,
                              const Pose& pose, const CameraIntrinsics& K,
                              const CropState& crop, const LightConfig& lights,
                              const MaterialConfig& material) {
  const RenderPatch rendered = rasterize(mesh, pose, K, lights, material);
  return assemble_patch_stack(observed, rendered, pose, crop);
}

}  // namespace poseact
