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
#include <string>
#include <vector>

#include "poseact/image.hpp"
#include "poseact/types.hpp"

namespace poseact {

/// Triangle mesh in the model frame, meters. Appearance comes either from
/// per-vertex colors or from a texture image addressed by per-vertex UVs;
/// when both are absent a flat light gray is used.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> vertex_colors;  // empty or size() == vertices.size()
  std::vector<Vec2> uvs;            // empty or size() == vertices.size()
  ImageRGB texture;                 // used only when uvs are present

  bool has_colors() const { return !vertex_colors.empty(); }
  bool has_texture() const { return !uvs.empty() && !texture.empty(); }

  /// Albedo of vertex v, from colors, texture, or the gray fallback.
  Vec3 vertex_albedo(int v) const;

  /// Throws invalid_mesh on out-of-range indices, empty data or non-finite
  /// coordinates.
  void validate() const;
};

/// Wavefront OBJ loader: v / vt / f records, faces triangulated as fans.
/// `texture_path` may be empty. Vertex colors after coordinates
/// ("v x y z r g b") are honored.
Mesh load_obj(const std::string& path, const std::string& texture_path = "");

/// Writes v / vt / f records; colors are appended to v lines when present.
void save_obj(const Mesh& mesh, const std::string& path);

/// Axis-aligned cube of the given side with each face subdivided into an
/// n x n grid of quads carrying a distinct face color modulated by a checker
/// and a gradient, so that every orientation looks different. Used by tests
/// and as the `builtin:cube` CLI mesh.
Mesh make_textured_cube(double side = 0.14, int subdivisions = 4);

/// Model points for metric evaluation: all vertices if there are at most
/// `max_points`, otherwise a farthest-point subsample.
std::vector<Vec3> sample_model_points(const Mesh& mesh, int max_points = 4096);

/// Largest pairwise distance among the points, meters.
double model_diameter(const std::vector<Vec3>& points);

}  // namespace poseact
