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

#include "poseact/mesh.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "poseact/image_io.hpp"

namespace poseact {

Vec3 Mesh::vertex_albedo(int v) const {
  if (has_colors()) return vertex_colors[v];
  if (has_texture()) {
    const Vec2& uv = uvs[v];
    const double x = uv.x() * texture.width();
    const double y = (1.0 - uv.y()) * texture.height();  // OBJ v runs upward
    return {sample_bilinear(texture.r, x, y), sample_bilinear(texture.g, x, y),
            sample_bilinear(texture.b, x, y)};
  }
  return {0.7, 0.7, 0.7};
}

void Mesh::validate() const {
  if (vertices.empty() || triangles.empty())
    throw Error(ErrorCode::invalid_mesh, "mesh has no geometry");
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles)
    for (int i : t)
      if (i < 0 || i >= n)
        throw Error(ErrorCode::invalid_mesh, "triangle index out of range");
  for (const Vec3& v : vertices)
    if (!v.allFinite())
      throw Error(ErrorCode::invalid_mesh, "non-finite vertex coordinate");
  if (!vertex_colors.empty() && vertex_colors.size() != vertices.size())
    throw Error(ErrorCode::invalid_mesh, "vertex color count mismatch");
  if (!uvs.empty() && uvs.size() != vertices.size())
    throw Error(ErrorCode::invalid_mesh, "uv count mismatch");
}

namespace {

// "3", "3/1", "3/1/2", "3//2" -> vertex and optional uv index (1-based).
void parse_face_corner(const std::string& token, int& v, int& vt) {
  v = 0;
  vt = 0;
  std::size_t first = token.find('/');
  v = std::stoi(token.substr(0, first));
  if (first != std::string::npos) {
    std::size_t second = token.find('/', first + 1);
    const std::string mid = token.substr(first + 1, second - first - 1);
    if (!mid.empty()) vt = std::stoi(mid);
  }
}

}  // namespace

Mesh load_obj(const std::string& path, const std::string& texture_path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open mesh: " + path);

  Mesh mesh;
  std::vector<Vec2> uv_table;
  // OBJ separates position and uv indexing; we deduplicate (v, vt) pairs into
  // single mesh vertices so every vertex has one uv.
  struct Corner {
    int v, vt;
    bool operator<(const Corner& o) const {
      return v != o.v ? v < o.v : vt < o.vt;
    }
  };
  std::map<Corner, int> corner_index;
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  bool any_color = false;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      ss >> x >> y >> z;
      positions.emplace_back(x, y, z);
      double r, G, b;
      if (ss >> r >> G >> b) {
        colors.emplace_back(r, G, b);
        any_color = true;
      } else {
        colors.emplace_back(0.7, 0.7, 0.7);
      }
    } else if (tag == "vt") {
      double u, v;
      ss >> u >> v;
      uv_table.emplace_back(u, v);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string token;
      while (ss >> token) {
        int vi, vti;
        parse_face_corner(token, vi, vti);
        if (vi < 0) vi = static_cast<int>(positions.size()) + vi + 1;
        if (vti < 0) vti = static_cast<int>(uv_table.size()) + vti + 1;
        const Corner c{vi, vti};
        auto it = corner_index.find(c);
        if (it == corner_index.end()) {
          const int idx = static_cast<int>(mesh.vertices.size());
          if (vi < 1 || vi > static_cast<int>(positions.size()))
            throw Error(ErrorCode::invalid_mesh, "face references missing vertex");
          mesh.vertices.push_back(positions[vi - 1]);
          mesh.vertex_colors.push_back(colors[vi - 1]);
          if (vti >= 1 && vti <= static_cast<int>(uv_table.size()))
            mesh.uvs.push_back(uv_table[vti - 1]);
          else
            mesh.uvs.emplace_back(0.0, 0.0);
          it = corner_index.emplace(c, idx).first;
        }
        face.push_back(it->second);
      }
      for (std::size_t k = 2; k < face.size(); ++k)
        mesh.triangles.push_back({face[0], face[k - 1], face[k]});
    }
  }

  if (!any_color) mesh.vertex_colors.clear();
  if (uv_table.empty()) mesh.uvs.clear();
  if (!texture_path.empty()) {
    mesh.texture = read_png_rgb(texture_path);
    if (mesh.uvs.empty())
      throw Error(ErrorCode::invalid_mesh, "texture given but mesh has no uvs");
  }
  mesh.validate();
  return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write mesh: " + path);
  out.precision(9);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << "v " << v.x() << " " << v.y() << " " << v.z();
    if (mesh.has_colors()) {
      const Vec3& c = mesh.vertex_colors[i];
      out << " " << c.x() << " " << c.y() << " " << c.z();
    }
    out << "\n";
  }
  for (const Vec2& uv : mesh.uvs) out << "vt " << uv.x() << " " << uv.y() << "\n";
  for (const auto& t : mesh.triangles) {
    out << "f";
    for (int i : t) {
      out << " " << (i + 1);
      if (!mesh.uvs.empty()) out << "/" << (i + 1);
    }
    out << "\n";
  }
}

Mesh make_textured_cube(double side, int subdivisions) {
  Mesh mesh;
  const double h = side / 2.0;
  const int n = subdivisions;
  // Distinct base color per face; opposite faces differ so that any visible
  // triple of faces identifies the orientation.
  const Vec3 face_colors[6] = {
      {0.85, 0.20, 0.20}, {0.20, 0.70, 0.85}, {0.20, 0.75, 0.25},
      {0.85, 0.30, 0.75}, {0.90, 0.80, 0.20}, {0.30, 0.30, 0.85}};
  // Face frames: normal, then the two in-face axes.
  const Vec3 normals[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                           {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  const Vec3 tangents[6] = {{0, 1, 0}, {0, 0, 1}, {0, 0, 1},
                            {1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  for (int f = 0; f < 6; ++f) {
    const Vec3 nrm = normals[f];
    const Vec3 ta = tangents[f];
    const Vec3 tb = nrm.cross(ta);
    const int base = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double a = -h + side * i / n;
        const double b = -h + side * j / n;
        mesh.vertices.push_back(nrm * h + ta * a + tb * b);
        const double checker = ((i + j) % 2 == 0) ? 1.0 : 0.55;
        const double grade = 0.75 + 0.25 * (static_cast<double>(i) / n);
        mesh.vertex_colors.push_back(face_colors[f] * checker * grade);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int v00 = base + i * (n + 1) + j;
        const int v01 = v00 + 1;
        const int v10 = v00 + (n + 1);
        const int v11 = v10 + 1;
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      }
    }
  }
  mesh.validate();
  return mesh;
}

std::vector<Vec3> sample_model_points(const Mesh& mesh, int max_points) {
  if (static_cast<int>(mesh.vertices.size()) <= max_points) return mesh.vertices;
  // Greedy farthest-point subsample, deterministic start at vertex 0.
  const auto& verts = mesh.vertices;
  std::vector<Vec3> picked;
  picked.reserve(max_points);
  std::vector<double> dist(verts.size(), std::numeric_limits<double>::infinity());
  int current = 0;
  for (int k = 0; k < max_points; ++k) {
    picked.push_back(verts[current]);
    int next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      dist[i] = std::min(dist[i], (verts[i] - verts[current]).norm());
      if (dist[i] > best) {
        best = dist[i];
        next = static_cast<int>(i);
      }
    }
    current = next;
  }
  return picked;
}

double model_diameter(const std::vector<Vec3>& points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::max(best, (points[i] - points[j]).norm());
  return best;
}

}  // namespace poseact
