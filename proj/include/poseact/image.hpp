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

#include <Eigen/Core>

#include <array>

namespace poseact {

/// Single-channel raster, indexed (row y, col x), values in [0,1] for color
/// planes, meters for depth planes.
using Plane = Eigen::ArrayXXf;

/// Planar RGB image. Pixel (x, y) samples the continuous plane at
/// (x + 0.5, y + 0.5); y grows downward, matching raster order.
struct ImageRGB {
  Plane r, g, b;

  ImageRGB() = default;
  ImageRGB(int height, int width) { resize(height, width); }

  void resize(int height, int width) {
    r.setZero(height, width);
    g.setZero(height, width);
    b.setZero(height, width);
  }

  int height() const { return static_cast<int>(r.rows()); }
  int width() const { return static_cast<int>(r.cols()); }
  bool empty() const { return r.size() == 0; }

  Plane& channel(int c) { return c == 0 ? r : (c == 1 ? g : b); }
  const Plane& channel(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

/// Bilinear sample at continuous position (x, y) under the pixel-center
/// convention. Samples falling outside the raster read as zero.
inline float sample_bilinear(const Plane& p, double x, double y) {
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0;
  const double ay = fy - y0;
  auto texel = [&](int yy, int xx) -> double {
    if (xx < 0 || xx >= w || yy < 0 || yy >= h) return 0.0;
    return p(yy, xx);
  };
  const double v = (1.0 - ay) * ((1.0 - ax) * texel(y0, x0) + ax * texel(y0, x0 + 1)) +
                   ay * ((1.0 - ax) * texel(y0 + 1, x0) + ax * texel(y0 + 1, x0 + 1));
  return static_cast<float>(v);
}

/// Nearest-neighbour sample; out of bounds reads as zero.
inline float sample_nearest(const Plane& p, double x, double y) {
  const int xx = static_cast<int>(std::floor(x));
  const int yy = static_cast<int>(std::floor(y));
  if (xx < 0 || xx >= p.cols() || yy < 0 || yy >= p.rows()) return 0.0f;
  return p(yy, xx);
}

inline ImageRGB flip_horizontal(const ImageRGB& img) {
  ImageRGB out(img.height(), img.width());
  for (int c = 0; c < 3; ++c)
    out.channel(c) = img.channel(c).rowwise().reverse();
  return out;
}

}  // namespace poseact
