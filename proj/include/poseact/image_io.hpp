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

#include <string>

#include "poseact/image.hpp"

namespace poseact {

/// Reads any PNG (gray, palette, RGB, RGBA, 8/16 bit) into planar RGB in
/// [0,1]. Throws io_error when the file is missing or not a PNG.
ImageRGB read_png_rgb(const std::string& path);

/// 8-bit RGB, values clamped to [0,1] then quantized.
void write_png_rgb(const std::string& path, const ImageRGB& image);

/// 8-bit grayscale, values clamped to [0,1].
void write_png_gray(const std::string& path, const Plane& plane);

/// 16-bit grayscale storing meters as integer millimeters (clamped to
/// 65.535 m). Zero means background.
void write_png_depth_mm(const std::string& path, const Plane& depth_meters);

/// Inverse of write_png_depth_mm: 16-bit gray PNG -> meters.
Plane read_png_depth_mm(const std::string& path);

}  // namespace poseact
