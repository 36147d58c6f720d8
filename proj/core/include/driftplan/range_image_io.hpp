// Copyright 2026 The driftplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIFTPLAN_RANGE_IMAGE_IO_HPP_
#define DRIFTPLAN_RANGE_IMAGE_IO_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driftplan/lidar.hpp"

namespace driftplan {

using Magic = std::array<char, 8>;

inline constexpr Magic kRangeImageMagic{'R', 'I', 'M', 'G', 'v', '0', '0', '1'};
inline constexpr Magic kActivationMagic{'A', 'M', 'A', 'P', 'v', '0', '0', '1'};

/// Flat raster file: 8-byte magic, u32 width, u32 height, then width * height
/// row-major 32-bit floats. All fields little-endian.
struct Raster {
  Magic magic{};
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  std::vector<float> data;
};

void write_raster(std::ostream& os, const Raster& r);
/// Throws ParseError on a truncated file or trailing bytes.
Raster read_raster(std::istream& is, const std::string& source = "<raster>");

/// Invalid pixels are stored as 0 and every positive finite value reads back
/// as valid.
void write_range_image(std::ostream& os, const RangeImage& img);
RangeImage read_range_image(std::istream& is, const std::string& source = "<rimg>");
void save_range_image(const std::filesystem::path& path, const RangeImage& img);
RangeImage load_range_image(const std::filesystem::path& path);

void write_activation_map(std::ostream& os, const ActivationMap& act);
ActivationMap read_activation_map(std::istream& is, const std::string& source = "<amap>");
void save_activation_map(const std::filesystem::path& path, const ActivationMap& act);
ActivationMap load_activation_map(const std::filesystem::path& path);

}  // namespace driftplan

#endif  // DRIFTPLAN_RANGE_IMAGE_IO_HPP_
