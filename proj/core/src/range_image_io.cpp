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

#include "driftplan/range_image_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

constexpr std::uint32_t kMaxSide = 1u << 16;

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void read_exact(std::istream& is, char* dst, std::size_t n, const std::string& source,
                const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw ParseError(source, std::string("truncated file while reading ") + what);
  }
}

Raster expect(std::istream& is, const std::string& source, const Magic& magic) {
  Raster r = read_raster(is, source);
  if (r.magic != magic) {
    throw ParseError(source, "unexpected magic '" + std::string(r.magic.data(), 8) +
                                 "', expected '" + std::string(magic.data(), 8) + "'");
  }
  return r;
}

template <typename F>
void with_output(const std::filesystem::path& path, F&& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  f(os);
  if (!os) throw Error("failed writing " + path.string());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return is;
}

}  // namespace

void write_raster(std::ostream& os, const Raster& r) {
  if (r.data.size() != static_cast<std::size_t>(r.w) * r.h) {
    throw ShapeError("raster data size does not match its dimensions");
  }
  os.write(r.magic.data(), 8);
  put_u32(os, r.w);
  put_u32(os, r.h);
  for (float f : r.data) put_u32(os, std::bit_cast<std::uint32_t>(f));
}

Raster read_raster(std::istream& is, const std::string& source) {
  Raster r;
  read_exact(is, r.magic.data(), 8, source, "magic");
  unsigned char dims[8];
  read_exact(is, reinterpret_cast<char*>(dims), 8, source, "dimensions");
  r.w = get_u32(dims);
  r.h = get_u32(dims + 4);
  if (r.w == 0 || r.h == 0 || r.w > kMaxSide || r.h > kMaxSide) {
    throw ParseError(source, "implausible dimensions " + std::to_string(r.w) + "x" +
                                 std::to_string(r.h));
  }
  const std::size_t n = static_cast<std::size_t>(r.w) * r.h;
  std::vector<unsigned char> buf(4 * n);
  read_exact(is, reinterpret_cast<char*>(buf.data()), buf.size(), source, "pixels");
  if (is.peek() != std::char_traits<char>::eof()) {
    throw ParseError(source, "trailing bytes after pixel data");
  }
  r.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.data[i] = std::bit_cast<float>(get_u32(&buf[4 * i]));
  return r;
}

void write_range_image(std::ostream& os, const RangeImage& img) {
  Raster r{kRangeImageMagic, static_cast<std::uint32_t>(img.w),
           static_cast<std::uint32_t>(img.h), {}};
  r.data.resize(img.depth.size());
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    r.data[i] = img.valid[i] ? static_cast<float>(img.depth[i]) : 0.0f;
  }
  write_raster(os, r);
}

RangeImage read_range_image(std::istream& is, const std::string& source) {
  const Raster r = expect(is, source, kRangeImageMagic);
  RangeImage img(static_cast<int>(r.w), static_cast<int>(r.h));
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const float v = r.data[i];
    if (std::isfinite(v) && v > 0.0f) {
      img.depth[i] = v;
      img.valid[i] = 1;
    }
  }
  return img;
}

void save_range_image(const std::filesystem::path& path, const RangeImage& img) {
  with_output(path, [&](std::ostream& os) { write_range_image(os, img); });
}

RangeImage load_range_image(const std::filesystem::path& path) {
  auto is = open_input(path);
  return read_range_image(is, path.string());
}

void write_activation_map(std::ostream& os, const ActivationMap& act) {
  act.validate();
  Raster r{kActivationMagic, static_cast<std::uint32_t>(act.w),
           static_cast<std::uint32_t>(act.h), {}};
  r.data.assign(act.values.begin(), act.values.end());
  write_raster(os, r);
}

ActivationMap read_activation_map(std::istream& is, const std::string& source) {
  const Raster r = expect(is, source, kActivationMagic);
  ActivationMap act(static_cast<int>(r.w), static_cast<int>(r.h));
  act.values.assign(r.data.begin(), r.data.end());
  try {
    act.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, e.what());
  }
  return act;
}

void save_activation_map(const std::filesystem::path& path, const ActivationMap& act) {
  with_output(path, [&](std::ostream& os) { write_activation_map(os, act); });
}

ActivationMap load_activation_map(const std::filesystem::path& path) {
  auto is = open_input(path);
  return read_activation_map(is, path.string());
}

}  // namespace driftplan
