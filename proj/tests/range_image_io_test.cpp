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


#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "driftplan/errors.hpp"
#include "driftplan/range_image_io.hpp"
#include "support/gen.hpp"

namespace driftplan {
namespace {

using testing::for_all;
using testing::Gen;

std::string bytes_of(const Raster& r) {
  std::ostringstream os;
  write_raster(os, r);
  return os.str();
}

std::string header(const Magic& m, std::uint32_t w, std::uint32_t h) {
  std::string s(m.data(), 8);
  for (std::uint32_t v : {w, h}) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  return s;
}

TEST(Raster, LayoutIsLittleEndian) {
  const Raster r{kRangeImageMagic, 2, 1, {1.0f, -2.5f}};
  const std::string b = bytes_of(r);
  ASSERT_EQ(b.size(), 8u + 8u + 8u);
  EXPECT_EQ(b.substr(0, 8), "RIMGv001");
  EXPECT_EQ(b.substr(0, 16), header(kRangeImageMagic, 2, 1));
  // 1.0f = 0x3f800000
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(b[19]), 0x3f);
  std::istringstream is(b);
  const Raster back = read_raster(is);
  EXPECT_EQ(back.magic, kRangeImageMagic);
  EXPECT_EQ(back.data, r.data);
}

TEST(Raster, ErrorsCarrySource) {
  const std::string good = bytes_of(Raster{kRangeImageMagic, 2, 2, {1, 2, 3, 4}});
  {
    std::istringstream is(good.substr(0, good.size() - 1));
    try {
      read_raster(is, "scan.rimg");
      FAIL() << "truncated file accepted";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.location(), "scan.rimg");
    }
  }
  {
    std::istringstream is(good + "x");
    EXPECT_THROW(read_raster(is), ParseError);
  }
  {
    std::istringstream is(good.substr(0, 5));
    EXPECT_THROW(read_raster(is), ParseError);
  }
  {
    std::istringstream is(header(kRangeImageMagic, 0, 4));
    EXPECT_THROW(read_raster(is), ParseError);
  }
  {
    std::istringstream is(header(kRangeImageMagic, 1u << 30, 1u << 30));
    EXPECT_THROW(read_raster(is), ParseError);
  }
  std::ostringstream os;
  EXPECT_THROW(write_raster(os, Raster{kRangeImageMagic, 2, 2, {1.0f}}), ShapeError);
}

TEST(RangeImageIo, MagicChecked) {
  ActivationMap act(3, 2, 0.5);
  std::stringstream ss;
  write_activation_map(ss, act);
  EXPECT_THROW(read_range_image(ss), ParseError);
  std::stringstream ss2;
  write_range_image(ss2, RangeImage(3, 2));
  EXPECT_THROW(read_activation_map(ss2), ParseError);
}

TEST(RangeImageIo, InvalidPixelsStoredAsZero) {
  RangeImage img(3, 2);
  img.depth[0] = 5.0;  // stale depth behind an invalid flag
  img.valid[1] = 1;
  img.depth[1] = 12.25;
  std::stringstream ss;
  write_range_image(ss, img);
  const RangeImage back = read_range_image(ss);
  EXPECT_EQ(back.w, 3);
  EXPECT_EQ(back.h, 2);
  EXPECT_EQ(back.valid_count(), 1u);
  EXPECT_EQ(back.depth[0], 0.0);
  EXPECT_EQ(back.depth[1], 12.25);
}

TEST(RangeImageIo, NonPositiveAndNonFiniteReadInvalid) {
  std::string b = header(kRangeImageMagic, 4, 1);
  for (float v : {-1.0f, std::numeric_limits<float>::quiet_NaN(),
                  std::numeric_limits<float>::infinity(), 3.0f}) {
    char raw[4];
    std::memcpy(raw, &v, 4);
    b.append(raw, 4);
  }
  std::istringstream is(b);
  const RangeImage img = read_range_image(is);
  EXPECT_EQ(img.valid_count(), 1u);
  EXPECT_EQ(img.valid[3], 1);
  EXPECT_EQ(img.depth[0], 0.0);
}

TEST(RangeImageIoProperty, RoundTripAtFloatPrecision) {
  for_all(30, 50, [](Gen& g) {
    const int w = g.integer(1, 64), h = g.integer(1, 16);
    RangeImage img(w, h);
    for (std::size_t i = 0; i < img.depth.size(); ++i) {
      if (g.coin()) {
        img.valid[i] = 1;
        img.depth[i] = g.uniform(0.1, 100.0);
      }
    }
    std::stringstream ss;
    write_range_image(ss, img);
    EXPECT_EQ(ss.str().size(), 16u + 4u * img.depth.size());
    const RangeImage back = read_range_image(ss);
    EXPECT_EQ(back.valid, img.valid);
    for (std::size_t i = 0; i < img.depth.size(); ++i) {
      EXPECT_EQ(back.depth[i], static_cast<double>(static_cast<float>(img.depth[i])));
    }
  });
}

TEST(ActivationIo, RoundTripAndRange) {
  Gen g(60);
  ActivationMap act(7, 3);
  for (auto& v : act.values) v = static_cast<float>(g.uniform(0.0, 1.0));
  std::stringstream ss;
  write_activation_map(ss, act);
  EXPECT_EQ(read_activation_map(ss).values, act.values);

  std::string b = header(kActivationMagic, 1, 1);
  const float over = 1.5f;
  char raw[4];
  std::memcpy(raw, &over, 4);
  b.append(raw, 4);
  std::istringstream is(b);
  EXPECT_THROW(read_activation_map(is, "a.amap"), ParseError);

  ActivationMap bad(1, 1, -0.1);
  std::ostringstream os;
  EXPECT_THROW(write_activation_map(os, bad), InvalidArgument);
}

TEST(ActivationIo, Files) {
  const auto dir = std::filesystem::temp_directory_path() / "driftplan_rimg_test";
  std::filesystem::create_directories(dir);
  RangeImage img(5, 2);
  img.valid[3] = 1;
  img.depth[3] = 2.0;
  save_range_image(dir / "a.rimg", img);
  EXPECT_EQ(load_range_image(dir / "a.rimg").depth[3], 2.0);
  save_activation_map(dir / "a.amap", ActivationMap(5, 2, 0.25));
  EXPECT_EQ(load_activation_map(dir / "a.amap").values[9], 0.25);
  EXPECT_THROW(load_range_image(dir / "missing.rimg"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace driftplan
