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


#ifndef DRIFTPLAN_TESTS_SUPPORT_GEN_HPP_
#define DRIFTPLAN_TESTS_SUPPORT_GEN_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Core>
#include <gtest/gtest.h>

namespace driftplan::testing {

// Small random-input generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }

  Eigen::VectorXd vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Uniform direction, log-uniform radius.
  Eigen::Vector3d point(double r_min, double r_max) {
    Eigen::Vector3d u(normal(), normal(), normal());
    while (u.norm() < 1e-6) u = {normal(), normal(), normal()};
    const double r = std::exp(uniform(std::log(r_min), std::log(r_max)));
    return r * u.normalized();
  }

  // Point whose elevation lies strictly inside [lo, hi] (radians).
  Eigen::Vector3d point_in_band(double r_min, double r_max, double lo, double hi) {
    const double r = uniform(r_min, r_max);
    const double phi = uniform(-std::numbers::pi, std::numbers::pi);
    const double theta = uniform(lo, hi);
    return {r * std::cos(theta) * std::cos(phi), r * std::cos(theta) * std::sin(phi),
            r * std::sin(theta)};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Runs `prop` on `cases` generators seeded seed, seed+1, ... and tags any
// failure with the case seed.
template <class Prop>
void for_all(int cases, std::uint64_t seed, Prop&& prop) {
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    SCOPED_TRACE("case seed " + std::to_string(s));
    Gen g(s);
    prop(g);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace driftplan::testing

#endif  // DRIFTPLAN_TESTS_SUPPORT_GEN_HPP_
