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

#include "driftplan/dtl_loss.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "driftplan/errors.hpp"

namespace driftplan {

void DtlParams::validate() const {
  if (!(beta > 0.0)) throw InvalidArgument("dtl beta must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("dtl lambda must be non-negative");
}

double dtl_loss(const Triplet& t, const DtlParams& p) {
  const double hinge = std::max(0.0, t.z_n - t.z_p + p.beta);
  const double an = t.z_a - t.z_n, ap = t.z_a - t.z_p;
  return hinge + p.lambda * (an * an + ap * ap);
}

DtlGradient dtl_grad(const Triplet& t, const DtlParams& p) {
  const double active = (t.z_n - t.z_p + p.beta) > 0.0 ? 1.0 : 0.0;
  const double an = t.z_a - t.z_n, ap = t.z_a - t.z_p;
  return {-active - 2.0 * p.lambda * ap, 2.0 * p.lambda * (an + ap), active - 2.0 * p.lambda * an};
}

std::vector<DtlFixtureRow> dtl_fixture(int n_random, std::uint64_t seed) {
  if (n_random < 0) throw InvalidArgument("fixture row count must be non-negative");
  std::vector<DtlFixtureRow> rows;
  const auto add = [&](Triplet t, DtlParams p) { rows.push_back({t, p, dtl_loss(t, p)}); };
  add({0.0, 0.0, 0.0}, {1.0, 1.0});
  add({2.0, 1.0, 0.0}, {1.0, 1.0});
  add({0.0, 0.0, 5.0}, {1.0, 0.0});
  add({1.0, 0.5, 0.0}, {1.0, 1.0});   // on the kink
  add({3.0, 1.5, 0.0}, {1.0, 0.0});   // well separated
  add({-4.0, 2.0, 7.5}, {0.5, 2.0});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z(-5.0, 5.0), beta(0.1, 2.0), lambda(0.0, 2.0);
  for (int i = 0; i < n_random; ++i) {
    const Triplet t{z(rng), z(rng), z(rng)};
    const DtlParams p{beta(rng), lambda(rng)};
    add(t, p);
  }
  return rows;
}

void write_dtl_fixture_csv(std::span<const DtlFixtureRow> rows, std::ostream& os) {
  std::ostringstream out;
  out.precision(17);
  out << "z_p,z_a,z_n,beta,lambda,expected_loss\n";
  for (const auto& r : rows) {
    out << r.t.z_p << ',' << r.t.z_a << ',' << r.t.z_n << ',' << r.p.beta << ',' << r.p.lambda
        << ',' << r.expected_loss << '\n';
  }
  os << out.str();
}

}  // namespace driftplan
