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

#ifndef DRIFTPLAN_DTL_LOSS_HPP_
#define DRIFTPLAN_DTL_LOSS_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace driftplan {

/// Scalar ranks of the positive, anchor and negative samples.
struct Triplet {
  double z_p = 0.0;
  double z_a = 0.0;
  double z_n = 0.0;
};

struct DtlParams {
  double beta = 1.0;
  double lambda = 1.0;

  void validate() const;
};

/// max(0, z_n - z_p + beta) + lambda * ((z_a - z_n)^2 + (z_a - z_p)^2)
double dtl_loss(const Triplet& t, const DtlParams& p = {});

struct DtlGradient {
  double d_zp = 0.0;
  double d_za = 0.0;
  double d_zn = 0.0;
};

/// Subgradient; the hinge contributes 0 at its kink (z_n - z_p + beta == 0).
DtlGradient dtl_grad(const Triplet& t, const DtlParams& p = {});

struct DtlFixtureRow {
  Triplet t;
  DtlParams p;
  double expected_loss = 0.0;
};

/// Hand-picked edge cases followed by `n_random` seeded random rows.
std::vector<DtlFixtureRow> dtl_fixture(int n_random, std::uint64_t seed);

/// CSV header z_p,z_a,z_n,beta,lambda,expected_loss; values printed with 17
/// significant digits.
void write_dtl_fixture_csv(std::span<const DtlFixtureRow> rows, std::ostream& os);

}  // namespace driftplan

#endif  // DRIFTPLAN_DTL_LOSS_HPP_
