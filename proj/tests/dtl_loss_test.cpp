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
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "driftplan/dtl_loss.hpp"
#include "driftplan/errors.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

namespace driftplan {
namespace {

using testing::for_all;
using testing::Gen;

TEST(DtlLoss, Examples) {
  EXPECT_EQ(dtl_loss({0.0, 0.0, 0.0}, {0.7, 1.0}), 0.7);
  EXPECT_EQ(dtl_loss({2.0, 1.0, 0.0}), 2.0);
  EXPECT_EQ(dtl_loss({0.0, 0.0, 5.0}, {1.0, 0.0}), 6.0);
  EXPECT_EQ(dtl_loss({3.0, 1.5, 0.0}, {1.0, 0.0}), 0.0);
}

TEST(DtlLoss, ParamValidation) {
  EXPECT_THROW((DtlParams{0.0, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((DtlParams{1.0, -1e-9}.validate()), InvalidArgument);
  EXPECT_NO_THROW((DtlParams{0.1, 0.0}.validate()));
}

TEST(DtlGrad, Examples) {
  const auto g = dtl_grad({-1.0, 0.0, 1.0});
  EXPECT_EQ(g.d_zp, -3.0);
  EXPECT_EQ(g.d_za, 0.0);
  EXPECT_EQ(g.d_zn, 3.0);
  // Inactive hinge: only the pull towards the anchor remains.
  const auto h = dtl_grad({2.0, 1.0, 0.0});
  EXPECT_EQ(h.d_zp, -2.0 * (1.0 - 2.0));
  EXPECT_EQ(h.d_za, 2.0 * ((1.0 - 0.0) + (1.0 - 2.0)));
  EXPECT_EQ(h.d_zn, -2.0 * (1.0 - 0.0));
  // On the kink the hinge contributes nothing.
  const auto k = dtl_grad({1.0, 0.5, 0.0}, {1.0, 0.0});
  EXPECT_EQ(k.d_zp, 0.0);
  EXPECT_EQ(k.d_zn, 0.0);
}

TEST(DtlProperty, MatchesBranchOracle) {
  for_all(500, 70, [](Gen& g) {
    const Triplet t{g.uniform(-5, 5), g.uniform(-5, 5), g.uniform(-5, 5)};
    const DtlParams p{g.uniform(0.1, 2.0), g.uniform(0.0, 2.0)};
    const double want = oracle::dtl(t.z_p, t.z_a, t.z_n, p.beta, p.lambda);
    EXPECT_NEAR(dtl_loss(t, p), want, 1e-12 * (1.0 + std::abs(want)));
    EXPECT_GE(dtl_loss(t, p), 0.0);
  });
}

TEST(DtlProperty, GradientMatchesFiniteDifferences) {
  int checked = 0;
  Gen g(71);
  while (checked < 100) {
    const Triplet t{g.uniform(-5, 5), g.uniform(-5, 5), g.uniform(-5, 5)};
    const DtlParams p{g.uniform(0.1, 2.0), g.uniform(0.0, 2.0)};
    if (std::abs(t.z_n - t.z_p + p.beta) < 1e-3) continue;
    ++checked;
    const auto an = dtl_grad(t, p);
    const auto f = [&](double dp, double da, double dn) {
      return dtl_loss({t.z_p + dp, t.z_a + da, t.z_n + dn}, p);
    };
    const double fd[3] = {oracle::central_difference([&](double e) { return f(e, 0, 0); }, 0.0, 1e-5),
                          oracle::central_difference([&](double e) { return f(0, e, 0); }, 0.0, 1e-5),
                          oracle::central_difference([&](double e) { return f(0, 0, e); }, 0.0, 1e-5)};
    const double got[3] = {an.d_zp, an.d_za, an.d_zn};
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(got[i], fd[i], 1e-6 * std::max(1.0, std::abs(fd[i]))) << "component " << i;
    }
  }
}

TEST(DtlProperty, TranslationInvariant) {
  for_all(200, 72, [](Gen& g) {
    const Triplet t{g.uniform(-5, 5), g.uniform(-5, 5), g.uniform(-5, 5)};
    const DtlParams p{g.uniform(0.1, 2.0), g.uniform(0.0, 2.0)};
    const double c = g.uniform(-10, 10);
    EXPECT_NEAR(dtl_loss(t, p), dtl_loss({t.z_p + c, t.z_a + c, t.z_n + c}, p), 1e-9);
    const auto a = dtl_grad(t, p);
    EXPECT_NEAR(a.d_zp + a.d_za + a.d_zn, 0.0, 1e-9);
  });
}

TEST(DtlProperty, SmallLambdaWellSeparatedVanishes) {
  for_all(100, 73, [](Gen& g) {
    const double zn = g.uniform(-5, 0);
    const double beta = g.uniform(0.1, 1.0);
    const Triplet t{zn + beta + g.uniform(0.1, 3.0), g.uniform(-5, 5), zn};
    EXPECT_LT(dtl_loss(t, {beta, 1e-9}), 1e-6);
    EXPECT_EQ(dtl_loss(t, {beta, 0.0}), 0.0);
  });
}

TEST(DtlFixture, RowsAndCsv) {
  const auto rows = dtl_fixture(10, 5);
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[0].expected_loss, 1.0);
  EXPECT_EQ(rows[1].expected_loss, 2.0);
  EXPECT_EQ(rows[2].expected_loss, 6.0);
  for (const auto& r : rows) EXPECT_EQ(r.expected_loss, dtl_loss(r.t, r.p));
  EXPECT_EQ(dtl_fixture(10, 5)[12].t.z_a, rows[12].t.z_a);
  EXPECT_THROW(dtl_fixture(-1, 0), InvalidArgument);

  std::ostringstream os;
  write_dtl_fixture_csv(rows, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "z_p,z_a,z_n,beta,lambda,expected_loss");
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    double v[6];
    char comma;
    std::istringstream ls(line);
    ls >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4] >> comma >> v[5];
    const auto& r = rows[n - 1];
    EXPECT_EQ(v[0], r.t.z_p);
    EXPECT_EQ(v[5], r.expected_loss);
  }
  EXPECT_EQ(n, 16);
}

}  // namespace
}  // namespace driftplan
