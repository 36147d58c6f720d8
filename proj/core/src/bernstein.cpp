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

#include "driftplan/bernstein.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// B_{i,n}(tau); zero outside 0 <= i <= n.
double bernstein(int i, int n, double tau) {
  if (i < 0 || i > n) return 0.0;
  return binomial(n, i) * std::pow(tau, i) * std::pow(1.0 - tau, n - i);
}

void check_axis(const Eigen::VectorXd& c, int expected, const char* axis) {
  if (c.size() != expected) {
    throw ShapeError(std::string("coefficient vector ") + axis + " has length " +
                     std::to_string(c.size()) + ", expected " + std::to_string(expected));
  }
}

}  // namespace

void BasisSpec::validate() const {
  if (degree < 3) throw InvalidArgument("basis degree must be at least 3");
  if (n_steps < degree + 1) throw InvalidArgument("basis needs n_steps >= degree + 1");
  if (!(dt > 0.0)) throw InvalidArgument("basis step dt must be positive");
}

BasisMatrices basis_matrices(const BasisSpec& spec) {
  spec.validate();
  const int n = spec.degree;
  const double T = spec.horizon();
  BasisMatrices m;
  m.P.resize(spec.n_steps, n + 1);
  m.Pd.resize(spec.n_steps, n + 1);
  m.Pdd.resize(spec.n_steps, n + 1);
  for (int k = 0; k < spec.n_steps; ++k) {
    const double tau = static_cast<double>(k) / (spec.n_steps - 1);
    for (int i = 0; i <= n; ++i) {
      m.P(k, i) = bernstein(i, n, tau);
      m.Pd(k, i) = n * (bernstein(i - 1, n - 1, tau) - bernstein(i, n - 1, tau)) / T;
      m.Pdd(k, i) = n * (n - 1) *
                    (bernstein(i - 2, n - 2, tau) - 2.0 * bernstein(i - 1, n - 2, tau) +
                     bernstein(i, n - 2, tau)) /
                    (T * T);
    }
  }
  return m;
}

Basis::Basis(const BasisSpec& spec) : spec_(spec), m_(basis_matrices(spec)) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m_.P);
  if (qr.rank() < m_.P.cols()) {
    throw NumericalError("Bernstein basis is rank deficient at the sample times");
  }
  pinv_ = qr.solve(Eigen::MatrixXd::Identity(m_.P.rows(), m_.P.rows()));
}

TrajectorySamples Basis::evaluate(const TrajectoryCoeffs& coeffs) const {
  check_axis(coeffs.cx, spec_.n_coeffs(), "cx");
  check_axis(coeffs.cy, spec_.n_coeffs(), "cy");
  TrajectorySamples s;
  s.x.noalias() = m_.P * coeffs.cx;
  s.y.noalias() = m_.P * coeffs.cy;
  s.dx.noalias() = m_.Pd * coeffs.cx;
  s.dy.noalias() = m_.Pd * coeffs.cy;
  s.ddx.noalias() = m_.Pdd * coeffs.cx;
  s.ddy.noalias() = m_.Pdd * coeffs.cy;
  return s;
}

Eigen::VectorXd Basis::fit_axis(const Eigen::VectorXd& positions) const {
  if (positions.size() != spec_.n_steps) {
    throw ShapeError("fit: expected " + std::to_string(spec_.n_steps) + " samples, got " +
                     std::to_string(positions.size()));
  }
  return pinv_ * positions;
}

TrajectoryCoeffs Basis::fit(const TrajectorySamples& samples) const {
  return {fit_axis(samples.x), fit_axis(samples.y)};
}

TrajectorySamples evaluate(const TrajectoryCoeffs& coeffs, const BasisSpec& spec) {
  return Basis(spec).evaluate(coeffs);
}

TrajectoryCoeffs fit(const TrajectorySamples& samples, const BasisSpec& spec) {
  return Basis(spec).fit(samples);
}

TrajectoryCoeffs straight_line(const BasisSpec& spec, double x0, double y0, double vx,
                               double vy) {
  const int n = spec.degree;
  const double T = spec.horizon();
  TrajectoryCoeffs c{Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1)};
  for (int i = 0; i <= n; ++i) {
    const double frac = static_cast<double>(i) / n;
    c.cx[i] = x0 + vx * T * frac;
    c.cy[i] = y0 + vy * T * frac;
  }
  return c;
}

}  // namespace driftplan
