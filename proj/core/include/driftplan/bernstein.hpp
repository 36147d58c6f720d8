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

#ifndef DRIFTPLAN_BERNSTEIN_HPP_
#define DRIFTPLAN_BERNSTEIN_HPP_

#include <Eigen/Core>

namespace driftplan {

/// Polynomial degree, sample count and step of one planning horizon.
/// Samples sit at t_k = k * dt for k = 0 .. n_steps - 1, so the horizon spans
/// (n_steps - 1) * dt seconds and both endpoints are sampled.
struct BasisSpec {
  int degree = 10;
  int n_steps = 100;
  double dt = 0.06;

  double horizon() const noexcept { return (n_steps - 1) * dt; }
  int n_coeffs() const noexcept { return degree + 1; }
  /// Throws InvalidArgument unless degree >= 3, n_steps >= degree + 1, dt > 0.
  void validate() const;
};

/// Bernstein coefficients of the longitudinal (cx) and lateral (cy) axis.
struct TrajectoryCoeffs {
  Eigen::VectorXd cx;
  Eigen::VectorXd cy;
};

/// Position, velocity and acceleration per step.
struct TrajectorySamples {
  Eigen::VectorXd x, y;
  Eigen::VectorXd dx, dy;
  Eigen::VectorXd ddx, ddy;

  Eigen::Index size() const noexcept { return x.size(); }
};

/// Evaluation matrices (n_steps x degree+1) of the Bernstein basis and its
/// first two time derivatives.
struct BasisMatrices {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Pd;
  Eigen::MatrixXd Pdd;
};

BasisMatrices basis_matrices(const BasisSpec& spec);

/// A basis with its matrices built once; immutable and safe to share.
class Basis {
 public:
  explicit Basis(const BasisSpec& spec);

  const BasisSpec& spec() const noexcept { return spec_; }
  const BasisMatrices& matrices() const noexcept { return m_; }
  const Eigen::MatrixXd& P() const noexcept { return m_.P; }
  const Eigen::MatrixXd& Pd() const noexcept { return m_.Pd; }
  const Eigen::MatrixXd& Pdd() const noexcept { return m_.Pdd; }

  /// Throws ShapeError when a coefficient vector is not degree+1 long.
  TrajectorySamples evaluate(const TrajectoryCoeffs& coeffs) const;
  /// Least-squares projection of the sampled positions onto the basis.
  /// Throws ShapeError on a length mismatch.
  TrajectoryCoeffs fit(const TrajectorySamples& samples) const;
  /// Same projection for a single axis.
  Eigen::VectorXd fit_axis(const Eigen::VectorXd& positions) const;

 private:
  BasisSpec spec_;
  BasisMatrices m_;
  Eigen::MatrixXd pinv_;  // (P^T P)^-1 P^T
};

TrajectorySamples evaluate(const TrajectoryCoeffs& coeffs, const BasisSpec& spec);
/// Throws NumericalError when the basis is rank deficient at the sample times.
TrajectoryCoeffs fit(const TrajectorySamples& samples, const BasisSpec& spec);

/// Coefficients of the straight constant-velocity line from (x0, y0) moving at
/// (vx, vy). Bernstein coefficients of a linear polynomial are equispaced.
TrajectoryCoeffs straight_line(const BasisSpec& spec, double x0, double y0, double vx, double vy);

}  // namespace driftplan

#endif  // DRIFTPLAN_BERNSTEIN_HPP_
