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

#ifndef DRIFTPLAN_CEM_HPP_
#define DRIFTPLAN_CEM_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "driftplan/batch_optimizer.hpp"
#include "driftplan/bernstein.hpp"

namespace driftplan {

/// Gaussian over trajectory coefficients adapted by the cross-entropy loop.
/// With lateral-only sampling mu holds the lateral Bernstein coefficients;
/// with longitudinal sampling enabled it holds [cx; cy].
struct SamplingDistribution {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;

  Eigen::Index dim() const noexcept { return mu.size(); }
};

struct CemConfig {
  int n_samples = 1000;
  int n_elite = 80;
  /// Fresh smooth-noise samples appended to the elites at every refit.
  int n_noise = 20;
  int cem_iters = 3;
  /// Scale of the smoothness covariance used for the fresh noise.
  double noise_scale = 0.3;
  /// Scale of the smoothness covariance of a cold-start distribution.
  double init_scale = 0.75;
  std::uint64_t seed = 0;
  bool sample_longitudinal = false;

  /// Throws InvalidArgument unless all counts are >= 1 and
  /// n_elite + n_noise <= n_samples.
  void validate() const;
};

struct MetaCostParams {
  double kappa_max = 0.2;
  double road_width = 7.0;
  double w_curv = 10.0;
  double w_road = 10.0;

  void validate() const;
};

/// Regularizer added to every refitted covariance.
inline constexpr double kCovarianceRegularizer = 1e-6;

/// sigma^2 (A^T A)^-1 where A is the (dim+2) x dim second-difference matrix
/// including its boundary rows. Draws from it are smooth along the index.
Eigen::MatrixXd smoothness_covariance(int dim, double sigma);

/// A distribution centred on `mu` with smoothness covariance of scale `sigma`.
SamplingDistribution smooth_distribution(const Eigen::VectorXd& mu, double sigma);

/// n draws from the distribution. Throws NumericalError when sigma is not
/// symmetric positive semi-definite.
std::vector<Eigen::VectorXd> sample_coefficients(const SamplingDistribution& dist, int n,
                                                 std::mt19937_64& rng);

/// Turns raw draws into solver initializations: the sampled axis (or axes)
/// replace those of `nominal`, then boundary coefficients are overwritten so
/// each initialization meets b0 / bf.
std::vector<TrajectoryCoeffs> to_inits(std::span<const Eigen::VectorXd> draws,
                                       const TrajectoryCoeffs& nominal, const ProblemSpec& spec,
                                       const BasisSpec& basis, bool longitudinal);

std::vector<TrajectoryCoeffs> sample_inits(const SamplingDistribution& dist, int n,
                                           std::uint64_t seed, const TrajectoryCoeffs& nominal,
                                           const ProblemSpec& spec, const BasisSpec& basis,
                                           bool longitudinal);

/// Primary cost plus squared-hinge curvature and road-boundary penalties.
/// Throws SingularCurvatureError when the trajectory stops.
double meta_cost(const SolveResult& result, const TrajectorySamples& samples,
                 const MetaCostParams& params, const ProblemSpec& spec);

/// Indices of the q smallest costs in ascending cost order; ties go to the
/// lower index. NaN ranks last.
std::vector<std::size_t> select_elites(std::span<const double> costs, std::size_t q);

/// Mean and sample covariance (plus kCovarianceRegularizer * I) over the union
/// of elites and noise. Throws InvalidArgument when fewer than two vectors
/// are given or their dimensions disagree.
SamplingDistribution update_distribution(std::span<const Eigen::VectorXd> elites,
                                         std::span<const Eigen::VectorXd> fresh_noise);

/// Scores a batch of draws. Implementations fill `refined` with the vector to
/// refit the distribution from (the optimized coefficients, or the draw
/// itself) and `scores` with the ranking cost (+inf marks a rejected sample).
using BatchEvaluator = std::function<void(std::span<const Eigen::VectorXd> draws,
                                          std::vector<Eigen::VectorXd>& refined,
                                          std::vector<double>& scores)>;

struct CemOutcome {
  SamplingDistribution dist;
  /// Refined vector with the lowest score seen over all cycles.
  Eigen::VectorXd best;
  double best_score = 0.0;
  int best_cycle = -1;
  std::size_t best_index = 0;
  /// Best-so-far score after each cycle.
  std::vector<double> best_so_far;
  /// Distribution mean after each cycle.
  std::vector<Eigen::VectorXd> means;
};

/// sample -> evaluate -> select elites -> refit with smooth noise, repeated
/// cfg.cem_iters times. Fresh noise is drawn around the elite mean with
/// covariance `noise_cov`, in mirrored pairs so the noise mean equals the
/// elite mean. best_score stays +inf when every sample of every
/// cycle was rejected.
CemOutcome run_cem(SamplingDistribution dist, const CemConfig& cfg,
                   const Eigen::MatrixXd& noise_cov, std::mt19937_64& rng,
                   const BatchEvaluator& evaluate);

}  // namespace driftplan

#endif  // DRIFTPLAN_CEM_HPP_
