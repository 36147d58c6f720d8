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

#include "driftplan/cem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "driftplan/errors.hpp"
#include "driftplan/frenet.hpp"

namespace driftplan {
namespace {

// Returns L with L L^T = sigma, or throws when sigma is not PSD.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw ShapeError("covariance must be square");
  if (!sigma.allFinite()) throw NumericalError("covariance has non-finite entries");
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (asym > 1e-9 * scale) throw NumericalError("covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -1e-9 * scale) {
    throw NumericalError("covariance is not positive semi-definite (min eigenvalue " +
                         std::to_string(ev.minCoeff()) + ")");
  }
  return eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

void CemConfig::validate() const {
  if (n_samples < 1 || n_elite < 1 || n_noise < 1 || cem_iters < 1) {
    throw InvalidArgument("CEM counts must all be >= 1");
  }
  if (n_elite + n_noise > n_samples) {
    throw InvalidArgument("CEM needs n_elite + n_noise <= n_samples");
  }
  if (!(noise_scale >= 0.0) || !(init_scale >= 0.0)) {
    throw InvalidArgument("CEM noise scales must be non-negative");
  }
}

void MetaCostParams::validate() const {
  if (!(kappa_max > 0.0)) throw InvalidArgument("kappa_max must be positive");
  if (!(road_width > 0.0)) throw InvalidArgument("road width must be positive");
}

Eigen::MatrixXd smoothness_covariance(int dim, double sigma) {
  if (dim < 3) throw InvalidArgument("smoothness covariance needs dim >= 3");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim + 2, dim);
  for (int r = 0; r < dim + 2; ++r) {
    const int cols[3] = {r - 2, r - 1, r};
    const double vals[3] = {1.0, -2.0, 1.0};
    for (int k = 0; k < 3; ++k) {
      if (cols[k] >= 0 && cols[k] < dim) A(r, cols[k]) = vals[k];
    }
  }
  const Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::LLT<Eigen::MatrixXd> llt(AtA);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("second-difference Gram matrix is singular");
  }
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  cov = 0.5 * (cov + cov.transpose());
  return sigma * sigma * cov;
}

SamplingDistribution smooth_distribution(const Eigen::VectorXd& mu, double sigma) {
  return {mu, smoothness_covariance(static_cast<int>(mu.size()), sigma)};
}

std::vector<Eigen::VectorXd> sample_coefficients(const SamplingDistribution& dist, int n,
                                                 std::mt19937_64& rng) {
  if (n < 0) throw InvalidArgument("sample count must be non-negative");
  if (dist.sigma.rows() != dist.dim()) throw ShapeError("mu and sigma dimensions differ");
  const Eigen::MatrixXd L = psd_factor(dist.sigma);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd z(dist.dim());
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    out.emplace_back(dist.mu + L * z);
  }
  return out;
}

std::vector<TrajectoryCoeffs> to_inits(std::span<const Eigen::VectorXd> draws,
                                       const TrajectoryCoeffs& nominal, const ProblemSpec& spec,
                                       const BasisSpec& basis, bool longitudinal) {
  const Eigen::Index nc = basis.n_coeffs();
  std::vector<TrajectoryCoeffs> inits;
  inits.reserve(draws.size());
  for (const auto& d : draws) {
    TrajectoryCoeffs c = nominal;
    if (longitudinal) {
      if (d.size() != 2 * nc) throw ShapeError("draw must hold [cx; cy]");
      c.cx = d.head(nc);
      c.cy = d.tail(nc);
    } else {
      if (d.size() != nc) throw ShapeError("draw must hold the lateral coefficients");
      c.cy = d;
    }
    inits.push_back(project_to_boundary(c, spec, basis));
  }
  return inits;
}

std::vector<TrajectoryCoeffs> sample_inits(const SamplingDistribution& dist, int n,
                                           std::uint64_t seed, const TrajectoryCoeffs& nominal,
                                           const ProblemSpec& spec, const BasisSpec& basis,
                                           bool longitudinal) {
  std::mt19937_64 rng(seed);
  const auto draws = sample_coefficients(dist, n, rng);
  return to_inits(draws, nominal, spec, basis, longitudinal);
}

double meta_cost(const SolveResult& result, const TrajectorySamples& s,
                 const MetaCostParams& params, const ProblemSpec& spec) {
  const auto kappa = curvature(std::span(s.x.data(), s.x.size()), std::span(s.y.data(), s.y.size()),
                               std::span(s.dx.data(), s.dx.size()),
                               std::span(s.dy.data(), s.dy.size()),
                               std::span(s.ddx.data(), s.ddx.size()),
                               std::span(s.ddy.data(), s.ddy.size()));
  double curv = 0.0;
  for (const double k : kappa) {
    const double e = std::max(0.0, std::abs(k) - params.kappa_max);
    curv += e * e;
  }
  double road = 0.0;
  const double half = 0.5 * params.road_width;
  for (Eigen::Index t = 0; t < s.y.size(); ++t) {
    const double e = std::max(0.0, std::abs(s.y[t]) - half);
    road += e * e;
  }
  const double primary =
      std::isfinite(result.primary_cost) ? result.primary_cost : primary_cost(spec, s);
  return primary + params.w_curv * curv + params.w_road * road;
}

std::vector<std::size_t> select_elites(std::span<const double> costs, std::size_t q) {
  if (q > costs.size()) throw InvalidArgument("cannot select more elites than samples");
  std::vector<std::size_t> idx(costs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    return std::isnan(costs[i]) ? std::numeric_limits<double>::infinity() : costs[i];
  };
  auto less = [&](std::size_t a, std::size_t b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    const bool na = std::isnan(costs[a]), nb = std::isnan(costs[b]);
    if (na != nb) return nb;
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q), idx.end(), less);
  idx.resize(q);
  return idx;
}

SamplingDistribution update_distribution(std::span<const Eigen::VectorXd> elites,
                                         std::span<const Eigen::VectorXd> fresh_noise) {
  const std::size_t total = elites.size() + fresh_noise.size();
  if (total < 2) throw InvalidArgument("distribution refit needs at least two samples");
  const Eigen::Index dim = elites.empty() ? fresh_noise.front().size() : elites.front().size();
  Eigen::MatrixXd X(dim, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (const auto* set : {&elites, &fresh_noise}) {
    for (const auto& v : *set) {
      if (v.size() != dim) throw InvalidArgument("refit samples differ in dimension");
      X.col(col++) = v;
    }
  }
  SamplingDistribution d;
  d.mu = X.rowwise().mean();
  const Eigen::MatrixXd centered = X.colwise() - d.mu;
  d.sigma = centered * centered.transpose() / static_cast<double>(total - 1);
  d.sigma.diagonal().array() += kCovarianceRegularizer;
  return d;
}

CemOutcome run_cem(SamplingDistribution dist, const CemConfig& cfg,
                   const Eigen::MatrixXd& noise_cov, std::mt19937_64& rng,
                   const BatchEvaluator& evaluate) {
  cfg.validate();
  if (noise_cov.rows() != dist.dim() || noise_cov.cols() != dist.dim()) {
    throw ShapeError("noise covariance does not match the distribution dimension");
  }
  const SamplingDistribution noise_shape{Eigen::VectorXd::Zero(dist.dim()), noise_cov};

  CemOutcome out;
  out.best_score = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> refined;
  std::vector<double> scores;

  for (int cycle = 0; cycle < cfg.cem_iters; ++cycle) {
    const auto draws = sample_coefficients(dist, cfg.n_samples, rng);
    refined.assign(draws.size(), Eigen::VectorXd());
    scores.assign(draws.size(), std::numeric_limits<double>::infinity());
    evaluate(draws, refined, scores);

    const auto order = select_elites(scores, static_cast<std::size_t>(cfg.n_elite));
    std::vector<Eigen::VectorXd> elites;
    elites.reserve(order.size());
    for (const std::size_t i : order) {
      if (!std::isfinite(scores[i])) break;
      elites.push_back(refined[i]);
    }
    if (!order.empty() && std::isfinite(scores[order.front()]) &&
        scores[order.front()] < out.best_score) {
      out.best_score = scores[order.front()];
      out.best = refined[order.front()];
      out.best_cycle = cycle;
      out.best_index = order.front();
    }

    if (!elites.empty()) {
      Eigen::VectorXd center = Eigen::VectorXd::Zero(dist.dim());
      for (const auto& e : elites) center += e;
      center /= static_cast<double>(elites.size());
      // Antithetic pairs: the noise widens the spread without moving the mean.
      const auto half = sample_coefficients(noise_shape, cfg.n_noise / 2, rng);
      std::vector<Eigen::VectorXd> noise;
      noise.reserve(static_cast<std::size_t>(cfg.n_noise));
      for (const auto& e : half) {
        noise.push_back(center + e);
        noise.push_back(center - e);
      }
      if (cfg.n_noise % 2 != 0) noise.push_back(center);
      dist = update_distribution(elites, noise);
    }
    out.best_so_far.push_back(out.best_score);
    out.means.push_back(dist.mu);
  }
  out.dist = std::move(dist);
  return out;
}

}  // namespace driftplan
