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

#include "driftplan/batch_optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/Cholesky>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

constexpr double kRidge = 1e-9;

bool features_sorted(std::span<const FeatureAnchor> f) {
  return std::is_sorted(f.begin(), f.end(),
                        [](const FeatureAnchor& a, const FeatureAnchor& b) { return a.s < b.s; });
}

std::vector<FeatureAnchor> sorted_features(std::vector<FeatureAnchor> f) {
  std::stable_sort(f.begin(), f.end(),
                   [](const FeatureAnchor& a, const FeatureAnchor& b) { return a.s < b.s; });
  return f;
}

// Free-coefficient layout of one axis after eliminating boundary equalities.
struct AxisReduction {
  std::vector<int> free_idx;
  Eigen::MatrixXd Z;         // (n+1) x k
  Eigen::VectorXd c_fix;     // (n+1)
  Eigen::MatrixXd P, Pd, Pdd;  // N x k
  Eigen::VectorXd off, offd, offdd;
  Eigen::MatrixXd H_base;    // k x k, weights applied, no feature term
  // [P; Pd; Pdd] and [off; offd; offdd] for single-product evaluation.
  Eigen::MatrixXd S;
  Eigen::VectorXd soff;
  // Row-major copies for per-row rank-one updates.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> P_rows, Pd_rows, Pdd_rows;

  Eigen::Index k() const { return Z.cols(); }
};

AxisReduction reduce_axis(const Basis& basis, bool lateral, const Eigen::VectorXd& c_fix,
                          const CostWeights& w) {
  const int n = basis.spec().degree;
  AxisReduction r;
  for (int i = 3; i <= n - 3; ++i) r.free_idx.push_back(i);
  r.free_idx.push_back(n - 1);
  if (!lateral) r.free_idx.push_back(n);

  const auto k = static_cast<Eigen::Index>(r.free_idx.size());
  r.Z = Eigen::MatrixXd::Zero(n + 1, k);
  for (Eigen::Index j = 0; j < k; ++j) r.Z(r.free_idx[j], j) = 1.0;
  if (lateral) {
    // c_n = c_{n-1} + const, c_{n-2} = 2 c_{n-1} - c_n + const = c_{n-1} + const.
    r.Z(n, k - 1) = 1.0;
    r.Z(n - 2, k - 1) = 1.0;
  } else {
    // c_{n-2} = 2 c_{n-1} - c_n + const.
    r.Z(n - 2, k - 2) = 2.0;
    r.Z(n - 2, k - 1) = -1.0;
  }
  r.c_fix = c_fix;
  r.P = basis.P() * r.Z;
  r.Pd = basis.Pd() * r.Z;
  r.Pdd = basis.Pdd() * r.Z;
  r.off = basis.P() * c_fix;
  r.offd = basis.Pd() * c_fix;
  r.offdd = basis.Pdd() * c_fix;
  const Eigen::Index N = r.P.rows();
  r.S.resize(3 * N, k);
  r.S << r.P, r.Pd, r.Pdd;
  r.soff.resize(3 * N);
  r.soff << r.off, r.offd, r.offdd;
  r.P_rows = r.P;
  r.Pd_rows = r.Pd;
  r.Pdd_rows = r.Pdd;
  r.H_base = w.acc * r.Pdd.transpose() * r.Pdd + w.vel * r.Pd.transpose() * r.Pd;
  r.H_base.diagonal().array() += kRidge;
  return r;
}

Eigen::VectorXd gather(const Eigen::VectorXd& c, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = c[idx[j]];
  return out;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double Residuals::max_inequality() const noexcept {
  return std::max({speed_bound, accel_bound, collision});
}

void ProblemSpec::validate(int n_steps) const {
  if (!(v_max > 0.0)) throw InvalidArgument("v_max must be positive");
  if (!(a_max > 0.0)) throw InvalidArgument("a_max must be positive");
  if (!(feature_gate >= 0.0)) throw InvalidArgument("feature_gate must be non-negative");
  for (std::size_t j = 0; j < obstacles.size(); ++j) {
    const auto& o = obstacles[j];
    if (!(o.a > 0.0) || !(o.b > 0.0)) {
      throw InvalidArgument("obstacle " + std::to_string(j) + " has non-positive semi-axis");
    }
    if (o.x.size() != n_steps || o.y.size() != n_steps) {
      throw ShapeError("obstacle " + std::to_string(j) + " prediction has " +
                       std::to_string(o.x.size()) + " steps, expected " +
                       std::to_string(n_steps));
    }
  }
}

FeatureTargets feature_targets(std::span<const FeatureAnchor> features, double gate,
                               const Eigen::VectorXd& x) {
  FeatureTargets ft{Eigen::VectorXd::Zero(x.size()), Eigen::VectorXd::Zero(x.size())};
  if (features.empty()) return ft;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double lo = x[t];
    const double hi = x[t] + gate;
    auto it = std::lower_bound(features.begin(), features.end(), lo,
                               [](const FeatureAnchor& f, double s) { return f.s < s; });
    if (it == features.end() || it->s > hi) continue;
    // Nearest ahead is the first in sorted order; among equal s keep smaller |d|.
    const FeatureAnchor* best = &*it;
    for (auto jt = std::next(it); jt != features.end() && jt->s == it->s; ++jt) {
      if (std::abs(jt->d) < std::abs(best->d)) best = &*jt;
    }
    ft.d[t] = best->d;
    ft.weight[t] = best->weight;
  }
  return ft;
}

double primary_cost(const ProblemSpec& spec, const TrajectorySamples& s) {
  const auto& w = spec.weights;
  const double acc = (s.ddx.array().square() + s.ddy.array().square()).sum();
  const double vel =
      ((s.dx.array().square() + s.dy.array().square()).sqrt() - spec.v_des).square().sum();
  double feat = 0.0;
  if (!spec.features.empty()) {
    FeatureTargets ft;
    if (features_sorted(spec.features)) {
      ft = feature_targets(spec.features, spec.feature_gate, s.x);
    } else {
      const auto sorted = sorted_features(spec.features);
      ft = feature_targets(sorted, spec.feature_gate, s.x);
    }
    feat = (ft.weight.array() * (s.y - ft.d).array().square()).sum();
  }
  return w.acc * acc + w.feat * feat + w.vel * vel;
}

Eigen::MatrixXd collision_residual(const ProblemSpec& spec, const TrajectorySamples& s) {
  const Eigen::Index n = s.size();
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(spec.obstacles.size()));
  for (std::size_t j = 0; j < spec.obstacles.size(); ++j) {
    const auto& o = spec.obstacles[j];
    if (o.x.size() != n || o.y.size() != n) {
      throw ShapeError("obstacle prediction length does not match the trajectory");
    }
    const auto col = static_cast<Eigen::Index>(j);
    v.col(col) = (1.0 - ((s.x - o.x).array() / o.a).square() -
                  ((s.y - o.y).array() / o.b).square())
                     .max(0.0)
                     .matrix();
  }
  return v;
}

Residuals evaluate_residuals(const ProblemSpec& spec, const TrajectorySamples& s) {
  Residuals r;
  const Eigen::Index last = s.size() - 1;
  r.boundary = std::max({std::abs(s.x[0] - spec.b0.x), std::abs(s.y[0] - spec.b0.y),
                         std::abs(s.dx[0] - spec.b0.dx), std::abs(s.dy[0] - spec.b0.dy),
                         std::abs(s.ddx[0] - spec.b0.ddx), std::abs(s.ddy[0] - spec.b0.ddy),
                         std::abs(s.dy[last] - spec.bf.dy), std::abs(s.ddx[last] - spec.bf.ddx),
                         std::abs(s.ddy[last] - spec.bf.ddy)});
  const auto speed = (s.dx.array().square() + s.dy.array().square()).sqrt();
  const auto accel = (s.ddx.array().square() + s.ddy.array().square()).sqrt();
  r.speed_bound = std::max(0.0, speed.maxCoeff() - spec.v_max);
  r.accel_bound = std::max(0.0, accel.maxCoeff() - spec.a_max);
  if (!spec.obstacles.empty()) r.collision = collision_residual(spec, s).maxCoeff();
  return r;
}

TrajectoryCoeffs project_to_boundary(const TrajectoryCoeffs& c, const ProblemSpec& spec,
                                     const BasisSpec& basis) {
  const int n = basis.degree;
  if (n < 5) throw InvalidArgument("boundary elimination needs basis degree >= 5");
  if (c.cx.size() != n + 1 || c.cy.size() != n + 1) {
    throw ShapeError("coefficient vectors must have degree + 1 entries");
  }
  const double T = basis.horizon();
  const double vel_scale = T / n;
  const double acc_scale = T * T / (n * (n - 1.0));
  TrajectoryCoeffs out = c;

  auto set_start = [&](Eigen::VectorXd& v, double p, double dp, double ddp) {
    v[0] = p;
    v[1] = p + vel_scale * dp;
    v[2] = 2.0 * v[1] - v[0] + acc_scale * ddp;
  };
  set_start(out.cx, spec.b0.x, spec.b0.dx, spec.b0.ddx);
  set_start(out.cy, spec.b0.y, spec.b0.dy, spec.b0.ddy);

  out.cx[n - 2] = 2.0 * out.cx[n - 1] - out.cx[n] + acc_scale * spec.bf.ddx;
  out.cy[n] = out.cy[n - 1] + vel_scale * spec.bf.dy;
  out.cy[n - 2] = 2.0 * out.cy[n - 1] - out.cy[n] + acc_scale * spec.bf.ddy;
  return out;
}

struct BatchOptimizer::Impl {
  Basis basis;
  ProblemSpec spec;
  SolverSettings settings;
  AxisReduction ax;
  AxisReduction ay;

  Impl(const BasisSpec& b, ProblemSpec s, SolverSettings st)
      : basis(b), spec(std::move(s)), settings(st) {
    spec.validate(basis.spec().n_steps);
    if (basis.spec().degree < 5) {
      throw InvalidArgument("trajectory optimizer needs basis degree >= 5");
    }
    if (settings.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(settings.penalty_init > 0.0) || !(settings.penalty_growth >= 1.0) ||
        !(settings.penalty_shrink >= 1.0)) {
      throw InvalidArgument("penalty_init must be > 0, penalty_growth and penalty_shrink >= 1");
    }
    spec.features = sorted_features(std::move(spec.features));
    const int n = basis.spec().degree;
    const TrajectoryCoeffs zero{Eigen::VectorXd::Zero(n + 1), Eigen::VectorXd::Zero(n + 1)};
    const TrajectoryCoeffs fixed = project_to_boundary(zero, spec, basis.spec());
    ax = reduce_axis(basis, false, fixed.cx, spec.weights);
    ay = reduce_axis(basis, true, fixed.cy, spec.weights);
  }

  SolveResult solve(const TrajectoryCoeffs& init) const;
};

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double norm2(double a, double b) { return std::sqrt(a * a + b * b); }

void project_disk(double& px, double& py, double radius) {
  const double sq = px * px + py * py;
  if (sq > radius * radius) {
    const double f = radius / std::sqrt(sq);
    px *= f;
    py *= f;
  }
}

// Mutable per-solve state; sized once, reused across iterations.
struct Workspace {
  using Seg = Eigen::Map<Eigen::VectorXd>;
  // Stacked [position; velocity; acceleration] samples and their linear
  // right-hand-side weights, one per axis.
  Eigen::VectorXd X, Y, VX, VY;
  Seg x, dx, ddx, y, dy, ddy;
  Seg vp_x, vd_x, vdd_x, vp_y, vd_y, vdd_y;
  Eigen::VectorXd feat_d, feat_w;
  Eigen::MatrixXd lam_speed, lam_acc;     // N x 2
  std::vector<Eigen::MatrixXd> lam_coll;  // per obstacle, N x 2
  Eigen::VectorXd feat_mask;
  Eigen::MatrixXd Hy_feat_base;

  Workspace(Eigen::Index N, std::size_t J)
      : X(3 * N), Y(3 * N), VX(3 * N), VY(3 * N),
        x(X.data(), N), dx(X.data() + N, N), ddx(X.data() + 2 * N, N),
        y(Y.data(), N), dy(Y.data() + N, N), ddy(Y.data() + 2 * N, N),
        vp_x(VX.data(), N), vd_x(VX.data() + N, N), vdd_x(VX.data() + 2 * N, N),
        vp_y(VY.data(), N), vd_y(VY.data() + N, N), vdd_y(VY.data() + 2 * N, N),
        feat_d(Eigen::VectorXd::Zero(N)), feat_w(Eigen::VectorXd::Zero(N)),
        lam_speed(Eigen::MatrixXd::Zero(N, 2)), lam_acc(Eigen::MatrixXd::Zero(N, 2)),
        lam_coll(J, Eigen::MatrixXd::Zero(N, 2)), feat_mask(Eigen::VectorXd::Constant(N, -1.0)) {}

  void evaluate(const AxisReduction& ax, const AxisReduction& ay, const Eigen::VectorXd& xi_x,
                const Eigen::VectorXd& xi_y, const ProblemSpec& spec) {
    X = ax.soff;
    X.noalias() += ax.S * xi_x;
    Y = ay.soff;
    Y.noalias() += ay.S * xi_y;
    update_features(spec);
  }

  void update_features(const ProblemSpec& spec) {
    const auto& f = spec.features;
    if (f.empty()) return;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
      auto it = std::lower_bound(f.begin(), f.end(), x[t],
                                 [](const FeatureAnchor& a, double s) { return a.s < s; });
      if (it == f.end() || it->s > x[t] + spec.feature_gate) {
        feat_d[t] = 0.0;
        feat_w[t] = 0.0;
        continue;
      }
      const FeatureAnchor* best = &*it;
      for (auto jt = std::next(it); jt != f.end() && jt->s == it->s; ++jt) {
        if (std::abs(jt->d) < std::abs(best->d)) best = &*jt;
      }
      feat_d[t] = best->d;
      feat_w[t] = best->weight;
    }
  }

  double cost(const ProblemSpec& spec) const {
    const auto& w = spec.weights;
    double acc = 0.0, vel = 0.0, feat = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
      acc += ddx[t] * ddx[t] + ddy[t] * ddy[t];
      const double e = norm2(dx[t], dy[t]) - spec.v_des;
      vel += e * e;
      const double r = y[t] - feat_d[t];
      feat += feat_w[t] * r * r;
    }
    return w.acc * acc + w.feat * (spec.features.empty() ? 0.0 : feat) + w.vel * vel;
  }

  double violation(const ProblemSpec& spec) const {
    double v = 0.0;
    const double v2 = spec.v_max * spec.v_max, a2 = spec.a_max * spec.a_max;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
      const double sv = dx[t] * dx[t] + dy[t] * dy[t];
      if (sv > v2) v = std::max(v, std::sqrt(sv) - spec.v_max);
      const double sa = ddx[t] * ddx[t] + ddy[t] * ddy[t];
      if (sa > a2) v = std::max(v, std::sqrt(sa) - spec.a_max);
      for (const auto& o : spec.obstacles) {
        const double ex = (x[t] - o.x[t]) / o.a;
        const double ey = (y[t] - o.y[t]) / o.b;
        v = std::max(v, 1.0 - ex * ex - ey * ey);
      }
    }
    return v;
  }

  TrajectorySamples samples() const {
    return {Eigen::VectorXd(x), Eigen::VectorXd(y), Eigen::VectorXd(dx),
            Eigen::VectorXd(dy), Eigen::VectorXd(ddx), Eigen::VectorXd(ddy)};
  }
};

}  // namespace

SolveResult BatchOptimizer::Impl::solve(const TrajectoryCoeffs& init) const {
  const BasisSpec& bs = basis.spec();
  const Eigen::Index N = bs.n_steps;
  const auto J = spec.obstacles.size();
  const CostWeights& w = spec.weights;
  const double tol = settings.tolerance;
  const bool use_features = !spec.features.empty() && w.feat != 0.0;

  const TrajectoryCoeffs projected = project_to_boundary(init, spec, bs);
  Eigen::VectorXd xi_x = gather(projected.cx, ax.free_idx);
  Eigen::VectorXd xi_y = gather(projected.cy, ay.free_idx);
  if (!all_finite(xi_x) || !all_finite(xi_y)) {
    throw DivergenceError(0, "initial guess contains non-finite coefficients");
  }

  Workspace ws(N, J);
  ws.evaluate(ax, ay, xi_x, xi_y, spec);

  struct Best {
    Eigen::VectorXd xi_x, xi_y;
    double cost = std::numeric_limits<double>::infinity();
    double violation = std::numeric_limits<double>::infinity();
    bool feasible = false;
  } best;
  auto consider = [&](double violation) {
    const bool feasible = violation <= tol;
    if (!feasible && (best.feasible || violation > best.violation)) return;
    const double cost = ws.cost(spec);
    bool take = false;
    if (feasible) {
      take = !best.feasible || cost < best.cost;
    } else {
      take = violation < best.violation || cost < best.cost;
    }
    if (take) {
      best.xi_x = xi_x;
      best.xi_y = xi_y;
      best.cost = cost;
      best.violation = violation;
      best.feasible = feasible;
    }
  };

  double violation = ws.violation(spec);
  consider(violation);

  double rho = settings.penalty_init;
  double prev_violation = violation;
  bool converged = false;
  int iterations = 0;

  Eigen::MatrixXd Hx(ax.k(), ax.k());
  Eigen::MatrixXd Hy(ay.k(), ay.k());
  Eigen::LLT<Eigen::MatrixXd> llt_x(ax.k());
  Eigen::LLT<Eigen::MatrixXd> llt_y(ay.k());
  Eigen::VectorXd rhs_x(ax.k()), rhs_y(ay.k());
  Eigen::VectorXd prev_x(ax.k()), prev_y(ay.k());

  for (int it = 1; it <= settings.max_iterations; ++it) {
    iterations = it;
    const double inv_rho = 1.0 / rho;

    // Quadratic core: acceleration, speed tracking along the current
    // direction, feature attraction.
    Hx = ax.H_base;
    if (use_features) {
      if (ws.feat_w != ws.feat_mask) {
        ws.feat_mask = ws.feat_w;
        ws.Hy_feat_base = ay.H_base;
        ws.Hy_feat_base.noalias() +=
            w.feat * ay.P.transpose() * ws.feat_w.asDiagonal() * ay.P;
      }
      Hy = ws.Hy_feat_base;
      ws.vp_y = w.feat * ws.feat_w.cwiseProduct(ws.feat_d - ay.off);
    } else {
      Hy = ay.H_base;
      ws.vp_y.setZero();
    }
    ws.vp_x.setZero();
    ws.vdd_x = -w.acc * ax.offdd;
    ws.vdd_y = -w.acc * ay.offdd;
    for (Eigen::Index t = 0; t < N; ++t) {
      const double sp = norm2(ws.dx[t], ws.dy[t]);
      const double ux = sp > 1e-9 ? ws.dx[t] / sp : 1.0;
      const double uy = sp > 1e-9 ? ws.dy[t] / sp : 0.0;
      ws.vd_x[t] = w.vel * (spec.v_des * ux - ax.offd[t]);
      ws.vd_y[t] = w.vel * (spec.v_des * uy - ay.offd[t]);
    }

    // Active inequality constraints, linearized through their projections.
    auto hx = Hx.selfadjointView<Eigen::Lower>();
    auto hy = Hy.selfadjointView<Eigen::Lower>();
    for (Eigen::Index t = 0; t < N; ++t) {
      double zx = ws.dx[t] + ws.lam_speed(t, 0) * inv_rho;
      double zy = ws.dy[t] + ws.lam_speed(t, 1) * inv_rho;
      if (zx * zx + zy * zy > spec.v_max * spec.v_max) {
        project_disk(zx, zy, spec.v_max);
        hx.rankUpdate(ax.Pd_rows.row(t).transpose(), rho);
        hy.rankUpdate(ay.Pd_rows.row(t).transpose(), rho);
        ws.vd_x[t] += rho * (zx - ws.lam_speed(t, 0) * inv_rho - ax.offd[t]);
        ws.vd_y[t] += rho * (zy - ws.lam_speed(t, 1) * inv_rho - ay.offd[t]);
      }
      zx = ws.ddx[t] + ws.lam_acc(t, 0) * inv_rho;
      zy = ws.ddy[t] + ws.lam_acc(t, 1) * inv_rho;
      if (zx * zx + zy * zy > spec.a_max * spec.a_max) {
        project_disk(zx, zy, spec.a_max);
        hx.rankUpdate(ax.Pdd_rows.row(t).transpose(), rho);
        hy.rankUpdate(ay.Pdd_rows.row(t).transpose(), rho);
        ws.vdd_x[t] += rho * (zx - ws.lam_acc(t, 0) * inv_rho - ax.offdd[t]);
        ws.vdd_y[t] += rho * (zy - ws.lam_acc(t, 1) * inv_rho - ay.offdd[t]);
      }
      for (std::size_t j = 0; j < J; ++j) {
        const auto& o = spec.obstacles[j];
        const auto& lam = ws.lam_coll[j];
        const double qx = ws.x[t] - o.x[t] + lam(t, 0) * inv_rho;
        const double qy = ws.y[t] - o.y[t] + lam(t, 1) * inv_rho;
        double sx = qx / o.a;
        double sy = qy / o.b;
        const double r2 = sx * sx + sy * sy;
        if (r2 >= 1.0) continue;
        const double r = std::sqrt(r2);
        if (r > 1e-12) {
          sx /= r;
          sy /= r;
        } else {
          sx = 0.0;
          sy = 1.0;
        }
        hx.rankUpdate(ax.P_rows.row(t).transpose(), rho);
        hy.rankUpdate(ay.P_rows.row(t).transpose(), rho);
        ws.vp_x[t] += rho * (o.x[t] + o.a * sx - lam(t, 0) * inv_rho - ax.off[t]);
        ws.vp_y[t] += rho * (o.y[t] + o.b * sy - lam(t, 1) * inv_rho - ay.off[t]);
      }
    }

    rhs_x.noalias() = ax.S.transpose() * ws.VX;
    rhs_y.noalias() = ay.S.transpose() * ws.VY;

    llt_x.compute(Hx);
    llt_y.compute(Hy);
    if (llt_x.info() != Eigen::Success || llt_y.info() != Eigen::Success) {
      throw DivergenceError(it, "inner system lost positive definiteness at iteration " +
                                    std::to_string(it));
    }
    prev_x = xi_x;
    prev_y = xi_y;
    xi_x = llt_x.solve(rhs_x);
    xi_y = llt_y.solve(rhs_y);
    if (!all_finite(xi_x) || !all_finite(xi_y)) {
      throw DivergenceError(it, "non-finite iterate at iteration " + std::to_string(it));
    }
    const double step = std::max((ax.Z * (xi_x - prev_x)).cwiseAbs().maxCoeff(),
                                 (ay.Z * (xi_y - prev_y)).cwiseAbs().maxCoeff());
    ws.evaluate(ax, ay, xi_x, xi_y, spec);

    // Multiplier updates: lambda <- rho * (z - proj(z)).
    for (Eigen::Index t = 0; t < N; ++t) {
      double zx = ws.dx[t] + ws.lam_speed(t, 0) * inv_rho;
      double zy = ws.dy[t] + ws.lam_speed(t, 1) * inv_rho;
      double px = zx, py = zy;
      project_disk(px, py, spec.v_max);
      ws.lam_speed(t, 0) = rho * (zx - px);
      ws.lam_speed(t, 1) = rho * (zy - py);

      zx = ws.ddx[t] + ws.lam_acc(t, 0) * inv_rho;
      zy = ws.ddy[t] + ws.lam_acc(t, 1) * inv_rho;
      px = zx;
      py = zy;
      project_disk(px, py, spec.a_max);
      ws.lam_acc(t, 0) = rho * (zx - px);
      ws.lam_acc(t, 1) = rho * (zy - py);

      for (std::size_t j = 0; j < J; ++j) {
        const auto& o = spec.obstacles[j];
        auto& lam = ws.lam_coll[j];
        const double qx = ws.x[t] - o.x[t] + lam(t, 0) * inv_rho;
        const double qy = ws.y[t] - o.y[t] + lam(t, 1) * inv_rho;
        const double ex = qx / o.a, ey = qy / o.b;
        const double r2 = ex * ex + ey * ey;
        if (r2 >= 1.0) {
          lam(t, 0) = 0.0;
          lam(t, 1) = 0.0;
          continue;
        }
        const double r = std::sqrt(r2);
        if (r > 1e-12) {
          lam(t, 0) = rho * (qx - qx / r);
          lam(t, 1) = rho * (qy - qy / r);
        } else {
          lam(t, 0) = rho * qx;
          lam(t, 1) = rho * (qy - o.b);
        }
      }
    }

    violation = ws.violation(spec);
    consider(violation);

    if (violation <= tol && step <= settings.step_tolerance) {
      converged = true;
      break;
    }
    if (violation > tol && violation > 0.25 * prev_violation) {
      rho = std::min(rho * settings.penalty_growth, settings.penalty_max);
    } else if (violation <= tol) {
      rho = std::max(rho / settings.penalty_shrink, settings.penalty_init);
    }
    prev_violation = violation;
  }

  SolveResult result;
  result.coeffs.cx = ax.Z * best.xi_x + ax.c_fix;
  result.coeffs.cy = ay.Z * best.xi_y + ay.c_fix;
  ws.evaluate(ax, ay, best.xi_x, best.xi_y, spec);
  result.primary_cost = best.cost;
  result.residuals = evaluate_residuals(spec, ws.samples());
  result.converged = converged && best.feasible;
  result.iterations = iterations;
  return result;
}

BatchOptimizer::BatchOptimizer(const BasisSpec& basis, ProblemSpec spec, SolverSettings settings)
    : impl_(std::make_unique<Impl>(basis, std::move(spec), settings)) {}
BatchOptimizer::~BatchOptimizer() = default;
BatchOptimizer::BatchOptimizer(BatchOptimizer&&) noexcept = default;
BatchOptimizer& BatchOptimizer::operator=(BatchOptimizer&&) noexcept = default;

const Basis& BatchOptimizer::basis() const noexcept { return impl_->basis; }
const ProblemSpec& BatchOptimizer::spec() const noexcept { return impl_->spec; }
const SolverSettings& BatchOptimizer::settings() const noexcept { return impl_->settings; }

SolveResult BatchOptimizer::solve(const TrajectoryCoeffs& init) const {
  return impl_->solve(init);
}

std::vector<SolveResult> BatchOptimizer::solve_batch(
    std::span<const TrajectoryCoeffs> inits) const {
  std::vector<SolveResult> results(inits.size());
  auto run_one = [&](std::size_t i) {
    try {
      results[i] = impl_->solve(inits[i]);
    } catch (const std::exception& e) {
      results[i] = SolveResult{};
      results[i].error = e.what();
      results[i].primary_cost = std::numeric_limits<double>::infinity();
    }
  };

  unsigned threads = impl_->settings.threads > 0
                         ? static_cast<unsigned>(impl_->settings.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(inits.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < inits.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < inits.size(); i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
  }
  return results;
}

SolveResult solve_single(const ProblemSpec& spec, const TrajectoryCoeffs& init,
                         const SolverSettings& settings, const BasisSpec& basis) {
  return BatchOptimizer(basis, spec, settings).solve(init);
}

std::vector<SolveResult> solve_batch(const ProblemSpec& spec,
                                     std::span<const TrajectoryCoeffs> inits,
                                     const SolverSettings& settings, const BasisSpec& basis) {
  if (inits.empty()) throw InvalidArgument("solve_batch needs at least one initialization");
  return BatchOptimizer(basis, spec, settings).solve_batch(inits);
}

}  // namespace driftplan
