#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "scdopt/error.hpp"
#include "scdopt/linalg.hpp"

namespace scdopt::bundle {

struct QpOptions {
  int max_iterations = 2000;
  double kkt_tol = 1e-10;
};

/// Solution of  min (t/2)|G lambda + N mu|^2 + alpha^T lambda + s^T mu  over lambda in the unit
/// simplex and mu >= 0. With N empty this is the proximal-bundle dual subproblem.
struct QpSolution {
  Vec lambda;
  Vec mu;
  Vec aggregate;  // G lambda + N mu
  Vec step;       // -t * aggregate
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

namespace detail {

/// Euclidean projection onto {x >= 0, sum x = 1}.
inline Vec project_simplex(const Vec& v) {
  const Eigen::Index k = v.size();
  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

class SimplexConeQp {
 public:
  SimplexConeQp(const Mat& g, const Vec& alpha, const Mat& normals, const Vec& slack, double t)
      : k_(g.cols()), p_(normals.cols()), t_(t) {
    w_.resize(g.rows(), k_ + p_);
    w_ << g, normals;
    c_.resize(k_ + p_);
    c_ << alpha, slack;
    h_ = t_ * (w_.transpose() * w_);
    lipschitz_ = std::max(t_ * std::pow(spectral_norm(w_), 2), 1e-300);
  }

  Eigen::Index size() const { return k_ + p_; }

  double objective(const Vec& z) const { return 0.5 * t_ * (w_ * z).squaredNorm() + c_.dot(z); }
  Vec gradient(const Vec& z) const { return h_ * z + c_; }

  Vec project(const Vec& z) const {
    Vec out(z.size());
    out.head(k_) = project_simplex(z.head(k_));
    out.tail(p_) = z.tail(p_).cwiseMax(0.0);
    return out;
  }

  /// Natural residual |z - P(z - grad f(z))|_inf.
  double residual(const Vec& z) const { return (z - project(z - gradient(z))).lpNorm<Eigen::Infinity>(); }

  Vec initial_point() const {
    Vec z = Vec::Zero(size());
    Eigen::Index best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k_; ++i) {
      const double val = 0.5 * t_ * w_.col(i).squaredNorm() + c_(i);
      if (val < best_val) {
        best_val = val;
        best = i;
      }
    }
    z(best) = 1.0;
    return z;
  }

  /// Minimizes along z + tau d, tau in [0, tau_max]; returns true if z moved.
  bool line_search(Vec& z, const Vec& grad, const Vec& d, double tau_max) const {
    const double slope = grad.dot(d);
    if (!(slope < 0.0)) return false;
    const double curv = t_ * (w_ * d).squaredNorm();
    double tau = curv > 0.0 ? -slope / curv : tau_max;
    tau = std::min(tau, tau_max);
    if (!(tau > 0.0)) return false;
    z += tau * d;
    return true;
  }

  void projected_gradient_step(Vec& z) const {
    const Vec grad = gradient(z);
    const Vec d = project(z - grad / lipschitz_) - z;
    line_search(z, grad, d, 1.0);
    clean(z);
  }

  void pairwise_frank_wolfe_step(Vec& z) const {
    if (k_ < 2) return;
    const Vec grad = gradient(z);
    Eigen::Index toward = 0;
    grad.head(k_).minCoeff(&toward);
    Eigen::Index away = -1;
    double away_val = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k_; ++i) {
      if (z(i) > 0.0 && grad(i) > away_val) {
        away_val = grad(i);
        away = i;
      }
    }
    if (away < 0 || away == toward) return;
    Vec d = Vec::Zero(size());
    d(toward) = 1.0;
    d(away) = -1.0;
    line_search(z, grad, d, z(away));
    clean(z);
  }

  void cone_coordinate_steps(Vec& z) const {
    for (Eigen::Index j = k_; j < k_ + p_; ++j) {
      const double hjj = h_(j, j);
      if (hjj <= 0.0) continue;
      const double gj = h_.row(j).dot(z) + c_(j);
      z(j) = std::max(0.0, z(j) - gj / hjj);
    }
  }

  /// Solves the equality-constrained problem on the current support exactly.
  bool polish(Vec& z) const {
    std::vector<Eigen::Index> support;
    Eigen::Index simplex_count = 0;
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (z(i) > 0.0) {
        support.push_back(i);
        if (i < k_) ++simplex_count;
      }
    }
    if (simplex_count == 0) return false;
    const auto s = static_cast<Eigen::Index>(support.size());
    Mat kkt = Mat::Zero(s + 1, s + 1);
    Vec rhs(s + 1);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = 0; b < s; ++b) kkt(a, b) = h_(support[a], support[b]);
      const bool in_simplex = support[a] < k_;
      kkt(a, s) = in_simplex ? -1.0 : 0.0;
      kkt(s, a) = in_simplex ? 1.0 : 0.0;
      rhs(a) = -c_(support[a]);
    }
    rhs(s) = 1.0;
    const Eigen::CompleteOrthogonalDecomposition<Mat> cod(kkt);
    const Vec sol = cod.solve(rhs);
    const double scale = std::max({1.0, kkt.lpNorm<Eigen::Infinity>(), rhs.lpNorm<Eigen::Infinity>()});
    if (!sol.allFinite() || (kkt * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * scale) return false;
    Vec candidate = Vec::Zero(size());
    for (Eigen::Index a = 0; a < s; ++a) {
      if (sol(a) < -1e-12) return false;
      candidate(support[a]) = std::max(sol(a), 0.0);
    }
    const double lam_sum = candidate.head(k_).sum();
    if (!(lam_sum > 0.0)) return false;
    candidate.head(k_) /= lam_sum;
    const double current = objective(z);
    if (objective(candidate) > current + 1e-14 * std::max(1.0, std::abs(current))) return false;
    if (residual(candidate) > residual(z)) return false;
    z = std::move(candidate);
    return true;
  }

  QpSolution solve(const QpOptions& opts) const {
    Vec z = initial_point();
    const double tol = opts.kkt_tol * std::max(1.0, lipschitz_);
    int it = 0;
    double res = residual(z);
    while (res > tol && it < opts.max_iterations) {
      ++it;
      projected_gradient_step(z);
      pairwise_frank_wolfe_step(z);
      cone_coordinate_steps(z);
      res = residual(z);
      if (res > tol && polish(z)) res = residual(z);
    }
    QpSolution out;
    out.lambda = z.head(k_);
    out.mu = z.tail(p_);
    out.aggregate = w_ * z;
    out.step = -t_ * out.aggregate;
    out.objective = objective(z);
    out.kkt_residual = res;
    out.iterations = it;
    return out;
  }

 private:
  /// Removes roundoff drift off the feasible set.
  void clean(Vec& z) const {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (z(i) < 1e-300) z(i) = 0.0;
    }
    const double sum = z.head(k_).sum();
    if (sum > 0.0) z.head(k_) /= sum;
  }

  Eigen::Index k_;
  Eigen::Index p_;
  double t_;
  Mat w_;
  Vec c_;
  Mat h_;
  double lipschitz_;
};

}  // namespace detail

inline QpSolution simplex_cone_qp(const Mat& g, const Vec& alpha, const Mat& normals, const Vec& slack, double t,
                                  const QpOptions& opts = {}) {
  if (g.cols() < 1) throw DimensionError("simplex_cone_qp: need at least one bundle element");
  if (alpha.size() != g.cols()) throw DimensionError("simplex_cone_qp: alpha size differs from bundle size");
  if (normals.cols() > 0 && normals.rows() != g.rows()) throw DimensionError("simplex_cone_qp: normal size mismatch");
  if (slack.size() != normals.cols()) throw DimensionError("simplex_cone_qp: slack size differs from normal count");
  if (!(t > 0.0)) throw DimensionError("simplex_cone_qp: t must be positive");
  Mat normals_fixed = normals;
  if (normals.cols() == 0) normals_fixed.resize(g.rows(), 0);
  return detail::SimplexConeQp(g, alpha, normals_fixed, slack, t).solve(opts);
}

/// min over the unit simplex of (t/2)|G lambda|^2 + alpha^T lambda; step d = -t G lambda.
inline QpSolution simplex_qp(const Mat& g, const Vec& alpha, double t, const QpOptions& opts = {}) {
  return simplex_cone_qp(g, alpha, Mat(g.rows(), 0), Vec(0), t, opts);
}

/// Distance from v to conv(columns of vertices) + cone(columns of generators).
inline double hull_cone_distance(const Vec& v, const Mat& vertices, const Mat& generators) {
  if (vertices.cols() < 1) throw DimensionError("hull_cone_distance: empty vertex set");
  if (vertices.rows() != v.size()) throw DimensionError("hull_cone_distance: vertex size mismatch");
  const Mat shifted = vertices.colwise() - v;
  const QpSolution sol = simplex_cone_qp(shifted, Vec::Zero(vertices.cols()), generators,
                                         Vec::Zero(generators.cols()), 1.0);
  return sol.aggregate.norm();
}

inline double hull_distance(const Vec& v, const Mat& vertices) {
  return hull_cone_distance(v, vertices, Mat(v.size(), 0));
}

/// True iff the distance from v to the convex hull of the vertex columns is at most tol.
inline bool hull_membership(const Vec& v, const Mat& vertices, double tol) { return hull_distance(v, vertices) <= tol; }

inline Mat columns(const std::vector<Vec>& vs) {
  if (vs.empty()) return {};
  Mat out(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = vs[i];
  return out;
}

}  // namespace scdopt::bundle
