#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "scdopt/sampling.hpp"
#include "scdopt/simplex_qp.hpp"

namespace scdopt::testing {

inline double qp_objective(const Mat& g, const Vec& alpha, double t, const Vec& lambda) {
  return 0.5 * t * (g * lambda).squaredNorm() + alpha.dot(lambda);
}

/// Exact minimum over the simplex by solving the KKT system on every face (k small).
inline double qp_face_enumeration(const Mat& g, const Vec& alpha, double t) {
  const Eigen::Index k = g.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const auto s = static_cast<Eigen::Index>(idx.size());
    Mat gs(g.rows(), s);
    Vec as(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      gs.col(j) = g.col(idx[static_cast<std::size_t>(j)]);
      as(j) = alpha(idx[static_cast<std::size_t>(j)]);
    }
    // [t Gs^T Gs  1; 1^T 0] [lambda; nu] = [-as; 1]
    Mat kkt = Mat::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = t * gs.transpose() * gs;
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    Vec rhs(s + 1);
    rhs << -as, 1.0;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) continue;
    const Vec lam = sol.head(s);
    if (lam.minCoeff() < -1e-12) continue;
    Vec full = Vec::Zero(k);
    for (Eigen::Index j = 0; j < s; ++j) full(idx[static_cast<std::size_t>(j)]) = std::max(0.0, lam(j));
    full /= full.sum();
    best = std::min(best, qp_objective(g, alpha, t, full));
  }
  return best;
}

/// Minimum over `points` low-discrepancy points of the simplex (k <= 3), vertices included.
inline double qp_grid_search(const Mat& g, const Vec& alpha, double t, int points, std::uint64_t seed = kDefaultSeed) {
  const Eigen::Index k = g.cols();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) best = std::min(best, qp_objective(g, alpha, t, Vec::Unit(k, i)));
  if (k == 1) return best;
  LowDiscrepancy gen(2, seed);
  Vec lam(k);
  for (int i = 0; i < points; ++i) {
    const Vec u = gen.next();
    if (k == 2) {
      lam << u(0), 1.0 - u(0);
    } else {
      const double r = std::sqrt(u(0));
      lam << 1.0 - r, r * (1.0 - u(1)), r * u(1);
    }
    best = std::min(best, qp_objective(g, alpha, t, lam));
  }
  return best;
}

}  // namespace scdopt::testing
