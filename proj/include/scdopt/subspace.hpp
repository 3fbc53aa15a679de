#pragma once

#include <cmath>
#include <string>

#include "scdopt/error.hpp"
#include "scdopt/linalg.hpp"

namespace scdopt {

/// Block sizes of an ambient space R^{n+m}, first block n.
struct Split {
  Eigen::Index n = 0;
  Eigen::Index m = 0;

  Eigen::Index ambient() const noexcept { return n + m; }
  Split swapped() const noexcept { return {m, n}; }
  friend bool operator==(const Split&, const Split&) = default;
};

/// Tolerance under which two subspaces are treated as equal.
inline constexpr double kSubspaceEqualityTol = 1e-8;
/// Condition number of the y*-block beyond which a subspace is not regular.
inline constexpr double kRegularityCondLimit = 1e10;

/// Linear subspace of R^{n+m}, stored as an orthonormal basis.
///
/// Elements of the Grassmannian Z_{n,m} have dimension exactly n; the type also
/// admits other dimensions so that orthogonal complements can be represented.
class Subspace {
 public:
  Subspace() = default;

  /// Span of the columns of `spanning`, re-orthonormalized.
  static Subspace span(const Mat& spanning, Split split) {
    if (spanning.rows() != split.ambient()) {
      throw DimensionError("Subspace::span: " + shape_string(spanning) + " spanning set in ambient " +
                           std::to_string(split.ambient()));
    }
    if (!spanning.allFinite()) throw DimensionError("Subspace::span: non-finite entries");
    Subspace s;
    s.split_ = split;
    s.basis_ = orthonormal_basis(spanning);
    return s;
  }

  /// Adopts an already orthonormal basis without re-factoring.
  static Subspace from_orthonormal(Mat basis, Split split) {
    if (basis.rows() != split.ambient()) throw DimensionError("Subspace::from_orthonormal: ambient mismatch");
    Subspace s;
    s.split_ = split;
    s.basis_ = std::move(basis);
    return s;
  }

  const Mat& basis() const noexcept { return basis_; }
  Split split() const noexcept { return split_; }
  Eigen::Index dim() const noexcept { return basis_.cols(); }
  Eigen::Index ambient() const noexcept { return split_.ambient(); }

  /// True when this is an element of Z_{n,m} (dimension n).
  bool in_grassmannian() const noexcept { return dim() == split_.n; }

  Mat projection() const { return basis_ * basis_.transpose(); }

  /// Euclidean distance from v to the subspace.
  double distance(const Vec& v) const {
    if (v.size() != ambient()) throw DimensionError("Subspace::distance: ambient mismatch");
    return (v - basis_ * (basis_.transpose() * v)).norm();
  }

  bool contains(const Vec& v, double tol = 1e-10) const { return distance(v) <= tol * std::max(1.0, v.norm()); }

 private:
  Split split_{};
  Mat basis_;
};

/// Graph {(u, A u)} of a linear map A: R^n -> R^m, as an element of Z_{n,m}.
inline Subspace from_graph(const Mat& a) {
  Mat spanning(a.cols() + a.rows(), a.cols());
  spanning.topRows(a.cols()).setIdentity();
  spanning.bottomRows(a.rows()) = a;
  return Subspace::span(spanning, {a.cols(), a.rows()});
}

/// rge(Z, X, I) in the coordinates (z*, x*, y*); returns an element of Z_{m, n+m}.
inline Subspace range_of(const Mat& z, const Mat& x) {
  const Eigen::Index m = z.rows();
  if (z.cols() != m || x.cols() != m) throw DimensionError("range_of: Z must be m x m and X must be n x m");
  const Eigen::Index n = x.rows();
  Mat spanning(m + n + m, m);
  spanning.topRows(m) = z;
  spanning.middleRows(m, n) = x;
  spanning.bottomRows(m).setIdentity();
  return Subspace::span(spanning, {m, n + m});
}

/// Spectral norm of the difference of orthogonal projections.
inline double metric(const Subspace& l1, const Subspace& l2) {
  if (l1.ambient() != l2.ambient()) {
    throw DimensionError("metric: ambient dimensions " + std::to_string(l1.ambient()) + " and " +
                         std::to_string(l2.ambient()) + " differ");
  }
  return spectral_norm(l1.projection() - l2.projection());
}

inline bool approx_equal(const Subspace& l1, const Subspace& l2, double tol = kSubspaceEqualityTol) {
  return l1.ambient() == l2.ambient() && l1.dim() == l2.dim() && metric(l1, l2) <= tol;
}

/// The block matrix (0 -I_m; I_n 0) of size (m+n) x (n+m).
inline Mat swap_matrix(Split split) {
  const Eigen::Index n = split.n;
  const Eigen::Index m = split.m;
  Mat s = Mat::Zero(m + n, n + m);
  s.topRightCorner(m, m) = -Mat::Identity(m, m);
  s.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return s;
}

/// Adjoint L* = {(-v*, u*) : (u*, v*) in L^perp}; maps Z_{n,m} onto Z_{m,n}.
inline Subspace adjoint(const Subspace& l, Split split) {
  if (l.ambient() != split.ambient()) throw DimensionError("adjoint: ambient does not match split");
  if (l.dim() != split.n) {
    throw DimensionError("adjoint: subspace has dimension " + std::to_string(l.dim()) + ", expected " +
                         std::to_string(split.n));
  }
  const Mat perp = orthogonal_complement(l.basis());
  // Signed permutation of an orthonormal basis stays orthonormal.
  return Subspace::from_orthonormal(swap_matrix(split) * perp, split.swapped());
}

inline Subspace adjoint(const Subspace& l) { return adjoint(l, l.split()); }

/// S M^T S^T for the swap matrix S of the given split.
inline Mat swap_transform(const Mat& m, Split split) {
  if (m.rows() != split.ambient() || m.cols() != split.ambient()) {
    throw DimensionError("swap_transform: expected square matrix of size " + std::to_string(split.ambient()));
  }
  const Mat s = swap_matrix(split);
  return s * m.transpose() * s.transpose();
}

/// Unique (Z, X) with L* = rge(Z, X, I), for L* in Z_{m, n+m} split as (z*, x*, y*).
struct RegularAdjointRep {
  Mat z;
  Mat x;

  Subspace reconstruct() const { return range_of(z, x); }
};

/// Block sizes (m, n, m) of the (z*, x*, y*) coordinates.
struct AdjointSplit {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
};

inline RegularAdjointRep regular_rep(const Subspace& lstar, AdjointSplit split) {
  const Eigen::Index m = split.m;
  const Eigen::Index n = split.n;
  if (lstar.ambient() != m + n + m || lstar.dim() != m) {
    throw DimensionError("regular_rep: expected an " + std::to_string(m) + "-dimensional subspace of R^" +
                         std::to_string(m + n + m));
  }
  const Mat& b = lstar.basis();
  const Mat by = b.bottomRows(m);
  const double cond = condition_number(by);
  if (!(cond <= kRegularityCondLimit)) {
    throw NotRegular("regular_rep: y*-block is singular (condition number " + std::to_string(cond) +
                     "), so (z*, x*, 0) in L* does not force z* = x* = 0");
  }
  RegularAdjointRep rep;
  // Z = B_z B_y^{-1}  <=>  B_y^T Z^T = B_z^T.
  const Eigen::PartialPivLU<Mat> lut(by.transpose());
  rep.z = lut.solve(b.topRows(m).transpose()).transpose();
  rep.x = lut.solve(b.middleRows(m, n).transpose()).transpose();
  return rep;
}

inline RegularAdjointRep regular_rep(const Subspace& lstar) {
  const Eigen::Index m = lstar.split().n;
  return regular_rep(lstar, {m, lstar.ambient() - 2 * m});
}

/// kappa(L*) = || (Z; X) ||.
inline double kappa(const RegularAdjointRep& rep) {
  Mat stacked(rep.z.rows() + rep.x.rows(), rep.z.cols());
  stacked << rep.z, rep.x;
  return spectral_norm(stacked);
}

}  // namespace scdopt
