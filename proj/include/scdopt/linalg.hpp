#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "scdopt/error.hpp"

namespace scdopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest ambient size handled by a full SVD; power iteration above it.
inline constexpr Eigen::Index kDenseSvdLimit = 64;

namespace detail {

inline double power_iteration_norm(const Mat& a) {
  const Mat ata = a.transpose() * a;
  Vec v = Vec::Ones(ata.cols()) / std::sqrt(static_cast<double>(ata.cols()));
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vec w = ata * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(ata * w);
    v = std::move(w);
    if (std::abs(next - lambda) <= 1e-15 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace detail

/// Operator 2-norm.
inline double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (std::max(a.rows(), a.cols()) <= kDenseSvdLimit) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
  }
  return detail::power_iteration_norm(a);
}

/// sigma_max / sigma_min of a square matrix; infinity when singular.
inline double condition_number(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionError("condition_number: matrix is not square");
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// Orthonormal basis of the column span, rank decided relative to the largest pivot.
inline Mat orthonormal_basis(const Mat& spanning, double rank_tol = 1e-12) {
  Eigen::ColPivHouseholderQR<Mat> qr(spanning);
  qr.setThreshold(rank_tol);
  const Eigen::Index rank = qr.rank();
  Mat q = qr.householderQ() * Mat::Identity(spanning.rows(), rank);
  return q;
}

/// Orthonormal basis of the orthogonal complement of span(basis); basis must have full column rank.
inline Mat orthogonal_complement(const Mat& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index d = basis.cols();
  if (d == 0) return Mat::Identity(n, n);
  Eigen::HouseholderQR<Mat> qr(basis);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - d);
}

/// Exact equality that tolerates differing shapes.
template <typename A, typename B>
bool identical(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

inline std::string shape_string(const Mat& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace scdopt
