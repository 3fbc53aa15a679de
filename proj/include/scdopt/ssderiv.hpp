#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scdopt/error.hpp"
#include "scdopt/linalg.hpp"
#include "scdopt/sampling.hpp"
#include "scdopt/simplex_qp.hpp"

namespace scdopt {

using VecFn = std::function<Vec(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

/// Entrywise tolerance under which two matrices of a set are merged.
inline constexpr double kMatrixDedupTol = 1e-12;

/// Finite set of equally shaped matrices; insertion order is preserved and duplicates are dropped.
class MatrixSet {
 public:
  MatrixSet() = default;
  MatrixSet(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}

  MatrixSet(std::initializer_list<Mat> elems) {
    for (const auto& e : elems) insert(e);
  }

  explicit MatrixSet(const std::vector<Mat>& elems) {
    for (const auto& e : elems) insert(e);
  }

  void insert(const Mat& a) {
    if (elems_.empty() && rows_ == 0 && cols_ == 0) {
      rows_ = a.rows();
      cols_ = a.cols();
    }
    if (a.rows() != rows_ || a.cols() != cols_) {
      throw DimensionError("MatrixSet::insert: element " + shape_string(a) + " in a set of " +
                           std::to_string(rows_) + "x" + std::to_string(cols_) + " matrices");
    }
    for (const auto& e : elems_) {
      if ((e - a).cwiseAbs().maxCoeff() <= kMatrixDedupTol) return;
    }
    elems_.push_back(a);
  }

  void merge(const MatrixSet& other) {
    for (const auto& e : other.elems_) insert(e);
  }

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return elems_.size(); }
  bool empty() const noexcept { return elems_.empty(); }
  const Mat& operator[](std::size_t i) const { return elems_[i]; }
  std::vector<Mat>::const_iterator begin() const noexcept { return elems_.begin(); }
  std::vector<Mat>::const_iterator end() const noexcept { return elems_.end(); }

  /// Largest operator norm over the elements.
  double max_norm() const {
    double out = 0.0;
    for (const auto& e : elems_) out = std::max(out, spectral_norm(e));
    return out;
  }

  /// Elements flattened row-major into the columns of one matrix.
  Mat flattened() const {
    Mat out(rows_ * cols_, static_cast<Eigen::Index>(elems_.size()));
    for (std::size_t i = 0; i < elems_.size(); ++i) {
      const Mat& e = elems_[i];
      for (Eigen::Index r = 0; r < rows_; ++r) {
        for (Eigen::Index c = 0; c < cols_; ++c) out(r * cols_ + c, static_cast<Eigen::Index>(i)) = e(r, c);
      }
    }
    return out;
  }

  /// True when some element matches a within the given entrywise tolerance.
  bool contains(const Mat& a, double tol = kMatrixDedupTol) const {
    for (const auto& e : elems_) {
      if (e.rows() == a.rows() && e.cols() == a.cols() && (e - a).cwiseAbs().maxCoeff() <= tol) return true;
    }
    return false;
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Mat> elems_;
};

/// Open box lower < x < upper; infinite bounds allowed.
struct Box {
  Vec lower;
  Vec upper;

  static Box whole(Eigen::Index n) {
    return {Vec::Constant(n, -std::numeric_limits<double>::infinity()),
            Vec::Constant(n, std::numeric_limits<double>::infinity())};
  }
  static Box cube(Eigen::Index n, double lo, double hi) { return {Vec::Constant(n, lo), Vec::Constant(n, hi)}; }

  bool contains(const Vec& x) const {
    return x.size() == lower.size() && (x.array() > lower.array()).all() && (x.array() < upper.array()).all();
  }
};

/// A set-valued matrix map x -> Psi(x) subset of R^{m x n} standing in for a semismooth derivative.
class SSDerivative {
 public:
  using Eval = std::function<MatrixSet(const Vec&)>;
  using Domain = std::function<bool(const Vec&)>;
  using BoundHint = std::function<std::optional<double>(const Vec&)>;

  SSDerivative() = default;

  SSDerivative(Eigen::Index n, Eigen::Index m, Eval eval, Domain domain = {}, BoundHint bound = {})
      : n_(n), m_(m), eval_(std::move(eval)), domain_(std::move(domain)), bound_(std::move(bound)) {}

  /// Singleton-valued derivative {J(x)} of a single-valued Jacobian evaluator.
  static SSDerivative single(Eigen::Index n, Eigen::Index m, std::function<Mat(const Vec&)> jac,
                             Domain domain = {}) {
    return SSDerivative(
        n, m, [jac = std::move(jac)](const Vec& x) { return MatrixSet{jac(x)}; }, std::move(domain));
  }

  /// Constant set, independent of x.
  static SSDerivative constant(Eigen::Index n, MatrixSet value) {
    const Eigen::Index m = value.rows();
    return SSDerivative(n, m, [value = std::move(value)](const Vec&) { return value; });
  }

  Eigen::Index input_dim() const noexcept { return n_; }
  Eigen::Index output_dim() const noexcept { return m_; }

  bool in_domain(const Vec& x) const { return x.size() == n_ && (!domain_ || domain_(x)); }

  std::optional<double> bound_hint(const Vec& x) const {
    if (!bound_) return std::nullopt;
    return bound_(x);
  }

  MatrixSet operator()(const Vec& x) const {
    if (x.size() != n_) {
      throw DimensionError("SSDerivative: point of size " + std::to_string(x.size()) + ", expected " +
                           std::to_string(n_));
    }
    if (domain_ && !domain_(x)) throw DomainError("SSDerivative: point outside the domain", x);
    MatrixSet out = eval_(x);
    if (out.empty()) throw DomainError("SSDerivative: empty value inside the domain", x);
    if (out.rows() != m_ || out.cols() != n_) {
      throw DimensionError("SSDerivative: value has shape " + std::to_string(out.rows()) + "x" +
                           std::to_string(out.cols()) + ", expected " + std::to_string(m_) + "x" +
                           std::to_string(n_));
    }
    return out;
  }

  const Domain& domain() const noexcept { return domain_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Eval eval_;
  Domain domain_;
  BoundHint bound_;
};

/// Chain rule: Psi(x) = { B A : A in psi1(x), B in psi2(f1(x)) } for the composite f2 o f1.
inline SSDerivative chain(const SSDerivative& psi1, VecFn f1, const SSDerivative& psi2) {
  if (psi1.output_dim() != psi2.input_dim()) {
    throw DimensionError("chain: inner derivative maps to R^" + std::to_string(psi1.output_dim()) +
                         " but outer expects R^" + std::to_string(psi2.input_dim()));
  }
  auto eval = [psi1, psi2, f1 = std::move(f1)](const Vec& x) {
    const Vec y = f1(x);
    if (!psi2.in_domain(y)) throw DomainError("chain: inner image leaves the outer domain", x);
    const MatrixSet inner = psi1(x);
    const MatrixSet outer = psi2(y);
    MatrixSet out(outer.rows(), inner.cols());
    for (const auto& b : outer) {
      for (const auto& a : inner) out.insert(b * a);
    }
    return out;
  };
  auto domain = [psi1](const Vec& x) { return psi1.in_domain(x); };
  return SSDerivative(psi1.input_dim(), psi2.output_dim(), std::move(eval), std::move(domain));
}

/// Sum rule: Minkowski sum of the two finite sets.
inline SSDerivative sum(const SSDerivative& psi1, const SSDerivative& psi2) {
  if (psi1.input_dim() != psi2.input_dim() || psi1.output_dim() != psi2.output_dim()) {
    throw DimensionError("sum: derivative shapes differ");
  }
  auto eval = [psi1, psi2](const Vec& x) {
    const MatrixSet a = psi1(x);
    const MatrixSet b = psi2(x);
    MatrixSet out(a.rows(), a.cols());
    for (const auto& ea : a) {
      for (const auto& eb : b) out.insert(ea + eb);
    }
    return out;
  };
  auto domain = [psi1, psi2](const Vec& x) { return psi1.in_domain(x) && psi2.in_domain(x); };
  auto bound = [psi1, psi2](const Vec& x) -> std::optional<double> {
    const auto b1 = psi1.bound_hint(x);
    const auto b2 = psi2.bound_hint(x);
    if (b1 && b2) return *b1 + *b2;
    return std::nullopt;
  };
  return SSDerivative(psi1.input_dim(), psi1.output_dim(), std::move(eval), std::move(domain), std::move(bound));
}

/// Stacks one row from each component derivative, over all combinations.
inline SSDerivative assemble_rows(const std::vector<SSDerivative>& psis) {
  if (psis.empty()) throw DimensionError("assemble_rows: no components");
  const Eigen::Index n = psis.front().input_dim();
  for (const auto& p : psis) {
    if (p.output_dim() != 1 || p.input_dim() != n) {
      throw DimensionError("assemble_rows: components must all be 1 x " + std::to_string(n));
    }
  }
  const auto m = static_cast<Eigen::Index>(psis.size());
  auto eval = [psis, n, m](const Vec& x) {
    std::vector<Mat> partial{Mat(0, n)};
    for (const auto& p : psis) {
      const MatrixSet rows = p(x);
      std::vector<Mat> next;
      next.reserve(partial.size() * rows.size());
      for (const auto& head : partial) {
        for (const auto& row : rows) {
          Mat stacked(head.rows() + 1, n);
          stacked << head, row;
          next.push_back(std::move(stacked));
        }
      }
      partial = std::move(next);
    }
    MatrixSet out(m, n);
    for (const auto& a : partial) out.insert(a);
    return out;
  };
  auto domain = [psis](const Vec& x) {
    for (const auto& p : psis) {
      if (!p.in_domain(x)) return false;
    }
    return true;
  };
  return SSDerivative(n, m, std::move(eval), std::move(domain));
}

/// Extracts row i of every element; the component derivative of F_i.
inline SSDerivative component(const SSDerivative& psi, Eigen::Index i) {
  if (i < 0 || i >= psi.output_dim()) throw DimensionError("component: row index out of range");
  auto eval = [psi, i](const Vec& x) {
    const MatrixSet full = psi(x);
    MatrixSet out(1, full.cols());
    for (const auto& a : full) out.insert(a.row(i));
    return out;
  };
  auto domain = [psi](const Vec& x) { return psi.in_domain(x); };
  return SSDerivative(psi.input_dim(), 1, std::move(eval), std::move(domain));
}

/// Sampling schedule shared by the pointwise closure surrogates.
struct ShellSchedule {
  double radius = 1e-6;
  int samples_per_shell = 4;
  int shells = 11;  // radii r 2^-k, k = 0..10
  std::uint64_t seed = kDefaultSeed;
};

namespace detail {

/// Psi(x) together with Psi at sampled points in shells r 2^-(k+1) < |x' - x| <= r 2^-k.
/// Each shell draws from its own stream, so a larger sample count yields a superset.
inline std::vector<MatrixSet> shell_values(const SSDerivative& psi, const Vec& x, const ShellSchedule& sched) {
  std::vector<MatrixSet> values;
  if (psi.in_domain(x)) values.push_back(psi(x));
  double r = sched.radius;
  for (int k = 0; k < sched.shells; ++k, r *= 0.5) {
    ShellSampler sampler(static_cast<std::size_t>(x.size()), mix_seed(sched.seed, static_cast<std::uint64_t>(k)));
    for (int s = 0; s < sched.samples_per_shell; ++s) {
      const Vec p = sampler.next(x, 0.5 * r, r);
      if (psi.in_domain(p)) values.push_back(psi(p));
    }
  }
  if (values.empty()) throw DomainError("no sample point fell inside the domain", x);
  return values;
}

/// Removes points that lie in the convex hull of the remaining ones.
inline MatrixSet hull_vertices(const MatrixSet& pts) {
  if (pts.size() <= 1) return pts;
  const Mat flat = pts.flattened();
  const double scale = std::max(1.0, flat.lpNorm<Eigen::Infinity>());
  std::vector<bool> keep(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Vec> others;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i && keep[j]) others.push_back(flat.col(static_cast<Eigen::Index>(j)));
    }
    if (others.empty()) continue;
    if (bundle::hull_membership(flat.col(static_cast<Eigen::Index>(i)), bundle::columns(others), 1e-10 * scale)) {
      keep[i] = false;
    }
  }
  MatrixSet out(pts.rows(), pts.cols());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (keep[i]) out.insert(pts[i]);
  }
  return out;
}

}  // namespace detail

/// Vertices of an inner approximation of conv((cl Psi)(x)).
inline MatrixSet cocl_at(const SSDerivative& psi, const Vec& x, const ShellSchedule& sched) {
  MatrixSet all(psi.output_dim(), psi.input_dim());
  for (const auto& v : detail::shell_values(psi, x, sched)) all.merge(v);
  return detail::hull_vertices(all);
}

inline MatrixSet cocl_at(const SSDerivative& psi, const Vec& x, double sample_radius, int sample_count) {
  ShellSchedule sched;
  sched.radius = sample_radius;
  sched.samples_per_shell = sample_count;
  return cocl_at(psi, x, sched);
}

/// Sampled surrogate for bnd Psi(x): the largest operator norm seen near x.
inline double bnd_at(const SSDerivative& psi, const Vec& x, const ShellSchedule& sched) {
  if (!psi.in_domain(x)) throw DomainError("bnd_at: point outside the domain", x);
  double out = 0.0;
  for (const auto& v : detail::shell_values(psi, x, sched)) out = std::max(out, v.max_norm());
  return out;
}

inline double bnd_at(const SSDerivative& psi, const Vec& x, double sample_radius, int sample_count) {
  ShellSchedule sched;
  sched.radius = sample_radius;
  sched.samples_per_shell = sample_count;
  return bnd_at(psi, x, sched);
}

}  // namespace scdopt
