#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scdopt/error.hpp"
#include "scdopt/ssderiv.hpp"
#include "scdopt/subspace.hpp"

namespace scdopt {

/// A set-valued map F: R^n x R^m => R^m described by its adjoint SC derivative.
///
/// Graph points are triples (x, y, z) with z in F(x, y). The adjoint SC derivative
/// returns subspaces of R^{m+n+m} in the coordinates (z*, x*, y*); the primal SC
/// derivative is recovered through the adjoint isometry.
struct SCDMapping {
  using AdjointEval = std::function<std::vector<Subspace>(const Vec& x, const Vec& y, const Vec& z)>;
  using GraphPredicate = std::function<bool(const Vec& x, const Vec& y, const Vec& z, double tol)>;

  Eigen::Index n = 0;
  Eigen::Index m = 0;
  AdjointEval sstar_eval;
  GraphPredicate graph_membership;

  Split primal_split() const noexcept { return {n + m, m}; }
  Split adjoint_split() const noexcept { return {m, n + m}; }

  /// S*F(x, y, z), validated.
  std::vector<Subspace> adjoint_derivative(const Vec& x, const Vec& y, const Vec& z) const {
    if (x.size() != n || y.size() != m || z.size() != m) throw DimensionError("SCDMapping: point has wrong shape");
    std::vector<Subspace> out = sstar_eval(x, y, z);
    if (out.empty()) throw DomainError("SCDMapping: empty adjoint SC derivative (not a graph point?)", stack(x, y, z));
    for (const auto& l : out) {
      if (l.ambient() != m + n + m || l.dim() != m) {
        throw DimensionError("SCDMapping: adjoint subspace must have dimension " + std::to_string(m) + " in R^" +
                             std::to_string(m + n + m));
      }
    }
    return out;
  }

  /// S F(x, y, z) = { (L*)* : L* in S*F(x, y, z) }.
  std::vector<Subspace> sc_derivative(const Vec& x, const Vec& y, const Vec& z) const {
    std::vector<Subspace> out;
    for (const auto& ls : adjoint_derivative(x, y, z)) out.push_back(adjoint(ls, adjoint_split()));
    return out;
  }

  bool on_graph(const Vec& x, const Vec& y, const Vec& z, double tol = 1e-10) const {
    if (!graph_membership) throw std::logic_error("SCDMapping: no graph membership predicate supplied");
    return graph_membership(x, y, z, tol);
  }

  static Vec stack(const Vec& x, const Vec& y, const Vec& z) {
    Vec out(x.size() + y.size() + z.size());
    out << x, y, z;
    return out;
  }
};

/// F given as a Lipschitz graph f: R^n -> R^m after a smooth change of coordinates Phi(x, y) = (u, w).
struct GraphLipschitzRep {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  VecFn phi;
  std::function<Mat(const Vec&)> phi_jacobian;  // (n+m) x (n+m)
  std::function<MatrixSet(const Vec&)> f_bjacobian;  // B-Jacobian of f at u, m x n elements
};

namespace detail {

inline Mat checked_chart_jacobian(const GraphLipschitzRep& rep, const Vec& xy) {
  const Mat jac = rep.phi_jacobian(xy);
  if (jac.rows() != rep.n + rep.m || jac.cols() != rep.n + rep.m) throw DimensionError("chart Jacobian has wrong shape");
  if (!(condition_number(jac) <= kRegularityCondLimit)) {
    throw SingularChart("graphically Lipschitzian chart: Jacobian of Phi is singular at the point");
  }
  return jac;
}

inline Vec concat(const Vec& x, const Vec& y) {
  Vec xy(x.size() + y.size());
  xy << x, y;
  return xy;
}

}  // namespace detail

/// S F(x, y) = { grad Phi^{-1} rge(I, A) : A in B-Jacobian of f at u }.
inline std::vector<Subspace> sc_from_graphlip(const GraphLipschitzRep& rep, const Vec& x, const Vec& y) {
  const Vec xy = detail::concat(x, y);
  const Mat jac = detail::checked_chart_jacobian(rep, xy);
  const Vec u = rep.phi(xy).head(rep.n);
  const Eigen::PartialPivLU<Mat> lu(jac);
  std::vector<Subspace> out;
  for (const auto& a : rep.f_bjacobian(u)) {
    const Subspace graph = from_graph(a);
    out.push_back(Subspace::span(lu.solve(graph.basis()), {rep.n, rep.m}));
  }
  return out;
}

/// S*F(x, y) = { S grad Phi^T S^T rge(I, A^T) : A in B-Jacobian of f at u }.
inline std::vector<Subspace> sstar_from_graphlip(const GraphLipschitzRep& rep, const Vec& x, const Vec& y) {
  const Vec xy = detail::concat(x, y);
  const Mat jac = detail::checked_chart_jacobian(rep, xy);
  const Vec u = rep.phi(xy).head(rep.n);
  const Mat transform = swap_transform(jac, {rep.n, rep.m});
  std::vector<Subspace> out;
  for (const auto& a : rep.f_bjacobian(u)) {
    const Subspace graph = from_graph(a.transpose());
    out.push_back(Subspace::span(transform * graph.basis(), {rep.m, rep.n}));
  }
  return out;
}

/// sup kappa(L*) over S*F(x, y, z); infinity when some L* is not regular.
inline double scd_reg(const SCDMapping& map, const Vec& x, const Vec& y, const Vec& z) {
  double out = 0.0;
  for (const auto& ls : map.adjoint_derivative(x, y, z)) {
    try {
      out = std::max(out, kappa(regular_rep(ls, {map.m, map.n})));
    } catch (const NotRegular&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

/// Psi(x) = { -X_{L*}^T : L* in S*F(x, sigma(x), 0) }, a semismooth derivative of the selection sigma.
inline SSDerivative psi_from_scd(const SCDMapping& map, VecFn sigma, SSDerivative::Domain domain = {}) {
  auto eval = [map, sigma = std::move(sigma)](const Vec& x) {
    const Vec y = sigma(x);
    const Vec z = Vec::Zero(map.m);
    MatrixSet out(map.m, map.n);
    for (const auto& ls : map.adjoint_derivative(x, y, z)) {
      RegularAdjointRep rep;
      try {
        rep = regular_rep(ls, {map.m, map.n});
      } catch (const NotRegular& e) {
        throw NotRegular(std::string("psi_from_scd: ") + e.what(), x);
      }
      out.insert(-rep.x.transpose());
    }
    return out;
  };
  return SSDerivative(map.n, map.m, std::move(eval), std::move(domain));
}

/// theta(x) = phi(x, sigma(x)) together with its pseudogradient map Theta.
struct ThetaOracle {
  ScalarFn theta;
  SSDerivative derivative;
};

/// Theta(x) = { g_x^T - g_y^T X_{L*}^T : (g_x^T, g_y^T) in Phi(x, sigma(x)), L* in S*F(x, sigma(x), 0) }.
inline ThetaOracle theta_oracle(const SCDMapping& map, VecFn sigma, ScalarFn phi, const SSDerivative& phi_deriv,
                                SSDerivative::Domain domain = {}) {
  if (phi_deriv.input_dim() != map.n + map.m || phi_deriv.output_dim() != 1) {
    throw DimensionError("theta_oracle: objective derivative must be 1 x (n+m)");
  }
  ThetaOracle out;
  out.theta = [sigma, phi](const Vec& x) { return phi(detail::concat(x, sigma(x))); };
  auto eval = [map, sigma, phi_deriv](const Vec& x) {
    const Vec y = sigma(x);
    const MatrixSet grads = phi_deriv(detail::concat(x, y));
    std::vector<Mat> xs;
    for (const auto& ls : map.adjoint_derivative(x, y, Vec::Zero(map.m))) {
      try {
        xs.push_back(regular_rep(ls, {map.m, map.n}).x);
      } catch (const NotRegular& e) {
        throw NotRegular(std::string("theta_oracle: ") + e.what(), x);
      }
    }
    MatrixSet result(1, map.n);
    for (const auto& g : grads) {
      const Mat gx = g.leftCols(map.n);
      const Mat gy = g.rightCols(map.m);
      for (const auto& xm : xs) result.insert(gx - gy * xm.transpose());
    }
    return result;
  };
  out.derivative = SSDerivative(map.n, 1, std::move(eval), std::move(domain));
  return out;
}

/// The map (x', y) => F(eta(x'), y) for a parameter map eta: R^k -> R^n with derivative psi_eta.
///
/// Adjoint subspaces rge(B_z, B_x, B_y) of F become rge(B_z, A^T B_x, B_y) for every A in psi_eta(x').
inline SCDMapping compose_parameter(const SCDMapping& map, VecFn eta, const SSDerivative& psi_eta) {
  if (psi_eta.output_dim() != map.n) throw DimensionError("compose_parameter: eta must map into R^n");
  SCDMapping out;
  out.n = psi_eta.input_dim();
  out.m = map.m;
  const Eigen::Index m = map.m;
  const Eigen::Index n = map.n;
  const Eigen::Index k = out.n;
  out.sstar_eval = [map, eta, psi_eta, m, n, k](const Vec& x, const Vec& y, const Vec& z) {
    const Vec xi = eta(x);
    const MatrixSet jac = psi_eta(x);
    std::vector<Subspace> result;
    for (const auto& ls : map.adjoint_derivative(xi, y, z)) {
      const Mat& b = ls.basis();
      for (const auto& a : jac) {
        Mat spanning(m + k + m, m);
        spanning.topRows(m) = b.topRows(m);
        spanning.middleRows(m, k) = a.transpose() * b.middleRows(m, n);
        spanning.bottomRows(m) = b.bottomRows(m);
        Subspace s = Subspace::span(spanning, {m, k + m});
        if (s.dim() != m) throw DimensionError("compose_parameter: transformed subspace lost rank");
        bool duplicate = false;
        for (const auto& r : result) duplicate = duplicate || approx_equal(r, s);
        if (!duplicate) result.push_back(std::move(s));
      }
    }
    return result;
  };
  if (map.graph_membership) {
    out.graph_membership = [map, eta](const Vec& x, const Vec& y, const Vec& z, double tol) {
      return map.graph_membership(eta(x), y, z, tol);
    };
  }
  return out;
}

}  // namespace scdopt
