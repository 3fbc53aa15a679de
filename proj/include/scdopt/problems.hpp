#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdopt/bundle.hpp"
#include "scdopt/scdmap.hpp"
#include "scdopt/ssderiv.hpp"
#include "scdopt/subspace.hpp"
#include "scdopt/verify.hpp"

namespace scdopt::problems {

/// sgn with sgn(0) := 1.
inline double sgn(double t) { return t >= 0.0 ? 1.0 : -1.0; }

/// Both signs at a kink, otherwise the sign.
inline std::vector<double> sign_choices(double t) {
  if (t > 0.0) return {1.0};
  if (t < 0.0) return {-1.0};
  return {1.0, -1.0};
}

/// Parametric inclusion 0 in F(x, y) together with a continuous selection sigma of its solution map.
struct LowerLevel {
  SCDMapping map;
  VecFn sigma;
  VecFn sigma_numeric;
  verify::GraphSampler sampler;
  std::function<double(double xi, double y)> objective;
};

/// (F, Psi, xbar) for which the remainder ratio must vanish, or must not for negative controls.
struct CertifiedTriple {
  std::string label;
  VecFn f;
  SSDerivative psi;
  Vec xbar;
  bool expect_pass = true;
};

struct KnownSolution {
  Vec x;
  double value = 0.0;
  double tol = 1e-3;
};

struct ProblemSpec {
  std::string name;
  std::string description;
  Eigen::Index dim = 0;
  ScalarFn objective;
  bundle::Oracle oracle;
  SSDerivative psi;  // full semismooth derivative of the objective (1 x dim)
  bundle::Polyhedron uad;
  Vec x0;
  std::optional<KnownSolution> known;
  std::optional<LowerLevel> lower;
  std::vector<CertifiedTriple> certified;
  Box test_box;
  bool optimizable = true;

  /// {g(x)^T}: the oracle's single selection as a derivative map.
  SSDerivative oracle_selection() const {
    auto orc = oracle;
    return SSDerivative::single(dim, 1, [orc](const Vec& x) { return Mat(orc(x).g.transpose()); });
  }
};

namespace detail {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

inline Mat row(std::initializer_list<double> v) { return vec(v).transpose(); }

/// Golden-section search for a unimodal function on [lo, hi].
template <typename F>
double golden_section(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// f(xi, y) = max{ y^2/2 - xi y, -y^2/2 }.
inline double lower_objective(double xi, double y) { return std::max(0.5 * y * y - xi * y, -0.5 * y * y); }

/// The four tangent subspaces of gph d_y f, in (x, y, z) coordinates.
inline std::array<Subspace, 4> lower_level_tangents() {
  const Split split{2, 1};
  Mat b1(3, 2), b2(3, 2), b3(3, 2), b4(3, 2);
  b1 << 1, 0, 0, 1, -1, 1;  // {(u, v, v - u)}
  b2 << 1, 0, 0, 1, 0, -1;  // {(u, v, -v)}
  b3 << 1, 0, 1, 0, 0, 1;   // {(u, u, v)}
  b4 << 1, 0, 0, 0, 0, 1;   // {(u, 0, v)}
  return {Subspace::span(b1, split), Subspace::span(b2, split), Subspace::span(b3, split), Subspace::span(b4, split)};
}

/// Which smooth pieces of gph d_y f have (x, y, z) in their closure.
inline std::array<bool, 4> lower_level_pieces(double x, double y, double z, double tol) {
  const double xm = std::min(x, 0.0);
  const double xp = std::max(x, 0.0);
  return {
      std::abs(z - (y - x)) <= tol && (y <= xm + tol || y >= xp - tol),
      std::abs(z + y) <= tol && y >= xm - tol && y <= xp + tol,
      std::abs(y - x) <= tol && z >= xm - x - tol && z <= xp - x + tol,
      std::abs(y) <= tol && z >= -xp - tol && z <= -xm + tol,
  };
}

/// 0 in F(x, y) with F(x, y) = Clarke subdifferential in y of max{y^2/2 - xy, -y^2/2};
/// sigma(x) = x is the global minimizer of f(x, .).
inline LowerLevel paper_lower_level() {
  const auto tangents = lower_level_tangents();
  std::array<Subspace, 4> adjoints;
  for (std::size_t k = 0; k < 4; ++k) adjoints[k] = adjoint(tangents[k], {2, 1});

  LowerLevel ll;
  ll.objective = lower_objective;
  ll.map.n = 1;
  ll.map.m = 1;
  ll.map.sstar_eval = [adjoints](const Vec& x, const Vec& y, const Vec& z) {
    const double tol = 1e-12 * std::max({1.0, std::abs(x(0)), std::abs(y(0)), std::abs(z(0))});
    const auto on = lower_level_pieces(x(0), y(0), z(0), tol);
    std::vector<Subspace> out;
    for (std::size_t k = 0; k < 4; ++k) {
      if (on[k]) out.push_back(adjoints[k]);
    }
    return out;
  };
  ll.map.graph_membership = [](const Vec& x, const Vec& y, const Vec& z, double tol) {
    const auto on = lower_level_pieces(x(0), y(0), z(0), tol);
    return on[0] || on[1] || on[2] || on[3];
  };
  ll.sigma = [](const Vec& x) { return x; };
  ll.sigma_numeric = [](const Vec& x) {
    const double xi = x(0);
    const double bound = std::abs(xi) + 1.0;
    const double y = detail::golden_section([xi](double t) { return lower_objective(xi, t); }, -bound, bound, 1e-10);
    // Snap onto the nearest solution branch S(xi) = {xi, 0}.
    double best = xi;
    for (double cand : {xi, 0.0}) {
      if (std::abs(y - cand) < std::abs(y - best)) best = cand;
    }
    if (std::abs(y - best) > 1e-6) {
      throw std::runtime_error("lower-level solve: numeric minimizer " + std::to_string(y) +
                               " is not on a solution branch");
    }
    return Vec::Constant(1, best);
  };
  ll.sampler = [](const Vec& zbar, double r, int count, std::uint64_t seed) {
    std::vector<Vec> out;
    LowDiscrepancy gen(2, seed);
    const int max_attempts = 400 * std::max(count, 1);
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
      const Vec u = gen.next();
      const double a = (2.0 * u(0) - 1.0) * r;
      const double b = (2.0 * u(1) - 1.0) * r;
      const double x = zbar(0) + a;
      Vec z(3);
      switch (attempt % 4) {
        case 0: z << x, zbar(1) + b, zbar(1) + b - x; break;
        case 1: z << x, zbar(1) + b, -(zbar(1) + b); break;
        case 2: z << x, x, zbar(2) + b; break;
        default: z << x, 0.0, zbar(2) + b; break;
      }
      const auto on = lower_level_pieces(z(0), z(1), z(2), 0.0);
      if (!on[static_cast<std::size_t>(attempt % 4)]) continue;
      const double dist = (z - zbar).norm();
      if (dist > 0.5 * r && dist <= r) out.push_back(std::move(z));
    }
    return out;
  };
  return ll;
}

/// The lower level's wrong-derivative control: S F replaced by {L4} everywhere.
inline SCDMapping lower_level_wrong_derivative() {
  const Subspace l4star = adjoint(lower_level_tangents()[3], {2, 1});
  SCDMapping map = paper_lower_level().map;
  map.sstar_eval = [l4star](const Vec&, const Vec&, const Vec&) { return std::vector<Subspace>{l4star}; };
  return map;
}

/// phi(x, y) = 2|y - |x1|| - |x2| + x1^2/2.
inline double bilevel_upper(const Vec& x, double y) {
  return 2.0 * std::abs(y - std::abs(x(0))) - std::abs(x(1)) + 0.5 * x(0) * x(0);
}

/// eta(x) = |x1| - |x2|.
inline double bilevel_eta(const Vec& x) { return std::abs(x(0)) - std::abs(x(1)); }

/// The upper-level derivative set over all sign choices at kinks, 1 x 3 in (x1, x2, y).
inline SSDerivative bilevel_upper_derivative() {
  return SSDerivative(3, 1, [](const Vec& xy) {
    MatrixSet out(1, 3);
    for (double su : sign_choices(xy(2) - std::abs(xy(0)))) {
      for (double s1 : sign_choices(xy(0))) {
        for (double s2 : sign_choices(xy(1))) out.insert(detail::row({-2.0 * su * s1 + xy(0), -s2, 2.0 * su}));
      }
    }
    return out;
  });
}

inline SSDerivative bilevel_eta_derivative() {
  return SSDerivative(2, 1, [](const Vec& x) {
    MatrixSet out(1, 2);
    for (double s1 : sign_choices(x(0))) {
      for (double s2 : sign_choices(x(1))) out.insert(detail::row({s1, -s2}));
    }
    return out;
  });
}

/// The closed-form pseudogradient with sgn(0) = 1 and the selection 0 of Psi at xi = 0.
inline Vec bilevel_pseudogradient(const Vec& x, const VecFn& sigma) {
  const double eta = bilevel_eta(x);
  const double u = sigma(Vec::Constant(1, eta))(0) - std::abs(x(0));
  const double psi_tilde = eta != 0.0 ? 1.0 : 0.0;
  return detail::vec({2.0 * sgn(u) * (psi_tilde - 1.0) * sgn(x(0)) + x(0),
                      -2.0 * sgn(u) * psi_tilde * sgn(x(1)) - sgn(x(1))});
}

/// The full pseudogradient map Theta of theta(x) = phi(x, sigma(eta(x))), via the SCD route.
inline ThetaOracle bilevel_theta(const LowerLevel& ll) {
  const VecFn eta = [](const Vec& x) { return Vec::Constant(1, bilevel_eta(x)); };
  const SCDMapping composed = compose_parameter(ll.map, eta, bilevel_eta_derivative());
  const VecFn sigma = ll.sigma;
  const VecFn sigma_eta = [sigma, eta](const Vec& x) { return sigma(eta(x)); };
  const ScalarFn phi = [](const Vec& xy) { return bilevel_upper(xy.head(2), xy(2)); };
  return theta_oracle(composed, sigma_eta, phi, bilevel_upper_derivative());
}

inline CertifiedTriple scalar_triple(std::string label, const ScalarFn& f, const SSDerivative& psi, Vec xbar,
                                     bool expect_pass = true) {
  return {std::move(label), verify::as_vector_fn(f), psi, std::move(xbar), expect_pass};
}

/// min phi(x, y) s.t. y in argmin f(eta(x), .), reduced to theta(x) = phi(x, sigma(eta(x))).
inline ProblemSpec paper_bilevel(bool numeric_lower_level = false) {
  const LowerLevel ll = paper_lower_level();
  const VecFn sigma = numeric_lower_level ? ll.sigma_numeric : ll.sigma;
  LowerLevel solved = ll;
  solved.sigma = sigma;
  const ThetaOracle theta = bilevel_theta(solved);

  ProblemSpec p;
  p.name = numeric_lower_level ? "paper_bilevel_numeric" : "paper_bilevel";
  p.description = "reduced bilevel objective phi(x, sigma(eta(x))) with the nonsmooth lower level";
  p.dim = 2;
  p.objective = theta.theta;
  p.psi = theta.derivative;
  p.oracle = [theta_fn = theta.theta, sigma](const Vec& x) {
    return bundle::OraclePoint{x, theta_fn(x), bilevel_pseudogradient(x, sigma)};
  };
  p.uad = bundle::Polyhedron::unconstrained(2);
  p.x0 = detail::vec({5.0, -1.0});
  p.known = KnownSolution{detail::vec({0.0, 0.0}), 0.0, 1e-3};
  p.lower = ll;
  p.test_box = Box::cube(2, -1.0, 1.0);
  for (const Vec& xbar : {detail::vec({0.0, 0.0}), detail::vec({5.0, -1.0}), detail::vec({1.0, 1.0}),
                          detail::vec({0.5, 0.0}), detail::vec({0.0, -0.3})}) {
    p.certified.push_back(scalar_triple("theta@(" + std::to_string(xbar(0)) + "," + std::to_string(xbar(1)) + ")",
                                        p.objective, p.psi, xbar));
  }
  return p;
}

/// sigma itself as a "problem": Psi-semismoothness of the selection, not an optimization task.
inline ProblemSpec paper_lower_level_problem() {
  const LowerLevel ll = paper_lower_level();
  ProblemSpec p;
  p.name = "paper_lower_level";
  p.description = "selection sigma(x) = x of the C-stationary map of min_y max{y^2/2 - xy, -y^2/2}";
  p.dim = 1;
  p.objective = [sigma = ll.sigma](const Vec& x) { return sigma(x)(0); };
  p.psi = psi_from_scd(ll.map, ll.sigma);
  p.oracle = [sigma = ll.sigma, psi = p.psi](const Vec& x) {
    return bundle::OraclePoint{x, sigma(x)(0), Vec(psi(x)[0].transpose())};
  };
  p.uad = bundle::Polyhedron::unconstrained(1);
  p.x0 = Vec::Constant(1, 0.5);
  p.lower = ll;
  p.test_box = Box::cube(1, -1.0, 1.0);
  p.optimizable = false;
  for (double xb : {0.0, 0.5, -0.7}) {
    p.certified.push_back({"sigma@" + std::to_string(xb), ll.sigma, p.psi, Vec::Constant(1, xb), true});
  }
  return p;
}

/// theta(x) = sum_i w_i |x_i - c_i|.
inline ProblemSpec weighted_l1(std::string name, Vec weights, Vec center, Vec x0, bundle::Polyhedron uad,
                               std::optional<KnownSolution> known) {
  const Eigen::Index n = weights.size();
  ProblemSpec p;
  p.name = std::move(name);
  p.description = "weighted l1 distance";
  p.dim = n;
  p.objective = [weights, center](const Vec& x) { return weights.dot((x - center).cwiseAbs()); };
  p.oracle = [weights, center, n](const Vec& x) {
    Vec g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = weights(i) * sgn(x(i) - center(i));
    return bundle::OraclePoint{x, weights.dot((x - center).cwiseAbs()), g};
  };
  p.psi = SSDerivative(n, 1, [weights, center, n](const Vec& x) {
    std::vector<Mat> partial{Mat(1, 0)};
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<Mat> next;
      for (const auto& head : partial) {
        for (double s : sign_choices(x(i) - center(i))) {
          Mat r(1, head.cols() + 1);
          r << head, weights(i) * s;
          next.push_back(std::move(r));
        }
      }
      partial = std::move(next);
    }
    return MatrixSet(partial);
  });
  p.uad = std::move(uad);
  p.x0 = std::move(x0);
  p.known = std::move(known);
  p.test_box = Box{(center.array() - 2.0).matrix(), (center.array() + 2.0).matrix()};
  p.certified.push_back(scalar_triple("kink", p.objective, p.psi, center));
  p.certified.push_back(scalar_triple("x0", p.objective, p.psi, p.x0));
  return p;
}

/// One piece (a/2)|x|^2 + b^T x + c of a pointwise maximum.
struct QuadraticPiece {
  double curvature = 0.0;
  Vec linear;
  double constant = 0.0;

  double value(const Vec& x) const { return 0.5 * curvature * x.squaredNorm() + linear.dot(x) + constant; }
  Vec gradient(const Vec& x) const { return curvature * x + linear; }
};

/// theta(x) = max_i piece_i(x).
inline ProblemSpec max_quadratic(std::string name, std::vector<QuadraticPiece> pieces, Vec x0,
                                 bundle::Polyhedron uad, std::optional<KnownSolution> known) {
  if (pieces.empty()) throw DimensionError("max_quadratic: no pieces");
  const Eigen::Index n = x0.size();
  for (const auto& pc : pieces) {
    if (pc.linear.size() != n) throw DimensionError("max_quadratic: piece dimension mismatch");
  }
  auto value = [pieces](const Vec& x) {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& pc : pieces) v = std::max(v, pc.value(x));
    return v;
  };
  ProblemSpec p;
  p.name = std::move(name);
  p.description = "pointwise maximum of quadratics";
  p.dim = n;
  p.objective = value;
  p.oracle = [pieces, value](const Vec& x) {
    const double v = value(x);
    for (const auto& pc : pieces) {
      if (pc.value(x) == v) return bundle::OraclePoint{x, v, pc.gradient(x)};
    }
    return bundle::OraclePoint{x, v, pieces.front().gradient(x)};
  };
  p.psi = SSDerivative(n, 1, [pieces, value](const Vec& x) {
    const double v = value(x);
    MatrixSet out(1, x.size());
    for (const auto& pc : pieces) {
      if (pc.value(x) == v) out.insert(pc.gradient(x).transpose());
    }
    return out;
  });
  p.uad = std::move(uad);
  p.x0 = std::move(x0);
  p.known = std::move(known);
  const Vec center = p.known ? p.known->x : Vec::Zero(n);
  p.test_box = Box{(center.array() - 2.0).matrix(), (center.array() + 2.0).matrix()};
  p.certified.push_back(scalar_triple("x0", p.objective, p.psi, p.x0));
  if (p.known) p.certified.push_back(scalar_triple("solution", p.objective, p.psi, p.known->x));
  return p;
}

/// The convex test set: l1 in 2 and 5 dimensions, two maxima of quadratics, and a constrained l1.
inline std::vector<ProblemSpec> classic_suite() {
  using detail::vec;
  std::vector<ProblemSpec> out;
  out.push_back(weighted_l1("l1_n2", Vec::Ones(2), Vec::Zero(2), vec({3.0, -2.0}), bundle::Polyhedron::unconstrained(2),
                            KnownSolution{Vec::Zero(2), 0.0, 1e-3}));
  out.push_back(weighted_l1("l1_n5", Vec::Ones(5), Vec::Zero(5), vec({3.0, -2.0, 1.0, -0.5, 4.0}),
                            bundle::Polyhedron::unconstrained(5), KnownSolution{Vec::Zero(5), 0.0, 1e-3}));
  out.push_back(max_quadratic("maxquad_1d", {{2.0, vec({0.0}), 0.0}, {2.0, vec({-4.0}), 4.0}}, vec({4.0}),
                              bundle::Polyhedron::unconstrained(1), KnownSolution{vec({1.0}), 1.0, 1e-3}));
  out.push_back(max_quadratic("maxquad_n2",
                              {{1.0, vec({1.0, 0.0}), 0.0},
                               {1.0, vec({-1.0, 0.0}), 0.0},
                               {1.0, vec({0.0, 1.0}), 0.0},
                               {1.0, vec({0.0, -1.0}), 0.0}},
                              vec({2.0, -1.5}), bundle::Polyhedron::unconstrained(2),
                              KnownSolution{Vec::Zero(2), 0.0, 1e-3}));
  bundle::Polyhedron halfspace = bundle::Polyhedron::unconstrained(2);
  halfspace.a_ineq = detail::row({-1.0, 0.0});
  halfspace.b_ineq = vec({-1.0});
  out.push_back(weighted_l1("l1_halfspace", Vec::Ones(2), Vec::Zero(2), vec({3.0, -2.0}), halfspace,
                            KnownSolution{vec({1.0, 0.0}), 1.0, 1e-3}));
  return out;
}

/// Every built-in problem, in a stable order.
inline std::vector<ProblemSpec> registry() {
  std::vector<ProblemSpec> out;
  out.push_back(paper_bilevel());
  out.push_back(paper_bilevel(true));
  out.push_back(paper_lower_level_problem());
  for (auto& p : classic_suite()) out.push_back(std::move(p));
  return out;
}

inline std::optional<ProblemSpec> find(const std::string& name) {
  for (auto& p : registry()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

/// Documented failures: derivatives that are not semismooth derivatives of their function.
inline std::vector<CertifiedTriple> negative_controls() {
  const ScalarFn abs_fn = [](const Vec& x) { return std::abs(x(0)); };
  const SSDerivative zero = SSDerivative::constant(1, MatrixSet{Mat::Zero(1, 1)});
  const LowerLevel ll = paper_lower_level();
  std::vector<CertifiedTriple> out;
  out.push_back(scalar_triple("abs with Psi = {0}", abs_fn, zero, Vec::Zero(1), false));
  out.push_back({"sigma with Psi = {0}", ll.sigma, zero, Vec::Zero(1), false});
  const ScalarFn l1 = [](const Vec& x) { return x.lpNorm<1>(); };
  const SSDerivative fixed = SSDerivative::constant(2, MatrixSet{detail::row({1.0, 1.0})});
  out.push_back(scalar_triple("l1 with constant Psi = {(1,1)}", l1, fixed, Vec::Zero(2), false));
  return out;
}

}  // namespace scdopt::problems
