#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "scdopt/problems.hpp"
#include "scdopt/scdmap.hpp"
#include "test_util.hpp"

using namespace scdopt;
using scdopt::testing::m1;
using scdopt::testing::v;

namespace {

Subspace line(const Vec& dir, Split split) { return Subspace::span(dir, split); }

GraphLipschitzRep identity_chart(Eigen::Index n, Eigen::Index m, std::function<MatrixSet(const Vec&)> bjac) {
  GraphLipschitzRep rep;
  rep.n = n;
  rep.m = m;
  rep.phi = [](const Vec& xy) { return xy; };
  rep.phi_jacobian = [n, m](const Vec&) { return Mat(Mat::Identity(n + m, n + m)); };
  rep.f_bjacobian = std::move(bjac);
  return rep;
}

// F(x, y) = y^3 + 2y + x1 - x2^2, smooth with F_y > 0.
double smooth_f(const Vec& x, double y) { return y * y * y + 2.0 * y + x(0) - x(1) * x(1); }

Mat smooth_jacobian(const Vec& x, double y) {
  Mat j(1, 3);
  j << 1.0, -2.0 * x(1), 3.0 * y * y + 2.0;
  return j;
}

Vec smooth_sigma(const Vec& x) {
  double y = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double step = smooth_f(x, y) / (3.0 * y * y + 2.0);
    y -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return Vec::Constant(1, y);
}

SCDMapping smooth_map() {
  SCDMapping map;
  map.n = 2;
  map.m = 1;
  map.sstar_eval = [](const Vec& x, const Vec& y, const Vec&) {
    return std::vector<Subspace>{adjoint(from_graph(smooth_jacobian(x, y(0))))};
  };
  map.graph_membership = [](const Vec& x, const Vec& y, const Vec& z, double tol) {
    return std::abs(smooth_f(x, y(0)) - z(0)) <= tol;
  };
  return map;
}

}  // namespace

TEST(ScFromGraphlip, LinearMap) {
  Mat a(1, 2);
  a << 2, -1;
  const auto out = sc_from_graphlip(identity_chart(2, 1, [a](const Vec&) { return MatrixSet{a}; }), v({0.1, 0.2}), v({0}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(metric(out[0], from_graph(a)), 1e-12);
}

TEST(ScFromGraphlip, AbsAtKink) {
  const auto out =
      sc_from_graphlip(identity_chart(1, 1, [](const Vec&) { return MatrixSet{m1(1), m1(-1)}; }), v({0}), v({0}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_LE(metric(out[0], line(v({1, 1}), {1, 1})), 1e-12);
  EXPECT_LE(metric(out[1], line(v({1, -1}), {1, 1})), 1e-12);
}

// The S*F formula agrees with taking adjoints of S F under a nonlinear chart.
TEST(ScFromGraphlip, AdjointRouteAgrees) {
  GraphLipschitzRep rep;
  rep.n = 2;
  rep.m = 1;
  rep.phi = [](const Vec& p) { return v({p(0) + 0.5 * p(2) * p(2), p(1) + p(0), p(2) + 0.3 * std::sin(p(0))}); };
  rep.phi_jacobian = [](const Vec& p) {
    Mat j(3, 3);
    j << 1, 0, p(2), 1, 1, 0, 0.3 * std::cos(p(0)), 0, 1;
    return j;
  };
  rep.f_bjacobian = [](const Vec&) {
    Mat a(1, 2), b(1, 2);
    a << 1, -2;
    b << -1, 0.5;
    return MatrixSet{a, b};
  };
  const Vec x = v({0.4, -0.2});
  const Vec y = v({0.7});
  const auto primal = sc_from_graphlip(rep, x, y);
  const auto dual = sstar_from_graphlip(rep, x, y);
  ASSERT_EQ(primal.size(), dual.size());
  for (std::size_t i = 0; i < primal.size(); ++i) EXPECT_LE(metric(adjoint(primal[i]), dual[i]), 1e-10);
}

TEST(ScFromGraphlip, SingularChartThrows) {
  GraphLipschitzRep rep = identity_chart(1, 1, [](const Vec&) { return MatrixSet{m1(1)}; });
  rep.phi_jacobian = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
  EXPECT_THROW(sc_from_graphlip(rep, v({0}), v({0})), SingularChart);
  EXPECT_THROW(sstar_from_graphlip(rep, v({0}), v({0})), SingularChart);
}

TEST(ScdMapping, LowerLevelAdjointsAwayFromZero) {
  const auto ll = problems::paper_lower_level();
  const auto out = ll.map.adjoint_derivative(v({1}), v({1}), v({0}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_LE(metric(out[0], line(v({1, -1, 1}), {1, 2})), 1e-10);
  EXPECT_LE(metric(out[1], line(v({0, -1, 1}), {1, 2})), 1e-10);
}

TEST(ScdMapping, LowerLevelAdjointsAtOrigin) {
  const auto ll = problems::paper_lower_level();
  EXPECT_EQ(ll.map.adjoint_derivative(v({0}), v({0}), v({0})).size(), 4u);
  EXPECT_EQ(ll.map.sc_derivative(v({0}), v({0}), v({0})).size(), 4u);
}

TEST(ScdMapping, OffGraphPointThrows) {
  const auto ll = problems::paper_lower_level();
  EXPECT_THROW(ll.map.adjoint_derivative(v({0.5}), v({0.2}), v({0})), DomainError);
}

TEST(ScdReg, LowerLevel) {
  const auto ll = problems::paper_lower_level();
  EXPECT_NEAR(scd_reg(ll.map, v({0.7}), v({0.7}), v({0})), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(scd_reg(ll.map, v({-0.3}), v({-0.3}), v({0})), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(scd_reg(ll.map, v({0}), v({0}), v({0})), std::sqrt(2.0), 1e-12);
}

TEST(ScdReg, IrregularIsInfinite) {
  SCDMapping map;
  map.n = 1;
  map.m = 1;
  map.sstar_eval = [](const Vec&, const Vec&, const Vec&) { return std::vector<Subspace>{line(v({1, 0, 0}), {1, 2})}; };
  EXPECT_EQ(scd_reg(map, v({0}), v({0}), v({0})), std::numeric_limits<double>::infinity());
  EXPECT_THROW(psi_from_scd(map, [](const Vec& x) { return x; })(v({0})), NotRegular);
}

TEST(ScdReg, LowerLevelKappaBound) {
  const auto ll = problems::paper_lower_level();
  for (int i = -20; i <= 20; ++i) {
    const double x = 0.05 * i;
    for (const auto& ls : ll.map.adjoint_derivative(v({x}), v({x}), v({0}))) {
      EXPECT_LE(kappa(regular_rep(ls, {1, 1})), std::sqrt(2.0) + 1e-12);
    }
  }
}

TEST(PsiFromScd, LowerLevel) {
  const auto ll = problems::paper_lower_level();
  const SSDerivative psi = psi_from_scd(ll.map, ll.sigma);
  for (double x : {-0.9, -0.1, 0.25, 1.0}) {
    const MatrixSet s = psi(v({x}));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s[0](0, 0), 1.0, 1e-12);
  }
  const MatrixSet s0 = psi(v({0}));
  ASSERT_EQ(s0.size(), 2u);
  EXPECT_TRUE(s0.contains(m1(1)));
  EXPECT_TRUE(s0.contains(m1(0)));
}

TEST(PsiFromScd, ImplicitFunctionJacobian) {
  const SCDMapping map = smooth_map();
  const SSDerivative psi = psi_from_scd(map, smooth_sigma);
  for (const Vec& x : {v({0.3, -0.4}), v({-1.2, 0.8}), v({2.0, 1.5})}) {
    const MatrixSet s = psi(x);
    ASSERT_EQ(s.size(), 1u);
    const double h = 1e-6;
    Mat fd(1, 2);
    for (int j = 0; j < 2; ++j) {
      Vec e = Vec::Zero(2);
      e(j) = h;
      fd(0, j) = (smooth_sigma(x + e)(0) - smooth_sigma(x - e)(0)) / (2 * h);
    }
    EXPECT_LE((s[0] - fd).norm(), 1e-7) << x.transpose();
    EXPECT_TRUE(map.on_graph(x, smooth_sigma(x), v({0}), 1e-12));
  }
}

TEST(ThetaOracle, IdentityObjectiveReducesToPsi) {
  const auto ll = problems::paper_lower_level();
  const ScalarFn phi = [](const Vec& xy) { return xy(1); };
  Mat g(1, 2);
  g << 0, 1;
  const ThetaOracle th = theta_oracle(ll.map, ll.sigma, phi, SSDerivative::constant(2, {g}));
  const SSDerivative psi = psi_from_scd(ll.map, ll.sigma);
  for (double x : {-0.5, 0.0, 0.5}) {
    const MatrixSet a = th.derivative(v({x}));
    const MatrixSet b = psi(v({x}));
    ASSERT_EQ(a.size(), b.size());
    for (const auto& e : b) EXPECT_TRUE(a.contains(e));
    EXPECT_DOUBLE_EQ(th.theta(v({x})), x);
  }
}

TEST(ThetaOracle, BilevelAtStart) {
  const auto p = problems::paper_bilevel();
  EXPECT_DOUBLE_EQ(p.objective(v({5, -1})), 13.5);
  const MatrixSet theta = p.psi(v({5, -1}));
  EXPECT_TRUE(theta.contains(Mat(v({5, -1}).transpose()), 1e-12));
}

// Along x2 = 0 the one-sided slopes in x2 are +1 and -1; both must be represented.
TEST(ThetaOracle, BilevelEnumeratesSignsOnKink) {
  const auto p = problems::paper_bilevel();
  for (double x1 : {-1.5, 0.4, 2.0}) {
    const Vec x = v({x1, 0});
    const MatrixSet theta = p.psi(x);
    EXPECT_TRUE(theta.contains(Mat(v({x1, 1}).transpose()), 1e-12));
    EXPECT_TRUE(theta.contains(Mat(v({x1, -1}).transpose()), 1e-12));
    const double h = 1e-7;
    EXPECT_NEAR((p.objective(x + v({0, h})) - p.objective(x)) / h, 1.0, 1e-6);
    EXPECT_NEAR((p.objective(x) - p.objective(x - v({0, h}))) / h, -1.0, 1e-6);
  }
}

TEST(ThetaOracle, MatchesFiniteDifferencesWhereSmooth) {
  const auto p = problems::paper_bilevel();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Vec x = v({u(rng), u(rng)});
    const double h = 1e-6;
    Vec fd(2);
    bool smooth = true;
    for (int j = 0; j < 2; ++j) {
      Vec e = Vec::Zero(2);
      e(j) = h;
      const double fwd = (p.objective(x + e) - p.objective(x)) / h;
      const double bwd = (p.objective(x) - p.objective(x - e)) / h;
      smooth = smooth && std::abs(fwd - bwd) <= 1e-4;
      fd(j) = (p.objective(x + e) - p.objective(x - e)) / (2 * h);
    }
    if (!smooth) continue;
    ++checked;
    const MatrixSet theta = p.psi(x);
    ASSERT_EQ(theta.size(), 1u) << x.transpose();
    const Vec g = theta[0].transpose();
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, fd.norm())) << x.transpose();
  }
  EXPECT_GE(checked, 150);
}

TEST(ComposeParameter, IdentityParameterIsNoOp) {
  const auto ll = problems::paper_lower_level();
  const SCDMapping same = compose_parameter(ll.map, [](const Vec& x) { return x; }, SSDerivative::constant(1, {m1(1)}));
  const auto a = ll.map.adjoint_derivative(v({0}), v({0}), v({0}));
  const auto b = same.adjoint_derivative(v({0}), v({0}), v({0}));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(metric(a[i], b[i]), 1e-12);
  EXPECT_TRUE(same.on_graph(v({0.5}), v({0}), v({0})));
  EXPECT_FALSE(same.on_graph(v({0.5}), v({0.2}), v({0})));
}

TEST(ComposeParameter, DimensionMismatchThrows) {
  const auto ll = problems::paper_lower_level();
  EXPECT_THROW(compose_parameter(ll.map, [](const Vec& x) { return x; }, SSDerivative::constant(2, {Mat::Zero(2, 2)})),
               DimensionError);
}
