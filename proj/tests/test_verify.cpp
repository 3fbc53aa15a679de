#include <gtest/gtest.h>

#include <cmath>

#include "scdopt/problems.hpp"
#include "scdopt/verify.hpp"
#include "test_util.hpp"

using namespace scdopt;
using namespace scdopt::verify;
using scdopt::testing::m1;
using scdopt::testing::v;

namespace {

VecFn abs_fn() {
  return [](const Vec& x) { return Vec(x.cwiseAbs()); };
}

SSDerivative sign_derivative() {
  return SSDerivative(1, 1, [](const Vec& x) { return MatrixSet{m1(problems::sgn(x(0)))}; });
}

SSDerivative lower_level_psi() {
  const auto ll = problems::paper_lower_level();
  return psi_from_scd(ll.map, ll.sigma);
}

}  // namespace

TEST(SsRatio, LinearMapIsExact) {
  Mat a(2, 3);
  a << 1, -2, 0.5, 3, 0, -1;
  const VecFn f = [a](const Vec& x) { return Vec(a * x + v({1, 2})); };
  const auto prof = ss_ratio(f, SSDerivative::constant(3, {a}), v({0.3, -0.2, 1}), default_radii(), 16);
  EXPECT_TRUE(prof.pass);
  // Roundoff only; it grows like eps / r on the smallest shells.
  for (double r : prof.worst_ratio) EXPECT_LE(r, 1e-9);
}

TEST(SsRatio, AbsWithSign) {
  const auto prof = ss_ratio(abs_fn(), sign_derivative(), v({0}), default_radii(), 16);
  EXPECT_TRUE(prof.pass);
  for (double r : prof.worst_ratio) EXPECT_EQ(r, 0.0);
}

TEST(SsRatio, AbsWithZeroFails) {
  const auto prof = ss_ratio(abs_fn(), SSDerivative::constant(1, {m1(0)}), v({0}), default_radii(), 16);
  EXPECT_FALSE(prof.pass);
  for (double r : prof.worst_ratio) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(SsRatio, ProfileShape) {
  const auto prof = ss_ratio(abs_fn(), sign_derivative(), v({0}), default_radii(), 8);
  ASSERT_EQ(prof.radii.size(), 5u);
  ASSERT_EQ(prof.worst_ratio.size(), 5u);
  for (std::size_t i = 1; i < prof.radii.size(); ++i) EXPECT_LT(prof.radii[i], prof.radii[i - 1]);
  for (int s : prof.samples) EXPECT_EQ(s, 8);
}

TEST(SsRatio, BadRadiiThrow) {
  EXPECT_THROW(ss_ratio(abs_fn(), sign_derivative(), v({0}), {1e-2, 1e-1}, 4), DimensionError);
  EXPECT_THROW(ss_ratio(abs_fn(), sign_derivative(), v({0}), {}, 4), DimensionError);
}

TEST(SsRatio, DomainViolationThrows) {
  const SSDerivative psi(1, 1, [](const Vec&) { return MatrixSet{m1(1)}; }, [](const Vec& x) { return x(0) > 0; });
  EXPECT_THROW(ss_ratio([](const Vec& x) { return x; }, psi, v({-1}), default_radii(), 4), DomainError);
}

TEST(SsRatio, ReproducibleBitForBit) {
  const auto p = problems::paper_bilevel();
  const auto f = as_vector_fn(p.objective);
  const auto a = ss_ratio(f, p.psi, v({0.2, -0.1}), default_radii(), 32);
  const auto b = ss_ratio(f, p.psi, v({0.2, -0.1}), default_radii(), 32);
  EXPECT_EQ(a.worst_ratio, b.worst_ratio);
  const auto c = ss_ratio(f, p.psi, v({0.2, -0.1}), default_radii(), 32, 1e-3, 99);
  EXPECT_EQ(c.radii, a.radii);
}

// Chain rule: sigma composed with eta inherits the ratio test.
TEST(SsRatio, ChainOfPassingFactorsPasses) {
  const SSDerivative eta_psi = problems::bilevel_eta_derivative();
  const VecFn eta = [](const Vec& x) { return Vec::Constant(1, problems::bilevel_eta(x)); };
  const auto ll = problems::paper_lower_level();
  const SSDerivative composite = chain(eta_psi, eta, psi_from_scd(ll.map, ll.sigma));
  const VecFn f = [eta, ll](const Vec& x) { return ll.sigma(eta(x)); };
  for (const Vec& x : {v({0, 0}), v({1, 1}), v({0.3, 0}), v({-0.5, 0.2})}) {
    EXPECT_TRUE(ss_ratio(f, composite, x, default_radii(), 32).pass) << x.transpose();
  }
}

TEST(ClarkeContainment, SmoothQuadratic) {
  const ScalarFn f = [](const Vec& x) { return x.squaredNorm(); };
  const SSDerivative psi = SSDerivative::single(2, 1, [](const Vec& x) { return Mat(2.0 * x.transpose()); });
  const auto res = clarke_containment(f, psi, v({0.4, -1.0}));
  EXPECT_TRUE(res.contained);
  EXPECT_GE(res.accepted, 5);
}

TEST(ClarkeContainment, AbsAtZero) {
  const ScalarFn f = [](const Vec& x) { return std::abs(x(0)); };
  EXPECT_TRUE(clarke_containment(f, sign_derivative(), v({0})).contained);
  EXPECT_FALSE(clarke_containment(f, SSDerivative::constant(1, {m1(0)}), v({0})).contained);
}

TEST(ClarkeContainment, TooFewSmoothSamplesThrows) {
  // Nowhere differentiable at the finite-difference scale.
  const ScalarFn f = [](const Vec& x) { return std::abs(std::sin(1e9 * x(0))); };
  EXPECT_THROW(clarke_containment(f, sign_derivative(), v({0})), DomainError);
}

TEST(SingletonFraction, Examples) {
  const Box box = Box::cube(1, -1.0, 1.0);
  EXPECT_DOUBLE_EQ(singleton_fraction(SSDerivative::constant(1, {m1(3)}), box, 500), 1.0);
  EXPECT_GE(singleton_fraction(lower_level_psi(), box, 10000), 0.999);
  EXPECT_DOUBLE_EQ(singleton_fraction(SSDerivative::constant(1, {m1(-1), m1(1)}), box, 500), 0.0);
}

TEST(SingletonFraction, ClusterToleranceSeparatesContinuousFromJumps) {
  const Box box = Box::cube(1, -1.0, 1.0);
  // Psi(x) = {x}: neighbours differ by about the probe radius.
  const auto lin = SSDerivative::single(1, 1, [](const Vec& x) { return m1(x(0)); });
  EXPECT_DOUBLE_EQ(singleton_fraction(lin, box, 500), 1.0);
  SingletonOptions exact;
  exact.cluster_tol = 0.0;
  EXPECT_LT(singleton_fraction(lin, box, 500, exact), 0.01);
  // Jump of size 1e-3 everywhere is resolved.
  const auto jump = SSDerivative::constant(1, {m1(0.0), m1(1e-3)});
  EXPECT_DOUBLE_EQ(singleton_fraction(jump, box, 200), 0.0);
}

TEST(ScdSsRatio, AffineGraphIsExact) {
  // F(x, y) = {2x - y}: graph is a plane in (x, y, z).
  SCDMapping map;
  map.n = 1;
  map.m = 1;
  Mat jac(1, 2);
  jac << 2, -1;
  const Subspace ls = adjoint(from_graph(jac));
  map.sstar_eval = [ls](const Vec&, const Vec&, const Vec&) { return std::vector<Subspace>{ls}; };
  const GraphSampler sampler = [](const Vec& zbar, double r, int count, std::uint64_t seed) {
    ShellSampler s(2, seed);
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) {
      Vec d = s.next(Vec::Zero(2), 0.5 * r, r);
      Vec z(3);
      z << zbar(0) + d(0), zbar(1) + d(1), zbar(2) + 2 * d(0) - d(1);
      if ((z - zbar).norm() <= r) out.push_back(z);
    }
    return out;
  };
  const auto prof = scd_ss_ratio(map, v({0.1, 0.2, 0}), sampler, default_radii(), 16);
  EXPECT_TRUE(prof.pass);
  // Roundoff only; it grows like eps / r on the smallest shells.
  for (double r : prof.worst_ratio) EXPECT_LE(r, 1e-9);
}

TEST(ScdSsRatio, LowerLevelAtOrigin) {
  const auto ll = problems::paper_lower_level();
  const auto prof = scd_ss_ratio(ll.map, v({0, 0, 0}), ll.sampler, {1e-1, 1e-2, 1e-3, 1e-4});
  EXPECT_TRUE(prof.pass);
  EXPECT_LE(prof.final_ratio(), 1e-3);
  for (int s : prof.samples) EXPECT_GT(s, 0);
}

TEST(ScdSsRatio, LowerLevelAlongGrid) {
  const auto ll = problems::paper_lower_level();
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    const Vec zbar = v({x, ll.sigma(v({x}))(0), 0});
    EXPECT_TRUE(ll.map.on_graph(zbar.head(1), zbar.segment(1, 1), zbar.tail(1)));
    EXPECT_TRUE(scd_ss_ratio(ll.map, zbar, ll.sampler, default_radii()).pass) << x;
  }
}

TEST(ScdSsRatio, SampledPointsLieOnGraph) {
  const auto ll = problems::paper_lower_level();
  for (const auto& z : ll.sampler(v({0.3, 0.3, 0}), 1e-2, 64, 7)) {
    EXPECT_TRUE(ll.map.on_graph(z.head(1), z.segment(1, 1), z.tail(1), 1e-12));
    const double d = (z - v({0.3, 0.3, 0})).norm();
    EXPECT_GT(d, 0.5e-2);
    EXPECT_LE(d, 1e-2);
  }
}

TEST(ScdSsRatio, WrongDerivativeFails) {
  const auto ll = problems::paper_lower_level();
  const auto prof = scd_ss_ratio(problems::lower_level_wrong_derivative(), v({0, 0, 0}), ll.sampler, default_radii());
  EXPECT_FALSE(prof.pass);
  EXPECT_GE(prof.final_ratio(), 0.5);
}
