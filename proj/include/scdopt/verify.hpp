#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "scdopt/error.hpp"
#include "scdopt/sampling.hpp"
#include "scdopt/scdmap.hpp"
#include "scdopt/simplex_qp.hpp"
#include "scdopt/ssderiv.hpp"

namespace scdopt::verify {

/// Worst remainder ratio per sampling radius; "tends to zero" is read off the smallest radius.
struct RatioProfile {
  std::vector<double> radii;
  std::vector<double> worst_ratio;
  std::vector<int> samples;  // accepted samples per radius
  double tol = 1e-3;
  bool pass = false;

  double final_ratio() const { return worst_ratio.empty() ? std::numeric_limits<double>::infinity() : worst_ratio.back(); }
};

/// 1e-1, 1e-2, ..., 1e-5.
inline std::vector<double> default_radii() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}; }

namespace detail {

inline void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw DimensionError("ratio test: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
      throw DimensionError("ratio test: radii must be positive and strictly decreasing");
    }
  }
}

inline RatioProfile finish(RatioProfile prof) {
  prof.pass = prof.final_ratio() <= prof.tol;
  return prof;
}

}  // namespace detail

/// sup over x in shells (r/2, r] around xbar and A in Psi(x) of |F(x) - F(xbar) - A(x - xbar)| / |x - xbar|.
inline RatioProfile ss_ratio(const VecFn& f, const SSDerivative& psi, const Vec& xbar, const std::vector<double>& radii,
                             int samples_per_shell, double tol = 1e-3, std::uint64_t seed = kDefaultSeed) {
  detail::check_radii(radii);
  if (!psi.in_domain(xbar)) throw DomainError("ss_ratio: base point outside the domain", xbar);
  const Vec fbar = f(xbar);
  RatioProfile prof;
  prof.tol = tol;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    ShellSampler sampler(static_cast<std::size_t>(xbar.size()), mix_seed(seed, k));
    const double r = radii[k];
    double worst = 0.0;
    int accepted = 0;
    for (int s = 0; s < samples_per_shell; ++s) {
      const Vec x = sampler.next(xbar, 0.5 * r, r);
      if (!psi.in_domain(x)) continue;
      ++accepted;
      const Vec dx = x - xbar;
      const Vec base = f(x) - fbar;
      for (const auto& a : psi(x)) worst = std::max(worst, (base - a * dx).norm() / dx.norm());
    }
    if (accepted == 0) throw DomainError("ss_ratio: no sample of a shell fell inside the domain", xbar);
    prof.radii.push_back(r);
    prof.worst_ratio.push_back(worst);
    prof.samples.push_back(accepted);
  }
  return detail::finish(std::move(prof));
}

inline VecFn as_vector_fn(ScalarFn f) {
  return [f = std::move(f)](const Vec& x) { return Vec::Constant(1, f(x)); };
}

struct ContainmentResult {
  bool contained = false;
  int accepted = 0;            // differentiability points used
  double worst_distance = 0.0; // largest distance of an estimated gradient to the hull
  std::size_t hull_size = 0;
};

struct ContainmentOptions {
  double fd_step = 1e-7;
  int n_dirs = 32;          // sampled points near x
  double sample_radius = 0.0;  // 0 selects 100 * fd_step
  double tol = 1e-3;
  int hull_samples_per_shell = 8;
  std::uint64_t seed = kDefaultSeed;
};

/// Estimates Clarke gradients of f near x by central differences and checks them against cocl Psi(x).
inline ContainmentResult clarke_containment(const ScalarFn& f, const SSDerivative& psi, const Vec& x,
                                            const ContainmentOptions& opts = {}) {
  const Eigen::Index n = x.size();
  const double h = opts.fd_step;
  const double radius = opts.sample_radius > 0.0 ? opts.sample_radius : 100.0 * h;
  ShellSchedule sched;
  sched.radius = radius;
  sched.samples_per_shell = opts.hull_samples_per_shell;
  sched.seed = opts.seed;
  const MatrixSet hull = cocl_at(psi, x, sched);
  const Mat vertices = hull.flattened();

  ContainmentResult res;
  res.hull_size = hull.size();
  ShellSampler sampler(static_cast<std::size_t>(n), mix_seed(opts.seed, 0xC1A4CEULL));
  for (int s = 0; s < opts.n_dirs; ++s) {
    const Vec p = sampler.next(x, 0.0, radius);
    const double fp = f(p);
    Vec grad(n);
    bool smooth = true;
    for (Eigen::Index j = 0; j < n && smooth; ++j) {
      Vec e = Vec::Zero(n);
      e(j) = h;
      const double fwd = (f(p + e) - fp) / h;
      const double bwd = (fp - f(p - e)) / h;
      smooth = std::abs(fwd - bwd) <= 10.0 * h;
      grad(j) = 0.5 * (fwd + bwd);
    }
    if (!smooth) continue;
    ++res.accepted;
    res.worst_distance = std::max(res.worst_distance, bundle::hull_distance(grad, vertices));
  }
  if (res.accepted < 5) {
    throw DomainError("clarke_containment: only " + std::to_string(res.accepted) +
                      " sample points passed the differentiability filter", x);
  }
  res.contained = res.worst_distance <= opts.tol;
  return res;
}

struct SingletonOptions {
  double probe_radius = 1e-9;
  int probe_samples = 2;
  // Elements closer than this (relative to max(1, |A|)) count as one matrix.
  double cluster_tol = 1e-6;
  std::uint64_t seed = kDefaultSeed;
};

/// Fraction of uniformly spread points of the box at which cocl Psi is a single matrix.
inline double singleton_fraction(const SSDerivative& psi, const Box& box, int n_samples,
                                 const SingletonOptions& opts = {}) {
  if (n_samples <= 0) return 0.0;
  LowDiscrepancy gen(static_cast<std::size_t>(box.lower.size()), opts.seed);
  ShellSchedule sched;
  sched.radius = opts.probe_radius;
  sched.samples_per_shell = opts.probe_samples;
  sched.seed = opts.seed;
  int singles = 0;
  for (int i = 0; i < n_samples; ++i) {
    const Vec x = box_point(gen, box.lower, box.upper);
    const std::vector<MatrixSet> values = scdopt::detail::shell_values(psi, x, sched);
    const Mat first = values.front()[0];
    double scale = std::max(1.0, first.cwiseAbs().maxCoeff());
    bool single = true;
    for (const auto& set : values) {
      for (const auto& a : set) {
        scale = std::max(scale, a.cwiseAbs().maxCoeff());
        single = single && (a - first).cwiseAbs().maxCoeff() <= opts.cluster_tol * scale;
      }
    }
    if (single) ++singles;
  }
  return static_cast<double>(singles) / static_cast<double>(n_samples);
}

/// Yields graph points z of an SCD mapping with r/2 < |z - zbar| <= r.
using GraphSampler = std::function<std::vector<Vec>(const Vec& zbar, double r, int count, std::uint64_t seed)>;

/// sup over sampled graph points z and L in S F(z) of dist(z - zbar, L) / |z - zbar|.
inline RatioProfile scd_ss_ratio(const SCDMapping& scd, const Vec& zbar, const GraphSampler& sampler,
                                 const std::vector<double>& radii, int samples_per_shell = 64, double tol = 1e-3,
                                 std::uint64_t seed = kDefaultSeed) {
  detail::check_radii(radii);
  const Eigen::Index n = scd.n;
  const Eigen::Index m = scd.m;
  if (zbar.size() != n + 2 * m) throw DimensionError("scd_ss_ratio: graph point has wrong size");
  RatioProfile prof;
  prof.tol = tol;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    const std::vector<Vec> pts = sampler(zbar, r, samples_per_shell, mix_seed(seed, k));
    if (pts.empty()) throw DomainError("scd_ss_ratio: empty shell sample", zbar);
    double worst = 0.0;
    for (const auto& z : pts) {
      const Vec dz = z - zbar;
      const double len = dz.norm();
      for (const auto& l : scd.sc_derivative(z.head(n), z.segment(n, m), z.tail(m))) {
        worst = std::max(worst, l.distance(dz) / len);
      }
    }
    prof.radii.push_back(r);
    prof.worst_ratio.push_back(worst);
    prof.samples.push_back(static_cast<int>(pts.size()));
  }
  return detail::finish(std::move(prof));
}

}  // namespace scdopt::verify
