#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "scdopt/error.hpp"
#include "scdopt/linalg.hpp"
#include "scdopt/simplex_qp.hpp"

namespace scdopt::bundle {

/// Feasible set {x : A_ineq x <= b_ineq, A_eq x = b_eq}.
struct Polyhedron {
  Mat a_ineq;
  Vec b_ineq;
  Mat a_eq;
  Vec b_eq;

  static Polyhedron unconstrained(Eigen::Index n) {
    return {Mat(0, n), Vec(0), Mat(0, n), Vec(0)};
  }

  Eigen::Index dim() const noexcept { return std::max(a_ineq.cols(), a_eq.cols()); }
  bool has_constraints() const noexcept { return a_ineq.rows() > 0 || a_eq.rows() > 0; }

  void validate(Eigen::Index n) const {
    if (a_ineq.cols() != n || a_eq.cols() != n || a_ineq.rows() != b_ineq.size() || a_eq.rows() != b_eq.size()) {
      throw DimensionError("Polyhedron: inconsistent constraint dimensions");
    }
  }

  /// Largest constraint violation at x.
  double violation(const Vec& x) const {
    double v = 0.0;
    if (a_ineq.rows() > 0) v = std::max(v, (a_ineq * x - b_ineq).maxCoeff());
    if (a_eq.rows() > 0) v = std::max(v, (a_eq * x - b_eq).cwiseAbs().maxCoeff());
    return v;
  }

  bool feasible(const Vec& x, double tol = 1e-9) const { return violation(x) <= tol; }

  /// Outward normals of the constraints active at x (equalities contribute both signs).
  Mat active_normals(const Vec& x, double tol = 1e-8) const {
    std::vector<Vec> cols;
    for (Eigen::Index i = 0; i < a_ineq.rows(); ++i) {
      if (a_ineq.row(i).dot(x) >= b_ineq(i) - tol) cols.push_back(a_ineq.row(i).transpose());
    }
    for (Eigen::Index i = 0; i < a_eq.rows(); ++i) {
      cols.push_back(a_eq.row(i).transpose());
      cols.push_back(-a_eq.row(i).transpose());
    }
    if (cols.empty()) return Mat(x.size(), 0);
    return columns(cols);
  }
};

/// What the objective oracle returns: theta(x) and one pseudogradient g(x).
struct OraclePoint {
  Vec x;
  double value = 0.0;
  Vec g;
};

using Oracle = std::function<OraclePoint(const Vec&)>;

struct SolveOptions {
  double tol = 1e-6;
  int max_iterations = 500;
  int max_oracle_calls = 1000;
  double t0 = 1.0;
  double t_min = 1e-6;
  double t_max = 1e6;
  double descent_fraction = 0.1;   // m_L in the serious-step test
  double downshift = 1e-8;         // gamma in alpha_i >= gamma |x_i - center|^2
  std::size_t max_bundle = 50;
  QpOptions qp{};
};

enum class StepKind { Initial, Serious, Null };

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::Initial: return "initial";
    case StepKind::Serious: return "serious";
    case StepKind::Null: return "null";
  }
  return "?";
}

enum class SolveStatus { Converged, BudgetExhausted };

inline const char* to_string(SolveStatus s) { return s == SolveStatus::Converged ? "converged" : "budget_exhausted"; }

struct TraceEntry {
  int iteration = 0;
  Vec center;
  double theta = 0.0;
  StepKind step = StepKind::Initial;
  double aggregate_norm = 0.0;
  double prox_t = 0.0;
  Vec trial;  // point sent to the oracle in this iteration (center for the initial entry)

  friend bool operator==(const TraceEntry& a, const TraceEntry& b) {
    return a.iteration == b.iteration && identical(a.center, b.center) && a.theta == b.theta && a.step == b.step &&
           a.aggregate_norm == b.aggregate_norm && a.prox_t == b.prox_t && identical(a.trial, b.trial);
  }
};

/// One cutting plane, anchored where the oracle was called.
struct Cut {
  Vec anchor;
  double value = 0.0;
  Vec g;
  double alpha = 0.0;  // linearization error w.r.t. the current center
};

struct BundleState {
  Vec center;
  double center_value = 0.0;
  std::vector<Cut> cuts;
  double prox_t = 1.0;
  Vec aggregate;
  double aggregate_error = 0.0;
  int iterations = 0;
  int oracle_calls = 0;
  int serious_steps = 0;
};

struct SolveReport {
  std::string problem;
  SolveOptions options;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  int oracle_calls = 0;
  int serious_steps = 0;
  Vec x;
  double theta = 0.0;
  double stationarity = 0.0;
  SolveStatus status = SolveStatus::BudgetExhausted;
  double wall_time_s = 0.0;

  // Final aggregate data: the certificate behind `stationarity`.
  Vec aggregate;                  // G lambda + N mu
  double aggregate_error = 0.0;   // alpha^T lambda
  Mat bundle_gradients;           // G
  Vec bundle_weights;             // lambda
  Mat constraint_normals;         // N (rows of the active constraint system)
  Vec constraint_weights;         // mu
};

namespace detail {

inline double linearization_error(const Cut& c, const Vec& center, double center_value, double downshift) {
  const double raw = center_value - c.value - c.g.dot(center - c.anchor);
  return std::max(raw, downshift * (c.anchor - center).squaredNorm());
}

inline OraclePoint call_oracle(const Oracle& oracle, const Vec& x, BundleState& st) {
  OraclePoint pt;
  try {
    pt = oracle(x);
  } catch (const std::exception& e) {
    throw OracleFailure(std::string("oracle failed: ") + e.what());
  }
  ++st.oracle_calls;
  if (pt.g.size() != x.size() || !std::isfinite(pt.value) || !pt.g.allFinite()) {
    throw OracleFailure("oracle returned a non-finite value or a gradient of the wrong size");
  }
  pt.x = x;
  return pt;
}

/// Constraint rows as seen from the center: normals N (columns) and slacks s = b - A c >= 0.
inline void constraint_system(const Polyhedron& uad, const Vec& center, Mat& normals, Vec& slack) {
  const Eigen::Index p = uad.a_ineq.rows() + 2 * uad.a_eq.rows();
  normals.resize(center.size(), p);
  slack.resize(p);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < uad.a_ineq.rows(); ++i, ++j) {
    normals.col(j) = uad.a_ineq.row(i).transpose();
    slack(j) = std::max(0.0, uad.b_ineq(i) - uad.a_ineq.row(i).dot(center));
  }
  for (Eigen::Index i = 0; i < uad.a_eq.rows(); ++i) {
    normals.col(j) = uad.a_eq.row(i).transpose();
    slack(j++) = 0.0;
    normals.col(j) = -uad.a_eq.row(i).transpose();
    slack(j++) = 0.0;
  }
}

}  // namespace detail

/// Proximal bundle method with trust-region style control of the prox parameter.
///
/// Minimizes theta over a polyhedron using only (theta(x), g(x)) oracle pairs; g may
/// be any element of a semismooth derivative, not necessarily a Clarke subgradient.
/// Terminates once |G lambda + N mu| + alpha^T lambda + s^T mu <= tol.
inline SolveReport solve(const Oracle& oracle, const Polyhedron& uad, const Vec& x0, const SolveOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  uad.validate(n);
  if (!uad.feasible(x0)) {
    throw InfeasibleStart("solve: starting point violates the constraints by " + std::to_string(uad.violation(x0)));
  }

  BundleState st;
  st.prox_t = std::clamp(opts.t0, opts.t_min, opts.t_max);
  SolveReport report;
  report.options = opts;

  const OraclePoint first = detail::call_oracle(oracle, x0, st);
  st.center = x0;
  st.center_value = first.value;
  st.cuts.push_back({x0, first.value, first.g, 0.0});
  report.trace.push_back({0, st.center, st.center_value, StepKind::Initial, first.g.norm(), st.prox_t, x0});

  int consecutive_serious = 0;
  int consecutive_null = 0;
  Mat normals;
  Vec slack;
  QpSolution qp;
  double stationarity = std::numeric_limits<double>::infinity();

  for (;;) {
    Mat g(n, static_cast<Eigen::Index>(st.cuts.size()));
    Vec alpha(static_cast<Eigen::Index>(st.cuts.size()));
    for (std::size_t i = 0; i < st.cuts.size(); ++i) {
      g.col(static_cast<Eigen::Index>(i)) = st.cuts[i].g;
      alpha(static_cast<Eigen::Index>(i)) = st.cuts[i].alpha;
    }
    detail::constraint_system(uad, st.center, normals, slack);
    qp = simplex_cone_qp(g, alpha, normals, slack, st.prox_t, opts.qp);
    st.aggregate = qp.aggregate;
    st.aggregate_error = alpha.dot(qp.lambda);
    const double complementarity = slack.dot(qp.mu);
    stationarity = qp.aggregate.norm() + st.aggregate_error + complementarity;

    report.bundle_gradients = g;
    report.bundle_weights = qp.lambda;
    report.constraint_normals = normals;
    report.constraint_weights = qp.mu;

    if (stationarity <= opts.tol) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (st.iterations >= opts.max_iterations || st.oracle_calls >= opts.max_oracle_calls) {
      report.status = SolveStatus::BudgetExhausted;
      break;
    }

    ++st.iterations;
    // Predicted decrease of the cutting-plane model along the step.
    const double predicted = st.prox_t * qp.aggregate.squaredNorm() + st.aggregate_error + complementarity;
    Vec trial = st.center + qp.step;
    if (uad.has_constraints() && !uad.feasible(trial, 1e-12)) {
      // Trim roundoff: pull the trial back toward the (feasible) center.
      double lo = 0.0;
      double hi = 1.0;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (uad.feasible(st.center + mid * qp.step, 1e-12) ? lo : hi) = mid;
      }
      trial = st.center + lo * qp.step;
    }

    const OraclePoint pt = detail::call_oracle(oracle, trial, st);
    Cut cut{trial, pt.value, pt.g, 0.0};

    StepKind kind;
    if (pt.value <= st.center_value - opts.descent_fraction * predicted) {
      kind = StepKind::Serious;
      ++st.serious_steps;
      consecutive_null = 0;
      st.center = trial;
      st.center_value = pt.value;
      if (++consecutive_serious >= 2) st.prox_t = std::min(2.0 * st.prox_t, opts.t_max);
    } else {
      kind = StepKind::Null;
      consecutive_serious = 0;
      // Shrink when the new cut disagrees with the model, or when null steps pile up.
      const double cut_error = detail::linearization_error(cut, st.center, st.center_value, opts.downshift);
      if (cut_error > predicted || ++consecutive_null % 8 == 0) st.prox_t = std::max(0.5 * st.prox_t, opts.t_min);
    }

    st.cuts.push_back(std::move(cut));
    for (auto& c : st.cuts) c.alpha = detail::linearization_error(c, st.center, st.center_value, opts.downshift);

    if (st.cuts.size() > opts.max_bundle) {
      // Keep active planes plus the newest; fold the rest into one aggregate plane.
      std::vector<Cut> kept;
      Cut folded{st.center, 0.0, Vec::Zero(n), 0.0};
      double folded_weight = 0.0;
      double folded_alpha = 0.0;
      const std::size_t newest = st.cuts.size() - 1;
      for (std::size_t i = 0; i < newest; ++i) {
        const double w = i < static_cast<std::size_t>(qp.lambda.size()) ? qp.lambda(static_cast<Eigen::Index>(i)) : 0.0;
        if (w > 0.0) {
          folded.g += w * st.cuts[i].g;
          folded_alpha += w * st.cuts[i].alpha;
          folded_weight += w;
        }
      }
      if (folded_weight > 0.0) {
        folded.g /= folded_weight;
        folded_alpha /= folded_weight;
        folded.value = st.center_value - folded_alpha;
        folded.alpha = folded_alpha;
        kept.push_back(std::move(folded));
      }
      kept.push_back(std::move(st.cuts[newest]));
      st.cuts = std::move(kept);
    }

    const double agg_norm = qp.aggregate.norm();
    report.trace.push_back({st.iterations, st.center, st.center_value, kind, agg_norm, st.prox_t, trial});
  }

  report.iterations = st.iterations;
  report.oracle_calls = st.oracle_calls;
  report.serious_steps = st.serious_steps;
  report.x = st.center;
  report.theta = st.center_value;
  report.stationarity = stationarity;
  report.aggregate = st.aggregate;
  report.aggregate_error = st.aggregate_error;
  return report;
}

}  // namespace scdopt::bundle
