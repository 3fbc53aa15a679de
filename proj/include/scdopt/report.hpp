#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "scdopt/bundle.hpp"
#include "scdopt/verify.hpp"

namespace scdopt::cli {

using nlohmann::json;

/// Version stamped into every report and problem file.
inline constexpr int kSchemaVersion = 1;

inline json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Row-major nested arrays; the column count is stored so empty-row matrices survive.
inline json to_json(const Mat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(to_json(Vec(a.row(i).transpose())));
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", rows}};
}

inline Vec vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Mat mat_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Mat a(rows, cols);
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw std::invalid_argument("matrix: row count mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec r = vec_from_json(data.at(static_cast<std::size_t>(i)));
    if (r.size() != cols) throw std::invalid_argument("matrix: column count mismatch");
    a.row(i) = r.transpose();
  }
  return a;
}

inline json to_json(const bundle::SolveOptions& o) {
  return {{"tol", o.tol},
          {"max_iterations", o.max_iterations},
          {"max_oracle_calls", o.max_oracle_calls},
          {"t0", o.t0},
          {"t_min", o.t_min},
          {"t_max", o.t_max},
          {"descent_fraction", o.descent_fraction},
          {"downshift", o.downshift},
          {"max_bundle", o.max_bundle},
          {"qp_max_iterations", o.qp.max_iterations},
          {"qp_kkt_tol", o.qp.kkt_tol}};
}

/// Reads the keys present in j over `base`; unknown keys are an error.
inline bundle::SolveOptions options_from_json(const json& j, bundle::SolveOptions base = {}) {
  if (!j.is_object()) throw std::invalid_argument("options: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "tol") base.tol = value.get<double>();
    else if (key == "max_iterations") base.max_iterations = value.get<int>();
    else if (key == "max_oracle_calls") base.max_oracle_calls = value.get<int>();
    else if (key == "t0") base.t0 = value.get<double>();
    else if (key == "t_min") base.t_min = value.get<double>();
    else if (key == "t_max") base.t_max = value.get<double>();
    else if (key == "descent_fraction") base.descent_fraction = value.get<double>();
    else if (key == "downshift") base.downshift = value.get<double>();
    else if (key == "max_bundle") base.max_bundle = value.get<std::size_t>();
    else if (key == "qp_max_iterations") base.qp.max_iterations = value.get<int>();
    else if (key == "qp_kkt_tol") base.qp.kkt_tol = value.get<double>();
    else if (key == "seed") continue;
    else throw std::invalid_argument("options: unknown key '" + key + "'");
  }
  return base;
}

inline bundle::StepKind step_from_string(const std::string& s) {
  if (s == "initial") return bundle::StepKind::Initial;
  if (s == "serious") return bundle::StepKind::Serious;
  if (s == "null") return bundle::StepKind::Null;
  throw std::invalid_argument("unknown step kind '" + s + "'");
}

inline json to_json(const bundle::SolveReport& r) {
  json trace = json::array();
  for (const auto& e : r.trace) {
    trace.push_back({{"iteration", e.iteration},
                     {"center", to_json(e.center)},
                     {"theta", e.theta},
                     {"step", bundle::to_string(e.step)},
                     {"aggregate_norm", e.aggregate_norm},
                     {"prox_t", e.prox_t},
                     {"trial", to_json(e.trial)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "solve"},
          {"problem", r.problem},
          {"options", to_json(r.options)},
          {"status", bundle::to_string(r.status)},
          {"trace", trace},
          {"totals", {{"iterations", r.iterations}, {"oracle_calls", r.oracle_calls}, {"serious_steps", r.serious_steps}}},
          {"final", {{"x", to_json(r.x)}, {"theta", r.theta}, {"stationarity", r.stationarity}}},
          {"certificate",
           {{"aggregate", to_json(r.aggregate)},
            {"aggregate_error", r.aggregate_error},
            {"bundle_gradients", to_json(r.bundle_gradients)},
            {"bundle_weights", to_json(r.bundle_weights)},
            {"constraint_normals", to_json(r.constraint_normals)},
            {"constraint_weights", to_json(r.constraint_weights)}}},
          {"wall_time_s", r.wall_time_s}};
}

inline void check_schema(const json& j, const std::string& kind) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::invalid_argument("unsupported schema_version");
  if (j.at("kind").get<std::string>() != kind) throw std::invalid_argument("expected a '" + kind + "' report");
}

inline bundle::SolveReport solve_report_from_json(const json& j) {
  check_schema(j, "solve");
  bundle::SolveReport r;
  r.problem = j.at("problem").get<std::string>();
  r.options = options_from_json(j.at("options"));
  const std::string status = j.at("status").get<std::string>();
  r.status = status == "converged" ? bundle::SolveStatus::Converged : bundle::SolveStatus::BudgetExhausted;
  for (const auto& e : j.at("trace")) {
    r.trace.push_back({e.at("iteration").get<int>(), vec_from_json(e.at("center")), e.at("theta").get<double>(),
                       step_from_string(e.at("step").get<std::string>()), e.at("aggregate_norm").get<double>(),
                       e.at("prox_t").get<double>(), vec_from_json(e.at("trial"))});
  }
  const json& totals = j.at("totals");
  r.iterations = totals.at("iterations").get<int>();
  r.oracle_calls = totals.at("oracle_calls").get<int>();
  r.serious_steps = totals.at("serious_steps").get<int>();
  const json& fin = j.at("final");
  r.x = vec_from_json(fin.at("x"));
  r.theta = fin.at("theta").get<double>();
  r.stationarity = fin.at("stationarity").get<double>();
  const json& cert = j.at("certificate");
  r.aggregate = vec_from_json(cert.at("aggregate"));
  r.aggregate_error = cert.at("aggregate_error").get<double>();
  r.bundle_gradients = mat_from_json(cert.at("bundle_gradients"));
  r.bundle_weights = vec_from_json(cert.at("bundle_weights"));
  r.constraint_normals = mat_from_json(cert.at("constraint_normals"));
  r.constraint_weights = vec_from_json(cert.at("constraint_weights"));
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

inline json to_json(const verify::RatioProfile& p) {
  return {{"radii", p.radii}, {"worst_ratio", p.worst_ratio}, {"samples", p.samples}, {"tol", p.tol}, {"pass", p.pass}};
}

inline verify::RatioProfile ratio_profile_from_json(const json& j) {
  verify::RatioProfile p;
  p.radii = j.at("radii").get<std::vector<double>>();
  p.worst_ratio = j.at("worst_ratio").get<std::vector<double>>();
  p.samples = j.at("samples").get<std::vector<int>>();
  p.tol = j.at("tol").get<double>();
  p.pass = j.at("pass").get<bool>();
  return p;
}

inline bool operator_equal(const bundle::SolveOptions& a, const bundle::SolveOptions& b) {
  return to_json(a) == to_json(b);
}

/// Field-by-field equality of two solve reports.
inline bool reports_equal(const bundle::SolveReport& a, const bundle::SolveReport& b) {
  return a.problem == b.problem && operator_equal(a.options, b.options) && a.trace == b.trace &&
         a.iterations == b.iterations && a.oracle_calls == b.oracle_calls && a.serious_steps == b.serious_steps &&
         identical(a.x, b.x) && a.theta == b.theta && a.stationarity == b.stationarity && a.status == b.status &&
         a.wall_time_s == b.wall_time_s && identical(a.aggregate, b.aggregate) &&
         a.aggregate_error == b.aggregate_error && identical(a.bundle_gradients, b.bundle_gradients) &&
         identical(a.bundle_weights, b.bundle_weights) && identical(a.constraint_normals, b.constraint_normals) &&
         identical(a.constraint_weights, b.constraint_weights);
}

}  // namespace scdopt::cli
