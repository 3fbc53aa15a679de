#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "scdopt/problems.hpp"
#include "scdopt/report.hpp"

namespace scdopt::problems {

/// Parses a problem description (see docs/problem_format.md).
///
/// Supported kinds: "l1" (params: weights, center), "max_quadratic"
/// (params: pieces[{curvature, linear, constant}]) and "paper_bilevel"
/// (params: numeric_lower_level).
inline ProblemSpec problem_from_json(const nlohmann::json& j) {
  using cli::vec_from_json;
  try {
    if (j.at("schema_version").get<int>() != cli::kSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const std::string name = j.value("name", kind);
    const nlohmann::json params = j.value("params", nlohmann::json::object());

    if (kind == "paper_bilevel") {
      ProblemSpec p = paper_bilevel(params.value("numeric_lower_level", false));
      p.name = name;
      if (j.contains("x0")) p.x0 = vec_from_json(j.at("x0"));
      return p;
    }

    const auto n = j.at("dim").get<Eigen::Index>();
    if (n < 1) throw std::invalid_argument("dim must be positive");
    bundle::Polyhedron uad = bundle::Polyhedron::unconstrained(n);
    if (j.contains("constraints")) {
      const auto& c = j.at("constraints");
      auto rows = [n](const nlohmann::json& a) {
        Mat out(static_cast<Eigen::Index>(a.size()), n);
        for (std::size_t i = 0; i < a.size(); ++i) {
          const Vec r = vec_from_json(a.at(i));
          if (r.size() != n) throw std::invalid_argument("constraint row has wrong length");
          out.row(static_cast<Eigen::Index>(i)) = r.transpose();
        }
        return out;
      };
      if (c.contains("A_ineq")) uad.a_ineq = rows(c.at("A_ineq"));
      if (c.contains("b_ineq")) uad.b_ineq = vec_from_json(c.at("b_ineq"));
      if (c.contains("A_eq")) uad.a_eq = rows(c.at("A_eq"));
      if (c.contains("b_eq")) uad.b_eq = vec_from_json(c.at("b_eq"));
      uad.validate(n);
    }
    const Vec x0 = j.contains("x0") ? vec_from_json(j.at("x0")) : Vec::Zero(n);
    if (x0.size() != n) throw std::invalid_argument("x0 has wrong length");
    std::optional<KnownSolution> known;
    if (j.contains("known_solution")) {
      const auto& k = j.at("known_solution");
      known = KnownSolution{vec_from_json(k.at("x")), k.at("value").get<double>(), k.value("tol", 1e-3)};
    }

    if (kind == "l1") {
      const Vec w = params.contains("weights") ? vec_from_json(params.at("weights")) : Vec::Ones(n);
      const Vec c = params.contains("center") ? vec_from_json(params.at("center")) : Vec::Zero(n);
      if (w.size() != n || c.size() != n) throw std::invalid_argument("weights/center have wrong length");
      if ((w.array() < 0.0).any()) throw std::invalid_argument("weights must be nonnegative");
      return weighted_l1(name, w, c, x0, uad, known);
    }
    if (kind == "max_quadratic") {
      std::vector<QuadraticPiece> pieces;
      for (const auto& pc : params.at("pieces")) {
        pieces.push_back({pc.value("curvature", 0.0), vec_from_json(pc.at("linear")), pc.value("constant", 0.0)});
      }
      return max_quadratic(name, std::move(pieces), x0, uad, known);
    }
    throw std::invalid_argument("unknown problem kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed problem file: ") + e.what());
  } catch (const DimensionError& e) {
    throw std::invalid_argument(std::string("malformed problem file: ") + e.what());
  }
}

inline ProblemSpec load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed problem file '" + path + "': " + e.what());
  }
  return problem_from_json(j);
}

}  // namespace scdopt::problems
