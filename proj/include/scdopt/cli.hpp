#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scdopt/bundle.hpp"
#include "scdopt/problem_file.hpp"
#include "scdopt/problems.hpp"
#include "scdopt/report.hpp"
#include "scdopt/verify.hpp"

namespace scdopt::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kError = 1, kNotConverged = 2 };

inline Vec parse_point(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse number '" + tok + "' in '" + s + "'");
    }
    if (used != tok.size()) throw std::invalid_argument("trailing characters in '" + tok + "'");
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("empty point '" + s + "'");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline void write_json(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

inline problems::ProblemSpec resolve_problem(const std::string& name, const std::string& file) {
  if (!file.empty()) return problems::load_problem_file(file);
  if (name.empty()) throw std::invalid_argument("one of --problem or --problem-file is required");
  auto p = problems::find(name);
  if (!p) throw std::invalid_argument("unknown problem '" + name + "' (see `list`)");
  return std::move(*p);
}

struct SolveArgs {
  std::string problem;
  std::string problem_file;
  std::string x0;
  std::string config;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  bool no_timing = false;
  double tol = 0.0;
  int max_iterations = 0;
  int max_oracle_calls = 0;
  double t0 = 0.0;
  std::size_t max_bundle = 0;
};

/// Minimizes a registered or file-defined problem and writes the solve report.
inline int cmd_solve(const SolveArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  try {
    problems::ProblemSpec p = resolve_problem(a.problem, a.problem_file);
    if (!p.optimizable) throw std::invalid_argument("problem '" + p.name + "' is not an optimization problem");

    // defaults < options file < flags
    bundle::SolveOptions opts;
    if (!a.config.empty()) {
      std::ifstream f(a.config);
      if (!f) throw std::invalid_argument("cannot open config '" + a.config + "'");
      json j;
      try {
        f >> j;
      } catch (const json::exception& e) {
        throw std::invalid_argument("malformed config: " + std::string(e.what()));
      }
      opts = options_from_json(j, opts);
    }
    if (sub.count("--tol")) opts.tol = a.tol;
    if (sub.count("--max-iter")) opts.max_iterations = a.max_iterations;
    if (sub.count("--max-oracle-calls")) opts.max_oracle_calls = a.max_oracle_calls;
    if (sub.count("--t0")) opts.t0 = a.t0;
    if (sub.count("--max-bundle")) opts.max_bundle = a.max_bundle;
    if (!(opts.tol > 0.0) || opts.max_iterations < 0 || opts.max_oracle_calls < 1 || !(opts.t0 > 0.0) ||
        opts.max_bundle < 2) {
      throw std::invalid_argument("invalid solver options");
    }

    Vec x0 = a.x0.empty() ? p.x0 : parse_point(a.x0);
    if (x0.size() != p.dim) {
      throw std::invalid_argument("x0 has " + std::to_string(x0.size()) + " entries, problem '" + p.name +
                                  "' has dimension " + std::to_string(p.dim));
    }

    const auto start = std::chrono::steady_clock::now();
    bundle::SolveReport report = bundle::solve(p.oracle, p.uad, x0, opts);
    const auto stop = std::chrono::steady_clock::now();
    report.problem = p.name;
    report.wall_time_s = a.no_timing ? 0.0 : std::chrono::duration<double>(stop - start).count();

    json j = to_json(report);
    j["seed"] = a.seed;
    write_json(j, a.out, out);
    if (!a.out.empty() && a.out != "-") {
      out << p.name << ": " << bundle::to_string(report.status) << " after " << report.iterations
          << " iterations, " << report.oracle_calls << " oracle calls, theta = " << report.theta << '\n';
    }
    return report.status == bundle::SolveStatus::Converged ? kOk : kNotConverged;
  } catch (const std::exception& e) {
    err << "solve: " << e.what() << '\n';
    return kError;
  }
}

struct VerifyArgs {
  std::string check;
  std::string problem;
  std::string problem_file;
  std::string point;
  std::string box;
  std::string out;
  int n = 10000;
  int samples = 64;
  double tol = 1e-3;
  double min_fraction = 0.999;
  std::uint64_t seed = kDefaultSeed;
};

/// Runs one certification check (ss, clarke, singleton, scdss) on a problem.
inline int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const problems::ProblemSpec p = resolve_problem(a.problem, a.problem_file);
    json j = {{"schema_version", kSchemaVersion}, {"kind", "verify"}, {"check", a.check}, {"problem", p.name},
              {"seed", a.seed}};
    bool pass = false;
    auto default_point = [&]() -> Vec { return p.known ? p.known->x : p.x0; };

    if (a.check == "ss") {
      const Vec x = a.point.empty() ? default_point() : parse_point(a.point);
      if (x.size() != p.dim) throw std::invalid_argument("point has wrong dimension");
      const auto prof = verify::ss_ratio(verify::as_vector_fn(p.objective), p.psi, x, verify::default_radii(),
                                         a.samples, a.tol, a.seed);
      j["point"] = to_json(x);
      j["profile"] = to_json(prof);
      pass = prof.pass;
    } else if (a.check == "clarke") {
      const Vec x = a.point.empty() ? default_point() : parse_point(a.point);
      if (x.size() != p.dim) throw std::invalid_argument("point has wrong dimension");
      verify::ContainmentOptions copts;
      copts.tol = a.tol;
      copts.n_dirs = a.samples;
      copts.seed = a.seed;
      const auto res = verify::clarke_containment(p.objective, p.psi, x, copts);
      j["point"] = to_json(x);
      j["accepted"] = res.accepted;
      j["worst_distance"] = res.worst_distance;
      j["hull_size"] = res.hull_size;
      j["tol"] = a.tol;
      pass = res.contained;
    } else if (a.check == "singleton") {
      Box box = p.test_box;
      if (!a.box.empty()) {
        const Vec lohi = parse_point(a.box);
        if (lohi.size() != 2 || !(lohi(0) < lohi(1))) throw std::invalid_argument("--box expects lo,hi with lo < hi");
        box = Box::cube(p.dim, lohi(0), lohi(1));
      }
      verify::SingletonOptions sopts;
      sopts.seed = a.seed;
      const double frac = verify::singleton_fraction(p.psi, box, a.n, sopts);
      j["box"] = {{"lower", to_json(box.lower)}, {"upper", to_json(box.upper)}};
      j["n"] = a.n;
      j["fraction"] = frac;
      j["threshold"] = a.min_fraction;
      pass = frac >= a.min_fraction;
    } else if (a.check == "scdss") {
      if (!p.lower) throw std::invalid_argument("problem '" + p.name + "' has no lower-level SCD mapping");
      const auto& ll = *p.lower;
      const Vec x = a.point.empty() ? Vec::Zero(ll.map.n) : parse_point(a.point);
      if (x.size() != ll.map.n) throw std::invalid_argument("point has wrong dimension for the lower level");
      const Vec zbar = SCDMapping::stack(x, ll.sigma(x), Vec::Zero(ll.map.m));
      const auto prof = verify::scd_ss_ratio(ll.map, zbar, ll.sampler, verify::default_radii(), a.samples, a.tol, a.seed);
      j["point"] = to_json(zbar);
      j["profile"] = to_json(prof);
      pass = prof.pass;
    } else {
      throw std::invalid_argument("unknown check '" + a.check + "' (expected ss, clarke, singleton or scdss)");
    }

    j["pass"] = pass;
    write_json(j, a.out, out);
    if (!a.out.empty() && a.out != "-") out << a.check << " " << p.name << ": " << (pass ? "pass" : "fail") << '\n';
    return pass ? kOk : kNotConverged;
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << '\n';
    return kError;
  }
}

inline int cmd_list(bool as_json, std::ostream& out) {
  const auto reg = problems::registry();
  if (as_json) {
    json arr = json::array();
    for (const auto& p : reg) {
      arr.push_back({{"name", p.name}, {"dim", p.dim}, {"optimizable", p.optimizable}, {"description", p.description}});
    }
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& p : reg) out << p.name << "\t" << p.dim << "\t" << p.description << '\n';
  }
  return kOk;
}

/// Entry point shared by the executable and the tests; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"scdopt: semismooth derivatives, SCD oracles and a bundle solver"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "minimize a problem with the bundle method");
  solve->add_option("--problem", sa.problem, "registered problem name");
  solve->add_option("--problem-file", sa.problem_file, "JSON problem file");
  solve->add_option("--x0", sa.x0, "starting point, comma separated");
  solve->add_option("--tol", sa.tol, "stationarity tolerance");
  solve->add_option("--max-iter", sa.max_iterations, "iteration budget");
  solve->add_option("--max-oracle-calls", sa.max_oracle_calls, "oracle call budget");
  solve->add_option("--t0", sa.t0, "initial prox parameter");
  solve->add_option("--max-bundle", sa.max_bundle, "bundle size limit");
  solve->add_option("--config", sa.config, "JSON options file (flags take precedence)");
  solve->add_option("--seed", sa.seed, "global seed");
  solve->add_option("--out", sa.out, "report path (default stdout)");
  solve->add_flag("--no-timing", sa.no_timing, "report wall time as 0 for byte-identical output");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "run a numerical certification check");
  ver->add_option("check", va.check, "ss | clarke | singleton | scdss")->required();
  ver->add_option("--problem", va.problem, "registered problem name");
  ver->add_option("--problem-file", va.problem_file, "JSON problem file");
  ver->add_option("--point", va.point, "base point, comma separated");
  ver->add_option("--box", va.box, "sampling box lo,hi applied to every coordinate");
  ver->add_option("--n", va.n, "number of sample points (singleton)");
  ver->add_option("--samples", va.samples, "samples per shell / gradient samples");
  ver->add_option("--tol", va.tol, "pass threshold");
  ver->add_option("--min-fraction", va.min_fraction, "singleton pass threshold");
  ver->add_option("--seed", va.seed, "global seed");
  ver->add_option("--out", va.out, "report path (default stdout)");

  bool list_json = false;
  auto* lst = app.add_subcommand("list", "list registered problems");
  lst->add_flag("--json", list_json, "JSON output");

  std::vector<std::string> storage{"scdopt"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  if (solve->parsed()) return cmd_solve(sa, *solve, out, err);
  if (ver->parsed()) return cmd_verify(va, out, err);
  return cmd_list(list_json, out);
}

}  // namespace scdopt::cli
