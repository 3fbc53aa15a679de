// Minimal tour of the library: build the bilevel oracle, certify it, minimize it.
#include <iostream>

#include "scdopt/scdopt.hpp"

int main() {
  using namespace scdopt;

  const problems::ProblemSpec p = problems::paper_bilevel();
  const Vec x0 = p.x0;
  const bundle::OraclePoint first = p.oracle(x0);
  std::cout << "theta(x0) = " << first.value << ", g = " << first.g.transpose() << '\n';

  const auto prof = verify::ss_ratio(verify::as_vector_fn(p.objective), p.psi, Vec::Zero(2), verify::default_radii(), 64);
  std::cout << "ss ratio at the origin: " << prof.final_ratio() << (prof.pass ? " (pass)" : " (fail)") << '\n';

  const bundle::SolveReport r = bundle::solve(p.oracle, p.uad, x0);
  std::cout << bundle::to_string(r.status) << " after " << r.iterations << " iterations and " << r.oracle_calls
            << " oracle calls\nx = " << r.x.transpose() << ", theta = " << r.theta << '\n';

  // Lower level: Psi(x) = {-X^T} from the adjoint SC derivative.
  const problems::LowerLevel ll = problems::paper_lower_level();
  const SSDerivative psi = psi_from_scd(ll.map, ll.sigma);
  for (double x : {-0.5, 0.0, 0.5}) {
    std::cout << "Psi(" << x << ") has " << psi(Vec::Constant(1, x)).size() << " element(s)\n";
  }
  return r.status == bundle::SolveStatus::Converged ? 0 : 1;
}
