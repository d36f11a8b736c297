// Smallest end-to-end use of the library: describe a problem, solve one
// relaxation, inspect the bound, and keep the verified certificate.
//
// The problem: minimize x1 + x2 over the spectrahedron
//   [ 1+x1   x2  ]
//   [  x2   1-x1 ]  >= 0,
// the unit disk written as a linear matrix inequality.  The true minimum is
// -sqrt(2) at x = (-1/sqrt(2), -1/sqrt(2)).

#include <cstdio>

#include "pmirelax/pmirelax.hpp"

using namespace pmirelax;

int main() {
  const int n = 2;
  Polynomial x1 = Polynomial::variable(n, 0);
  Polynomial x2 = Polynomial::variable(n, 1);
  Polynomial one = Polynomial::constant(n, 1.0);

  PmiProblem p;
  p.n = n;
  PolyMatrix g(n, 2);
  g.set(0, 0, one + x1);
  g.set(0, 1, x2);
  g.set(1, 1, one - x1);
  p.blocks = {g};
  p.objective = x1 + x2;

  RelaxOptions opt;
  opt.mode = "auto";  // picks the dense cone for a single matrix block
  opt.order = 2;

  RelaxResult res = solve_relaxation(p, opt);
  const RunRecord& rec = res.record;
  std::printf("mode %s, order %d: status %s\n", rec.mode.c_str(), rec.order,
              rec.status.c_str());
  if (!res.usable()) {
    std::printf("no usable bound: %s\n", rec.note.c_str());
    return 1;
  }
  std::printf("lower bound %.6f  (true minimum is -sqrt(2) ~ -1.414214)\n", rec.bound);

  if (res.certificate && res.certificate->report.verified) {
    std::printf("certificate verified: identity residual %.2e, min eigenvalue %.2e\n",
                res.certificate->report.identity_residual,
                res.certificate->report.min_eigenvalue);
    save_certificate(*res.certificate, "quickstart_certificate.json");
    std::printf("certificate written to quickstart_certificate.json\n");
  }
  return 0;
}
