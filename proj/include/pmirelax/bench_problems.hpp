#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pmirelax/problem.hpp"
#include "pmirelax/rng.hpp"

namespace pmirelax {

struct ReferenceOptimum {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::VectorXd> minimizers;
  std::string provenance;  // closed-form | scalar-solve | grid
};

inline double chain_optimum(int n);

namespace detail {

inline Polynomial var(int n, int i) { return Polynomial::variable(n, i); }

inline Polynomial cst(int n, double c) { return Polynomial::constant(n, c); }

}  // namespace detail

// Spectrahedron with faces of every dimension: a 2x2 linear block plus the
// halfspace x3 <= 1.  Four quadratic objectives share the optimum 2 but sit
// on faces of different dimensions, which is what separates the exact cases
// from the inexact ones.
inline PmiProblem gen_example1(int which = 1) {
  if (which < 1 || which > 4) throw std::invalid_argument("gen_example1: which must be 1..4");
  using detail::cst;
  using detail::var;
  const int n = 3;
  Polynomial x1 = var(n, 0), x2 = var(n, 1), x3 = var(n, 2);

  PmiProblem p;
  p.n = n;
  PolyMatrix g(n, 2);
  g.set(0, 0, x3 + x2);
  g.set(0, 1, 2.0 * x3 - x1);
  g.set(1, 1, x3 - x2);
  PolyMatrix s(n, 1);
  s.set(0, 0, cst(n, 1.0) - x3);
  p.blocks = {g, s};

  p.alt_objectives = {
      (x1 + cst(n, 0.5)).pow(2) + x2.pow(2) + (x3 - cst(n, 1.5)).pow(2),
      (x1 - cst(n, 2.0)).pow(2) + x2.pow(2) + (x3 - cst(n, 1.0 + std::sqrt(2.0))).pow(2),
      (x1 + cst(n, 1.0)).pow(2) + x2.pow(2) + (x3 - cst(n, 1.0)).pow(2),
      x1.pow(2) + x2.pow(2) + (x3 - cst(n, 2.0)).pow(2)};
  p.objective = p.alt_objectives[which - 1];
  p.box = {{-1.0, 3.0}, {-1.0, 1.0}, {0.0, 1.0}};
  p.known_optimum = 2.0;
  return p;
}

inline ReferenceOptimum reference_example1(int which = 1) {
  ReferenceOptimum r;
  r.value = 2.0;
  r.provenance = "closed-form";
  Eigen::VectorXd u(3);
  switch (which) {
    case 1: u << 0.5, 0.0, 0.5; break;
    case 2: u << 2.0, 0.0, 1.0; break;
    case 3: u << 0.0, 0.0, 0.0; break;
    case 4: u << 1.0, 0.0, 1.0; break;
    default: throw std::invalid_argument("reference_example1: which must be 1..4");
  }
  r.minimizers = {u};
  return r;
}

// Nonlinear single-block problem, pre-scaled by 8/9 so the block is a
// contraction on its feasible set.  The "rescaled" variant moves a minimizer
// into the interior of the matrix inequality, which kills exactness at every
// order; the original keeps it at a boundary point.
inline PmiProblem gen_example2(const std::string& variant = "original") {
  if (variant != "original" && variant != "rescaled")
    throw std::invalid_argument("gen_example2: variant must be original|rescaled");
  using detail::cst;
  using detail::var;
  const int n = 2;
  Polynomial x1 = var(n, 0), x2 = var(n, 1);

  PmiProblem p;
  p.n = n;
  PolyMatrix g(n, 2);
  const double c = 8.0 / 9.0;
  g.set(0, 0, c * (x2 - 0.5 * x1));
  g.set(0, 1, c * (x1 * x2));
  g.set(1, 1, c * (2.0 * x1 - x2));
  p.blocks = {g};

  if (variant == "original")
    p.objective = (x1 * (x1 - cst(n, 1.0))).pow(2) + (x2 * (x2 - cst(n, 1.0))).pow(2) +
                  (x1 - x2).pow(2);
  else
    p.objective = (x1 * (2.0 * x1 - cst(n, 1.0))).pow(2) +
                  (x2 * (2.0 * x2 - cst(n, 1.0))).pow(2) + (x1 - x2).pow(2);
  p.box = {{0.0, 1.2}, {0.0, 1.2}};
  p.known_optimum = 0.0;
  return p;
}

inline ReferenceOptimum reference_example2(const std::string& variant = "original") {
  ReferenceOptimum r;
  r.value = 0.0;
  r.provenance = "closed-form";
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
  r.minimizers = {origin};
  if (variant == "rescaled") {
    Eigen::VectorXd half(2);
    half << 0.5, 0.5;
    r.minimizers.push_back(half);
  }
  return r;
}

// Coupled two-variable blocks along a path: block i ties x_i to x_{i+1} via
// diag entries 1 -/+ x_i and off-diagonal x_{i+1}, so feasibility means
// x_i^2 + x_{i+1}^2 <= 1 for consecutive pairs.
inline PmiProblem gen_chain(int n) {
  if (n < 2) throw std::invalid_argument("gen_chain: n must be >= 2");
  using detail::cst;
  using detail::var;
  PmiProblem p;
  p.n = n;
  p.objective = Polynomial(n);
  for (int i = 0; i < n; ++i) p.objective += (var(n, i) - cst(n, 1.0)).pow(2);
  for (int i = 0; i + 1 < n; ++i) {
    PolyMatrix g(n, 2);
    g.set(0, 0, cst(n, 1.0) - var(n, i));
    g.set(0, 1, var(n, i + 1));
    g.set(1, 1, cst(n, 1.0) + var(n, i));
    p.blocks.push_back(g);
  }
  p.known_optimum = chain_optimum(n);
  return p;
}

// Even n: all coordinates sqrt(2)/2.  Odd n: coordinates alternate between a
// and b with a^2 + b^2 = 1 and the stationarity relation a(2b + n - 1) =
// (n+1) b, solved by bisection on b.
inline double chain_optimum(int n) {
  if (n < 2) throw std::invalid_argument("chain_optimum: n must be >= 2");
  if (n % 2 == 0) return (n / 2.0) * (3.0 - 2.0 * std::sqrt(2.0));
  auto h = [&](double b) {
    double a = (n + 1) * b / (2.0 * b + n - 1);
    return a * a + b * b - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    (h(mid) > 0 ? hi : lo) = mid;
  }
  double b = 0.5 * (lo + hi);
  double a = (n + 1) * b / (2.0 * b + n - 1);
  return ((n + 1) / 2.0) * (a - 1.0) * (a - 1.0) + ((n - 1) / 2.0) * (b - 1.0) * (b - 1.0);
}

inline ReferenceOptimum reference_chain(int n) {
  ReferenceOptimum r;
  r.value = chain_optimum(n);
  r.provenance = n % 2 == 0 ? "closed-form" : "scalar-solve";
  Eigen::VectorXd u(n);
  if (n % 2 == 0) {
    u.setConstant(std::sqrt(2.0) / 2.0);
  } else {
    auto h = [&](double b) {
      double a = (n + 1) * b / (2.0 * b + n - 1);
      return a * a + b * b - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      double mid = 0.5 * (lo + hi);
      (h(mid) > 0 ? hi : lo) = mid;
    }
    double b = 0.5 * (lo + hi);
    double a = (n + 1) * b / (2.0 * b + n - 1);
    for (int i = 0; i < n; ++i) u[i] = i % 2 == 0 ? a : b;
  }
  r.minimizers = {u};
  return r;
}

// Correlation-matrix completion: q(q-1)/2 variables fill the off-diagonal of
// a unit-diagonal symmetric q x q matrix; minimizing -sum x_i^2 over the psd
// set is solved by the all-ones matrix, value -n.
inline PmiProblem gen_corrmat(int q) {
  if (q < 2) throw std::invalid_argument("gen_corrmat: q must be >= 2");
  using detail::cst;
  using detail::var;
  const int n = q * (q - 1) / 2;
  PmiProblem p;
  p.n = n;
  PolyMatrix g(n, q);
  for (int i = 1; i <= q; ++i) {
    g.set(i - 1, i - 1, cst(n, 1.0));
    for (int j = i + 1; j <= q; ++j) {
      int k = (2 * q - i) * (i - 1) / 2 + j - i;  // 1-based variable index
      g.set(i - 1, j - 1, var(n, k - 1));
    }
  }
  p.blocks = {g};
  p.objective = Polynomial(n);
  for (int i = 0; i < n; ++i) p.objective += -1.0 * var(n, i).pow(2);
  p.known_optimum = static_cast<double>(-n);
  return p;
}

inline ReferenceOptimum reference_corrmat(int q) {
  ReferenceOptimum r;
  r.value = -static_cast<double>(q * (q - 1) / 2);
  r.provenance = "closed-form";
  r.minimizers = {Eigen::VectorXd::Ones(q * (q - 1) / 2)};
  return r;
}

// Random instances for property tests: blocks are strictly feasible at the
// origin; nonlinear draws are rescaled into contractions so every cone mode
// applies.  chain_width > 0 lays blocks over sliding variable windows to
// produce correlative sparsity.
inline PmiProblem gen_random(int n, int q, int deg, std::uint64_t seed, int chain_width = 0) {
  if (n < 1 || q < 1 || deg < 1) throw std::invalid_argument("gen_random: positive parameters required");
  if (chain_width != 0 && (chain_width < 2 || chain_width > n))
    throw std::invalid_argument("gen_random: chain_width must be in [2, n]");
  Rng rng(seed, /*stream=*/11);

  auto random_poly = [&](const std::vector<int>& vars, int max_deg, double scale) {
    std::vector<std::pair<Exponents, double>> terms;
    int count = 2 + static_cast<int>(rng.next_u64() % 3);
    for (int t = 0; t < count; ++t) {
      Exponents e(n, 0);
      int d = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_deg));
      for (int k = 0; k < d; ++k) ++e[vars[rng.next_u64() % vars.size()]];
      terms.push_back({std::move(e), rng.next_double(-scale, scale)});
    }
    return Polynomial::from_terms(n, terms);
  };

  PmiProblem p;
  p.n = n;
  std::vector<std::vector<int>> windows;
  if (chain_width == 0) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    windows.push_back(all);
  } else {
    for (int s = 0; s + chain_width <= n; s += chain_width - 1) {
      std::vector<int> w;
      for (int i = 0; i < chain_width; ++i) w.push_back(s + i);
      windows.push_back(w);
      if (s + chain_width == n) break;
    }
    if ((n - 1) % (chain_width - 1) != 0) {
      std::vector<int> w;
      for (int i = n - chain_width; i < n; ++i) w.push_back(i);
      windows.push_back(w);
    }
  }

  for (const auto& w : windows) {
    PolyMatrix g(n, q);
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        Polynomial e = random_poly(w, deg, 0.4);
        if (i == j) e += detail::cst(n, 1.1);
        g.set(i, j, e);
      }
    p.blocks.push_back(std::move(g));
  }

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  p.objective = random_poly(all, deg, 1.0) + random_poly(all, deg, 1.0) +
                detail::cst(n, rng.next_double(-1.0, 1.0));

  if (p.kind() == ProblemKind::Nonlinear)
    p = scale_for_contraction(p, {}, 4000, seed).first;
  return p;
}

// Exhaustive minimum over a grid restricted to the feasible set; +infinity
// when no grid point is feasible.  Intended for low-dimensional oracles.
inline double grid_minimum(const PmiProblem& p, double step, double psd_tol = 1e-10) {
  if (step <= 0) throw std::invalid_argument("grid_minimum: step must be positive");
  auto box = p.sampling_box();
  std::vector<long> counts(p.n);
  double total = 1;
  for (int i = 0; i < p.n; ++i) {
    counts[i] = static_cast<long>(std::floor((box[i].second - box[i].first) / step)) + 1;
    total *= static_cast<double>(counts[i]);
  }
  if (total > 2e7) throw std::invalid_argument("grid_minimum: grid too large; coarsen the step");

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(p.n);
  std::vector<long> idx(p.n, 0);
  while (true) {
    for (int i = 0; i < p.n; ++i) x[i] = box[i].first + step * static_cast<double>(idx[i]);
    if (p.is_feasible(x, psd_tol)) best = std::min(best, p.objective.eval(x));
    int carry = 0;
    while (carry < p.n && ++idx[carry] == counts[carry]) idx[carry++] = 0;
    if (carry == p.n) break;
  }
  return best;
}

}  // namespace pmirelax
