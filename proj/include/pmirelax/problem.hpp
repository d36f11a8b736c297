#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmirelax/poly_matrix.hpp"
#include "pmirelax/rng.hpp"

namespace pmirelax {

enum class ProblemKind { Linear, Nonlinear };

// Minimize `objective` over the set where every block is PSD, intersected
// with `box` when sampling.
struct PmiProblem {
  int n = 0;
  Polynomial objective;
  std::vector<Polynomial> alt_objectives;  // optional selectable objectives
  std::vector<PolyMatrix> blocks;
  std::vector<std::pair<double, double>> box;  // per-variable sampling range
  std::optional<double> known_optimum;

  ProblemKind kind() const {
    for (const auto& g : blocks)
      if (g.degree() > 1) return ProblemKind::Nonlinear;
    return ProblemKind::Linear;
  }

  void validate() const {
    if (n <= 0) throw std::invalid_argument("problem: n must be positive");
    if (objective.n_vars() != n)
      throw std::invalid_argument("problem: objective variable count mismatch");
    if (blocks.empty()) throw std::invalid_argument("problem: at least one block required");
    for (const auto& g : blocks)
      if (g.n_vars() != n)
        throw std::invalid_argument("problem: block variable count mismatch");
    if (!box.empty()) {
      if (static_cast<int>(box.size()) != n)
        throw std::invalid_argument("problem: box must have one range per variable");
      for (const auto& [lo, hi] : box)
        if (!(lo < hi)) throw std::invalid_argument("problem: empty box range");
    }
    for (const auto& p : alt_objectives)
      if (p.n_vars() != n)
        throw std::invalid_argument("problem: alternative objective variable count mismatch");
  }

  std::vector<std::pair<double, double>> sampling_box() const {
    if (!box.empty()) return box;
    return std::vector<std::pair<double, double>>(n, {-1.0, 1.0});
  }

  bool is_feasible(const Eigen::VectorXd& x, double tol = 1e-10) const {
    for (const auto& g : blocks)
      if (g.min_eigenvalue(x) < -tol) return false;
    return true;
  }
};

// Single block-diagonal matrix equivalent to the list of blocks.  The
// separated form is strictly preferable for relaxations; this exists for
// equivalence testing and for baselines that need one matrix.
inline PolyMatrix merge_blocks(const std::vector<PolyMatrix>& blocks, int n) {
  if (blocks.empty()) throw std::invalid_argument("merge_blocks: no blocks");
  int q = 0;
  for (const auto& b : blocks) q += b.size();
  PolyMatrix m(n, q);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.size(); ++i)
      for (int j = i; j < b.size(); ++j) m.set(off + i, off + j, b(i, j));
    off += b.size();
  }
  return m;
}

// Rejection sampling over the box.  Deterministic for a fixed seed.
inline std::vector<Eigen::VectorXd> sample_feasible(const PmiProblem& p, int count,
                                                    std::uint64_t seed,
                                                    double psd_tol = 1e-10) {
  p.validate();
  auto box = p.sampling_box();
  Rng rng(seed, /*stream=*/17);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(count);
  const std::uint64_t max_draws = 10000000;
  std::uint64_t draws = 0, checked = 0;
  Eigen::VectorXd x(p.n);
  while (static_cast<int>(pts.size()) < count && draws < max_draws) {
    for (int i = 0; i < p.n; ++i) x[i] = rng.next_double(box[i].first, box[i].second);
    ++draws;
    ++checked;
    if (p.is_feasible(x, psd_tol)) pts.push_back(x);
    // Fail fast once the acceptance rate is demonstrably tiny.
    if (checked >= 1000000 && pts.empty()) break;
  }
  if (static_cast<int>(pts.size()) < count) {
    double rate = draws ? static_cast<double>(pts.size()) / static_cast<double>(draws) : 0.0;
    if (rate < 1e-6)
      throw std::runtime_error("sample_feasible: set appears empty or thin");
    throw std::runtime_error("sample_feasible: draw budget exhausted");
  }
  return pts;
}

struct ScalingReport {
  std::vector<double> factors;       // divisor applied to each block
  std::vector<double> sampled_max;   // sampled max eigenvalue before scaling
  bool identity = false;             // true when nothing was scaled
};

// Divides each block by an upper bound on its largest eigenvalue over the
// feasible set so that I - G is PSD there (required before dilation).
// `overrides[i] > 0` pins block i's bound; otherwise the bound is
// 1.05 * (max eigenvalue over `samples` feasible points).
inline std::pair<PmiProblem, ScalingReport> scale_for_contraction(
    const PmiProblem& p, const std::vector<double>& overrides = {},
    int samples = 10000, std::uint64_t seed = 0) {
  p.validate();
  if (!overrides.empty() && overrides.size() != p.blocks.size())
    throw std::invalid_argument("scale_for_contraction: one override per block expected");
  for (double v : overrides)
    if (v != 0.0 && !(v > 0.0))
      throw std::invalid_argument("scale_for_contraction: nonpositive bound override");

  ScalingReport rep;
  rep.factors.assign(p.blocks.size(), 1.0);
  rep.sampled_max.assign(p.blocks.size(), 0.0);
  if (p.kind() == ProblemKind::Linear) {
    rep.identity = true;
    return {p, rep};
  }

  std::vector<Eigen::VectorXd> pts;
  bool need_samples = overrides.empty();
  if (!need_samples)
    for (double v : overrides)
      if (v == 0.0) need_samples = true;
  if (need_samples) pts = sample_feasible(p, samples, seed);

  PmiProblem out = p;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    double bound;
    if (!overrides.empty() && overrides[b] > 0.0) {
      bound = overrides[b];
    } else {
      double mx = 0.0;
      for (const auto& x : pts) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.blocks[b].eval(x),
                                                          Eigen::EigenvaluesOnly);
        mx = std::max(mx, es.eigenvalues().maxCoeff());
      }
      rep.sampled_max[b] = mx;
      bound = 1.05 * mx;
      if (!(bound > 0.0))
        throw std::runtime_error("scale_for_contraction: sampled bound is not positive");
    }
    rep.factors[b] = bound;
    out.blocks[b] = p.blocks[b] * (1.0 / bound);
  }
  return {out, rep};
}

}  // namespace pmirelax
