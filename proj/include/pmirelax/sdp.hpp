#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "pmirelax/cone.hpp"
#include "pmirelax/poly.hpp"
#include "pmirelax/rng.hpp"

namespace pmirelax {

struct ResourceGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Monomial support the assembled identity can live in.  Full degree-D basis
// in general; for sparse cones, the union of per-clique bases plus the
// objective's own monomials, which is what pins the identity with far fewer
// evaluation points.
inline std::vector<Exponents> assembly_basis(const ConeSpec& cone, const Polynomial& f) {
  int n = cone.n;
  if (cone.mode != "sparse") {
    int d = std::max(cone.max_generator_degree(), std::max(f.degree(), 0));
    return MonomialBasis(n, d).monomials();
  }
  std::set<Exponents, GradedLexLess> sup;
  sup.insert(Exponents(n, 0));
  std::vector<int> clique_deg(cone.cliques.size(), 0);
  for (const auto& s : cone.slots)
    if (s.clique >= 0)
      clique_deg[s.clique] = std::max(clique_deg[s.clique], s.degree());
  for (std::size_t c = 0; c < cone.cliques.size(); ++c) {
    if (clique_deg[c] == 0) continue;
    const auto& vars = cone.cliques[c];
    MonomialBasis local(static_cast<int>(vars.size()), clique_deg[c]);
    for (const auto& le : local.monomials()) {
      Exponents e(n, 0);
      for (std::size_t i = 0; i < vars.size(); ++i) e[vars[i]] = le[i];
      sup.insert(std::move(e));
    }
  }
  for (const auto& e : f.monomials()) sup.insert(e);
  return {sup.begin(), sup.end()};
}

struct SamplePlan {
  std::vector<Eigen::VectorXd> points;
  std::vector<Exponents> basis;
  double sigma_min = 0.0;   // of the column-normalized evaluation matrix
  double sigma_max = 0.0;
  std::uint64_t seed = 0;
  int redraws = 0;
  double oversample = 1.0;
};

namespace detail {

inline Eigen::MatrixXd eval_matrix(const std::vector<Eigen::VectorXd>& pts,
                                   const std::vector<Exponents>& basis) {
  Eigen::MatrixXd e(pts.size(), basis.size());
  for (std::size_t r = 0; r < pts.size(); ++r)
    for (std::size_t c = 0; c < basis.size(); ++c) {
      double v = 1.0;
      for (std::size_t i = 0; i < basis[c].size(); ++i)
        for (int k = 0; k < basis[c][i]; ++k) v *= pts[r][static_cast<int>(i)];
      e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  return e;
}

inline void normalize_columns(Eigen::MatrixXd& e) {
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    double m = e.col(c).cwiseAbs().maxCoeff();
    if (m > 0) e.col(c) /= m;
  }
}

}  // namespace detail

// Draws generic points on the box, enough to pin down any polynomial
// supported on `basis`.  With oversample > 1, draws extra points and keeps
// the best-conditioned subset (rank-revealing QR discards the redundant
// equalities).  Redraws on rank deficiency, up to 5 times.
inline SamplePlan plan_samples(int n, const std::vector<Exponents>& basis,
                               const std::vector<std::pair<double, double>>& box,
                               std::uint64_t seed, double oversample = 1.0) {
  if (basis.empty()) throw std::invalid_argument("plan_samples: empty basis");
  if (static_cast<int>(box.size()) != n)
    throw std::invalid_argument("plan_samples: box must have n ranges");
  if (oversample < 1.0) throw std::invalid_argument("plan_samples: oversample must be >= 1");
  const int target = static_cast<int>(basis.size());
  const int draw = static_cast<int>(std::ceil(oversample * target));

  SamplePlan plan;
  plan.basis = basis;
  plan.seed = seed;
  plan.oversample = oversample;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    Rng rng(seed + 1000003ULL * static_cast<std::uint64_t>(attempt), /*stream=*/3);
    std::vector<Eigen::VectorXd> pts(draw, Eigen::VectorXd(n));
    for (auto& p : pts)
      for (int i = 0; i < n; ++i) p[i] = rng.next_double(box[i].first, box[i].second);

    std::vector<Eigen::VectorXd> chosen;
    if (draw > target) {
      Eigen::MatrixXd e = detail::eval_matrix(pts, basis);
      detail::normalize_columns(e);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e.transpose());
      const auto& perm = qr.colsPermutation().indices();
      chosen.reserve(target);
      for (int k = 0; k < target; ++k) chosen.push_back(pts[perm[k]]);
    } else {
      chosen = std::move(pts);
    }

    Eigen::MatrixXd e = detail::eval_matrix(chosen, basis);
    detail::normalize_columns(e);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(e);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    plan.redraws = attempt;
    plan.sigma_min = smin;
    plan.sigma_max = smax;
    if (smax > 0 && smin > 1e-12 * smax) {
      plan.points = std::move(chosen);
      return plan;
    }
  }
  throw std::runtime_error("plan_samples: sampling degenerate; raise oversample_factor");
}

// min sum_s <C_s, X_s> + c_free * r   s.t.   sum_s <A_{c,s}, X_s> + a_c r = b_c,
// every X_s PSD.  Relaxations use C = 0, c_free = -1, so the optimal r is the
// reported lower bound.  Column c of V[s] stores vec(A_{c,s}), so the slot's
// constraint stack doubles as an N x (C*N) matrix of side-by-side blocks.
struct SdpProblem {
  std::vector<int> slot_sizes;
  std::vector<std::string> slot_ids;
  std::vector<Eigen::MatrixXd> V;  // per slot: (N_s^2) x C
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  std::vector<Eigen::MatrixXd> C_obj;  // empty matrices mean zero
  double c_free = -1.0;
  bool has_free = true;
  std::vector<double> row_scale;  // applied equilibration divisors

  int n_constraints() const { return static_cast<int>(b.size()); }
  int n_slots() const { return static_cast<int>(slot_sizes.size()); }

  std::int64_t total_var_dim() const {
    std::int64_t d = has_free ? 1 : 0;
    for (int s : slot_sizes) d += static_cast<std::int64_t>(s) * (s + 1) / 2;
    return d;
  }

  Eigen::Map<const Eigen::MatrixXd> constraint_matrix(int c, int s) const {
    int q = slot_sizes[s];
    return Eigen::Map<const Eigen::MatrixXd>(V[s].col(c).data(), q, q);
  }
};

inline double estimate_assembly_bytes(const ConeSpec& cone, std::int64_t rows) {
  double per_row = 0;
  for (const auto& s : cone.slots)
    per_row += static_cast<double>(s.size) * s.size;
  // V plus one transient W of the largest slot group plus the Schur matrix.
  double vmem = 8.0 * static_cast<double>(rows) * per_row;
  double wmax = 0;
  for (const auto& s : cone.slots)
    wmax = std::max(wmax, 8.0 * static_cast<double>(rows) * s.size * s.size);
  return 1.1 * (vmem + wmax + 8.0 * static_cast<double>(rows) * rows);
}

inline constexpr double kDefaultMemoryBudget = 2.5e9;

// Equates the representation against f at the plan's points.
inline SdpProblem assemble_by_points(const ConeSpec& cone, const Polynomial& f,
                                     const SamplePlan& plan, bool equilibrate = true,
                                     double memory_budget = kDefaultMemoryBudget) {
  if (f.n_vars() != cone.n)
    throw std::invalid_argument("assemble_by_points: variable count mismatch");
  int need = std::max(cone.max_generator_degree(), std::max(f.degree(), 0));
  int have = 0;
  for (const auto& e : plan.basis) have = std::max(have, exponents_degree(e));
  if (have < need)
    throw std::invalid_argument("assemble_by_points: degree bound too small for the cone");
  const int rows = static_cast<int>(plan.points.size());
  if (rows == 0) throw std::invalid_argument("assemble_by_points: empty sample plan");

  double est = estimate_assembly_bytes(cone, rows);
  if (est > memory_budget)
    throw ResourceGuard("assembly would need about " +
                        std::to_string(est / 1e9).substr(0, 4) +
                        " GB, over the budget " + std::to_string(memory_budget / 1e9) +
                        " GB; use block/sparse mode, lower the order, or raise the budget");

  SdpProblem sdp;
  for (const auto& s : cone.slots) {
    sdp.slot_sizes.push_back(s.size);
    sdp.slot_ids.push_back(s.id);
    sdp.V.emplace_back(static_cast<Eigen::Index>(s.size) * s.size, rows);
  }
  sdp.a = Eigen::VectorXd::Ones(rows);
  sdp.b.resize(rows);
  sdp.row_scale.assign(rows, 1.0);

  for (int c = 0; c < rows; ++c) {
    const Eigen::VectorXd& p = plan.points[c];
    double mx = 1.0;
    for (std::size_t s = 0; s < cone.slots.size(); ++s) {
      Eigen::MatrixXd A = cone.slots[s].eval(p);
      A = 0.5 * (A + A.transpose()).eval();
      mx = std::max(mx, A.cwiseAbs().maxCoeff());
      sdp.V[s].col(c) = Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
    }
    sdp.b[c] = f.eval(p);
    if (equilibrate && mx > 1.0) {
      sdp.row_scale[c] = mx;
      for (auto& V : sdp.V) V.col(c) /= mx;
      sdp.a[c] /= mx;
      sdp.b[c] /= mx;
    }
  }
  return sdp;
}

// Coefficient matching over the full degree-D monomial space.  Slow path for
// cross-validation; refuses beyond 5000 monomials.
inline SdpProblem assemble_by_coeffs(const ConeSpec& cone, const Polynomial& f,
                                     long max_monomials = 5000) {
  if (f.n_vars() != cone.n)
    throw std::invalid_argument("assemble_by_coeffs: variable count mismatch");
  int d = std::max(cone.max_generator_degree(), std::max(f.degree(), 0));
  if (static_cast<long>(binomial(cone.n + d, cone.n)) > max_monomials)
    throw ResourceGuard("assemble_by_coeffs: monomial count exceeds cap " +
                        std::to_string(max_monomials));
  MonomialBasis basis(cone.n, d);
  const int rows = basis.size();

  SdpProblem sdp;
  for (const auto& s : cone.slots) {
    sdp.slot_sizes.push_back(s.size);
    sdp.slot_ids.push_back(s.id);
    sdp.V.emplace_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size) * s.size, rows));
  }
  sdp.a = Eigen::VectorXd::Zero(rows);
  sdp.b = Eigen::VectorXd::Zero(rows);
  sdp.row_scale.assign(rows, 1.0);

  std::map<Exponents, int, GradedLexLess> row_of;
  for (int r = 0; r < rows; ++r) row_of[basis[r]] = r;

  for (std::size_t s = 0; s < cone.slots.size(); ++s) {
    PolyMatrix g = cone.slots[s].expand();
    int q = g.size();
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        const Polynomial& e = g(i, j);
        for (int t = 0; t < e.n_terms(); ++t) {
          int r = row_of.at(e.monomials()[t]);
          double c = e.coefficients()[t];
          sdp.V[s](static_cast<Eigen::Index>(j) * q + i, r) += c;
          if (i != j) sdp.V[s](static_cast<Eigen::Index>(i) * q + j, r) += c;
        }
      }
  }
  int const_row = row_of.at(Exponents(cone.n, 0));
  sdp.a[const_row] = 1.0;
  for (int t = 0; t < f.n_terms(); ++t)
    sdp.b[row_of.at(f.monomials()[t])] = f.coefficients()[t];
  return sdp;
}

}  // namespace pmirelax
