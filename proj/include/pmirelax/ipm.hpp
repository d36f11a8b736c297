#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "pmirelax/sdp.hpp"

namespace pmirelax {

enum class SolveStatus { Optimal, NearOptimal, Infeasible, Unbounded, Stalled };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "stalled";
  }
}

struct SolveOptions {
  double tol = 1e-8;
  double near_tol = 1e-5;
  int max_iter = 200;
  double step_frac = 0.98;  // fraction-to-boundary
  bool verbose = false;
};

struct SolverResult {
  SolveStatus status = SolveStatus::Stalled;
  double primal_obj = 0.0;  // min-form objective <C,X> + c_free * r
  double dual_obj = 0.0;    // b'y
  double free_value = 0.0;  // r
  std::vector<Eigen::MatrixXd> X;
  Eigen::VectorXd y;
  double pinf = 0.0, dinf = 0.0, gap = 0.0, mu = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::string note;

  bool usable() const {
    return status == SolveStatus::Optimal || status == SolveStatus::NearOptimal;
  }
};

namespace detail {

// Constraint functionals as rows over the upper-triangle parametrization
// (off-diagonal entries weighted by 2), plus the free-variable column.
inline Eigen::MatrixXd functional_rows(const SdpProblem& p) {
  const int cdim = p.n_constraints();
  std::int64_t dof = p.total_var_dim();
  Eigen::MatrixXd j(cdim, dof);
  std::int64_t col = 0;
  for (int s = 0; s < p.n_slots(); ++s) {
    int q = p.slot_sizes[s];
    for (int jc = 0; jc < q; ++jc)
      for (int ic = 0; ic <= jc; ++ic) {
        double w = ic == jc ? 1.0 : 2.0;
        j.col(col++) = w * p.V[s].row(static_cast<Eigen::Index>(jc) * q + ic).transpose();
      }
  }
  if (p.has_free) j.col(col++) = p.a;
  return j;
}

inline int qr_rank(const Eigen::MatrixXd& m) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

// Largest alpha in (0,1] with A + alpha*D still PSD, scaled by `frac`.
inline double step_length(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& d,
                          double frac) {
  Eigen::MatrixXd m = llt.matrixL().solve(d);
  m = llt.matrixL().solve(m.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1.0;
  return std::min(1.0, -frac / lmin);
}

struct BorderedSolver {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  bool use_ldlt = false;
  Eigen::VectorXd u;  // M^{-1} a
  double au = 0.0;
  bool has_free = false;

  bool factor(Eigen::MatrixXd& m, const Eigen::VectorXd& a, bool free_var) {
    has_free = free_var;
    double dscale = m.diagonal().cwiseAbs().maxCoeff();
    if (!(dscale > 0)) dscale = 1.0;
    for (double jitter : {0.0, 1e-13, 1e-11, 1e-9, 1e-7}) {
      if (jitter > 0) m.diagonal().array() += jitter * dscale;
      llt.compute(m);
      if (llt.info() == Eigen::Success) {
        use_ldlt = false;
        if (has_free) {
          u = llt.solve(a);
          au = a.dot(u);
          if (!(au > 0)) continue;
        }
        return true;
      }
    }
    ldlt.compute(m);
    if (ldlt.info() != Eigen::Success) return false;
    use_ldlt = true;
    if (has_free) {
      u = ldlt.solve(a);
      au = a.dot(u);
      if (!(au > 0) || !std::isfinite(au)) return false;
    }
    return true;
  }

  void solve(const Eigen::VectorXd& h, const Eigen::VectorXd& a, double rg,
             Eigen::VectorXd& dy, double& dr) const {
    Eigen::VectorXd v = use_ldlt ? Eigen::VectorXd(ldlt.solve(h)) : Eigen::VectorXd(llt.solve(h));
    if (has_free) {
      dr = (a.dot(v) - rg) / au;
      dy = v - dr * u;
    } else {
      dr = 0.0;
      dy = v;
    }
  }
};

}  // namespace detail

// Detects an inconsistent equality system (a certificate that the SDP is
// infeasible regardless of the cone) and drops redundant equalities when the
// row count exceeds the variable dimension.  Returns a note for the log.
inline std::string reduce_redundant_rows(SdpProblem& p) {
  if (p.n_constraints() <= p.total_var_dim()) return {};
  Eigen::MatrixXd j = detail::functional_rows(p);
  Eigen::MatrixXd jb(j.rows(), j.cols() + 1);
  jb << j, p.b;
  int rank_j = detail::qr_rank(j);
  int rank_jb = detail::qr_rank(jb);
  if (rank_jb > rank_j) return "linear-inconsistent";

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jb.transpose());
  qr.setThreshold(1e-10);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> keep(perm.data(), perm.data() + rank_jb);
  std::sort(keep.begin(), keep.end());

  SdpProblem r = p;
  const int kept = static_cast<int>(keep.size());
  for (int s = 0; s < p.n_slots(); ++s) {
    r.V[s].resize(p.V[s].rows(), kept);
    for (int c = 0; c < kept; ++c) r.V[s].col(c) = p.V[s].col(keep[c]);
  }
  r.a.resize(kept);
  r.b.resize(kept);
  r.row_scale.resize(kept);
  for (int c = 0; c < kept; ++c) {
    r.a[c] = p.a[keep[c]];
    r.b[c] = p.b[keep[c]];
    r.row_scale[c] = p.row_scale[keep[c]];
  }
  p = std::move(r);
  return "reduced to " + std::to_string(kept) + " independent equalities";
}

// Primal-dual predictor-corrector interior-point method with the HKM
// direction; the free variable rides along through a bordered Schur system.
inline SolverResult solve_ipm(const SdpProblem& prob_in, const SolveOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  auto t0 = std::chrono::steady_clock::now();

  SdpProblem prob = prob_in;
  SolverResult res;
  std::string pre_note = reduce_redundant_rows(prob);
  if (pre_note == "linear-inconsistent") {
    res.status = SolveStatus::Infeasible;
    res.note = "equality system inconsistent: no assignment satisfies the "
               "linear identities (cone ignored)";
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }
  if (!pre_note.empty()) res.note = pre_note;

  const int cdim = prob.n_constraints();
  const int nslots = prob.n_slots();
  if (cdim == 0) throw std::invalid_argument("solve_ipm: no constraints");
  std::int64_t ntot = 0;
  for (int s = 0; s < nslots; ++s) ntot += prob.slot_sizes[s];
  const bool has_free = prob.has_free;

  std::vector<MatrixXd> Cmat(nslots);
  double normC = std::abs(has_free ? prob.c_free : 0.0);
  for (int s = 0; s < nslots; ++s) {
    int q = prob.slot_sizes[s];
    if (s < static_cast<int>(prob.C_obj.size()) && prob.C_obj[s].size() > 0)
      Cmat[s] = 0.5 * (prob.C_obj[s] + prob.C_obj[s].transpose());
    else
      Cmat[s] = MatrixXd::Zero(q, q);
    normC = std::max(normC, Cmat[s].cwiseAbs().maxCoeff());
  }
  const double normb = prob.b.cwiseAbs().maxCoeff();

  // Starting point in the style of general-purpose SDP codes: large enough
  // multiples of the identity that the first steps stay well inside the cone.
  double xi_p = 10.0, xi_d = 10.0;
  for (int c = 0; c < cdim; ++c) {
    double na = prob.a[c] * prob.a[c];
    for (int s = 0; s < nslots; ++s) na += prob.V[s].col(c).squaredNorm();
    na = std::sqrt(na);
    xi_p = std::max(xi_p, static_cast<double>(ntot) * std::abs(prob.b[c]) / (1.0 + na));
    xi_d = std::max(xi_d, na);
  }
  xi_p = std::max(xi_p, std::sqrt(static_cast<double>(ntot)));
  xi_d = std::max(xi_d, std::max(std::sqrt(static_cast<double>(ntot)), normC));

  std::vector<MatrixXd> X(nslots), S(nslots);
  for (int s = 0; s < nslots; ++s) {
    X[s] = xi_p * MatrixXd::Identity(prob.slot_sizes[s], prob.slot_sizes[s]);
    S[s] = xi_d * MatrixXd::Identity(prob.slot_sizes[s], prob.slot_sizes[s]);
  }
  VectorXd y = VectorXd::Zero(cdim);
  double r = 0.0;

  auto apply_A = [&](const std::vector<MatrixXd>& Z, double rv) {
    VectorXd out = rv * prob.a;
    for (int s = 0; s < nslots; ++s)
      out.noalias() += prob.V[s].transpose() *
                       Eigen::Map<const VectorXd>(Z[s].data(), Z[s].size());
    return out;
  };
  auto apply_At = [&](const VectorXd& w, int s) {
    int q = prob.slot_sizes[s];
    VectorXd v = prob.V[s] * w;
    MatrixXd m = Eigen::Map<const MatrixXd>(v.data(), q, q);
    return MatrixXd(0.5 * (m + m.transpose()));
  };

  double best_metric = 1e300;
  SolverResult best;
  int no_progress = 0;

  std::vector<MatrixXd> Sinv(nslots), Rd(nslots), dXa(nslots), dSa(nslots), dX(nslots),
      dS(nslots);
  std::vector<Eigen::LLT<MatrixXd>> lltX(nslots), lltS(nslots);
  MatrixXd M(cdim, cdim);
  detail::BorderedSolver bs;

  int iter = 0;
  auto finish = [&](SolveStatus st, const std::string& extra) {
    SolverResult out = best_metric < 1e299 ? best : res;
    if (out.X.empty()) {
      out.X = X;
      out.y = y;
      out.free_value = r;
    }
    out.status = st;
    out.iterations = iter;
    if (!extra.empty()) out.note = out.note.empty() ? extra : out.note + "; " + extra;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  for (; iter < opt.max_iter; ++iter) {
    // Residuals and convergence metrics.
    VectorXd rp = prob.b - apply_A(X, r);
    double rg = has_free ? prob.c_free - prob.a.dot(y) : 0.0;
    double dinf = std::abs(rg) / (1.0 + normC);
    double xs = 0.0;
    for (int s = 0; s < nslots; ++s) {
      Rd[s] = Cmat[s] - apply_At(y, s) - S[s];
      dinf = std::max(dinf, Rd[s].cwiseAbs().maxCoeff() / (1.0 + normC));
      xs += X[s].cwiseProduct(S[s]).sum();
    }
    double mu = xs / static_cast<double>(ntot);
    double pobj = prob.c_free * r * (has_free ? 1.0 : 0.0);
    for (int s = 0; s < nslots; ++s) pobj += Cmat[s].cwiseProduct(X[s]).sum();
    double dobj = prob.b.dot(y);
    double pinf = rp.cwiseAbs().maxCoeff() / (1.0 + normb);
    double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    double metric = std::max({pinf, dinf, gap});
    if (metric < best_metric) {
      best_metric = metric;
      best.X = X;
      best.y = y;
      best.free_value = r;
      best.primal_obj = pobj;
      best.dual_obj = dobj;
      best.pinf = pinf;
      best.dinf = dinf;
      best.gap = gap;
      best.mu = mu;
      best.iterations = iter;
      best.note = res.note;
      no_progress = 0;
    } else if (++no_progress > 30) {
      return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal
                                                : SolveStatus::Stalled,
                    "no progress over 30 iterations");
    }

    if (opt.verbose)
      std::fprintf(stderr, "it %3d  pobj %+.9e dobj %+.9e  pinf %.2e dinf %.2e gap %.2e mu %.2e\n",
                   iter, pobj, dobj, pinf, dinf, gap, mu);

    if (metric <= opt.tol) return finish(SolveStatus::Optimal, "");

    // Infeasibility certificate: a normalized y with b'y = 1 whose pullback
    // A*(y) is negative semidefinite (and a'y = 0 with a free variable)
    // proves there is no feasible X.
    if (dobj > 1e4 * (1.0 + normb) || (dobj > 1.0 && mu < 1e-10)) {
      VectorXd yn = y / dobj;
      double viol = has_free ? std::abs(prob.a.dot(yn)) : 0.0;
      double lmax = 0.0;
      for (int s = 0; s < nslots; ++s) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(apply_At(yn, s), Eigen::EigenvaluesOnly);
        lmax = std::max(lmax, es.eigenvalues().maxCoeff());
      }
      double ynorm = std::max(1.0, yn.cwiseAbs().maxCoeff());
      if (viol <= 1e-8 * ynorm && lmax <= 1e-8 * ynorm)
        return finish(SolveStatus::Infeasible,
                      "improving ray certifies primal infeasibility");
    }
    if (has_free && pobj < -1e10 * (1.0 + normb) && pinf <= 1e-6)
      return finish(SolveStatus::Unbounded, "objective diverges along feasible directions");

    // Schur complement M_{cd} = sum_s tr(A_c S^-1 A_d X) via stacked GEMMs.
    M.setZero();
    for (int s = 0; s < nslots; ++s) {
      int q = prob.slot_sizes[s];
      lltS[s].compute(S[s]);
      if (lltS[s].info() != Eigen::Success)
        return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal
                                                  : SolveStatus::Stalled,
                      "dual iterate lost definiteness");
      Sinv[s] = lltS[s].solve(MatrixXd::Identity(q, q));
      Sinv[s] = 0.5 * (Sinv[s] + Sinv[s].transpose()).eval();
      lltX[s].compute(X[s]);
      if (lltX[s].info() != Eigen::Success)
        return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal
                                                  : SolveStatus::Stalled,
                      "primal iterate lost definiteness");

      Eigen::Map<const MatrixXd> Aw(prob.V[s].data(), q,
                                    static_cast<Eigen::Index>(q) * cdim);
      MatrixXd Q(q, static_cast<Eigen::Index>(q) * cdim);
      Q.noalias() = Sinv[s] * Aw;  // block d: S^-1 A_d
      // Per-block transpose so one GEMM right-multiplies every block by X.
      for (int d = 0; d < cdim; ++d)
        Q.middleCols(static_cast<Eigen::Index>(d) * q, q) =
            Q.middleCols(static_cast<Eigen::Index>(d) * q, q).transpose().eval();
      MatrixXd Wt(q, static_cast<Eigen::Index>(q) * cdim);
      Wt.noalias() = X[s] * Q;  // block d: X (S^-1 A_d)^T = (S^-1 A_d X)^T
      M.noalias() += prob.V[s].transpose() *
                     Eigen::Map<const MatrixXd>(Wt.data(), static_cast<Eigen::Index>(q) * q, cdim);
    }
    M = 0.5 * (M + M.transpose()).eval();
    if (!bs.factor(M, prob.a, has_free))
      return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal
                                                : SolveStatus::Stalled,
                    "Schur complement factorization failed");

    // Predictor (affine scaling, nu = 0).
    auto direction = [&](double nu, bool corrector, VectorXd& dy, double& dr) {
      std::vector<MatrixXd> E(nslots);
      for (int s = 0; s < nslots; ++s) {
        E[s] = -X[s];
        E[s].noalias() -= X[s] * (Rd[s] * Sinv[s]);
        if (nu != 0.0) E[s] += nu * Sinv[s];
        if (corrector) E[s].noalias() -= dXa[s] * (dSa[s] * Sinv[s]);
      }
      VectorXd h = rp - apply_A(E, 0.0);
      bs.solve(h, prob.a, rg, dy, dr);
      for (int s = 0; s < nslots; ++s) {
        Eigen::MatrixXd aty = apply_At(dy, s);
        dS[s] = Rd[s] - aty;
        MatrixXd t = E[s] + X[s] * (aty * Sinv[s]);
        dX[s] = 0.5 * (t + t.transpose());
      }
    };

    VectorXd dy;
    double dr = 0.0;
    direction(0.0, false, dy, dr);
    double ap = 1.0, ad = 1.0;
    for (int s = 0; s < nslots; ++s) {
      ap = std::min(ap, detail::step_length(lltX[s], dX[s], 1.0));
      ad = std::min(ad, detail::step_length(lltS[s], dS[s], 1.0));
    }
    double mu_aff = 0.0;
    for (int s = 0; s < nslots; ++s)
      mu_aff += (X[s] + ap * dX[s]).cwiseProduct(S[s] + ad * dS[s]).sum();
    mu_aff /= static_cast<double>(ntot);
    double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

    dXa = dX;
    dSa = dS;
    direction(sigma * mu, true, dy, dr);

    ap = opt.step_frac;
    ad = opt.step_frac;
    for (int s = 0; s < nslots; ++s) {
      ap = std::min(ap, detail::step_length(lltX[s], dX[s], opt.step_frac));
      ad = std::min(ad, detail::step_length(lltS[s], dS[s], opt.step_frac));
    }
    if (ap < 1e-10 && ad < 1e-10)
      return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal
                                                : SolveStatus::Stalled,
                    "step length collapsed");

    for (int s = 0; s < nslots; ++s) {
      X[s] += ap * dX[s];
      S[s] += ad * dS[s];
    }
    y += ad * dy;
    r += ap * dr;
  }

  res.iterations = iter;
  return finish(best_metric <= opt.near_tol ? SolveStatus::NearOptimal : SolveStatus::Stalled,
                "iteration limit reached");
}

}  // namespace pmirelax
