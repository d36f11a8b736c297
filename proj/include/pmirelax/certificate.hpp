#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include "pmirelax/cone.hpp"
#include "pmirelax/ipm.hpp"
#include "pmirelax/problem_io.hpp"

namespace pmirelax {

struct VerifyOptions {
  double tol_psd = 1e-7;
  double tol_id = 1e-6;
  int points = 200;
  std::uint64_t seed = 0;
  long exact_cap = 5000;  // monomial-count limit for the exact coefficient check
  // Where the identity is sampled.  Defaults to [-1,1]^n, the same domain the
  // assembly normalizes over; high-degree identities evaluated on wide boxes
  // would otherwise amplify benign solver roundoff by |x|^deg.
  std::vector<std::pair<double, double>> box;
};

struct CertificateReport {
  bool psd_ok = false;
  bool identity_ok = false;
  bool exact_checked = false;
  bool exact_ok = true;
  bool verified = false;
  double min_eigenvalue = 0.0;     // worst slot, relative to its magnitude
  double identity_residual = 0.0;  // max relative residual on fresh points
  double exact_residual = std::numeric_limits<double>::quiet_NaN();
  double clipped = 0.0;  // largest negative eigenvalue zeroed at export
  int points = 0;
  std::string failure;  // first failing check, empty when verified
};

// A positivity certificate: f - bound = lambda0 + sum_s <Lambda_s, gen_s>.
// The matrices are keyed by slot id and bound to one cone and one problem by
// hash, so a certificate cannot be replayed against different data.
struct Certificate {
  double bound = 0.0;
  double lambda0 = 0.0;
  std::string mode;
  int order = 0;
  std::uint64_t cone_hash = 0;
  std::uint64_t problem_hash = 0;
  std::vector<std::string> ids;          // non-constant slots, cone order
  std::vector<Eigen::MatrixXd> matrices;
  CertificateReport report;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t unhex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

}  // namespace detail

// Packages solver output, zeroing eigenvalues in [-tol_psd, 0) so roundoff
// negatives do not survive into the exported matrices; anything more negative
// is kept as-is for verification to catch.
inline Certificate make_certificate(const ConeSpec& cone, std::uint64_t problem_hash,
                                    const SolverResult& sol, double tol_psd = 1e-7) {
  if (sol.X.size() != cone.slots.size())
    throw std::invalid_argument("make_certificate: solver output does not match the cone");
  Certificate cert;
  cert.bound = sol.free_value;
  cert.mode = cone.mode;
  cert.order = cone.order;
  cert.cone_hash = cone.structure_hash();
  cert.problem_hash = problem_hash;
  for (std::size_t s = 0; s < cone.slots.size(); ++s) {
    Eigen::MatrixXd m = 0.5 * (sol.X[s] + sol.X[s].transpose());
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd d = es.eigenvalues();
    for (int i = 0; i < d.size(); ++i)
      if (d[i] < 0 && d[i] >= -tol_psd * scale) {
        cert.report.clipped = std::max(cert.report.clipped, -d[i]);
        d[i] = 0.0;
      }
    m = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    m = 0.5 * (m + m.transpose()).eval();
    if (cone.slots[s].id == "const") {
      cert.lambda0 = m(0, 0);
    } else {
      cert.ids.push_back(cone.slots[s].id);
      cert.matrices.push_back(std::move(m));
    }
  }
  return cert;
}

// Solver-independent check of the certificate against problem data alone:
// (a) every multiplier is (numerically) psd, (b) the representation matches
// f - bound at fresh sample points, (c) when small enough, the expanded
// identity matches coefficient by coefficient.
inline CertificateReport verify_certificate(const PmiProblem& p, const ConeSpec& cone,
                                            const Certificate& cert,
                                            const VerifyOptions& opt = {}) {
  if (cert.cone_hash != cone.structure_hash())
    throw std::invalid_argument("certificate does not match the cone (hash mismatch)");
  if (cert.problem_hash != problem_hash(p))
    throw std::invalid_argument("certificate does not match the problem (hash mismatch)");

  CertificateReport rep;
  rep.clipped = cert.report.clipped;
  rep.points = opt.points;

  std::vector<const Eigen::MatrixXd*> mult(cone.slots.size(), nullptr);
  Eigen::MatrixXd lam0 = Eigen::MatrixXd::Constant(1, 1, cert.lambda0);
  std::size_t next = 0;
  for (std::size_t s = 0; s < cone.slots.size(); ++s) {
    if (cone.slots[s].id == "const") {
      mult[s] = &lam0;
      continue;
    }
    if (next >= cert.ids.size() || cert.ids[next] != cone.slots[s].id)
      throw std::invalid_argument("certificate slot ids do not match the cone");
    if (cert.matrices[next].rows() != cone.slots[s].size)
      throw std::invalid_argument("certificate slot size mismatch at " + cone.slots[s].id);
    mult[s] = &cert.matrices[next++];
  }
  if (next != cert.ids.size())
    throw std::invalid_argument("certificate carries slots the cone does not have");

  rep.psd_ok = true;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto* mp : mult) {
    const Eigen::MatrixXd& m = *mp;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (m.size() == 1) {
      double rel = m(0, 0) / scale;
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, rel);
      if (rel < -opt.tol_psd) rep.psd_ok = false;
      continue;
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      rep.psd_ok = false;
      rep.failure = "slot matrix not symmetric";
      break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    double rel = es.eigenvalues().minCoeff() / scale;
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, rel);
    if (rel < -opt.tol_psd) rep.psd_ok = false;
  }
  if (!rep.psd_ok && rep.failure.empty()) rep.failure = "negative eigenvalue beyond tolerance";

  std::vector<std::pair<double, double>> box = opt.box;
  if (box.empty()) box.assign(static_cast<std::size_t>(p.n), {-1.0, 1.0});
  if (static_cast<int>(box.size()) != p.n)
    throw std::invalid_argument("verify_certificate: box dimension does not match the problem");
  Rng rng(opt.seed ^ cert.problem_hash, /*stream=*/7);
  double worst = 0.0;
  for (int k = 0; k < opt.points; ++k) {
    Eigen::VectorXd pt(p.n);
    for (int i = 0; i < p.n; ++i) pt[i] = rng.next_double(box[i].first, box[i].second);
    double lhs = p.objective.eval(pt) - cert.bound;
    double rhs = 0.0;
    for (std::size_t s = 0; s < cone.slots.size(); ++s)
      rhs += mult[s]->cwiseProduct(cone.slots[s].eval(pt)).sum();
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(p.objective.eval(pt))));
  }
  rep.identity_residual = worst;
  rep.identity_ok = worst <= opt.tol_id;
  if (!rep.identity_ok && rep.failure.empty()) rep.failure = "identity residual too large";

  int deg = std::max(cone.max_generator_degree(), std::max(p.objective.degree(), 0));
  double mono_count = 1.0;
  for (int i = 1; i <= p.n; ++i) mono_count *= static_cast<double>(deg + i) / i;
  std::int64_t work = 0;
  for (const auto& s : cone.slots) work += static_cast<std::int64_t>(s.size) * s.size;
  if (mono_count <= static_cast<double>(opt.exact_cap) && work <= 200000) {
    rep.exact_checked = true;
    Polynomial acc = Polynomial::constant(p.n, cert.bound + cert.lambda0) - p.objective;
    for (std::size_t s = 0; s < cone.slots.size(); ++s) {
      if (cone.slots[s].id == "const") continue;
      PolyMatrix g = cone.slots[s].expand();
      const Eigen::MatrixXd& m = *mult[s];
      for (int i = 0; i < g.size(); ++i)
        for (int j = i; j < g.size(); ++j)
          acc += ((i == j ? 1.0 : 2.0) * m(i, j)) * g(i, j);
    }
    double fscale = 1.0;
    for (int t = 0; t < p.objective.n_terms(); ++t)
      fscale = std::max(fscale, std::abs(p.objective.coefficients()[t]));
    double resid = 0.0;
    for (int t = 0; t < acc.n_terms(); ++t) resid = std::max(resid, std::abs(acc.coefficients()[t]));
    rep.exact_residual = resid / fscale;
    rep.exact_ok = rep.exact_residual <= opt.tol_id;
    if (!rep.exact_ok && rep.failure.empty()) rep.failure = "coefficient residual too large";
  }

  rep.verified = rep.psd_ok && rep.identity_ok && rep.exact_ok;
  return rep;
}

enum class Exactness { NotExact, Inconclusive };

struct DiagnosticReport {
  Exactness verdict = Exactness::Inconclusive;
  std::string reason;
  int null_dim_star = 0;
  int null_dim_other = 0;
  double inclusion_residual = 0.0;
};

// Structural obstruction to exactness: take the (dilated, when nonlinear)
// merged constraint matrix M.  Any representation of f - f* that vanishes at
// the minimizer u* forces its multipliers to vanish on Null(M(u*))-compatible
// directions; if Null(M(u*)) is contained in Null(M(u)) for a feasible u with
// f(u) > f(u*), the same representation would vanish at u too.  So inclusion
// of nullspaces proves no relaxation order can close the gap.
inline DiagnosticReport nonexactness_diagnostic(const PmiProblem& p,
                                                const Eigen::VectorXd& u_star,
                                                const Eigen::VectorXd& u,
                                                double rank_tol = 1e-8) {
  if (!p.is_feasible(u_star, 1e-7))
    throw std::invalid_argument("nonexactness_diagnostic: u_star is not feasible");
  if (!p.is_feasible(u, 1e-7))
    throw std::invalid_argument("nonexactness_diagnostic: u is not feasible");
  double fs = p.objective.eval(u_star), fu = p.objective.eval(u);
  if (!(fu > fs))
    throw std::invalid_argument(
        "nonexactness_diagnostic: u must have strictly larger objective value than u_star");

  PolyMatrix merged = merge_blocks(p.blocks, p.n);
  if (p.kind() == ProblemKind::Nonlinear) merged = dilate(merged);

  Eigen::MatrixXd ms = merged.eval(u_star);
  ms = 0.5 * (ms + ms.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ms);
  double smax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  std::vector<int> null_idx;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] <= rank_tol * smax) null_idx.push_back(i);

  DiagnosticReport rep;
  rep.null_dim_star = static_cast<int>(null_idx.size());
  if (null_idx.empty()) {
    rep.verdict = Exactness::NotExact;
    rep.reason =
        "constraint matrix is strictly positive definite at the minimizer, so any "
        "representation of f - bound vanishing there has zero multipliers and cannot "
        "separate the minimizer from other feasible points";
    return rep;
  }

  Eigen::MatrixXd mu = merged.eval(u);
  mu = 0.5 * (mu + mu.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eu(mu);
  double umax = std::max(eu.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  for (int i = 0; i < eu.eigenvalues().size(); ++i)
    if (eu.eigenvalues()[i] <= rank_tol * umax) ++rep.null_dim_other;

  double worst = 0.0;
  for (int i : null_idx)
    worst = std::max(worst, (mu * es.eigenvectors().col(i)).cwiseAbs().maxCoeff() / umax);
  rep.inclusion_residual = worst;
  if (worst <= 10.0 * rank_tol) {
    rep.verdict = Exactness::NotExact;
    rep.reason =
        "the constraint matrix's nullspace at the minimizer is contained in its "
        "nullspace at a feasible point with larger objective value; multipliers "
        "forced to vanish at one vanish at the other, so no order is exact";
  } else {
    rep.verdict = Exactness::Inconclusive;
    rep.reason = "nullspace at the minimizer is not contained in the comparison "
                 "point's nullspace; the obstruction does not apply";
  }
  return rep;
}

inline nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["bound"] = c.bound;
  j["lambda0"] = c.lambda0;
  j["mode"] = c.mode;
  j["order"] = c.order;
  j["cone_hash"] = detail::hex64(c.cone_hash);
  j["problem_hash"] = detail::hex64(c.problem_hash);
  j["slots"] = nlohmann::json::array();
  for (std::size_t s = 0; s < c.ids.size(); ++s) {
    nlohmann::json slot;
    slot["id"] = c.ids[s];
    slot["size"] = c.matrices[s].rows();
    std::vector<double> vals;
    vals.reserve(c.matrices[s].size());
    for (Eigen::Index i = 0; i < c.matrices[s].rows(); ++i)
      for (Eigen::Index k = 0; k < c.matrices[s].cols(); ++k) vals.push_back(c.matrices[s](i, k));
    slot["matrix"] = vals;
    j["slots"].push_back(std::move(slot));
  }
  nlohmann::json rep;
  rep["verified"] = c.report.verified;
  rep["psd_ok"] = c.report.psd_ok;
  rep["identity_ok"] = c.report.identity_ok;
  rep["exact_checked"] = c.report.exact_checked;
  rep["exact_ok"] = c.report.exact_ok;
  rep["min_eigenvalue"] = c.report.min_eigenvalue;
  rep["identity_residual"] = c.report.identity_residual;
  if (std::isfinite(c.report.exact_residual)) rep["exact_residual"] = c.report.exact_residual;
  rep["clipped"] = c.report.clipped;
  rep["points"] = c.report.points;
  if (!c.report.failure.empty()) rep["failure"] = c.report.failure;
  j["report"] = std::move(rep);
  return j;
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  Certificate c;
  c.bound = j.at("bound").get<double>();
  c.lambda0 = j.at("lambda0").get<double>();
  c.mode = j.value("mode", "");
  c.order = j.value("order", 0);
  c.cone_hash = detail::unhex64(j.at("cone_hash").get<std::string>());
  c.problem_hash = detail::unhex64(j.at("problem_hash").get<std::string>());
  for (const auto& slot : j.at("slots")) {
    int q = slot.at("size").get<int>();
    auto vals = slot.at("matrix").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != q * q)
      throw ParseError("certificate slot " + slot.at("id").get<std::string>() +
                       ": matrix length disagrees with size");
    Eigen::MatrixXd m(q, q);
    for (int i = 0; i < q; ++i)
      for (int k = 0; k < q; ++k) m(i, k) = vals[static_cast<std::size_t>(i) * q + k];
    c.ids.push_back(slot.at("id").get<std::string>());
    c.matrices.push_back(std::move(m));
  }
  if (j.contains("report")) {
    const auto& rep = j["report"];
    c.report.verified = rep.value("verified", false);
    c.report.psd_ok = rep.value("psd_ok", false);
    c.report.identity_ok = rep.value("identity_ok", false);
    c.report.exact_checked = rep.value("exact_checked", false);
    c.report.exact_ok = rep.value("exact_ok", true);
    c.report.min_eigenvalue = rep.value("min_eigenvalue", 0.0);
    c.report.identity_residual = rep.value("identity_residual", 0.0);
    c.report.exact_residual =
        rep.value("exact_residual", std::numeric_limits<double>::quiet_NaN());
    c.report.clipped = rep.value("clipped", 0.0);
    c.report.points = rep.value("points", 0);
    c.report.failure = rep.value("failure", "");
  }
  return c;
}

inline void save_certificate(const Certificate& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_certificate: cannot open " + path);
  out << certificate_to_json(c).dump(1) << "\n";
}

inline Certificate load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_certificate: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("load_certificate: ") + e.what());
  }
  return certificate_from_json(j);
}

}  // namespace pmirelax
