#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pmirelax/certificate.hpp"
#include "pmirelax/cone.hpp"
#include "pmirelax/ipm.hpp"
#include "pmirelax/problem_io.hpp"
#include "pmirelax/sdp.hpp"
#include "pmirelax/sos.hpp"

namespace pmirelax {

struct RelaxOptions {
  std::string mode = "auto";  // auto|dense|block|mixed|sparse|sos|sos-tilde
  int order = 2;
  std::uint64_t seed = 0;
  double oversample = 1.0;
  // Tighter than the raw solver default: certificates are rebuilt from the
  // multiplier blocks, so leftover KKT residual shows up verbatim in the
  // verified identity.  The solver keeps its best iterate if this is not
  // reachable and reports near-optimal instead.
  SolveOptions solver{/*tol=*/1e-10};
  double memory_budget = kDefaultMemoryBudget;
  int max_slot = kDefaultMaxSlot;
  long max_words = kDefaultMaxWords;
  bool coeff_assembly = false;  // coefficient matching instead of point evaluation
  std::vector<std::pair<double, double>> assembly_box;  // empty: [-1,1]^n
  bool check_contraction = true;
  bool per_block_sos = false;
  bool want_certificate = true;
  bool verify = true;
};

struct RunRecord {
  std::uint64_t problem_hash = 0;
  std::uint64_t cone_hash = 0;
  std::string mode;  // resolved mode actually used
  int order = 0;
  std::uint64_t seed = 0;
  double oversample = 1.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string status;
  std::string note;
  std::string contraction;  // ok | violated | skipped | not-required
  double pinf = 0.0, dinf = 0.0, gap = 0.0;
  int iterations = 0;
  int n_constraints = 0;
  int n_slots = 0;
  std::int64_t total_psd_dim = 0;
  double sigma_min = 0.0, sigma_max = 0.0;
  int redraws = 0;
  double assemble_seconds = 0.0;
  double solve_seconds = 0.0;
  double total_seconds = 0.0;
  bool certificate_verified = false;
};

struct RelaxResult {
  RunRecord record;
  SolverResult solver;
  ConeSpec cone;
  std::optional<Certificate> certificate;

  bool usable() const { return solver.usable(); }
};

// Picks the cone family from the problem's shape: several interacting blocks
// with a valid clique tree go sparse; one matrix block plus scalar
// constraints (all linear) goes to the scalar-mixed cone; a single block is
// the plain Kronecker cone; anything else uses the word decomposition.
inline std::string resolve_mode(const PmiProblem& p) {
  try {
    SparsityPattern sp = extract_cliques(p);
    if (sp.cliques.size() >= 2 && sp.rip.ok) return "sparse";
  } catch (const std::exception&) {
    // fall through to the dense-family choices
  }
  int matrix_blocks = 0, scalar_blocks = 0;
  for (const auto& b : p.blocks) (b.size() > 1 ? matrix_blocks : scalar_blocks)++;
  if (p.kind() == ProblemKind::Linear && matrix_blocks == 1 && scalar_blocks >= 1)
    return "mixed";
  if (p.blocks.size() == 1) return "dense";
  return "block";
}

inline ConeSpec build_cone(const PmiProblem& p, const std::string& mode, int order,
                           const RelaxOptions& opt = {}) {
  if (mode == "dense") return build_dense(merge_blocks(p.blocks, p.n), order, opt.max_slot);
  if (mode == "block") return build_block(p.blocks, p.n, order, opt.max_slot, opt.max_words);
  if (mode == "mixed") return build_scalar_mixed(p.blocks, p.n, order, opt.max_slot);
  if (mode == "sparse") return build_sparse(p, extract_cliques(p), order, opt.max_slot);
  if (mode == "sos") return build_sos(p, order, opt.per_block_sos, opt.max_slot);
  if (mode == "sos-tilde") return build_sos_tilde1(p, opt.max_slot);
  throw std::invalid_argument("unknown mode: " + mode);
}

namespace detail {

// The dilation step assumes every block is a contraction on the feasible
// set; spot-check that on sampled feasible points rather than trusting it.
inline std::string contraction_report(const PmiProblem& p, std::uint64_t seed,
                                      std::string* note) {
  std::vector<Eigen::VectorXd> pts;
  try {
    pts = sample_feasible(p, 300, seed);
  } catch (const std::exception& e) {
    return std::string("skipped: ") + e.what();
  }
  double worst = 0.0;
  for (const auto& b : p.blocks) {
    for (const auto& x : pts) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.eval(x), Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
  }
  if (worst > 1.0 + 1e-9) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "violated: sampled max eigenvalue %.4g > 1; rescale the blocks into "
                  "contractions or the bound may be invalid",
                  worst);
    if (note) *note = note->empty() ? buf : *note + "; " + buf;
    return "violated";
  }
  return "ok";
}

}  // namespace detail

inline RelaxResult solve_relaxation(const PmiProblem& p, const RelaxOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  p.validate();

  RelaxResult out;
  RunRecord& rec = out.record;
  rec.problem_hash = problem_hash(p);
  rec.mode = opt.mode == "auto" ? resolve_mode(p) : opt.mode;
  rec.order = opt.order;
  rec.seed = opt.seed;
  rec.oversample = opt.oversample;

  out.cone = build_cone(p, rec.mode, opt.order, opt);
  rec.cone_hash = out.cone.structure_hash();
  rec.n_slots = static_cast<int>(out.cone.slots.size());
  rec.total_psd_dim = out.cone.total_psd_dim();

  bool dilates = rec.mode == "dense" || rec.mode == "block" || rec.mode == "sparse";
  if (p.kind() == ProblemKind::Nonlinear && dilates)
    rec.contraction = opt.check_contraction
                          ? detail::contraction_report(p, opt.seed, &rec.note)
                          : "skipped: disabled";
  else
    rec.contraction = "not-required";

  SdpProblem sdp;
  if (opt.coeff_assembly) {
    sdp = assemble_by_coeffs(out.cone, p.objective);
  } else {
    auto basis = assembly_basis(out.cone, p.objective);
    double est = estimate_assembly_bytes(out.cone, static_cast<std::int64_t>(basis.size()));
    if (est > opt.memory_budget)
      throw ResourceGuard("assembly would need about " + std::to_string(est / 1e9).substr(0, 4) +
                          " GB, over the budget " + std::to_string(opt.memory_budget / 1e9) +
                          " GB; use block/sparse mode, lower the order, or raise the budget");
    auto box = opt.assembly_box;
    if (box.empty()) box.assign(p.n, {-1.0, 1.0});
    SamplePlan plan = plan_samples(p.n, basis, box, opt.seed, opt.oversample);
    rec.sigma_min = plan.sigma_min;
    rec.sigma_max = plan.sigma_max;
    rec.redraws = plan.redraws;
    sdp = assemble_by_points(out.cone, p.objective, plan, true, opt.memory_budget);
  }
  rec.n_constraints = sdp.n_constraints();
  auto t1 = std::chrono::steady_clock::now();
  rec.assemble_seconds = std::chrono::duration<double>(t1 - t0).count();

  out.solver = solve_ipm(sdp, opt.solver);

  // Sampled rows carry Vandermonde roundoff that can leave a small primal
  // residual the solver cannot close; a stall (or a near-optimal finish that
  // hit the same floor) is the signature.  Coefficient matching is exact, so
  // when it is affordable retry once with it and keep the cleaner solve.
  bool floored = out.solver.status == SolveStatus::Stalled ||
                 out.solver.status == SolveStatus::NearOptimal;
  if (floored && !opt.coeff_assembly) {
    try {
      SdpProblem exact = assemble_by_coeffs(out.cone, p.objective);
      SolverResult retry = solve_ipm(exact, opt.solver);
      double old_metric = std::max({out.solver.pinf, out.solver.dinf, out.solver.gap});
      double new_metric = std::max({retry.pinf, retry.dinf, retry.gap});
      if (retry.usable() && (!out.solver.usable() || new_metric < old_metric)) {
        out.solver = retry;
        rec.n_constraints = exact.n_constraints();
        rec.note = rec.note.empty() ? "" : rec.note + "; ";
        rec.note += "sampled assembly hit its accuracy floor; re-solved with exact "
                    "coefficient matching";
      }
    } catch (const ResourceGuard&) {
      // too large to expand symbolically; keep the honest sampled result
    }
  }

  rec.solve_seconds = out.solver.seconds;
  rec.status = to_string(out.solver.status);
  rec.pinf = out.solver.pinf;
  rec.dinf = out.solver.dinf;
  rec.gap = out.solver.gap;
  rec.iterations = out.solver.iterations;
  if (!out.solver.note.empty())
    rec.note = rec.note.empty() ? out.solver.note : rec.note + "; " + out.solver.note;

  if (out.solver.usable()) {
    rec.bound = out.solver.free_value;
    if (opt.want_certificate) {
      out.certificate = make_certificate(out.cone, rec.problem_hash, out.solver);
      if (opt.verify) {
        VerifyOptions vo;
        vo.seed = opt.seed;
        out.certificate->report = verify_certificate(p, out.cone, *out.certificate, vo);
        rec.certificate_verified = out.certificate->report.verified;
      }
    }
  }
  rec.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline nlohmann::json run_record_to_json(const RunRecord& r) {
  nlohmann::json j;
  j["problem_hash"] = detail::hex64(r.problem_hash);
  j["cone_hash"] = detail::hex64(r.cone_hash);
  j["mode"] = r.mode;
  j["order"] = r.order;
  j["seed"] = r.seed;
  j["oversample"] = r.oversample;
  if (std::isfinite(r.bound))
    j["bound"] = r.bound;
  else
    j["bound"] = nullptr;
  j["status"] = r.status;
  if (!r.note.empty()) j["note"] = r.note;
  j["contraction"] = r.contraction;
  j["pinf"] = r.pinf;
  j["dinf"] = r.dinf;
  j["gap"] = r.gap;
  j["iterations"] = r.iterations;
  j["n_constraints"] = r.n_constraints;
  j["n_slots"] = r.n_slots;
  j["total_psd_dim"] = r.total_psd_dim;
  j["sigma_min"] = r.sigma_min;
  j["sigma_max"] = r.sigma_max;
  j["redraws"] = r.redraws;
  j["assemble_seconds"] = r.assemble_seconds;
  j["solve_seconds"] = r.solve_seconds;
  j["total_seconds"] = r.total_seconds;
  j["certificate_verified"] = r.certificate_verified;
  return j;
}

}  // namespace pmirelax
