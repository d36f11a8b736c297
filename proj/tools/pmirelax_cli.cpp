#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <pmirelax/pmirelax.hpp>

using namespace pmirelax;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerify = 3;

std::uint64_t env_seed() {
  const char* s = std::getenv("PMI_RELAX_SEED");
  if (!s || !*s) return 0;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    std::fprintf(stderr, "warning: PMI_RELAX_SEED is not a number, using 0\n");
    return 0;
  }
}

struct OrderSpec {
  bool automatic = false;
  int value = 2;
};

OrderSpec parse_order(const std::string& s) {
  OrderSpec o;
  if (s == "auto") {
    o.automatic = true;
    return o;
  }
  std::size_t used = 0;
  o.value = std::stoi(s, &used);
  if (used != s.size() || o.value < 1)
    throw CLI::ValidationError("--order", "expected a positive integer or 'auto'");
  return o;
}

const char* problem_kind_name(const PmiProblem& p) {
  return p.kind() == ProblemKind::Linear ? "linear" : "nonlinear";
}

void append_log(const std::string& path, const RunRecord& rec, std::mutex* mu) {
  if (path.empty()) return;
  std::unique_lock<std::mutex> lock;
  if (mu) lock = std::unique_lock<std::mutex>(*mu);
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open log file " + path);
  out << run_record_to_json(rec).dump() << "\n";
}

// Order sweep: the first usable rung wins; infeasible rungs are the hierarchy
// saying "too low", anything else stops the climb.
RelaxResult solve_with_order(const PmiProblem& p, RelaxOptions opt, const OrderSpec& order,
                             int max_order, std::string* sweep_note) {
  if (!order.automatic) {
    opt.order = order.value;
    return solve_relaxation(p, opt);
  }
  RelaxResult last;
  for (int m = 1; m <= max_order; ++m) {
    opt.order = m;
    last = solve_relaxation(p, opt);
    if (last.usable()) return last;
    if (last.solver.status != SolveStatus::Infeasible) break;
    if (sweep_note)
      *sweep_note += "order " + std::to_string(m) + ": infeasible (too low); ";
  }
  return last;
}

PmiProblem generate(const std::string& family, int which, const std::string& variant, int n,
                    int q, int deg, std::uint64_t seed, int chain_width) {
  if (family == "ex1") return gen_example1(which);
  if (family == "ex2") return gen_example2(variant);
  if (family == "chain") return gen_chain(n);
  if (family == "corrmat") return gen_corrmat(q);
  if (family == "random") return gen_random(n, q, deg, seed, chain_width);
  throw CLI::ValidationError("family", "expected ex1|ex2|chain|corrmat|random");
}

int cmd_gen(const std::string& family, int which, const std::string& variant, int n, int q,
            int deg, std::uint64_t seed, int chain_width, const std::string& out) {
  try {
    PmiProblem p = generate(family, which, variant, n, q, deg, seed, chain_width);
    save_problem(p, out);
    std::printf("wrote %s  (n=%d, blocks=%zu, kind=%s)\n", out.c_str(), p.n, p.blocks.size(),
                problem_kind_name(p));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
}

int cmd_solve(const std::string& file, const std::string& mode, const std::string& order_str,
              int objective, std::uint64_t seed, double oversample, bool coeffs,
              const std::string& cert_path, const std::string& log_path, int max_order,
              double mem_budget_gb, bool no_verify, double tol, const std::string& sdpa_path,
              int max_block) {
  PmiProblem p;
  OrderSpec order;
  try {
    p = load_problem(file);
    order = parse_order(order_str);
    if (objective != 0) {
      if (objective < 1 || objective > static_cast<int>(p.alt_objectives.size()))
        throw ParseError("--objective " + std::to_string(objective) + " out of range; file has " +
                         std::to_string(p.alt_objectives.size()) + " objectives");
      p.objective = p.alt_objectives[objective - 1];
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }

  RelaxOptions opt;
  opt.mode = mode;
  opt.seed = seed;
  opt.oversample = oversample;
  opt.coeff_assembly = coeffs;
  opt.verify = !no_verify;
  if (mem_budget_gb > 0) opt.memory_budget = mem_budget_gb * 1e9;
  if (tol > 0) opt.solver.tol = tol;
  if (max_block > 0) opt.max_slot = max_block;

  RelaxResult res;
  std::string sweep;
  try {
    res = solve_with_order(p, opt, order, max_order, &sweep);
  } catch (const ResourceGuard& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }

  const RunRecord& rec = res.record;
  std::printf("problem      %s  (n=%d, blocks=%zu, kind=%s)\n", file.c_str(), p.n,
              p.blocks.size(), problem_kind_name(p));
  std::printf("mode         %s   order %d   seed %llu\n", rec.mode.c_str(), rec.order,
              static_cast<unsigned long long>(rec.seed));
  if (!sweep.empty()) std::printf("order sweep  %s\n", sweep.c_str());
  if (res.usable())
    std::printf("bound        %.6f\n", rec.bound);
  else
    std::printf("bound        none\n");
  std::printf("status       %s  (iterations %d, %.2f s)\n", rec.status.c_str(), rec.iterations,
              rec.total_seconds);
  std::printf("contraction  %s\n", rec.contraction.c_str());
  if (!rec.note.empty()) std::printf("note         %s\n", rec.note.c_str());

  int code = 0;
  if (res.usable() && res.certificate) {
    const CertificateReport& rep = res.certificate->report;
    if (no_verify)
      std::printf("certificate  produced (verification skipped)\n");
    else if (rep.verified)
      std::printf("certificate  verified  (min eig %.1e, identity %.1e%s)\n",
                  rep.min_eigenvalue, rep.identity_residual,
                  rep.exact_checked ? ", coefficients checked" : "");
    else {
      std::printf("certificate  FAILED: %s\n", rep.failure.c_str());
      code = kExitVerify;
    }
    if (!cert_path.empty()) {
      save_certificate(*res.certificate, cert_path);
      std::printf("certificate written to %s\n", cert_path.c_str());
    }
  } else if (!res.usable()) {
    code = kExitSolver;
  }

  if (!sdpa_path.empty()) {
    try {
      auto basis = assembly_basis(res.cone, p.objective);
      SamplePlan plan = plan_samples(
          p.n, basis, std::vector<std::pair<double, double>>(p.n, {-1.0, 1.0}), seed, oversample);
      SdpProblem sdp = assemble_by_points(res.cone, p.objective, plan);
      write_sdpa(sdp, sdpa_path, rec.mode + " order " + std::to_string(rec.order));
      std::printf("sdpa written to %s (+ .meta.json)\n", sdpa_path.c_str());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "sdpa export failed: %s\n", e.what());
      if (code == 0) code = kExitSolver;
    }
  }

  try {
    append_log(log_path, rec, nullptr);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
  return code;
}

struct BenchRow {
  int param = 0;
  RunRecord rec;
  double reference = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

int cmd_bench(const std::string& family, const std::string& range, const std::string& mode,
              const std::string& order_str, int objective, const std::string& variant,
              std::uint64_t seed, const std::string& csv_path, const std::string& log_path,
              int jobs, int max_order) {
  int lo = 0, hi = 0;
  OrderSpec order;
  try {
    order = parse_order(order_str);
    std::size_t dots = range.find("..");
    if (dots == std::string::npos) {
      lo = hi = std::stoi(range);
    } else {
      lo = std::stoi(range.substr(0, dots));
      hi = std::stoi(range.substr(dots + 2));
    }
    if (hi < lo) throw ParseError("bench: empty range " + range);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }

  // ex1/ex2 sweep the order; the generated families sweep their size.
  const bool range_is_order = family == "ex1" || family == "ex2";
  std::vector<BenchRow> rows(hi - lo + 1);
  std::mutex log_mu;
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < static_cast<int>(rows.size()); i = next.fetch_add(1)) {
      int param = lo + i;
      BenchRow& row = rows[i];
      row.param = param;
      try {
        PmiProblem p;
        if (family == "ex1") {
          p = gen_example1(objective == 0 ? 1 : objective);
        } else if (family == "ex2") {
          p = gen_example2(variant);
        } else if (family == "chain") {
          p = gen_chain(param);
        } else if (family == "corrmat") {
          p = gen_corrmat(param);
        } else if (family == "random") {
          p = gen_random(6, 2, 2, static_cast<std::uint64_t>(param), 3);
        } else {
          throw ParseError("bench: unknown family " + family);
        }
        RelaxOptions opt;
        opt.mode = mode;
        opt.seed = seed;
        OrderSpec ord = order;
        if (range_is_order) {
          ord.automatic = false;
          ord.value = param;
        }
        RelaxResult res = solve_with_order(p, opt, ord, max_order, nullptr);
        row.rec = res.record;
        row.reference = p.known_optimum.value_or(std::numeric_limits<double>::quiet_NaN());
        row.ok = res.usable();
        append_log(log_path, res.record, &log_mu);
      } catch (const std::exception& e) {
        row.error = e.what();
        failed.store(true);
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const char* param_name = range_is_order ? "order" : (family == "corrmat" ? "q" : "n");
  std::printf("%-6s %-8s %5s  %12s  %12s  %10s  %5s  %8s  %s\n", param_name, "mode", "order",
              "bound", "reference", "gap", "iters", "seconds", "status");
  bool any_unusable = false;
  for (const BenchRow& row : rows) {
    if (!row.error.empty()) {
      std::printf("%-6d refused: %s\n", row.param, row.error.c_str());
      any_unusable = true;
      continue;
    }
    double gap = row.rec.bound - row.reference;
    std::printf("%-6d %-8s %5d  %12.6f  %12.6f  %10.2e  %5d  %8.2f  %s\n", row.param,
                row.rec.mode.c_str(), row.rec.order, row.rec.bound, row.reference, gap,
                row.rec.iterations, row.rec.total_seconds, row.rec.status.c_str());
    if (!row.ok) any_unusable = true;
  }

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) {
      std::fprintf(stderr, "error: cannot open %s\n", csv_path.c_str());
      return kExitParse;
    }
    csv << param_name
        << ",mode,order,bound,reference,gap,status,iterations,seconds,certificate_verified\n";
    char buf[256];
    for (const BenchRow& row : rows) {
      if (!row.error.empty()) continue;
      std::snprintf(buf, sizeof buf, "%d,%s,%d,%.10g,%.10g,%.3e,%s,%d,%.3f,%d\n", row.param,
                    row.rec.mode.c_str(), row.rec.order, row.rec.bound, row.reference,
                    row.rec.bound - row.reference, row.rec.status.c_str(), row.rec.iterations,
                    row.rec.total_seconds, row.rec.certificate_verified ? 1 : 0);
      csv << buf;
    }
    std::printf("csv written to %s\n", csv_path.c_str());
  }
  return any_unusable || failed.load() ? kExitSolver : 0;
}

int cmd_verify(const std::string& problem_file, const std::string& cert_file,
               std::uint64_t seed) {
  PmiProblem p;
  Certificate cert;
  try {
    p = load_problem(problem_file);
    cert = load_certificate(cert_file);
    if (cert.mode.empty() || cert.order < 1)
      throw ParseError("certificate does not name the cone it belongs to");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }

  try {
    ConeSpec cone = build_cone(p, cert.mode, cert.order);
    VerifyOptions opt;
    opt.seed = seed;
    CertificateReport rep = verify_certificate(p, cone, cert);
    std::printf("bound        %.6f\n", cert.bound);
    std::printf("cone         %s order %d, %zu slots\n", cert.mode.c_str(), cert.order,
                cone.slots.size());
    std::printf("psd          %s  (min eigenvalue %.2e)\n", rep.psd_ok ? "ok" : "FAILED",
                rep.min_eigenvalue);
    std::printf("identity     %s  (residual %.2e on %d points)\n",
                rep.identity_ok ? "ok" : "FAILED", rep.identity_residual, rep.points);
    if (rep.exact_checked)
      std::printf("coefficients %s  (residual %.2e)\n", rep.exact_ok ? "ok" : "FAILED",
                  rep.exact_residual);
    else
      std::printf("coefficients skipped (instance too large)\n");
    if (rep.verified) {
      std::printf("verdict      verified\n");
      return 0;
    }
    std::printf("verdict      FAILED: %s\n", rep.failure.c_str());
    return kExitVerify;
  } catch (const std::invalid_argument& e) {
    // hash or shape mismatch: the certificate does not belong to this data
    std::printf("verdict      FAILED: %s\n", e.what());
    return kExitVerify;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
}

int cmd_check_sparsity(const std::string& file) {
  PmiProblem p;
  try {
    p = load_problem(file);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
  try {
    SparsityPattern sp = extract_cliques(p);
    std::printf("cliques      %zu\n", sp.cliques.size());
    for (std::size_t c = 0; c < sp.cliques.size(); ++c) {
      std::string vars, blocks;
      for (int v : sp.cliques[c]) vars += "x" + std::to_string(v + 1) + " ";
      for (int b : sp.clique_blocks[c]) blocks += std::to_string(b) + " ";
      std::printf("  clique %-3zu vars: %-24s blocks: %s\n", c, vars.c_str(), blocks.c_str());
    }
    if (!sp.lone_variables.empty()) {
      std::string lone;
      for (int v : sp.lone_variables) lone += "x" + std::to_string(v + 1) + " ";
      std::printf("lone vars    %s(objective-only, appended to the assembly basis)\n",
                  lone.c_str());
    }
    if (sp.rip.ok)
      std::printf("rip          holds; sparse mode is available\n");
    else
      std::printf("rip          fails (%s); sparse mode refused\n", sp.rip.witness.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::printf("no usable sparsity: %s\n", e.what());
    return 0;
  }
}

int cmd_export(const std::string& file, const std::string& out, const std::string& mode,
               const std::string& order_str, std::uint64_t seed, double oversample,
               const std::string& comment) {
  PmiProblem p;
  OrderSpec order;
  try {
    p = load_problem(file);
    order = parse_order(order_str);
    if (order.automatic) throw ParseError("export needs an explicit --order");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  }
  try {
    RelaxOptions opt;
    opt.seed = seed;
    opt.oversample = oversample;
    std::string m = mode == "auto" ? resolve_mode(p) : mode;
    ConeSpec cone = build_cone(p, m, order.value, opt);
    auto basis = assembly_basis(cone, p.objective);
    SamplePlan plan = plan_samples(p.n, basis, std::vector<std::pair<double, double>>(p.n, {-1.0, 1.0}),
                                   seed, oversample);
    SdpProblem sdp = assemble_by_points(cone, p.objective, plan);
    write_sdpa(sdp, out, m + " order " + std::to_string(order.value));
    std::printf("wrote %s  (%d constraints, %d blocks%s)\n", out.c_str(), sdp.n_constraints(),
                sdp.n_slots(), sdp.has_free ? " + free pair" : "");
    std::printf("wrote %s.meta.json\n", out.c_str());
    return 0;
  } catch (const ResourceGuard& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation hierarchy for polynomial matrix inequalities"};
  app.require_subcommand(1);
  const std::vector<std::string> modes = {"auto",   "dense", "block",    "mixed",
                                          "sparse", "sos",   "sos-tilde"};

  std::uint64_t seed = env_seed();
  std::string mode = "auto", order = "2";

  auto* gen = app.add_subcommand("gen", "Generate a benchmark problem as JSON");
  std::string gen_family, gen_variant = "original", gen_out;
  int gen_which = 1, gen_n = 4, gen_q = 2, gen_deg = 2, gen_chain_width = 0;
  gen->add_option("family", gen_family, "ex1|ex2|chain|corrmat|random")->required();
  gen->add_option("-o,--out", gen_out, "output file")->required();
  gen->add_option("--which", gen_which, "ex1: objective 1..4");
  gen->add_option("--variant", gen_variant, "ex2: original|rescaled");
  gen->add_option("--n", gen_n, "chain/random: variable count");
  gen->add_option("--q", gen_q, "corrmat: matrix size; random: block size");
  gen->add_option("--deg", gen_deg, "random: entry degree");
  gen->add_option("--seed", seed, "random: generator seed");
  gen->add_option("--chain-width", gen_chain_width, "random: sliding window width (0 = dense)");

  auto* solve = app.add_subcommand("solve", "Solve one relaxation and verify its certificate");
  std::string solve_file, solve_cert, solve_log, solve_sdpa;
  int solve_objective = 0, solve_max_order = 8, solve_max_block = 0;
  double solve_oversample = 1.0, solve_mem_gb = 0.0, solve_tol = 0.0;
  bool solve_coeffs = false, solve_no_verify = false;
  solve->add_option("problem", solve_file, "problem JSON file")->required();
  solve->add_option("--mode", mode, "cone family")->check(CLI::IsMember(modes));
  solve->add_option("--order", order, "relaxation order, or 'auto'");
  solve->add_option("--objective", solve_objective, "pick the k-th stored objective (1-based)");
  solve->add_option("--seed", seed, "sample-point seed");
  solve->add_option("--oversample", solve_oversample, "sample oversampling factor >= 1");
  solve->add_flag("--coeffs", solve_coeffs, "assemble by coefficient matching instead of points");
  solve->add_option("--cert", solve_cert, "write the certificate JSON here");
  solve->add_option("--log", solve_log, "append one JSON run record per line");
  solve->add_option("--max-order", solve_max_order, "highest order 'auto' tries");
  solve->add_option("--mem-budget", solve_mem_gb, "assembly memory budget in GB");
  solve->add_flag("--no-verify", solve_no_verify, "skip certificate verification");
  solve->add_option("--tol", solve_tol, "interior-point stopping tolerance");
  solve->add_option("--export-sdpa", solve_sdpa, "also write the assembled SDP here (.dat-s)");
  solve->add_option("--max-block-size", solve_max_block,
                    "refuse cones whose largest slot exceeds this");

  auto* bench = app.add_subcommand("bench", "Sweep a benchmark family and tabulate bounds");
  std::string bench_family, bench_range, bench_csv, bench_log, bench_variant = "rescaled";
  int bench_objective = 0, bench_jobs = 1, bench_max_order = 8;
  bench->add_option("family", bench_family, "ex1|ex2|chain|corrmat|random")->required();
  bench->add_option("range", bench_range, "sweep range, e.g. 3..7 (sizes, or orders for ex1/ex2)")
      ->required();
  bench->add_option("--mode", mode, "cone family")->check(CLI::IsMember(modes));
  bench->add_option("--order", order, "relaxation order, or 'auto'");
  bench->add_option("--objective", bench_objective, "ex1: objective 1..4");
  bench->add_option("--variant", bench_variant, "ex2: original|rescaled");
  bench->add_option("--seed", seed, "sample-point seed");
  bench->add_option("--csv", bench_csv, "also write the table as CSV");
  bench->add_option("--log", bench_log, "append one JSON run record per line");
  bench->add_option("--jobs", bench_jobs, "rows solved in parallel");
  bench->add_option("--max-order", bench_max_order, "highest order 'auto' tries");

  auto* verify = app.add_subcommand("verify", "Re-check a certificate against its problem");
  std::string verify_problem, verify_cert;
  verify->add_option("problem", verify_problem, "problem JSON file")->required();
  verify->add_option("certificate", verify_cert, "certificate JSON file")->required();
  verify->add_option("--seed", seed, "seed for the fresh sample points");

  auto* sparsity = app.add_subcommand("check-sparsity", "Report cliques and the chained-overlap test");
  std::string sparsity_file;
  sparsity->add_option("problem", sparsity_file, "problem JSON file")->required();

  auto* exp = app.add_subcommand("export", "Write the assembled relaxation in SDPA sparse format");
  std::string export_file, export_out, export_comment;
  double export_oversample = 1.0;
  exp->add_option("problem", export_file, "problem JSON file")->required();
  exp->add_option("out", export_out, "output .dat-s path")->required();
  exp->add_option("--mode", mode, "cone family")->check(CLI::IsMember(modes));
  exp->add_option("--order", order, "relaxation order");
  exp->add_option("--seed", seed, "sample-point seed");
  exp->add_option("--oversample", export_oversample, "sample oversampling factor >= 1");
  exp->add_option("--comment", export_comment, "comment line for the file header");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  if (gen->parsed())
    return cmd_gen(gen_family, gen_which, gen_variant, gen_n, gen_q, gen_deg, seed,
                   gen_chain_width, gen_out);
  if (solve->parsed())
    return cmd_solve(solve_file, mode, order, solve_objective, seed, solve_oversample,
                     solve_coeffs, solve_cert, solve_log, solve_max_order, solve_mem_gb,
                     solve_no_verify, solve_tol, solve_sdpa, solve_max_block);
  if (bench->parsed())
    return cmd_bench(bench_family, bench_range, mode, order, bench_objective, bench_variant,
                     seed, bench_csv, bench_log, bench_jobs, bench_max_order);
  if (verify->parsed()) return cmd_verify(verify_problem, verify_cert, seed);
  if (sparsity->parsed()) return cmd_check_sparsity(sparsity_file);
  if (exp->parsed())
    return cmd_export(export_file, export_out, mode, order, seed, export_oversample,
                      export_comment);
  return kExitParse;
}
