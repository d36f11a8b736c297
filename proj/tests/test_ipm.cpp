#include <gtest/gtest.h>

#include <pmirelax/ipm.hpp>
#include <pmirelax/rng.hpp>

using namespace pmirelax;

namespace {

// Hand-built problem in the solver's native min-form layout.
SdpProblem make_problem(const std::vector<int>& sizes, int cdim, bool has_free) {
  SdpProblem p;
  p.slot_sizes = sizes;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    p.slot_ids.push_back("slot" + std::to_string(s));
    p.V.emplace_back(Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(sizes[s]) * sizes[s], cdim));
  }
  p.a = Eigen::VectorXd::Zero(cdim);
  p.b = Eigen::VectorXd::Zero(cdim);
  p.row_scale.assign(cdim, 1.0);
  p.has_free = has_free;
  p.c_free = has_free ? -1.0 : 0.0;
  return p;
}

void set_constraint(SdpProblem& p, int c, int s, const Eigen::MatrixXd& A) {
  p.V[s].col(c) = Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
}

Eigen::MatrixXd random_sym(Rng& rng, int q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
      q, q, [&](Eigen::Index, Eigen::Index) { return rng.next_double(-1.0, 1.0); });
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd random_orthogonal(Rng& rng, int q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
      q, q, [&](Eigen::Index, Eigen::Index) { return rng.next_double(-1.0, 1.0); });
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

}  // namespace

TEST(Ipm, MaximizesBoundOnTrivialProblem) {
  // max r  s.t.  lambda0 + r = 1, lambda0 >= 0  ->  r = 1.
  SdpProblem p = make_problem({1}, 1, true);
  set_constraint(p, 0, 0, Eigen::MatrixXd::Ones(1, 1));
  p.a[0] = 1.0;
  p.b[0] = 1.0;
  SolverResult res = solve_ipm(p);
  ASSERT_EQ(res.status, SolveStatus::Optimal) << res.note;
  EXPECT_NEAR(res.free_value, 1.0, 1e-7);
  EXPECT_NEAR(res.primal_obj, -1.0, 1e-7);
  EXPECT_NEAR(res.dual_obj, -1.0, 1e-7);
}

TEST(Ipm, ClosedFormTraceProblem) {
  // min tr(X)  s.t.  X_12 = 1, X psd  ->  value 2 at X = ones(2,2).
  SdpProblem p = make_problem({2}, 1, false);
  Eigen::MatrixXd A(2, 2);
  A << 0, 0.5, 0.5, 0;
  set_constraint(p, 0, 0, A);
  p.b[0] = 1.0;
  p.C_obj = {Eigen::MatrixXd::Identity(2, 2)};
  SolverResult res = solve_ipm(p);
  ASSERT_EQ(res.status, SolveStatus::Optimal) << res.note;
  EXPECT_NEAR(res.primal_obj, 2.0, 1e-6);
  EXPECT_NEAR(res.y[0], 2.0, 1e-5);
  EXPECT_LT((res.X[0] - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-5);
}

// Builds an instance whose optimum is known by construction: pick a strictly
// complementary pair (X*, S*) sharing an eigenbasis, a multiplier y*, then
// reverse-engineer C and b so KKT holds exactly.
TEST(Ipm, RecoversConstructedOptimum) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    std::vector<int> sizes = {3, 2};
    const int cdim = 4;
    SdpProblem p = make_problem(sizes, cdim, true);
    for (int c = 0; c < cdim; ++c) {
      for (int s = 0; s < 2; ++s) set_constraint(p, c, s, random_sym(rng, sizes[s]));
      p.a[c] = rng.next_double(-1.0, 1.0);
    }

    std::vector<Eigen::MatrixXd> Xstar(2), Sstar(2);
    std::vector<int> prim_rank = {2, 1};
    for (int s = 0; s < 2; ++s) {
      Eigen::MatrixXd Q = random_orthogonal(rng, sizes[s]);
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(sizes[s]);
      Eigen::VectorXd ds = Eigen::VectorXd::Zero(sizes[s]);
      for (int i = 0; i < sizes[s]; ++i) {
        if (i < prim_rank[s])
          dx[i] = rng.next_double(0.5, 2.0);
        else
          ds[i] = rng.next_double(0.5, 2.0);
      }
      Xstar[s] = Q * dx.asDiagonal() * Q.transpose();
      Sstar[s] = Q * ds.asDiagonal() * Q.transpose();
    }
    Eigen::VectorXd ystar = Eigen::VectorXd::NullaryExpr(
        cdim, [&](Eigen::Index) { return rng.next_double(-1.0, 1.0); });
    double rstar = rng.next_double(-1.0, 1.0);

    p.C_obj.resize(2);
    double pobj_star = 0.0;
    for (int s = 0; s < 2; ++s) {
      Eigen::MatrixXd aty = Eigen::MatrixXd::Zero(sizes[s], sizes[s]);
      for (int c = 0; c < cdim; ++c) aty += ystar[c] * p.constraint_matrix(c, s);
      p.C_obj[s] = aty + Sstar[s];
      pobj_star += p.C_obj[s].cwiseProduct(Xstar[s]).sum();
    }
    for (int c = 0; c < cdim; ++c) {
      double v = p.a[c] * rstar;
      for (int s = 0; s < 2; ++s) v += p.constraint_matrix(c, s).cwiseProduct(Xstar[s]).sum();
      p.b[c] = v;
    }
    p.c_free = p.a.dot(ystar);
    pobj_star += p.c_free * rstar;

    SolverResult res = solve_ipm(p);
    ASSERT_TRUE(res.usable()) << "seed " << seed << ": " << res.note;
    EXPECT_NEAR(res.primal_obj, pobj_star, 1e-6 * (1.0 + std::abs(pobj_star)))
        << "seed " << seed;
    EXPECT_NEAR(res.dual_obj, pobj_star, 1e-6 * (1.0 + std::abs(pobj_star)))
        << "seed " << seed;
  }
}

TEST(Ipm, DetectsConicInfeasibility) {
  // X11 = -1 with X psd: linearly fine, conically impossible.
  SdpProblem p = make_problem({1}, 1, false);
  set_constraint(p, 0, 0, Eigen::MatrixXd::Ones(1, 1));
  p.b[0] = -1.0;
  SolverResult res = solve_ipm(p);
  EXPECT_EQ(res.status, SolveStatus::Infeasible) << res.note;
  EXPECT_NE(res.note.find("ray"), std::string::npos);
}

TEST(Ipm, DetectsConicInfeasibilityAcrossSlots) {
  // X1 + X2 = -1 over two nonnegative scalars.
  SdpProblem p = make_problem({1, 1}, 1, false);
  set_constraint(p, 0, 0, Eigen::MatrixXd::Ones(1, 1));
  set_constraint(p, 0, 1, Eigen::MatrixXd::Ones(1, 1));
  p.b[0] = -1.0;
  SolverResult res = solve_ipm(p);
  EXPECT_EQ(res.status, SolveStatus::Infeasible) << res.note;
}

TEST(Ipm, FlagsInconsistentEqualitiesWithoutTouchingTheCone) {
  // X + r = 1, X + r = 2, X = 0: more rows than unknowns and contradictory.
  SdpProblem p = make_problem({1}, 3, true);
  for (int c = 0; c < 3; ++c)
    set_constraint(p, c, 0, Eigen::MatrixXd::Constant(1, 1, c == 2 ? 1.0 : 1.0));
  p.a << 1.0, 1.0, 0.0;
  p.b << 1.0, 2.0, 0.0;
  SolverResult res = solve_ipm(p);
  EXPECT_EQ(res.status, SolveStatus::Infeasible);
  EXPECT_NE(res.note.find("inconsistent"), std::string::npos);
}

TEST(Ipm, DropsRedundantEqualitiesAndSolves) {
  // The same row three times plus a pin on X; still has a clean optimum.
  SdpProblem p = make_problem({1}, 4, true);
  for (int c = 0; c < 4; ++c) set_constraint(p, c, 0, Eigen::MatrixXd::Ones(1, 1));
  p.a << 1.0, 1.0, 1.0, 0.0;
  p.b << 1.0, 1.0, 1.0, 0.5;
  SolverResult res = solve_ipm(p);
  ASSERT_TRUE(res.usable()) << res.note;
  EXPECT_NE(res.note.find("independent equalities"), std::string::npos);
  EXPECT_NEAR(res.free_value, 0.5, 1e-6);
}

TEST(Ipm, ReportsUnboundedObjective) {
  // min -r  s.t.  X - r = 0: the ray (X, r) = (t, t) drives the value down.
  SdpProblem p = make_problem({1}, 1, true);
  set_constraint(p, 0, 0, Eigen::MatrixXd::Ones(1, 1));
  p.a[0] = -1.0;
  p.b[0] = 0.0;
  SolverResult res = solve_ipm(p);
  EXPECT_EQ(res.status, SolveStatus::Unbounded) << res.note;
}

TEST(Ipm, DeterministicAcrossRuns) {
  Rng rng(7);
  SdpProblem p = make_problem({2, 2}, 3, true);
  for (int c = 0; c < 3; ++c) {
    for (int s = 0; s < 2; ++s) set_constraint(p, c, s, random_sym(rng, 2));
    p.a[c] = 1.0;
    p.b[c] = rng.next_double(0.5, 2.0);
  }
  SolverResult r1 = solve_ipm(p);
  SolverResult r2 = solve_ipm(p);
  EXPECT_EQ(r1.status, r2.status);
  EXPECT_EQ(r1.primal_obj, r2.primal_obj);
  EXPECT_EQ(r1.iterations, r2.iterations);
}
