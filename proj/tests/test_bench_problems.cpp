#include <gtest/gtest.h>

#include "pmirelax/bench_problems.hpp"
#include "pmirelax/problem_io.hpp"
#include "pmirelax/sparsity.hpp"

using namespace pmirelax;

TEST(Example1, MinimizersAreFeasibleAndOptimal) {
  for (int which = 1; which <= 4; ++which) {
    PmiProblem p = gen_example1(which);
    ASSERT_EQ(p.alt_objectives.size(), 4u);
    ReferenceOptimum ref = reference_example1(which);
    for (const auto& u : ref.minimizers) {
      EXPECT_TRUE(p.is_feasible(u, 1e-9)) << "objective " << which;
      EXPECT_NEAR(p.objective.eval(u), 2.0, 1e-9) << "objective " << which;
    }
    EXPECT_EQ(p.known_optimum.value(), 2.0);
  }
}

TEST(Example1, ObjectiveSelectionMatchesAlternatives) {
  PmiProblem p3 = gen_example1(3);
  Eigen::VectorXd u(3);
  u << 0.3, -0.2, 0.7;
  EXPECT_EQ(p3.objective.eval(u), p3.alt_objectives[2].eval(u));
  EXPECT_NE(p3.objective.eval(u), gen_example1(1).objective.eval(u));
}

TEST(Example2, MinimizersAreFeasibleAndOptimal) {
  for (const char* variant : {"original", "rescaled"}) {
    PmiProblem p = gen_example2(variant);
    EXPECT_EQ(p.kind(), ProblemKind::Nonlinear);
    for (const auto& u : reference_example2(variant).minimizers) {
      EXPECT_TRUE(p.is_feasible(u, 1e-9)) << variant;
      EXPECT_NEAR(p.objective.eval(u), 0.0, 1e-12) << variant;
    }
  }
  EXPECT_EQ(reference_example2("rescaled").minimizers.size(), 2u);
}

TEST(Example2, BlockIsContractionOnSampledFeasiblePoints) {
  PmiProblem p = gen_example2("original");
  auto pts = sample_feasible(p, 500, 42);
  ASSERT_FALSE(pts.empty());
  double worst = 0.0;
  for (const auto& x : pts) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.blocks[0].eval(x),
                                                      Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  EXPECT_LE(worst, 1.0 + 1e-9);
}

TEST(Chain, OptimumMatchesReferenceTable) {
  const double table[] = {0.2367, 0.3431, 0.4167, 0.5147,
                          0.5918, 0.6863, 0.7653, 0.8579};
  for (int n = 3; n <= 10; ++n)
    EXPECT_NEAR(chain_optimum(n), table[n - 3], 6e-5) << "n = " << n;
}

TEST(Chain, EvenClosedForm) {
  for (int n : {2, 4, 6, 12})
    EXPECT_NEAR(chain_optimum(n), (n / 2.0) * (3.0 - 2.0 * std::sqrt(2.0)), 1e-14);
}

TEST(Chain, MinimizerAchievesOptimum) {
  for (int n = 2; n <= 11; ++n) {
    PmiProblem p = gen_chain(n);
    ReferenceOptimum ref = reference_chain(n);
    const Eigen::VectorXd& u = ref.minimizers[0];
    EXPECT_TRUE(p.is_feasible(u, 1e-9)) << "n = " << n;
    EXPECT_NEAR(p.objective.eval(u), chain_optimum(n), 1e-10) << "n = " << n;
  }
}

TEST(Chain, HasRunningIntersectionProperty) {
  PmiProblem p = gen_chain(6);
  SparsityPattern sp = extract_cliques(p);
  EXPECT_EQ(sp.cliques.size(), 5u);
  EXPECT_TRUE(sp.rip.ok);
  for (std::size_t c = 0; c < sp.cliques.size(); ++c)
    EXPECT_EQ(sp.cliques[c], (std::vector<int>{static_cast<int>(c), static_cast<int>(c) + 1}));
}

TEST(Corrmat, IndexLayout) {
  PmiProblem p = gen_corrmat(3);
  EXPECT_EQ(p.n, 3);
  Eigen::VectorXd x(3);
  x << 0.3, 0.5, 0.7;
  Eigen::MatrixXd g = p.blocks[0].eval(x);
  EXPECT_EQ(g(0, 0), 1.0);
  EXPECT_EQ(g(1, 1), 1.0);
  EXPECT_EQ(g(2, 2), 1.0);
  EXPECT_EQ(g(0, 1), 0.3);  // x1 sits in entry (1,2)
  EXPECT_EQ(g(0, 2), 0.5);
  EXPECT_EQ(g(1, 2), 0.7);
  EXPECT_EQ(g(1, 0), 0.3);
}

TEST(Corrmat, AllOnesIsOptimal) {
  for (int q : {2, 3, 5}) {
    PmiProblem p = gen_corrmat(q);
    ReferenceOptimum ref = reference_corrmat(q);
    EXPECT_TRUE(p.is_feasible(ref.minimizers[0], 1e-9));
    EXPECT_EQ(p.objective.eval(ref.minimizers[0]), ref.value);
    EXPECT_EQ(p.known_optimum.value(), ref.value);
  }
  EXPECT_EQ(gen_corrmat(8).n, 28);
}

TEST(GenRandom, DeterministicInSeed) {
  PmiProblem a = gen_random(4, 2, 2, 7);
  PmiProblem b = gen_random(4, 2, 2, 7);
  PmiProblem c = gen_random(4, 2, 2, 8);
  EXPECT_EQ(problem_hash(a), problem_hash(b));
  EXPECT_NE(problem_hash(a), problem_hash(c));
}

TEST(GenRandom, OriginIsStrictlyFeasible) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    PmiProblem p = gen_random(3, 2, 2, seed);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    ASSERT_TRUE(p.is_feasible(zero, 1e-9));
    for (const auto& blk : p.blocks) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.eval(zero), Eigen::EigenvaluesOnly);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.01);
    }
  }
}

TEST(GenRandom, NonlinearDrawsAreRescaled) {
  PmiProblem p = gen_random(3, 2, 2, 11);
  ASSERT_EQ(p.kind(), ProblemKind::Nonlinear);
  auto pts = sample_feasible(p, 300, 11);
  double worst = 0.0;
  for (const auto& x : pts)
    for (const auto& blk : p.blocks) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.eval(x), Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
  EXPECT_LE(worst, 1.0 + 1e-6);
}

TEST(GenRandom, ChainWindowsGiveSparsity) {
  PmiProblem p = gen_random(8, 2, 1, 3, /*chain_width=*/3);
  SparsityPattern sp = extract_cliques(p);
  EXPECT_GE(sp.cliques.size(), 2u);
  EXPECT_TRUE(sp.rip.ok);
  for (const auto& clq : sp.cliques) EXPECT_LE(clq.size(), 3u);
}

TEST(GenRandom, RejectsBadParameters) {
  EXPECT_THROW(gen_random(0, 2, 1, 1), std::invalid_argument);
  EXPECT_THROW(gen_random(4, 2, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(gen_random(4, 2, 1, 1, 9), std::invalid_argument);
}

TEST(GridOracle, Example1UpperBoundTight) {
  // step 0.02 puts the known minimizer (1/2, 0, 1/2) on the grid
  double g = grid_minimum(gen_example1(1), 0.02);
  EXPECT_GE(g, 2.0 - 1e-9);
  EXPECT_LE(g, 2.0 + 5e-3);
}

TEST(GridOracle, Example2FindsTheOrigin) {
  double g = grid_minimum(gen_example2("original"), 0.005);
  EXPECT_GE(g, -1e-12);
  EXPECT_LE(g, 1e-4);
}

TEST(GridOracle, RefusesOversizedGrids) {
  EXPECT_THROW(grid_minimum(gen_example1(1), 1e-4), std::invalid_argument);
  EXPECT_THROW(grid_minimum(gen_example1(1), 0.0), std::invalid_argument);
}
