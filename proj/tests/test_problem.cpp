#include <gtest/gtest.h>

#include <pmirelax/problem.hpp>
#include <pmirelax/problem_io.hpp>

using namespace pmirelax;
using nlohmann::json;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }

// The 2x2 running example with one scalar side constraint:
// G1 = [[x3+x2, 2x3-x1], [2x3-x1, x3-x2]], g2 = 1 - x3.
PmiProblem edge_problem() {
  int n = 3;
  PmiProblem p;
  p.n = n;
  PolyMatrix g(n, 2);
  g.set(0, 0, x(n, 2) + x(n, 1));
  g.set(0, 1, 2.0 * x(n, 2) - x(n, 0));
  g.set(1, 1, x(n, 2) - x(n, 1));
  PolyMatrix s(n, 1);
  s.set(0, 0, Polynomial::constant(n, 1.0) - x(n, 2));
  p.blocks = {g, s};
  p.objective = (x(n, 0) + Polynomial::constant(n, 0.5)).pow(2) + x(n, 1) * x(n, 1) +
                (x(n, 2) - Polynomial::constant(n, 1.5)).pow(2);
  p.box = {{-1.0, 3.0}, {-1.0, 1.0}, {0.0, 1.0}};
  return p;
}

PolyMatrix curve_block(int n) {
  // (8/9) * [[x2 - x1/2, x1 x2], [x1 x2, 2 x1 - x2]]
  PolyMatrix h(n, 2);
  h.set(0, 0, x(n, 1) - 0.5 * x(n, 0));
  h.set(0, 1, x(n, 0) * x(n, 1));
  h.set(1, 1, 2.0 * x(n, 0) - x(n, 1));
  return h;
}

}  // namespace

TEST(Problem, KindIsLinearIffAllEntriesDegreeOne) {
  PmiProblem p = edge_problem();
  EXPECT_EQ(p.kind(), ProblemKind::Linear);
  PmiProblem q;
  q.n = 2;
  q.objective = Polynomial::constant(2, 0.0);
  q.blocks = {curve_block(2)};
  EXPECT_EQ(q.kind(), ProblemKind::Nonlinear);
}

TEST(Problem, JsonRoundTripPreservesEverything) {
  PmiProblem p = edge_problem();
  p.known_optimum = 2.0;
  p.alt_objectives = {p.objective, Polynomial::variable(3, 0)};
  json j = problem_to_json(p);
  PmiProblem q = problem_from_json(j);
  EXPECT_EQ(q.n, p.n);
  EXPECT_TRUE(q.objective == p.objective);
  ASSERT_EQ(q.blocks.size(), p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    ASSERT_EQ(q.blocks[b].size(), p.blocks[b].size());
    for (int i = 0; i < p.blocks[b].size(); ++i)
      for (int jj = i; jj < p.blocks[b].size(); ++jj)
        EXPECT_TRUE(q.blocks[b](i, jj) == p.blocks[b](i, jj));
  }
  EXPECT_EQ(q.box, p.box);
  ASSERT_TRUE(q.known_optimum.has_value());
  EXPECT_DOUBLE_EQ(*q.known_optimum, 2.0);
  ASSERT_EQ(q.alt_objectives.size(), 2u);
  EXPECT_EQ(problem_hash(p), problem_hash(q));
}

TEST(Problem, UnknownKeysRejectedWithFieldNames) {
  json j = problem_to_json(edge_problem());
  j["extra"] = 1;
  try {
    problem_from_json(j);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("extra"), std::string::npos);
  }
}

TEST(Problem, LowerTriangleEntriesRejected) {
  json j = problem_to_json(edge_problem());
  json entry;
  entry["i"] = 2;
  entry["j"] = 1;
  entry["p"] = json::array({{{"c", 1.0}, {"e", {0, 0, 0}}}});
  j["blocks"][0]["entries"].push_back(entry);
  EXPECT_THROW(problem_from_json(j), ParseError);
}

TEST(Problem, ExponentLengthMismatchRejected) {
  json j = problem_to_json(edge_problem());
  j["objective"][0]["e"] = {1, 0};  // n = 3
  EXPECT_THROW(problem_from_json(j), ParseError);
}

TEST(Problem, MergeBlocksKeepsEvaluations) {
  PmiProblem p = edge_problem();
  PolyMatrix m = merge_blocks(p.blocks, p.n);
  ASSERT_EQ(m.size(), 3);
  Eigen::VectorXd pt(3);
  pt << 0.3, -0.2, 0.7;
  Eigen::MatrixXd e = m.eval(pt);
  EXPECT_NEAR(e(0, 0), p.blocks[0].eval(pt)(0, 0), 1e-15);
  EXPECT_NEAR(e(2, 2), p.blocks[1].eval(pt)(0, 0), 1e-15);
  EXPECT_NEAR(e(0, 2), 0.0, 1e-15);
}

TEST(Problem, FeasibleSamplesAreActuallyFeasible) {
  PmiProblem p = edge_problem();
  auto pts = sample_feasible(p, 200, /*seed=*/5);
  ASSERT_EQ(pts.size(), 200u);
  for (const auto& pt : pts) {
    for (const auto& g : p.blocks) EXPECT_GE(g.min_eigenvalue(pt), -1e-10);
    EXPECT_GE(pt[2], 0.0);
    EXPECT_LE(pt[2], 1.0);
  }
  auto again = sample_feasible(p, 200, 5);
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_EQ((pts[i] - again[i]).norm(), 0.0) << "sampling must be deterministic";
}

TEST(Problem, EmptyFeasibleSetReported) {
  PmiProblem p;
  p.n = 1;
  p.objective = Polynomial::variable(1, 0);
  PolyMatrix g(1, 1);
  g.set(0, 0, Polynomial::constant(1, -1.0));  // -1 >= 0 never holds
  p.blocks = {g};
  try {
    sample_feasible(p, 10, 0);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("empty or thin"), std::string::npos);
  }
}

TEST(Scaling, LinearProblemGetsIdentityReport) {
  PmiProblem p = edge_problem();
  auto [scaled, rep] = scale_for_contraction(p);
  EXPECT_TRUE(rep.identity);
  for (double f : rep.factors) EXPECT_DOUBLE_EQ(f, 1.0);
}

TEST(Scaling, OverrideDividesBlockExactly) {
  PmiProblem p;
  p.n = 2;
  p.objective = Polynomial::constant(2, 0.0);
  p.blocks = {curve_block(2)};
  auto [scaled, rep] = scale_for_contraction(p, {9.0 / 8.0});
  EXPECT_FALSE(rep.identity);
  EXPECT_DOUBLE_EQ(rep.factors[0], 9.0 / 8.0);
  Eigen::VectorXd pt(2);
  pt << 0.4, 0.3;
  Eigen::MatrixXd want = (8.0 / 9.0) * p.blocks[0].eval(pt);
  EXPECT_LT((scaled.blocks[0].eval(pt) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Scaling, SampledBoundBracketsTrueMaximum) {
  // Largest eigenvalue of the curve block over its feasible set is 9/8,
  // attained at (3/4, 3/5); so the sampled bound with margin lands in
  // [9/8, 1.05 * 9/8].
  PmiProblem p;
  p.n = 2;
  p.objective = Polynomial::constant(2, 0.0);
  p.blocks = {curve_block(2)};
  p.box = {{0.0, 1.2}, {0.0, 1.2}};
  auto [scaled, rep] = scale_for_contraction(p, {}, /*samples=*/100000, /*seed=*/1);
  EXPECT_GE(rep.factors[0], 9.0 / 8.0 * 0.999);
  EXPECT_LE(rep.factors[0], 9.0 / 8.0 * 1.05 * 1.001);
  EXPECT_THROW(scale_for_contraction(p, {-1.0}), std::invalid_argument);
}
