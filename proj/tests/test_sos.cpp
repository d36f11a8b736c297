#include <gtest/gtest.h>

#include "pmirelax/bench_problems.hpp"
#include "pmirelax/relax.hpp"
#include "pmirelax/sos.hpp"

using namespace pmirelax;

namespace {

PmiProblem interval_problem() {
  // f = x over the spectrahedral interval [-1, 1]: diag(1+x, 1-x) >= 0.
  PmiProblem p;
  p.n = 1;
  Polynomial x = Polynomial::variable(1, 0);
  PolyMatrix g(1, 2);
  g.set(0, 0, Polynomial::constant(1, 1.0) + x);
  g.set(1, 1, Polynomial::constant(1, 1.0) - x);
  p.blocks = {g};
  p.objective = x;
  p.known_optimum = -1.0;
  return p;
}

}  // namespace

TEST(Sos, MomentMatrixEntriesAreMonomialProducts) {
  PolyMatrix m = moment_matrix(2, 2);
  EXPECT_EQ(m.size(), 6);  // 1, x1, x2, x1^2, x1 x2, x2^2
  Eigen::VectorXd pt(2);
  pt << 0.5, -2.0;
  Eigen::MatrixXd v = m.eval(pt);
  MonomialBasis basis(2, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      double want = 1.0;
      for (int k = 0; k < 2; ++k)
        want *= std::pow(pt[k], basis[i][k] + basis[j][k]);
      EXPECT_NEAR(v(i, j), want, 1e-14);
    }
}

TEST(Sos, MergedSlotSizes) {
  ConeSpec spec = build_sos(gen_example1(), 2);
  ASSERT_EQ(spec.slots.size(), 2u);
  EXPECT_EQ(spec.mode, "sos");
  EXPECT_EQ(spec.order, 2);
  EXPECT_EQ(spec.slots[0].id, "sos:S0");
  EXPECT_EQ(spec.slots[0].size, 10);  // dim of degree-2 monomials in 3 vars
  EXPECT_EQ(spec.slots[1].id, "sos:S");
  // merged block is 3x3 of degree 1, so the Gram basis has degree (4-1)/2 = 1
  EXPECT_EQ(spec.slots[1].size, 3 * 4);
}

TEST(Sos, PerBlockSlotSizes) {
  ConeSpec spec = build_sos(gen_example1(), 2, /*per_block=*/true);
  ASSERT_EQ(spec.slots.size(), 3u);
  EXPECT_EQ(spec.slots[1].id, "sos:S1");
  EXPECT_EQ(spec.slots[1].size, 2 * 4);
  EXPECT_EQ(spec.slots[2].id, "sos:S2");
  EXPECT_EQ(spec.slots[2].size, 1 * 4);
}

TEST(Sos, RejectsOrderBelowBlockDegree) {
  PmiProblem p;
  p.n = 1;
  Polynomial x = Polynomial::variable(1, 0);
  PolyMatrix g(1, 1);
  g.set(0, 0, Polynomial::constant(1, 1.0) - x.pow(3));
  p.blocks = {g};
  p.objective = x;
  try {
    build_sos(p, 1);
    FAIL() << "expected a degree complaint";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("order too small"), std::string::npos);
  }
}

TEST(Sos, TildeSlotSizes) {
  ConeSpec spec = build_sos_tilde1(gen_corrmat(5));
  ASSERT_EQ(spec.slots.size(), 2u);
  EXPECT_EQ(spec.mode, "sos-tilde");
  EXPECT_EQ(spec.slots[0].id, "tilde:S0");
  EXPECT_EQ(spec.slots[0].size, 11);  // [1; x] with n = 10
  EXPECT_EQ(spec.slots[1].id, "tilde:S");
  EXPECT_EQ(spec.slots[1].size, 11 * 5);
}

TEST(Sos, IntervalBoundIsExact) {
  RelaxOptions opt;
  opt.mode = "sos";
  opt.order = 1;
  RelaxResult res = solve_relaxation(interval_problem(), opt);
  ASSERT_TRUE(res.usable()) << res.record.status << " " << res.record.note;
  EXPECT_NEAR(res.record.bound, -1.0, 1e-6);
  EXPECT_TRUE(res.record.certificate_verified);
}

TEST(Sos, CorrelationMatrixFirstOrderIsInfeasible) {
  // -sum x_i^2 has a negative definite quadratic form, but at order 1 the
  // multiplier of G is constant and contributes only affine terms, so the
  // identity would need an SOS with quadratic part -I.
  RelaxOptions opt;
  opt.mode = "sos";
  opt.order = 1;
  RelaxResult res = solve_relaxation(gen_corrmat(5), opt);
  EXPECT_FALSE(res.usable());
  EXPECT_EQ(res.solver.status, SolveStatus::Infeasible) << res.record.note;
}

TEST(Sos, TildeSolvesCorrelationMatrix) {
  RelaxOptions opt;
  opt.mode = "sos-tilde";
  RelaxResult res = solve_relaxation(gen_corrmat(3), opt);
  ASSERT_TRUE(res.usable()) << res.record.status << " " << res.record.note;
  EXPECT_NEAR(res.record.bound, -3.0, 5e-3);
  EXPECT_TRUE(res.record.certificate_verified);
}

TEST(Sos, TildeDegreeIsFixed) {
  ConeSpec spec = build_sos_tilde1(gen_example2("original"));
  EXPECT_EQ(spec.order, 1);
  EXPECT_EQ(spec.max_generator_degree(), 2 + 2);  // quadratic basis times quadratic block
}
