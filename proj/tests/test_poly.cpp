#include <gtest/gtest.h>

#include <pmirelax/poly.hpp>
#include <pmirelax/poly_matrix.hpp>
#include <pmirelax/rng.hpp>

using namespace pmirelax;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }

Polynomial random_poly(Rng& rng, int n, int deg, int terms) {
  std::vector<std::pair<Exponents, double>> ts;
  for (int t = 0; t < terms; ++t) {
    Exponents e(n, 0);
    int d = static_cast<int>(rng.next_u64() % (deg + 1));
    for (int k = 0; k < d; ++k) e[rng.next_u64() % n]++;
    ts.push_back({e, rng.next_double(-2.0, 2.0)});
  }
  return Polynomial::from_terms(n, ts);
}

PolyMatrix random_pm(Rng& rng, int n, int q, int deg) {
  PolyMatrix m(n, q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) m.set(i, j, random_poly(rng, n, deg, 3));
  return m;
}

}  // namespace

TEST(GradedLex, OrdersByDegreeThenLeadingVariable) {
  // 1 < x1 < x2 < x1^2 < x1 x2 < x2^2
  Exponents one{0, 0}, x1{1, 0}, x2{0, 1}, x1sq{2, 0}, x1x2{1, 1}, x2sq{0, 2};
  EXPECT_TRUE(graded_lex_less(one, x1));
  EXPECT_TRUE(graded_lex_less(x1, x2));
  EXPECT_TRUE(graded_lex_less(x2, x1sq));
  EXPECT_TRUE(graded_lex_less(x1sq, x1x2));
  EXPECT_TRUE(graded_lex_less(x1x2, x2sq));
  EXPECT_FALSE(graded_lex_less(x2sq, x1x2));
}

TEST(MonomialBasis, CountsMatchBinomial) {
  for (int n = 1; n <= 4; ++n)
    for (int d = 0; d <= 5; ++d) {
      MonomialBasis b(n, d);
      EXPECT_EQ(b.size(), static_cast<int>(binomial(n + d, n))) << "n=" << n << " d=" << d;
    }
}

TEST(MonomialBasis, StrictlyIncreasingGradedLex) {
  MonomialBasis b(3, 4);
  for (int i = 0; i + 1 < b.size(); ++i)
    EXPECT_TRUE(graded_lex_less(b[i], b[i + 1])) << "position " << i;
}

TEST(MonomialBasis, DegreeZeroHasOnlyConstant) {
  MonomialBasis b(5, 0);
  ASSERT_EQ(b.size(), 1);
  EXPECT_EQ(exponents_degree(b[0]), 0);
}

TEST(Polynomial, ArithmeticCombinesTerms) {
  int n = 2;
  Polynomial p = x(n, 0) * x(n, 0) + 2.0 * x(n, 1) - Polynomial::constant(n, 3.0);
  Polynomial q = p - x(n, 0) * x(n, 0);
  EXPECT_EQ(q.n_terms(), 2);
  EXPECT_DOUBLE_EQ(q.coefficient({0, 1}), 2.0);
  EXPECT_DOUBLE_EQ(q.coefficient({0, 0}), -3.0);
  Polynomial z = q - q;
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.degree(), -1);
}

TEST(Polynomial, ProductMatchesHandExpansion) {
  int n = 2;
  // (x1 + x2)^2 = x1^2 + 2 x1 x2 + x2^2
  Polynomial s = x(n, 0) + x(n, 1);
  Polynomial p = s * s;
  EXPECT_DOUBLE_EQ(p.coefficient({2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(p.coefficient({1, 1}), 2.0);
  EXPECT_DOUBLE_EQ(p.coefficient({0, 2}), 1.0);
  EXPECT_EQ(p.n_terms(), 3);
}

TEST(Polynomial, RelativePruneDropsTinyTerms) {
  int n = 1;
  Polynomial big = Polynomial::constant(n, 1.0);
  Polynomial tiny = Polynomial::monomial(n, {1}, 1e-16);
  Polynomial sum = big + tiny;
  EXPECT_EQ(sum.n_terms(), 1);
}

// The determinant curve of the running 2x2 example vanishes at (3/4, 3/5):
// (5/2)ab - a^2 - b^2 - a^2 b^2 = 450/400 - 225/400 - 144/400 - 81/400 = 0.
TEST(Polynomial, BoundaryMembershipEvaluatesToZero) {
  int n = 2;
  Polynomial g3 = 2.5 * (x(n, 0) * x(n, 1)) - x(n, 0) * x(n, 0) - x(n, 1) * x(n, 1) -
                  (x(n, 0) * x(n, 0)) * (x(n, 1) * x(n, 1));
  Eigen::VectorXd v(2);
  v << 0.75, 0.6;
  EXPECT_NEAR(g3.eval(v), 0.0, 1e-12);
}

TEST(Polynomial, EvalMatchesHornerOnRandomData) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng.next_u64() % 3);
    Polynomial p = random_poly(rng, n, 4, 6);
    Eigen::VectorXd pt(n);
    for (int i = 0; i < n; ++i) pt[i] = rng.next_double(-1.0, 1.0);
    double direct = 0.0;
    for (int t = 0; t < p.n_terms(); ++t) {
      double v = p.coefficients()[t];
      for (int i = 0; i < n; ++i) v *= std::pow(pt[i], p.monomials()[t][i]);
      direct += v;
    }
    EXPECT_NEAR(p.eval(pt), direct, 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST(PolyMatrix, FromFullAveragesAndReportsAsymmetry) {
  int n = 1;
  std::vector<std::vector<Polynomial>> grid(2, std::vector<Polynomial>(2, Polynomial(n)));
  grid[0][0] = Polynomial::constant(n, 1.0);
  grid[1][1] = Polynomial::constant(n, 1.0);
  grid[0][1] = Polynomial::constant(n, 2.0);
  grid[1][0] = Polynomial::constant(n, 2.0 + 3e-12);
  auto [m, asym] = PolyMatrix::from_full(n, grid);
  EXPECT_NEAR(asym, 3e-12, 1e-15);
  EXPECT_GT(asym, 1e-12);
  Eigen::VectorXd pt(1);
  pt << 0.0;
  EXPECT_NEAR(m.eval(pt)(0, 1), 2.0 + 1.5e-12, 1e-15);
}

TEST(PolyMatrix, KronMatchesNumericKroneckerAtPoints) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2;
    PolyMatrix a = random_pm(rng, n, 2, 2);
    PolyMatrix b = random_pm(rng, n, 3, 1);
    PolyMatrix k = pm_kron(a, b);
    ASSERT_EQ(k.size(), 6);
    Eigen::VectorXd pt(n);
    for (int i = 0; i < n; ++i) pt[i] = rng.next_double(-1.0, 1.0);
    Eigen::MatrixXd lhs = k.eval(pt);
    Eigen::MatrixXd rhs = kron(a.eval(pt), b.eval(pt));
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST(PolyMatrix, KronPowerTraceOfConstantMatrix) {
  // tr(A^{(x)3}) = (tr A)^3 for constant A.
  Eigen::MatrixXd a(2, 2);
  a << 1.5, 0.25, 0.25, -0.5;
  PolyMatrix pa = PolyMatrix::constant(1, a);
  PolyMatrix p3 = pm_kron_power(pa, 3);
  Eigen::VectorXd pt(1);
  pt << 0.3;
  EXPECT_NEAR(p3.eval(pt).trace(), std::pow(a.trace(), 3.0), 1e-12);
}

TEST(PolyMatrix, TraceInnerFactorsOverKron) {
  // <A (x) B, M (x) N> = <A, M> <B, N> as polynomials.
  Rng rng(11);
  int n = 2;
  PolyMatrix m = random_pm(rng, n, 2, 1);
  PolyMatrix nn = random_pm(rng, n, 2, 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(2, 2), b = Eigen::MatrixXd::Random(2, 2);
  a = (0.5 * (a + a.transpose())).eval();
  b = (0.5 * (b + b.transpose())).eval();
  Polynomial lhs = trace_inner(kron(a, b), pm_kron(m, nn));
  Polynomial rhs = trace_inner(a, m) * trace_inner(b, nn);
  Polynomial diff = lhs - rhs;
  EXPECT_LT(diff.max_abs_coeff(), 1e-12);
}

TEST(PolyMatrix, DilationIsPsdExactlyWhenContractive) {
  // diag(G, I-G) >= 0 iff 0 <= G <= I.
  int n = 1;
  PolyMatrix g(n, 2);
  g.set(0, 0, Polynomial::variable(n, 0));
  g.set(1, 1, Polynomial::constant(n, 0.5));
  g.set(0, 1, Polynomial(n));
  PolyMatrix d = dilate(g);
  ASSERT_EQ(d.size(), 4);
  Eigen::VectorXd inside(1), outside(1), negative(1);
  inside << 0.7;
  outside << 1.3;
  negative << -0.1;
  EXPECT_GE(d.min_eigenvalue(inside), -1e-12);
  EXPECT_LT(d.min_eigenvalue(outside), -0.2);
  EXPECT_LT(d.min_eigenvalue(negative), -0.05);
}

TEST(PolyMatrix, WordEvalOnScalarsIsCommutativeProduct) {
  int n = 2;
  PolyMatrix a(n, 1), b(n, 1);
  a.set(0, 0, Polynomial::variable(n, 0));
  b.set(0, 0, Polynomial::variable(n, 1) + Polynomial::constant(n, 1.0));
  PolyMatrix w1 = word_eval({a, b}, {1, 1, 0});  // b*b*a
  PolyMatrix w2 = word_eval({a, b}, {0, 1, 1});  // a*b*b
  Polynomial diff = w1(0, 0) - w2(0, 0);
  EXPECT_LT(diff.max_abs_coeff(), 1e-14);
  Polynomial expect = a(0, 0) * b(0, 0) * b(0, 0);
  EXPECT_LT((w1(0, 0) - expect).max_abs_coeff(), 1e-14);
}

TEST(Rng, CounterDrawsAreReproducible) {
  Rng a(123), b(123);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.at(3), b.at(3));
  Rng c(124);
  EXPECT_NE(a.at(0), c.at(0));
  Rng d(123);
  double v = d.next_double(-1.0, 1.0);
  EXPECT_GE(v, -1.0);
  EXPECT_LT(v, 1.0);
}
