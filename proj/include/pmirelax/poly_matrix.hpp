#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmirelax/poly.hpp"

namespace pmirelax {

// Symmetric matrix with polynomial entries; only the upper triangle is stored.
class PolyMatrix {
 public:
  PolyMatrix() : n_(0), q_(0) {}
  PolyMatrix(int n, int q)
      : n_(n), q_(q), entries_(static_cast<std::size_t>(q) * (q + 1) / 2, Polynomial(n)) {
    if (q <= 0) throw std::invalid_argument("PolyMatrix: size must be positive");
  }

  static PolyMatrix identity(int n, int q) {
    PolyMatrix m(n, q);
    for (int i = 0; i < q; ++i) m.set(i, i, Polynomial::constant(n, 1.0));
    return m;
  }

  static PolyMatrix constant(int n, const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("PolyMatrix: not square");
    PolyMatrix m(n, static_cast<int>(a.rows()));
    for (int i = 0; i < m.q_; ++i)
      for (int j = i; j < m.q_; ++j)
        m.set(i, j, Polynomial::constant(n, 0.5 * (a(i, j) + a(j, i))));
    return m;
  }

  // Builds from a full q*q grid of polynomials, averaging (i,j) and (j,i).
  // Returns the largest coefficient asymmetry encountered; callers warn
  // above 1e-12.
  static std::pair<PolyMatrix, double> from_full(
      int n, const std::vector<std::vector<Polynomial>>& grid) {
    int q = static_cast<int>(grid.size());
    PolyMatrix m(n, q);
    double asym = 0.0;
    for (int i = 0; i < q; ++i) {
      if (static_cast<int>(grid[i].size()) != q)
        throw std::invalid_argument("PolyMatrix::from_full: ragged grid");
      for (int j = i; j < q; ++j) {
        Polynomial diff = grid[i][j] - grid[j][i];
        asym = std::max(asym, diff.max_abs_coeff());
        m.set(i, j, 0.5 * (grid[i][j] + grid[j][i]));
      }
    }
    return {std::move(m), asym};
  }

  int n_vars() const { return n_; }
  int size() const { return q_; }

  const Polynomial& operator()(int i, int j) const {
    return entries_[index(i, j)];
  }

  void set(int i, int j, Polynomial p) {
    if (p.n_vars() != n_) throw std::invalid_argument("PolyMatrix::set: variable count mismatch");
    entries_[index(i, j)] = std::move(p);
  }

  int degree() const {
    int d = -1;
    for (const auto& p : entries_) d = std::max(d, p.degree());
    return d;
  }

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd a(q_, q_);
    for (int i = 0; i < q_; ++i)
      for (int j = i; j < q_; ++j) {
        double v = entries_[index(i, j)].eval(x);
        a(i, j) = v;
        a(j, i) = v;
      }
    return a;
  }

  double min_eigenvalue(const Eigen::VectorXd& x) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eval(x), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  PolyMatrix operator*(double s) const {
    PolyMatrix r(*this);
    for (auto& p : r.entries_) p = p * s;
    return r;
  }

  PolyMatrix operator+(const PolyMatrix& o) const {
    check_compatible(o);
    PolyMatrix r(*this);
    for (std::size_t k = 0; k < entries_.size(); ++k) r.entries_[k] += o.entries_[k];
    return r;
  }

  PolyMatrix operator-(const PolyMatrix& o) const {
    check_compatible(o);
    PolyMatrix r(*this);
    for (std::size_t k = 0; k < entries_.size(); ++k) r.entries_[k] -= o.entries_[k];
    return r;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= q_) throw std::out_of_range("PolyMatrix: index out of range");
    return static_cast<std::size_t>(i) * (2 * q_ - i - 1) / 2 + j;
  }

  void check_compatible(const PolyMatrix& o) const {
    if (n_ != o.n_ || q_ != o.q_)
      throw std::invalid_argument("PolyMatrix: incompatible shapes");
  }

  int n_, q_;
  std::vector<Polynomial> entries_;
};

// Kronecker product of symmetric polynomial matrices.
inline PolyMatrix pm_kron(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.n_vars() != b.n_vars())
    throw std::invalid_argument("pm_kron: variable count mismatch");
  int qa = a.size(), qb = b.size();
  PolyMatrix r(a.n_vars(), qa * qb);
  for (int i1 = 0; i1 < qa; ++i1)
    for (int i2 = 0; i2 < qb; ++i2) {
      int i = i1 * qb + i2;
      for (int j1 = 0; j1 < qa; ++j1)
        for (int j2 = 0; j2 < qb; ++j2) {
          int j = j1 * qb + j2;
          if (j < i) continue;
          r.set(i, j, a(i1, j1) * b(i2, j2));
        }
    }
  return r;
}

inline PolyMatrix pm_kron_power(const PolyMatrix& a, int k) {
  if (k < 1) throw std::invalid_argument("pm_kron_power: power must be >= 1");
  PolyMatrix r = a;
  for (int i = 1; i < k; ++i) r = pm_kron(r, a);
  return r;
}

// <A, M(x)> entrywise: sum_ij A_ij * M_ij(x), as a polynomial.
inline Polynomial trace_inner(const Eigen::MatrixXd& a, const PolyMatrix& m) {
  if (a.rows() != m.size() || a.cols() != m.size())
    throw std::invalid_argument("trace_inner: shape mismatch");
  Polynomial r(m.n_vars());
  for (int i = 0; i < m.size(); ++i) {
    r += a(i, i) * m(i, i);
    for (int j = i + 1; j < m.size(); ++j) r += (a(i, j) + a(j, i)) * m(i, j);
  }
  return r;
}

// diag(G, I - G): the dilation used for matrices of degree > 1.  Feasibility
// of the dilated matrix encodes 0 <= G <= I.
inline PolyMatrix dilate(const PolyMatrix& g) {
  int q = g.size();
  PolyMatrix r(g.n_vars(), 2 * q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      r.set(i, j, g(i, j));
      Polynomial top = -1.0 * g(i, j);
      if (i == j) top += Polynomial::constant(g.n_vars(), 1.0);
      r.set(q + i, q + j, top);
    }
  return r;
}

// Numeric Kronecker product (dense).
inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

// Symbolic evaluation of a word w over an alphabet of polynomial matrices:
// letters[w[0]] (x) letters[w[1]] (x) ... as a PolyMatrix.
inline PolyMatrix word_eval(const std::vector<PolyMatrix>& letters,
                            const std::vector<int>& word) {
  if (word.empty()) throw std::invalid_argument("word_eval: empty word");
  PolyMatrix r = letters.at(word[0]);
  for (std::size_t k = 1; k < word.size(); ++k) r = pm_kron(r, letters.at(word[k]));
  return r;
}

}  // namespace pmirelax
