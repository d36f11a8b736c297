#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pmirelax {

using Exponents = std::vector<int>;

inline int exponents_degree(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

// Graded lexicographic order: lower total degree first; within a degree,
// larger exponent on an earlier variable first, so bases read
// 1, x1, x2, ..., x1^2, x1*x2, ..., xn^2, ...
inline bool graded_lex_less(const Exponents& a, const Exponents& b) {
  int da = exponents_degree(a), db = exponents_degree(b);
  if (da != db) return da < db;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    return graded_lex_less(a, b);
  }
};

class Polynomial {
 public:
  Polynomial() : n_(0) {}
  explicit Polynomial(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("Polynomial: negative variable count");
  }

  static Polynomial constant(int n, double c) {
    Polynomial p(n);
    if (c != 0.0) {
      p.mons_.push_back(Exponents(n, 0));
      p.coeffs_.push_back(c);
    }
    return p;
  }

  static Polynomial variable(int n, int i) {
    if (i < 0 || i >= n) throw std::invalid_argument("Polynomial: variable index out of range");
    Polynomial p(n);
    Exponents e(n, 0);
    e[i] = 1;
    p.mons_.push_back(std::move(e));
    p.coeffs_.push_back(1.0);
    return p;
  }

  static Polynomial monomial(int n, Exponents e, double c) {
    if (static_cast<int>(e.size()) != n)
      throw std::invalid_argument("Polynomial: exponent tuple length != n");
    for (int k : e)
      if (k < 0) throw std::invalid_argument("Polynomial: negative exponent");
    Polynomial p(n);
    if (c != 0.0) {
      p.mons_.push_back(std::move(e));
      p.coeffs_.push_back(c);
    }
    return p;
  }

  static Polynomial from_terms(int n, const std::vector<std::pair<Exponents, double>>& terms) {
    std::map<Exponents, double, GradedLexLess> acc;
    for (const auto& [e, c] : terms) {
      if (static_cast<int>(e.size()) != n)
        throw std::invalid_argument("Polynomial: exponent tuple length != n");
      for (int k : e)
        if (k < 0) throw std::invalid_argument("Polynomial: negative exponent");
      acc[e] += c;
    }
    return from_map(n, acc);
  }

  int n_vars() const { return n_; }
  int n_terms() const { return static_cast<int>(mons_.size()); }
  bool is_zero() const { return mons_.empty(); }

  int degree() const {  // degree of 0 is -1 by convention
    int d = -1;
    for (const auto& m : mons_) d = std::max(d, exponents_degree(m));
    return d;
  }

  const std::vector<Exponents>& monomials() const { return mons_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double coefficient(const Exponents& e) const {
    auto it = std::lower_bound(mons_.begin(), mons_.end(), e, graded_lex_less);
    if (it == mons_.end() || *it != e) return 0.0;
    return coeffs_[static_cast<std::size_t>(it - mons_.begin())];
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  // Compensated (Kahan) summation over terms; monomials by repeated squaring
  // would not pay off at these degrees, plain powers are fine.
  double eval(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
    double sum = 0.0, comp = 0.0;
    for (std::size_t t = 0; t < mons_.size(); ++t) {
      double v = coeffs_[t];
      const Exponents& e = mons_[t];
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < e[i]; ++k) v *= x[i];
      double y = v - comp;
      double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    return sum;
  }

  Polynomial operator+(const Polynomial& o) const { return combined(o, 1.0); }
  Polynomial operator-(const Polynomial& o) const { return combined(o, -1.0); }

  Polynomial operator*(double s) const {
    Polynomial r(*this);
    for (double& c : r.coeffs_) c *= s;
    r.prune();
    return r;
  }

  Polynomial operator-() const { return *this * -1.0; }

  Polynomial operator*(const Polynomial& o) const {
    check_same_n(o);
    std::map<Exponents, double, GradedLexLess> acc;
    Exponents e(n_);
    for (std::size_t a = 0; a < mons_.size(); ++a)
      for (std::size_t b = 0; b < o.mons_.size(); ++b) {
        for (int i = 0; i < n_; ++i) e[i] = mons_[a][i] + o.mons_[b][i];
        acc[e] += coeffs_[a] * o.coeffs_[b];
      }
    return from_map(n_, acc);
  }

  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }

  Polynomial pow(int k) const {
    if (k < 0) throw std::invalid_argument("Polynomial::pow: negative power");
    Polynomial r = constant(n_, 1.0);
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  bool operator==(const Polynomial& o) const {
    return n_ == o.n_ && mons_ == o.mons_ && coeffs_ == o.coeffs_;
  }

  std::string to_string() const {
    if (mons_.empty()) return "0";
    std::string s;
    for (std::size_t t = 0; t < mons_.size(); ++t) {
      if (t) s += " + ";
      s += std::to_string(coeffs_[t]);
      for (int i = 0; i < n_; ++i) {
        if (mons_[t][i] > 0) {
          s += "*x" + std::to_string(i + 1);
          if (mons_[t][i] > 1) s += "^" + std::to_string(mons_[t][i]);
        }
      }
    }
    return s;
  }

  // Relative zero prune: drop terms below 1e-14 * max |coeff|.
  static constexpr double kPruneRel = 1e-14;

 private:
  static Polynomial from_map(int n, const std::map<Exponents, double, GradedLexLess>& acc) {
    Polynomial p(n);
    p.mons_.reserve(acc.size());
    p.coeffs_.reserve(acc.size());
    for (const auto& [e, c] : acc) {
      p.mons_.push_back(e);
      p.coeffs_.push_back(c);
    }
    p.prune();
    return p;
  }

  Polynomial combined(const Polynomial& o, double sgn) const {
    check_same_n(o);
    Polynomial r(n_);
    r.mons_.reserve(mons_.size() + o.mons_.size());
    r.coeffs_.reserve(mons_.size() + o.mons_.size());
    std::size_t a = 0, b = 0;
    while (a < mons_.size() || b < o.mons_.size()) {
      bool take_a;
      if (a == mons_.size()) take_a = false;
      else if (b == o.mons_.size()) take_a = true;
      else if (mons_[a] == o.mons_[b]) {
        double c = coeffs_[a] + sgn * o.coeffs_[b];
        r.mons_.push_back(mons_[a]);
        r.coeffs_.push_back(c);
        ++a; ++b;
        continue;
      } else take_a = graded_lex_less(mons_[a], o.mons_[b]);
      if (take_a) {
        r.mons_.push_back(mons_[a]);
        r.coeffs_.push_back(coeffs_[a]);
        ++a;
      } else {
        r.mons_.push_back(o.mons_[b]);
        r.coeffs_.push_back(sgn * o.coeffs_[b]);
        ++b;
      }
    }
    r.prune();
    return r;
  }

  void check_same_n(const Polynomial& o) const {
    if (n_ != o.n_) throw std::invalid_argument("Polynomial: mixed variable counts");
  }

  void prune() {
    double m = max_abs_coeff();
    double cut = m * kPruneRel;
    std::size_t w = 0;
    for (std::size_t t = 0; t < mons_.size(); ++t) {
      if (std::abs(coeffs_[t]) > cut && coeffs_[t] != 0.0) {
        if (w != t) { mons_[w] = std::move(mons_[t]); coeffs_[w] = coeffs_[t]; }
        ++w;
      }
    }
    mons_.resize(w);
    coeffs_.resize(w);
  }

  int n_;
  std::vector<Exponents> mons_;   // sorted graded-lex ascending
  std::vector<double> coeffs_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

// All monomials of degree <= max_degree in n variables, graded-lex order.
// Size C(n + d, n).
class MonomialBasis {
 public:
  MonomialBasis(int n, int max_degree) : n_(n), d_(max_degree) {
    if (n < 0 || max_degree < 0)
      throw std::invalid_argument("MonomialBasis: negative parameters");
    Exponents e(n, 0);
    for (int deg = 0; deg <= max_degree; ++deg) enumerate(e, 0, deg);
  }

  int n_vars() const { return n_; }
  int max_degree() const { return d_; }
  int size() const { return static_cast<int>(mons_.size()); }
  const std::vector<Exponents>& monomials() const { return mons_; }
  const Exponents& operator[](int i) const { return mons_[i]; }

  // Column vector of basis values at x, in basis order.
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("MonomialBasis::eval: dimension mismatch");
    Eigen::VectorXd v(size());
    for (int t = 0; t < size(); ++t) {
      double p = 1.0;
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < mons_[t][i]; ++k) p *= x[i];
      v[t] = p;
    }
    return v;
  }

 private:
  void enumerate(Exponents& e, int pos, int remaining) {
    if (pos == n_) {
      if (remaining == 0) mons_.push_back(e);
      return;
    }
    if (pos == n_ - 1) {
      e[pos] = remaining;
      mons_.push_back(e);
      e[pos] = 0;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[pos] = k;
      enumerate(e, pos + 1, remaining - k);
    }
    e[pos] = 0;
  }

  int n_, d_;
  std::vector<Exponents> mons_;
};

}  // namespace pmirelax
