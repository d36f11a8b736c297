#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pmirelax/poly_matrix.hpp"
#include "pmirelax/problem.hpp"
#include "pmirelax/sparsity.hpp"

namespace pmirelax {

struct ConeTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One PSD multiplier slot.  The generator is scalar(x) * (x)_{i} factors[i](x),
// kept in factored form; evaluation never expands the Kronecker product
// symbolically.
struct ConeSlot {
  std::string id;
  int size = 1;
  Polynomial scalar;               // defaults to the constant 1
  std::vector<PolyMatrix> factors; // Kronecker factors, left to right
  int clique = -1;                 // owning clique for sparse cones

  int degree() const {
    int d = scalar.degree();
    if (d < 0) return -1;  // zero scalar: degenerate
    for (const auto& f : factors) {
      int fd = f.degree();
      d += fd < 0 ? 0 : fd;
    }
    return d;
  }

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(1, 1, 1.0);
    for (const auto& f : factors) m = kron(m, f.eval(x)).eval();
    return scalar.eval(x) * m;
  }

  PolyMatrix expand() const {
    PolyMatrix m = PolyMatrix::identity(scalar.n_vars(), 1);
    for (const auto& f : factors) m = pm_kron(m, f);
    PolyMatrix r(scalar.n_vars(), m.size());
    for (int i = 0; i < m.size(); ++i)
      for (int j = i; j < m.size(); ++j) r.set(i, j, scalar * m(i, j));
    return r;
  }
};

struct ConeSpec {
  int n = 0;
  int order = 0;
  std::string mode;
  std::vector<ConeSlot> slots;  // slots[0] is the constant (lambda0) slot
  std::vector<std::vector<int>> cliques;  // nonempty only for sparse cones

  int max_generator_degree() const {
    int d = 0;
    for (const auto& s : slots) d = std::max(d, s.degree());
    return d;
  }

  std::int64_t total_psd_dim() const {
    std::int64_t t = 0;
    for (const auto& s : slots) t += static_cast<std::int64_t>(s.size) * (s.size + 1) / 2;
    return t;
  }

  std::uint64_t structure_hash() const {
    std::uint64_t h = fnv1a64(mode.data(), mode.size());
    h = fnv1a64(&n, sizeof n, h);
    h = fnv1a64(&order, sizeof order, h);
    for (const auto& s : slots) {
      h = fnv1a64(s.id.data(), s.id.size(), h);
      h = fnv1a64(&s.size, sizeof s.size, h);
    }
    return h;
  }
};

inline constexpr int kDefaultMaxSlot = 4096;
inline constexpr long kDefaultMaxWords = 1000000;

namespace detail {

inline ConeSlot lambda0_slot(int n) {
  ConeSlot s;
  s.id = "const";
  s.size = 1;
  s.scalar = Polynomial::constant(n, 1.0);
  return s;
}

inline void check_slot_cap(long size, int cap, const std::string& mode) {
  if (size > cap)
    throw ConeTooLarge("slot size " + std::to_string(size) + " exceeds cap " +
                       std::to_string(cap) +
                       (mode == "dense" ? "; use block/sparse form or lower m"
                                        : "; lower m or raise --max-block-size"));
}

}  // namespace detail

// Kronecker-power cone of a single matrix: slots G^{(x)k}, k = 1..m, after
// dilation to diag(G, I-G) when entries exceed degree 1.
inline ConeSpec build_dense(const PolyMatrix& g, int m, int max_slot = kDefaultMaxSlot) {
  if (m < 1) throw std::invalid_argument("build_dense: order must be >= 1");
  PolyMatrix base = g.degree() > 1 ? dilate(g) : g;
  ConeSpec spec;
  spec.n = g.n_vars();
  spec.order = m;
  spec.mode = "dense";
  spec.slots.push_back(detail::lambda0_slot(g.n_vars()));
  long size = 1;
  for (int k = 1; k <= m; ++k) {
    size *= base.size();
    detail::check_slot_cap(size, max_slot, "dense");
    ConeSlot s;
    s.id = "pow:" + std::to_string(k);
    s.size = static_cast<int>(size);
    s.scalar = Polynomial::constant(g.n_vars(), 1.0);
    s.factors.assign(k, base);
    spec.slots.push_back(std::move(s));
  }
  return spec;
}

// Word decomposition of the Kronecker-power cone for block-diagonal G:
// one slot per word over the block alphabet (blocks and their complements
// I-G_i in the dilated case).  Yields the same optimal value as the dense
// cone on the merged matrix, at exponentially smaller block sizes.
inline ConeSpec build_block(const std::vector<PolyMatrix>& blocks, int n, int m,
                            int max_slot = kDefaultMaxSlot,
                            long max_words = kDefaultMaxWords) {
  if (m < 1) throw std::invalid_argument("build_block: order must be >= 1");
  if (blocks.empty()) throw std::invalid_argument("build_block: no blocks");
  bool nonlinear = false;
  for (const auto& b : blocks)
    if (b.degree() > 1) nonlinear = true;

  std::vector<PolyMatrix> letters;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (nonlinear) {
      PolyMatrix d = dilate(blocks[i]);
      PolyMatrix top(n, blocks[i].size()), bot(n, blocks[i].size());
      for (int a = 0; a < blocks[i].size(); ++a)
        for (int c = a; c < blocks[i].size(); ++c) {
          top.set(a, c, d(a, c));
          bot.set(a, c, d(blocks[i].size() + a, blocks[i].size() + c));
        }
      letters.push_back(std::move(top));
      names.push_back("G" + std::to_string(i + 1));
      letters.push_back(std::move(bot));
      names.push_back("C" + std::to_string(i + 1));  // complement I - G_i
    } else {
      letters.push_back(blocks[i]);
      names.push_back("G" + std::to_string(i + 1));
    }
  }

  const int t = static_cast<int>(letters.size());
  long words = 0;
  ConeSpec spec;
  spec.n = n;
  spec.order = m;
  spec.mode = "block";
  spec.slots.push_back(detail::lambda0_slot(n));

  // Length-first, then lexicographic on letter indices.
  std::vector<int> w;
  auto emit = [&](const std::vector<int>& word) {
    if (++words > max_words)
      throw ConeTooLarge("build_block: word count exceeds cap " + std::to_string(max_words));
    long size = 1;
    for (int l : word) size *= letters[l].size();
    detail::check_slot_cap(size, max_slot, "block");
    ConeSlot s;
    s.id = "word:";
    for (std::size_t k = 0; k < word.size(); ++k)
      s.id += (k ? "." : "") + names[word[k]];
    s.size = static_cast<int>(size);
    s.scalar = Polynomial::constant(n, 1.0);
    for (int l : word) s.factors.push_back(letters[l]);
    spec.slots.push_back(std::move(s));
  };
  std::function<void(int)> rec = [&](int remaining) {
    if (remaining == 0) {
      emit(w);
      return;
    }
    for (int l = 0; l < t; ++l) {
      w.push_back(l);
      rec(remaining - 1);
      w.pop_back();
    }
  };
  for (int len = 1; len <= m; ++len) rec(len);
  return spec;
}

// Mixed scalar/matrix cone: with scalar constraints g_1..g_{t-1} and one
// matrix block G, one slot per multi-index gamma != 0, |gamma| <= m, with
// generator g^gamma_scalars * G^{(x)gamma_t}.  Linear entries only.
inline ConeSpec build_scalar_mixed(const std::vector<PolyMatrix>& blocks, int n, int m,
                                   int max_slot = kDefaultMaxSlot) {
  if (m < 1) throw std::invalid_argument("build_scalar_mixed: order must be >= 1");
  std::vector<Polynomial> scalars;
  const PolyMatrix* matrix = nullptr;
  for (const auto& b : blocks) {
    if (b.degree() > 1)
      throw std::invalid_argument("build_scalar_mixed: entries must be linear");
    if (b.size() == 1) {
      scalars.push_back(b(0, 0));
    } else {
      if (matrix) throw std::invalid_argument("build_scalar_mixed: exactly one matrix block expected");
      matrix = &b;
    }
  }
  if (!matrix)
    throw std::invalid_argument("build_scalar_mixed: exactly one matrix block expected");
  const int t = static_cast<int>(scalars.size()) + 1;

  ConeSpec spec;
  spec.n = n;
  spec.order = m;
  spec.mode = "mixed";
  spec.slots.push_back(detail::lambda0_slot(n));

  // gamma enumerated by total degree, then lexicographically (earlier index
  // takes the larger exponent first), matching the monomial basis order.
  for (int deg = 1; deg <= m; ++deg) {
    std::vector<int> gamma(t, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == t - 1) {
        gamma[pos] = remaining;
        long size = 1;
        for (int k = 0; k < remaining; ++k) size *= matrix->size();
        detail::check_slot_cap(size, max_slot, "mixed");
        ConeSlot s;
        s.id = "gamma:";
        for (int i = 0; i < t; ++i) s.id += (i ? "," : "") + std::to_string(gamma[i]);
        s.size = static_cast<int>(size);
        s.scalar = Polynomial::constant(n, 1.0);
        for (std::size_t i = 0; i < scalars.size(); ++i)
          for (int k = 0; k < gamma[i]; ++k) s.scalar = s.scalar * scalars[i];
        s.factors.assign(gamma[t - 1], *matrix);
        spec.slots.push_back(std::move(s));
        gamma[pos] = 0;
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        gamma[pos] = k;
        rec(pos + 1, remaining - k);
      }
      gamma[pos] = 0;
    };
    rec(0, deg);
  }
  return spec;
}

// Correlative-sparsity cone: a dense cone per clique on that clique's merged
// (and, if needed, dilated) block, sharing one global constant slot.
inline ConeSpec build_sparse(const PmiProblem& p, const SparsityPattern& sp, int m,
                             int max_slot = kDefaultMaxSlot) {
  if (m < 1) throw std::invalid_argument("build_sparse: order must be >= 1");
  if (!sp.rip.ok)
    throw std::invalid_argument(
        "build_sparse: cliques lack the running intersection property: " + sp.rip.witness);
  ConeSpec spec;
  spec.n = p.n;
  spec.order = m;
  spec.mode = "sparse";
  spec.cliques = sp.cliques;
  spec.slots.push_back(detail::lambda0_slot(p.n));
  for (std::size_t c = 0; c < sp.cliques.size(); ++c) {
    if (sp.clique_blocks[c].empty()) continue;
    std::vector<PolyMatrix> bl;
    for (int b : sp.clique_blocks[c]) bl.push_back(p.blocks[b]);
    PolyMatrix merged = merge_blocks(bl, p.n);
    PolyMatrix base = merged.degree() > 1 ? dilate(merged) : merged;
    long size = 1;
    for (int k = 1; k <= m; ++k) {
      size *= base.size();
      detail::check_slot_cap(size, max_slot, "sparse");
      ConeSlot s;
      s.id = "clq" + std::to_string(c) + ":pow:" + std::to_string(k);
      s.size = static_cast<int>(size);
      s.scalar = Polynomial::constant(p.n, 1.0);
      s.factors.assign(k, base);
      s.clique = static_cast<int>(c);
      spec.slots.push_back(std::move(s));
    }
  }
  return spec;
}

}  // namespace pmirelax
