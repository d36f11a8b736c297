#pragma once

#include <string>
#include <vector>

#include "pmirelax/cone.hpp"

namespace pmirelax {

// Outer product [x]_d [x]_d^T of the degree-d monomial vector; the slot whose
// multiplier is a Gram matrix of a sum of squares.
inline PolyMatrix moment_matrix(int n, int d) {
  MonomialBasis basis(n, d);
  PolyMatrix m(n, basis.size());
  for (int i = 0; i < basis.size(); ++i)
    for (int j = i; j < basis.size(); ++j) {
      Exponents e = basis[i];
      for (std::size_t k = 0; k < e.size(); ++k) e[k] += basis[j][k];
      m.set(i, j, Polynomial::from_terms(n, {{e, 1.0}}));
    }
  return m;
}

// Weighted-sums-of-squares cone: f - r = sigma_0 + <Sigma, G> with sigma_0 a
// degree-2m SOS and Sigma a Gram-matrix multiplier of the highest degree that
// keeps the product within 2m.  Blocks are merged into one G by default; the
// per-block variant gives each block its own multiplier.
inline ConeSpec build_sos(const PmiProblem& p, int m, bool per_block = false,
                          int max_slot = kDefaultMaxSlot) {
  if (m < 1) throw std::invalid_argument("build_sos: order must be >= 1");
  if (p.blocks.empty()) throw std::invalid_argument("build_sos: no blocks");
  ConeSpec spec;
  spec.n = p.n;
  spec.order = m;
  spec.mode = "sos";

  ConeSlot s0;
  s0.id = "sos:S0";
  s0.scalar = Polynomial::constant(p.n, 1.0);
  s0.factors = {moment_matrix(p.n, m)};
  s0.size = s0.factors[0].size();
  detail::check_slot_cap(s0.size, max_slot, "sos");
  spec.slots.push_back(std::move(s0));

  std::vector<PolyMatrix> gs;
  if (per_block)
    gs = p.blocks;
  else
    gs = {merge_blocks(p.blocks, p.n)};
  for (std::size_t i = 0; i < gs.size(); ++i) {
    int dg = std::max(gs[i].degree(), 0);
    if (2 * m < dg)
      throw std::invalid_argument("build_sos: order too small for block degree " +
                                  std::to_string(dg));
    int d = (2 * m - dg) / 2;
    ConeSlot s;
    s.id = per_block ? "sos:S" + std::to_string(i + 1) : "sos:S";
    s.scalar = Polynomial::constant(p.n, 1.0);
    s.factors = {moment_matrix(p.n, d), gs[i]};
    s.size = s.factors[0].size() * s.factors[1].size();
    detail::check_slot_cap(s.size, max_slot, "sos");
    spec.slots.push_back(std::move(s));
  }
  return spec;
}

// Cheap fixed-degree variant: both Gram matrices run over the degree-1 basis,
// so sigma_0 has degree 2 and the matrix multiplier degree 2 + deg(G),
// independent of any order parameter.
inline ConeSpec build_sos_tilde1(const PmiProblem& p, int max_slot = kDefaultMaxSlot) {
  if (p.blocks.empty()) throw std::invalid_argument("build_sos_tilde1: no blocks");
  ConeSpec spec;
  spec.n = p.n;
  spec.order = 1;
  spec.mode = "sos-tilde";

  PolyMatrix m1 = moment_matrix(p.n, 1);
  ConeSlot s0;
  s0.id = "tilde:S0";
  s0.scalar = Polynomial::constant(p.n, 1.0);
  s0.factors = {m1};
  s0.size = m1.size();
  detail::check_slot_cap(s0.size, max_slot, "sos");
  spec.slots.push_back(std::move(s0));

  PolyMatrix g = merge_blocks(p.blocks, p.n);
  ConeSlot s;
  s.id = "tilde:S";
  s.scalar = Polynomial::constant(p.n, 1.0);
  s.factors = {m1, g};
  s.size = m1.size() * g.size();
  detail::check_slot_cap(s.size, max_slot, "sos");
  spec.slots.push_back(std::move(s));
  return spec;
}

}  // namespace pmirelax
