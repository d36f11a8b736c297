#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "pmirelax/problem.hpp"

namespace pmirelax {

struct RipResult {
  bool ok = false;
  std::vector<int> order;  // clique visit order satisfying the property
  std::string witness;     // on failure: first offending clique + intersection
};

namespace detail {

inline bool rip_order_valid(const std::vector<std::vector<int>>& cliques,
                            const std::vector<int>& order, std::string* witness) {
  std::set<int> seen;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& c = cliques[order[k]];
    if (k > 0) {
      std::vector<int> inter;
      for (int v : c)
        if (seen.count(v)) inter.push_back(v);
      bool contained = inter.empty();
      for (std::size_t j = 0; j < k && !contained; ++j) {
        const auto& prev = cliques[order[j]];
        contained = std::includes(prev.begin(), prev.end(), inter.begin(), inter.end());
      }
      if (!contained) {
        if (witness) {
          std::string s = "clique " + std::to_string(order[k]) + " intersects {";
          for (std::size_t t = 0; t < inter.size(); ++t)
            s += (t ? "," : "") + std::to_string(inter[t] + 1);
          s += "} with its predecessors, not contained in any single one";
          *witness = s;
        }
        return false;
      }
    }
    seen.insert(c.begin(), c.end());
  }
  return true;
}

inline bool rip_dfs(const std::vector<std::vector<int>>& cliques, std::vector<int>& order,
                    std::vector<bool>& used, std::set<int>& seen, long& budget) {
  if (order.size() == cliques.size()) return true;
  if (--budget < 0) return false;
  // Prefer cliques overlapping the already-covered variables the most.
  std::vector<std::pair<int, int>> cand;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    if (used[i]) continue;
    int ov = 0;
    for (int v : cliques[i]) ov += seen.count(v) ? 1 : 0;
    cand.push_back({-ov, static_cast<int>(i)});
  }
  std::sort(cand.begin(), cand.end());
  for (auto [neg_ov, i] : cand) {
    std::vector<int> inter;
    for (int v : cliques[i])
      if (seen.count(v)) inter.push_back(v);
    bool contained = order.empty() || inter.empty();
    for (int j : order) {
      if (contained) break;
      contained = std::includes(cliques[j].begin(), cliques[j].end(), inter.begin(), inter.end());
    }
    if (!contained) continue;
    std::vector<int> added;
    for (int v : cliques[i])
      if (seen.insert(v).second) added.push_back(v);
    used[i] = true;
    order.push_back(i);
    if (rip_dfs(cliques, order, used, seen, budget)) return true;
    order.pop_back();
    used[i] = false;
    for (int v : added) seen.erase(v);
  }
  return false;
}

}  // namespace detail

// Running intersection property: some ordering where each clique's overlap
// with everything before it sits inside a single earlier clique.  Exhaustive
// search up to 8 cliques, best-first backtracking beyond.
inline RipResult check_rip(const std::vector<std::vector<int>>& cliques) {
  RipResult r;
  if (cliques.empty()) {
    r.witness = "no cliques";
    return r;
  }
  std::vector<int> natural(cliques.size());
  for (std::size_t i = 0; i < cliques.size(); ++i) natural[i] = static_cast<int>(i);
  std::string witness;
  if (detail::rip_order_valid(cliques, natural, &witness)) {
    r.ok = true;
    r.order = natural;
    return r;
  }
  r.witness = witness;  // natural-order failure, kept as the reported witness
  if (cliques.size() <= 8) {
    std::vector<int> perm = natural;
    while (std::next_permutation(perm.begin(), perm.end())) {
      if (detail::rip_order_valid(cliques, perm, nullptr)) {
        r.ok = true;
        r.order = perm;
        r.witness.clear();
        return r;
      }
    }
    return r;
  }
  std::vector<int> order;
  std::vector<bool> used(cliques.size(), false);
  std::set<int> seen;
  long budget = 1000000;
  if (detail::rip_dfs(cliques, order, used, seen, budget)) {
    r.ok = true;
    r.order = order;
    r.witness.clear();
  } else if (budget < 0) {
    r.witness += "; backtracking budget exhausted";
  }
  return r;
}

struct SparsityPattern {
  std::vector<std::vector<int>> cliques;        // sorted variable indices
  std::vector<std::vector<int>> clique_blocks;  // block indices per clique
  std::vector<Polynomial> objective_split;      // per-clique objective parts
  std::vector<int> lone_variables;              // in no block and not in f
  RipResult rip;
};

// Variable support of each block defines its clique; identical supports
// merge.  Every objective monomial must fit inside one clique.
inline SparsityPattern extract_cliques(const PmiProblem& p) {
  p.validate();
  SparsityPattern sp;
  std::vector<std::vector<int>> supports(p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    std::set<int> vars;
    const auto& m = p.blocks[b];
    for (int i = 0; i < m.size(); ++i)
      for (int j = i; j < m.size(); ++j)
        for (const auto& e : m(i, j).monomials())
          for (int v = 0; v < p.n; ++v)
            if (e[v] > 0) vars.insert(v);
    supports[b].assign(vars.begin(), vars.end());
  }
  // Only maximal supports become cliques: a block whose variables sit inside
  // a larger block's support joins the larger clique, so per-clique merging
  // sees every block living on the clique's variables.
  auto contains = [](const std::vector<int>& big, const std::vector<int>& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
  };
  std::vector<std::vector<int>> distinct;
  for (const auto& s : supports)
    if (!s.empty() && std::find(distinct.begin(), distinct.end(), s) == distinct.end())
      distinct.push_back(s);
  for (const auto& s : distinct) {
    bool maximal = true;
    for (const auto& t : distinct)
      if (s != t && contains(t, s)) { maximal = false; break; }
    if (maximal) {
      sp.cliques.push_back(s);
      sp.clique_blocks.push_back({});
    }
  }
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (supports[b].empty()) continue;  // constant blocks attach later
    for (std::size_t c = 0; c < sp.cliques.size(); ++c)
      if (contains(sp.cliques[c], supports[b])) {
        sp.clique_blocks[c].push_back(static_cast<int>(b));
        break;
      }
  }
  if (sp.cliques.empty()) {
    // Degenerate: all blocks constant.  One clique over the objective's vars.
    std::set<int> vars;
    for (const auto& e : p.objective.monomials())
      for (int v = 0; v < p.n; ++v)
        if (e[v] > 0) vars.insert(v);
    if (vars.empty()) vars.insert(0);
    sp.cliques.push_back(std::vector<int>(vars.begin(), vars.end()));
    sp.clique_blocks.push_back({});
  }
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    if (supports[b].empty()) sp.clique_blocks[0].push_back(static_cast<int>(b));

  // Objective terms: first clique containing the support.
  std::vector<std::vector<std::pair<Exponents, double>>> parts(sp.cliques.size());
  for (int t = 0; t < p.objective.n_terms(); ++t) {
    const Exponents& e = p.objective.monomials()[t];
    int home = -1;
    for (std::size_t c = 0; c < sp.cliques.size() && home < 0; ++c) {
      bool inside = true;
      for (int v = 0; v < p.n && inside; ++v)
        if (e[v] > 0 && !std::binary_search(sp.cliques[c].begin(), sp.cliques[c].end(), v))
          inside = false;
      if (inside) home = static_cast<int>(c);
    }
    if (home < 0) {
      std::string mono;
      for (int v = 0; v < p.n; ++v)
        if (e[v] > 0) mono += "x" + std::to_string(v + 1) + "^" + std::to_string(e[v]);
      throw std::runtime_error("extract_cliques: objective term " + mono +
                               " not covered by any clique");
    }
    parts[home].push_back({e, p.objective.coefficients()[t]});
  }
  for (std::size_t c = 0; c < sp.cliques.size(); ++c)
    sp.objective_split.push_back(Polynomial::from_terms(p.n, parts[c]));

  std::set<int> covered;
  for (const auto& c : sp.cliques) covered.insert(c.begin(), c.end());
  for (int v = 0; v < p.n; ++v)
    if (!covered.count(v)) sp.lone_variables.push_back(v);

  sp.rip = check_rip(sp.cliques);
  return sp;
}

}  // namespace pmirelax
