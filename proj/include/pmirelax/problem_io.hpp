#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmirelax/problem.hpp"

namespace pmirelax {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError(where + ": unknown key \"" + it.key() + "\"");
}

inline Polynomial parse_poly(const nlohmann::json& j, int n, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": polynomial must be an array of terms");
  std::vector<std::pair<Exponents, double>> terms;
  terms.reserve(j.size());
  for (std::size_t t = 0; t < j.size(); ++t) {
    const auto& jt = j[t];
    std::string wt = where + ".term[" + std::to_string(t) + "]";
    if (!jt.is_object()) throw ParseError(wt + ": term must be an object");
    reject_unknown_keys(jt, {"c", "e"}, wt);
    if (!jt.contains("c") || !jt["c"].is_number())
      throw ParseError(wt + ": missing numeric coefficient \"c\"");
    if (!jt.contains("e") || !jt["e"].is_array())
      throw ParseError(wt + ": missing exponent array \"e\"");
    if (static_cast<int>(jt["e"].size()) != n)
      throw ParseError(wt + ": exponent array must have n=" + std::to_string(n) + " entries");
    Exponents e(n);
    for (int i = 0; i < n; ++i) {
      if (!jt["e"][i].is_number_integer())
        throw ParseError(wt + ": exponents must be integers");
      int v = jt["e"][i].get<int>();
      if (v < 0) throw ParseError(wt + ": exponents must be nonnegative");
      e[i] = v;
    }
    terms.emplace_back(std::move(e), jt["c"].get<double>());
  }
  return Polynomial::from_terms(n, terms);
}

inline nlohmann::json poly_to_json(const Polynomial& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (int t = 0; t < p.n_terms(); ++t) {
    nlohmann::json jt;
    jt["c"] = p.coefficients()[t];
    jt["e"] = p.monomials()[t];
    arr.push_back(std::move(jt));
  }
  return arr;
}

inline PolyMatrix parse_block(const nlohmann::json& j, int n, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": block must be an object");
  reject_unknown_keys(j, {"q", "entries"}, where);
  if (!j.contains("q") || !j["q"].is_number_integer())
    throw ParseError(where + ": missing integer size \"q\"");
  int q = j["q"].get<int>();
  if (q <= 0) throw ParseError(where + ": block size must be positive");
  if (!j.contains("entries") || !j["entries"].is_array())
    throw ParseError(where + ": missing entry array \"entries\"");
  PolyMatrix m(n, q);
  std::set<std::pair<int, int>> seen;
  for (std::size_t t = 0; t < j["entries"].size(); ++t) {
    const auto& je = j["entries"][t];
    std::string we = where + ".entries[" + std::to_string(t) + "]";
    if (!je.is_object()) throw ParseError(we + ": entry must be an object");
    reject_unknown_keys(je, {"i", "j", "p"}, we);
    if (!je.contains("i") || !je["i"].is_number_integer() || !je.contains("j") ||
        !je["j"].is_number_integer())
      throw ParseError(we + ": missing integer indices \"i\", \"j\"");
    int i = je["i"].get<int>(), jj = je["j"].get<int>();
    if (i < 1 || jj < 1 || i > q || jj > q)
      throw ParseError(we + ": indices must be in 1.." + std::to_string(q));
    if (i > jj) throw ParseError(we + ": only upper-triangle entries allowed (i <= j)");
    if (!seen.insert({i, jj}).second) throw ParseError(we + ": duplicate entry");
    if (!je.contains("p")) throw ParseError(we + ": missing polynomial \"p\"");
    m.set(i - 1, jj - 1, parse_poly(je["p"], n, we + ".p"));
  }
  return m;
}

inline nlohmann::json block_to_json(const PolyMatrix& m) {
  nlohmann::json jb;
  jb["q"] = m.size();
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < m.size(); ++i)
    for (int j = i; j < m.size(); ++j) {
      if (m(i, j).is_zero()) continue;
      nlohmann::json je;
      je["i"] = i + 1;
      je["j"] = j + 1;
      je["p"] = poly_to_json(m(i, j));
      entries.push_back(std::move(je));
    }
  jb["entries"] = std::move(entries);
  return jb;
}

}  // namespace detail

inline PmiProblem problem_from_json(const nlohmann::json& j) {
  using detail::reject_unknown_keys;
  if (!j.is_object()) throw ParseError("problem: top level must be an object");
  reject_unknown_keys(j, {"n", "objective", "objectives", "blocks", "box", "known_optimum"},
                      "problem");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("problem: missing integer \"n\"");
  PmiProblem p;
  p.n = j["n"].get<int>();
  if (p.n <= 0) throw ParseError("problem: n must be positive");
  if (!j.contains("objective")) throw ParseError("problem: missing \"objective\"");
  p.objective = detail::parse_poly(j["objective"], p.n, "problem.objective");
  if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty())
    throw ParseError("problem: missing nonempty \"blocks\" array");
  for (std::size_t b = 0; b < j["blocks"].size(); ++b)
    p.blocks.push_back(
        detail::parse_block(j["blocks"][b], p.n, "problem.blocks[" + std::to_string(b) + "]"));
  if (j.contains("box")) {
    if (!j["box"].is_array() || static_cast<int>(j["box"].size()) != p.n)
      throw ParseError("problem.box: must be an array of n [lo,hi] pairs");
    for (int i = 0; i < p.n; ++i) {
      const auto& r = j["box"][i];
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
        throw ParseError("problem.box[" + std::to_string(i) + "]: expected [lo, hi]");
      double lo = r[0].get<double>(), hi = r[1].get<double>();
      if (!(lo < hi))
        throw ParseError("problem.box[" + std::to_string(i) + "]: lo must be < hi");
      p.box.emplace_back(lo, hi);
    }
  }
  if (j.contains("known_optimum")) {
    if (!j["known_optimum"].is_number())
      throw ParseError("problem.known_optimum: must be a number");
    p.known_optimum = j["known_optimum"].get<double>();
  }
  if (j.contains("objectives")) {
    if (!j["objectives"].is_array())
      throw ParseError("problem.objectives: must be an array of polynomials");
    for (std::size_t t = 0; t < j["objectives"].size(); ++t)
      p.alt_objectives.push_back(detail::parse_poly(
          j["objectives"][t], p.n, "problem.objectives[" + std::to_string(t) + "]"));
  }
  p.validate();
  return p;
}

inline nlohmann::json problem_to_json(const PmiProblem& p) {
  p.validate();
  nlohmann::json j;
  j["n"] = p.n;
  j["objective"] = detail::poly_to_json(p.objective);
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : p.blocks) blocks.push_back(detail::block_to_json(b));
  j["blocks"] = std::move(blocks);
  if (!p.box.empty()) {
    nlohmann::json box = nlohmann::json::array();
    for (const auto& [lo, hi] : p.box) box.push_back({lo, hi});
    j["box"] = std::move(box);
  }
  if (p.known_optimum) j["known_optimum"] = *p.known_optimum;
  if (!p.alt_objectives.empty()) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : p.alt_objectives) objs.push_back(detail::poly_to_json(o));
    j["objectives"] = std::move(objs);
  }
  return j;
}

inline PmiProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return problem_from_json(j);
}

inline void save_problem(const PmiProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write problem file: " + path);
  out << problem_to_json(p).dump(2) << "\n";
}

// Stable content hash of the canonical serialization; recorded in run logs
// and certificates to tie results to their inputs.
inline std::uint64_t problem_hash(const PmiProblem& p) {
  std::string s = problem_to_json(p).dump();
  return fnv1a64(s.data(), s.size());
}

}  // namespace pmirelax
