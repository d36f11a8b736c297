#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmirelax/sdp.hpp"

namespace pmirelax {

// SDPA sparse format (.dat-s).  The problem is written as the format's dual
// side: maximize <F0, Y> subject to <Fk, Y> = c_k with Y psd, where Y stacks
// the slot matrices plus, when a free scalar is present, a trailing 2x1
// diagonal block holding its positive and negative parts.  F0 carries the
// negated objective, so the file's dual optimum equals the negated min-form
// value; for relaxations (C = 0, c_free = -1) that is the bound itself.
//
// A sidecar .meta.json preserves what the format cannot: slot identifiers,
// which block is the free-variable pair, and the applied row scaling.

namespace detail {

inline void write_entry(std::FILE* f, int mat, int blk, int i, int j, double v) {
  if (v == 0.0) return;
  std::fprintf(f, "%d %d %d %d %.17g\n", mat, blk, i, j, v);
}

}  // namespace detail

inline void write_sdpa(const SdpProblem& p, const std::string& path,
                       const std::string& comment = {}) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_sdpa: cannot open " + path);
  const int nslots = p.n_slots();
  const int cdim = p.n_constraints();
  const int nblocks = nslots + (p.has_free ? 1 : 0);

  if (!comment.empty()) std::fprintf(f, "\"%s\n", comment.c_str());
  std::fprintf(f, "%d\n%d\n", cdim, nblocks);
  for (int s = 0; s < nslots; ++s) std::fprintf(f, "%d ", p.slot_sizes[s]);
  if (p.has_free) std::fprintf(f, "-2");
  std::fprintf(f, "\n");
  for (int c = 0; c < cdim; ++c) std::fprintf(f, "%.17g ", p.b[c]);
  std::fprintf(f, "\n");

  for (int s = 0; s < nslots; ++s) {
    if (s >= static_cast<int>(p.C_obj.size()) || p.C_obj[s].size() == 0) continue;
    int q = p.slot_sizes[s];
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j)
        detail::write_entry(f, 0, s + 1, i + 1, j + 1,
                            -0.5 * (p.C_obj[s](i, j) + p.C_obj[s](j, i)));
  }
  if (p.has_free) {
    detail::write_entry(f, 0, nblocks, 1, 1, -p.c_free);
    detail::write_entry(f, 0, nblocks, 2, 2, p.c_free);
  }
  for (int c = 0; c < cdim; ++c) {
    for (int s = 0; s < nslots; ++s) {
      int q = p.slot_sizes[s];
      auto A = p.constraint_matrix(c, s);
      for (int i = 0; i < q; ++i)
        for (int j = i; j < q; ++j) detail::write_entry(f, c + 1, s + 1, i + 1, j + 1, A(i, j));
    }
    if (p.has_free) {
      detail::write_entry(f, c + 1, nblocks, 1, 1, p.a[c]);
      detail::write_entry(f, c + 1, nblocks, 2, 2, -p.a[c]);
    }
  }
  std::fclose(f);

  nlohmann::json meta;
  meta["format"] = "sdpa-sparse";
  meta["slot_ids"] = p.slot_ids;
  meta["slot_sizes"] = p.slot_sizes;
  meta["has_free"] = p.has_free;
  if (p.has_free) meta["free_block"] = nblocks;
  meta["c_free"] = p.c_free;
  meta["row_scale"] = p.row_scale;
  meta["objective_sign"] = "file dual max = -(min-form objective)";
  std::ofstream mf(path + ".meta.json");
  if (!mf) throw std::runtime_error("write_sdpa: cannot open " + path + ".meta.json");
  mf << meta.dump(1) << "\n";
}

inline SdpProblem read_sdpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_sdpa: cannot open " + path);
  std::string line;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      std::size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos) continue;
      if (line[i] == '"' || line[i] == '*') continue;  // comment
      out = line;
      return true;
    }
    return false;
  };

  auto parse_ints = [](const std::string& s) {
    std::vector<long> v;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      // Tolerate separators some writers use in the block-size line.
      std::string clean;
      for (char ch : tok)
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '+')
          clean += ch;
      if (!clean.empty() && clean != "-" && clean != "+") v.push_back(std::stol(clean));
    }
    return v;
  };

  std::string s;
  if (!next_data_line(s)) throw std::runtime_error("read_sdpa: missing constraint count");
  const int cdim = static_cast<int>(parse_ints(s).at(0));
  if (!next_data_line(s)) throw std::runtime_error("read_sdpa: missing block count");
  const int nblocks = static_cast<int>(parse_ints(s).at(0));
  if (!next_data_line(s)) throw std::runtime_error("read_sdpa: missing block sizes");
  std::vector<long> bsizes = parse_ints(s);
  if (static_cast<int>(bsizes.size()) != nblocks)
    throw std::runtime_error("read_sdpa: block size line disagrees with block count");
  if (!next_data_line(s)) throw std::runtime_error("read_sdpa: missing right-hand side");
  std::vector<double> rhs;
  {
    std::istringstream is(s);
    double v;
    while (is >> v) rhs.push_back(v);
  }
  if (static_cast<int>(rhs.size()) != cdim)
    throw std::runtime_error("read_sdpa: right-hand side length disagrees");

  bool has_free = false;
  int free_block = -1;
  nlohmann::json meta;
  {
    std::ifstream mf(path + ".meta.json");
    if (mf) {
      mf >> meta;
      has_free = meta.value("has_free", false);
      if (has_free) free_block = meta.value("free_block", nblocks) - 1;
    }
  }

  SdpProblem p;
  p.has_free = has_free;
  p.c_free = meta.is_object() ? meta.value("c_free", 0.0) : 0.0;
  std::vector<int> slot_of_block(nblocks, -1);
  for (int bl = 0; bl < nblocks; ++bl) {
    if (bl == free_block) continue;
    long q = std::abs(bsizes[bl]);  // diagonal blocks are stored dense here
    slot_of_block[bl] = p.n_slots();
    p.slot_sizes.push_back(static_cast<int>(q));
    p.slot_ids.push_back("block" + std::to_string(bl + 1));
    p.V.emplace_back(Eigen::MatrixXd::Zero(q * q, cdim));
    p.C_obj.emplace_back(Eigen::MatrixXd::Zero(q, q));
  }
  if (meta.is_object() && meta.contains("slot_ids") &&
      meta["slot_ids"].size() == p.slot_ids.size())
    p.slot_ids = meta["slot_ids"].get<std::vector<std::string>>();
  p.a = Eigen::VectorXd::Zero(cdim);
  p.b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), cdim);
  p.row_scale.assign(cdim, 1.0);
  if (meta.is_object() && meta.contains("row_scale") &&
      meta["row_scale"].size() == static_cast<std::size_t>(cdim))
    p.row_scale = meta["row_scale"].get<std::vector<double>>();

  int mat, blk, i, j;
  double v;
  while (in >> mat >> blk >> i >> j >> v) {
    if (mat < 0 || mat > cdim || blk < 1 || blk > nblocks)
      throw std::runtime_error("read_sdpa: entry indices out of range");
    int bl = blk - 1;
    if (bl == free_block) {
      if (i != j) throw std::runtime_error("read_sdpa: free pair block must be diagonal");
      double sign = i == 1 ? 1.0 : -1.0;
      if (mat == 0)
        p.c_free = -sign * v;
      else
        p.a[mat - 1] = sign * v;
      continue;
    }
    int sl = slot_of_block[bl];
    long q = p.slot_sizes[sl];
    if (i < 1 || j < i || j > q) throw std::runtime_error("read_sdpa: entry indices out of range");
    if (mat == 0) {
      p.C_obj[sl](i - 1, j - 1) = -v;
      p.C_obj[sl](j - 1, i - 1) = -v;
    } else {
      p.V[sl]((j - 1) * q + (i - 1), mat - 1) = v;
      p.V[sl]((i - 1) * q + (j - 1), mat - 1) = v;
    }
  }
  return p;
}

}  // namespace pmirelax
