#pragma once

// Sparse SDPA (.dat-s) export of a GjmProgram, plus a small reader used for
// parse-back checks.
//
// The program is written in the equality form  max F0.Y  s.t.  Fi.Y = c_i, Y >= 0.
// Each complex d x d block becomes a real symmetric 2d x 2d block through
// [[Re, -Im], [Im, Re]]; one constraint per (affine equality, Hermitian
// coordinate). In slack form every block is shifted, X_j = Y_j + t*1 with
// t = t+ - t-, the pair (t+, t-) living in a trailing diagonal block, and the
// objective is t.

#include "gjm/gjm_sdp.hpp"

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace gjm {

struct SdpaEntry {
  int matno = 0;
  int blkno = 0;
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct SdpaProblem {
  int m = 0;
  std::vector<int> block_sizes;  // negative: diagonal block
  std::vector<double> c;
  std::vector<SdpaEntry> entries;

  int nblocks() const { return static_cast<int>(block_sizes.size()); }
};

namespace detail {

inline std::string sdpa_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Upper-triangular nonzeros of the embedding of the k-th coordinate matrix, times scale.
inline void push_embedded(std::vector<SdpaEntry>& out, int matno, int blkno, const CplxMat& e, double scale) {
  const RealMat r = real_embedding(e);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = i; j < r.cols(); ++j) {
      if (r(i, j) != 0.0) {
        out.push_back({matno, blkno, static_cast<int>(i) + 1, static_cast<int>(j) + 1, scale * r(i, j)});
      }
    }
  }
}

}  // namespace detail

inline SdpaProblem to_sdpa(const GjmProgram& p, bool slack_form) {
  const int d = p.dim;
  const std::size_t q = herm_coord_count(d);
  std::vector<CplxMat> basis;
  std::vector<double> id_coords(q);
  herm_to_coords(CplxMat::Identity(d, d), id_coords.data());
  for (std::size_t k = 0; k < q; ++k) {
    std::vector<double> e(q, 0.0);
    e[k] = 1.0;
    basis.push_back(coords_to_herm(e.data(), d));
  }

  SdpaProblem out;
  out.block_sizes.assign(p.num_blocks(), 2 * d);
  const int slack_blk = static_cast<int>(p.num_blocks()) + 1;
  if (slack_form) {
    out.block_sizes.push_back(-2);
    out.entries.push_back({0, slack_blk, 1, 1, 1.0});
    out.entries.push_back({0, slack_blk, 2, 2, -1.0});
  }
  std::vector<double> rhs(q);
  int row = 0;
  for (const auto& con : p.constraints) {
    herm_to_coords(con.rhs.mat(), rhs.data());
    for (std::size_t k = 0; k < q; ++k) {
      ++row;
      out.c.push_back(rhs[k]);
      double shift = 0.0;
      for (const auto& [idx, coeff] : con.terms) {
        // tr(E_k X) = 1/2 tr(emb(E_k) emb(X))
        detail::push_embedded(out.entries, row, static_cast<int>(idx) + 1, basis[k], 0.5 * coeff);
        shift += coeff * id_coords[k];
      }
      if (slack_form && shift != 0.0) {
        out.entries.push_back({row, slack_blk, 1, 1, shift});
        out.entries.push_back({row, slack_blk, 2, 2, -shift});
      }
    }
  }
  out.m = row;
  return out;
}

inline std::string write_sdpa(const SdpaProblem& s, const std::string& comment = "gjm feasibility program") {
  std::ostringstream os;
  os << "\"" << comment << "\n";
  os << s.m << " =mDIM\n";
  os << s.nblocks() << " =nBLOCK\n";
  for (std::size_t i = 0; i < s.block_sizes.size(); ++i) {
    os << (i ? " " : "") << s.block_sizes[i];
  }
  os << " =bLOCKsTRUCT\n";
  for (std::size_t i = 0; i < s.c.size(); ++i) {
    os << (i ? " " : "") << detail::sdpa_num(s.c[i]);
  }
  os << "\n";
  for (const auto& e : s.entries) {
    os << e.matno << " " << e.blkno << " " << e.i << " " << e.j << " " << detail::sdpa_num(e.value) << "\n";
  }
  return os.str();
}

inline std::string export_sdpa(const GjmProgram& p, bool slack_form) {
  std::ostringstream comment;
  comment << "gjm program dim=" << p.dim << " settings=" << p.n << " blocks=" << p.num_blocks()
          << (slack_form ? " slack" : " feasibility");
  return write_sdpa(to_sdpa(p, slack_form), comment.str());
}

class SdpaParseError : public Error {
 public:
  using Error::Error;
};

// Reads the sparse format: comment lines start with '"' or '*'; separators
// may be blanks, commas or braces; trailing text after the header numbers is ignored.
inline SdpaProblem read_sdpa(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '"' || line[0] == '*') continue;
    for (char& ch : line) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  std::size_t li = 0;
  auto next_line = [&]() -> std::istringstream {
    if (li >= lines.size()) throw SdpaParseError("read_sdpa: unexpected end of input");
    return std::istringstream(lines[li++]);
  };
  SdpaProblem s;
  int nblocks = 0;
  if (!(next_line() >> s.m) || s.m < 0) throw SdpaParseError("read_sdpa: bad constraint count");
  if (!(next_line() >> nblocks) || nblocks <= 0) throw SdpaParseError("read_sdpa: bad block count");
  {
    auto is = next_line();
    for (int b = 0; b < nblocks; ++b) {
      int sz = 0;
      if (!(is >> sz) || sz == 0) throw SdpaParseError("read_sdpa: bad block structure");
      s.block_sizes.push_back(sz);
    }
  }
  // The objective vector may wrap across lines.
  while (static_cast<int>(s.c.size()) < s.m) {
    auto is = next_line();
    double v = 0.0;
    while (static_cast<int>(s.c.size()) < s.m && is >> v) s.c.push_back(v);
  }
  while (li < lines.size()) {
    auto is = next_line();
    SdpaEntry e;
    if (!(is >> e.matno >> e.blkno >> e.i >> e.j >> e.value)) throw SdpaParseError("read_sdpa: bad entry line");
    if (e.matno < 0 || e.matno > s.m || e.blkno < 1 || e.blkno > nblocks) {
      throw SdpaParseError("read_sdpa: entry index out of range");
    }
    const int sz = std::abs(s.block_sizes[static_cast<std::size_t>(e.blkno - 1)]);
    if (e.i < 1 || e.j < 1 || e.i > sz || e.j > sz || (s.block_sizes[static_cast<std::size_t>(e.blkno - 1)] < 0 && e.i != e.j)) {
      throw SdpaParseError("read_sdpa: entry outside its block");
    }
    s.entries.push_back(e);
  }
  return s;
}

inline SdpaProblem read_sdpa(const std::string& text) {
  std::istringstream is(text);
  return read_sdpa(is);
}

// Fi.Y for every i = 0..m, with Y given block by block as dense symmetric matrices.
inline std::vector<double> sdpa_inner_products(const SdpaProblem& s, const std::vector<RealMat>& y) {
  std::vector<double> out(static_cast<std::size_t>(s.m) + 1, 0.0);
  for (const auto& e : s.entries) {
    const auto& blk = y.at(static_cast<std::size_t>(e.blkno - 1));
    const double v = blk(e.i - 1, e.j - 1);
    out[static_cast<std::size_t>(e.matno)] += (e.i == e.j ? 1.0 : 2.0) * e.value * v;
  }
  return out;
}

// Embeds a solved block assignment as an SDPA Y (with Y_j = X_j - t*1 in slack form).
inline std::vector<RealMat> sdpa_point(const GjmProgram& p, std::span<const HermMat> blocks, bool slack_form,
                                       double t = 0.0) {
  std::vector<RealMat> y;
  const double shift = slack_form ? t : 0.0;
  for (std::size_t j = 0; j < p.num_blocks(); ++j) {
    y.push_back(real_embedding(blocks[j].mat() - shift * CplxMat::Identity(p.dim, p.dim)));
  }
  if (slack_form) {
    RealMat diag = RealMat::Zero(2, 2);
    diag(0, 0) = std::max(t, 0.0);
    diag(1, 1) = std::max(-t, 0.0);
    y.push_back(diag);
  }
  return y;
}

}  // namespace gjm
