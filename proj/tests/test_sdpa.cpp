#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace gjm;
using namespace gjm::testing;

namespace {

GjmProgram one_block_program() {
  const Assembly a({Povm({Label::of(1)}, {HermMat::identity(1)})});
  return build_program(a, GSpec{{{Label::of(1)}}});
}

GjmProgram zx_full_jm(double eta) {
  const auto l = apply_loss(qubit_assembly({BlochVec{0, 0, 1}, BlochVec{1, 0, 0}}), eta);
  return build_program(l, gspec_case(Case::a, l));
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Sdpa, OneBlockHeader) {
  const auto p = one_block_program();
  ASSERT_EQ(p.num_blocks(), 1u);
  const auto lines = lines_of(export_sdpa(p, false));
  ASSERT_GE(lines.size(), 5u);
  EXPECT_EQ(lines[0][0], '"');
  EXPECT_EQ(lines[1], "1 =mDIM");
  EXPECT_EQ(lines[2], "1 =nBLOCK");
  EXPECT_EQ(lines[3], "2 =bLOCKsTRUCT");
  EXPECT_EQ(lines[4], "1");
}

TEST(Sdpa, ParseBackFullJm) {
  const auto p = zx_full_jm(0.5);
  const auto s = to_sdpa(p, false);
  const auto back = read_sdpa(write_sdpa(s));
  EXPECT_EQ(back.m, s.m);
  EXPECT_EQ(back.block_sizes, s.block_sizes);
  ASSERT_EQ(back.c.size(), s.c.size());
  for (std::size_t i = 0; i < s.c.size(); ++i) EXPECT_EQ(back.c[i], s.c[i]);
  ASSERT_EQ(back.entries.size(), s.entries.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].matno, s.entries[i].matno);
    EXPECT_EQ(back.entries[i].value, s.entries[i].value);
  }
}

TEST(Sdpa, WitnessSatisfiesExportedConstraints) {
  for (bool slack : {false, true}) {
    const auto p = zx_full_jm(0.4);
    const auto r = solve(p);
    ASSERT_TRUE(feasible_or_marginal(r));
    const auto s = read_sdpa(export_sdpa(p, slack));
    const auto y = sdpa_point(p, r.witness_blocks, slack, r.slack);
    const auto ip = sdpa_inner_products(s, y);
    for (int i = 1; i <= s.m; ++i) EXPECT_NEAR(ip[static_cast<std::size_t>(i)], s.c[static_cast<std::size_t>(i - 1)], 1e-7);
    if (slack) {
      EXPECT_NEAR(ip[0], r.slack, 1e-12);
      EXPECT_EQ(s.block_sizes.back(), -2);
    } else {
      EXPECT_EQ(ip[0], 0.0);
    }
  }
}

TEST(Sdpa, DeterministicOutput) { EXPECT_EQ(export_sdpa(zx_full_jm(0.3), true), export_sdpa(zx_full_jm(0.3), true)); }

TEST(Sdpa, EmbeddedBlocksAreSymmetricUpperTriangle) {
  const auto s = to_sdpa(zx_full_jm(0.5), false);
  for (const auto& e : s.entries) {
    EXPECT_LE(e.i, e.j);
    EXPECT_GE(e.blkno, 1);
    EXPECT_LE(e.blkno, s.nblocks());
  }
}

TEST(Sdpa, ReaderAcceptsWrappedObjectiveAndPunctuation) {
  const std::string text =
      "* comment\n\"another\n2 =mDIM\n1 =nBLOCK\n{2}\n1.0,\n2.0\n0 1 1 1 1.0\n1 1 1 2 0.5\n2 1 2 2 -1\n";
  const auto s = read_sdpa(text);
  EXPECT_EQ(s.m, 2);
  EXPECT_EQ(s.block_sizes, std::vector<int>{2});
  EXPECT_EQ(s.c, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s.entries.size(), 3u);
}

TEST(Sdpa, ReaderRejectsBadInput) {
  EXPECT_THROW(read_sdpa(std::string("1 =mDIM\n")), SdpaParseError);
  EXPECT_THROW(read_sdpa(std::string("1\n1\n2\n1\n1 2 1 1 1.0\n")), SdpaParseError);
  EXPECT_THROW(read_sdpa(std::string("1\n1\n2\n1\n1 1 3 1 1.0\n")), SdpaParseError);
  EXPECT_THROW(read_sdpa(std::string("1\n1\n-2\n1\n1 1 1 2 1.0\n")), SdpaParseError);
  EXPECT_THROW(read_sdpa(std::string("1\n1\n2\n1\n1 1 1\n")), SdpaParseError);
}
