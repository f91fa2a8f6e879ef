#include <gjm/postsel.hpp>

#include <gtest/gtest.h>

using namespace gjm;

namespace {

struct Frozen {
  int d;
  double eta;
  double h_ae, h_aep, i_ab_ae;
};

// Independent enumeration of the joint table, frozen.
const Frozen kFrozen[] = {
    {2, 2.0 / 3.0, 0.650022421648354, 0.333333333333333, 0.316689088315021},
    {3, 0.5, 1.251629167387823, 0.792481250360578, 0.459147917027245},
    {4, 0.9, 0.503183731680584, 0.200000000000001, 0.303183731680584},
};

}  // namespace

TEST(AbeTable, TwoThirdsCells) {
  const auto t = abe_dist(2, 2.0 / 3.0).table;
  EXPECT_DOUBLE_EQ(t.at(0, 0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.at(1, 1, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.at(0, 1, 0), 0.0);
  EXPECT_DOUBLE_EQ(t.at(0, 0, 1), 0.0);
  for (int a = 0; a < 2; ++a) {
    for (int e = 0; e < 2; ++e) EXPECT_NEAR(t.at(a, t.no_click(), e), 1.0 / 12.0, 1e-15);
  }
  double s = 0.0;
  for (double p : t.p) s += p;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(AbeTable, Endpoints) {
  const auto one = entropies(abe_dist(3, 1.0));
  EXPECT_NEAR(one.h_A_given_E, 0.0, 1e-15);
  EXPECT_NEAR(one.i_AB_minus_AE, 0.0, 1e-12);
  const auto zero = entropies(abe_dist(3, 0.0));
  EXPECT_NEAR(zero.h_A_given_E, std::log2(3.0), 1e-12);
  EXPECT_NEAR(zero.h_A_given_Eprime, std::log2(3.0), 1e-12);
  EXPECT_NEAR(zero.i_AB_minus_AE, 0.0, 1e-12);
}

TEST(AbeTable, DomainChecks) {
  EXPECT_THROW(abe_dist(1, 0.5), ValidationError);
  EXPECT_THROW(abe_dist(2, 1.5), ValidationError);
  EXPECT_THROW(entropies_closed_form(2, -0.1), ValidationError);
}

TEST(Entropies, FrozenValues) {
  for (const auto& f : kFrozen) {
    const auto r = entropies(abe_dist(f.d, f.eta));
    EXPECT_NEAR(r.h_A_given_E, f.h_ae, 1e-12) << f.d;
    EXPECT_NEAR(r.h_A_given_Eprime, f.h_aep, 1e-12) << f.d;
    EXPECT_NEAR(r.i_AB_minus_AE, f.i_ab_ae, 1e-12) << f.d;
    EXPECT_NEAR(r.i_BA_minus_BE, 0.0, 1e-12) << f.d;
  }
}

TEST(Entropies, ClosedFormMatchesTableOnGrid) {
  for (int d = 2; d <= 6; ++d) {
    for (int i = 0; i <= 20; ++i) {
      const double eta = i / 20.0;
      const auto a = entropies_closed_form(d, eta);
      const auto b = entropies(abe_dist(d, eta));
      EXPECT_NEAR(a.h_A_given_E, b.h_A_given_E, 1e-12);
      EXPECT_NEAR(a.h_A_given_Eprime, b.h_A_given_Eprime, 1e-12);
      EXPECT_NEAR(a.i_AB_minus_AE, b.i_AB_minus_AE, 1e-12);
      EXPECT_NEAR(a.i_BA_minus_BE, b.i_BA_minus_BE, 1e-12);
    }
  }
}

TEST(Entropies, RevealingTheClickLowersUncertainty) {
  for (int d = 2; d <= 6; ++d) {
    for (int i = 1; i < 20; ++i) {
      const auto r = entropies_closed_form(d, i / 20.0);
      EXPECT_LT(r.h_A_given_Eprime, r.h_A_given_E);
      EXPECT_GT(r.i_AB_minus_AE, 0.0);
    }
  }
}

TEST(Entropies, ScaledByRounds) {
  const auto r = entropies_closed_form(2, 0.5).scaled(1000);
  EXPECT_NEAR(r.h_A_given_Eprime, 500.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.n_rounds, 1000.0);
}

TEST(Exact, ReverseRateVanishesForRationalEta) {
  for (int d = 2; d <= 5; ++d) {
    for (const Rational eta : {Rational(0), Rational(1, 3), Rational(2, 3), Rational(7, 10), Rational(1)}) {
      const auto t = abe_dist_exact(d, eta);
      EXPECT_TRUE(exact_reverse_rate_zero(t));
      EXPECT_EQ(exact_total(t), Rational(1));
    }
  }
}

TEST(Exact, DetectsAsymmetricTable) {
  auto t = abe_dist_exact(2, Rational(1, 2));
  t.at(0, 0, 0) -= Rational(1, 8);
  t.at(0, 0, 1) += Rational(1, 8);
  EXPECT_FALSE(exact_reverse_rate_zero(t));
}

TEST(MonteCarlo, AgreesWithinThreeSigma) {
  const auto dist = abe_dist(2, 2.0 / 3.0);
  const auto exact = entropies(dist);
  const auto mc = monte_carlo(dist, 1000000, 20240601);
  EXPECT_EQ(mc.samples, 1000000u);
  EXPECT_LE(std::abs(mc.estimate.h_A_given_E - exact.h_A_given_E), 3 * mc.std_error.h_A_given_E);
  EXPECT_LE(std::abs(mc.estimate.h_A_given_Eprime - exact.h_A_given_Eprime), 3 * mc.std_error.h_A_given_Eprime);
  EXPECT_LE(std::abs(mc.estimate.i_AB_minus_AE - exact.i_AB_minus_AE), 3 * mc.std_error.i_AB_minus_AE);
  EXPECT_GT(mc.std_error.h_A_given_E, 0.0);
}

TEST(MonteCarlo, ReproducibleAcrossJobCounts) {
  const auto dist = abe_dist(3, 0.4);
  const auto a = monte_carlo(dist, 20000, 7, 1);
  const auto b = monte_carlo(dist, 20000, 7, 4);
  const auto c = monte_carlo(dist, 20000, 8, 1);
  EXPECT_EQ(a.estimate.h_A_given_E, b.estimate.h_A_given_E);
  EXPECT_EQ(a.estimate.i_AB_minus_AE, b.estimate.i_AB_minus_AE);
  EXPECT_NE(a.estimate.h_A_given_E, c.estimate.h_A_given_E);
  EXPECT_THROW(monte_carlo(dist, 0, 1), ValidationError);
}

TEST(Parity, SingleErasureFilled) {
  const auto r = parity_reconcile(parse_bits("00101"), parse_erased("001∅1"), 5);
  EXPECT_EQ(format_erased(r.bob_corrected), "00101");
  EXPECT_EQ(r.leaked_parities, std::vector<int>{0});
  EXPECT_EQ(r.filled, 1u);
}

TEST(Parity, NoErasureLeavesBobAlone) {
  const auto r = parity_reconcile(parse_bits("1101"), parse_erased("1101"), 2);
  EXPECT_EQ(format_erased(r.bob_corrected), "1101");
  EXPECT_EQ(r.leaked_parities, (std::vector<int>{0, 1}));
  EXPECT_EQ(r.filled, 0u);
}

TEST(Parity, TwoErasuresInOneBlockStayErased) {
  const auto r = parity_reconcile(parse_bits("0110"), parse_erased("?x10"), 4);
  EXPECT_EQ(format_erased(r.bob_corrected), "∅∅10");
  EXPECT_EQ(r.filled, 0u);
}

TEST(Parity, ShortLastBlock) {
  const auto r = parity_reconcile(parse_bits("10110"), parse_erased("1011x"), 2);
  EXPECT_EQ(format_erased(r.bob_corrected), "10110");
  EXPECT_EQ(r.leaked_parities.size(), 3u);
}

TEST(Parity, InputErrors) {
  EXPECT_THROW(parity_reconcile(parse_bits("01"), parse_erased("011"), 2), ValidationError);
  EXPECT_THROW(parity_reconcile(parse_bits("01"), parse_erased("01"), 1), ValidationError);
  EXPECT_THROW(parse_bits("012"), ValidationError);
  EXPECT_THROW(parse_erased("0a"), ValidationError);
}
