#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gjm;
using namespace gjm::testing;

namespace {

// Grid over gamma in [0,1] at step 1e-5, then golden-section refinement around the best cell.
double brute_force_g(double nu, double t) {
  double best = -1.0;
  double arg = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double g = i * 1e-5;
    const double v = g_objective(nu, t, g);
    if (v > best) {
      best = v;
      arg = g;
    }
  }
  double lo = std::max(0.0, arg - 1e-5);
  double hi = std::min(1.0, arg + 1e-5);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (g_objective(nu, t, a) < g_objective(nu, t, b)) {
      lo = a;
    } else {
      hi = b;
    }
  }
  return std::max(best, g_objective(nu, t, 0.5 * (lo + hi)));
}

}  // namespace

TEST(GenericBound, TableRows) {
  EXPECT_DOUBLE_EQ(generic_bound(Case::a, 3, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(generic_bound(Case::b, 3, 2), 0.5);
  EXPECT_DOUBLE_EQ(generic_bound(Case::c, 2, 3), 0.5);
  EXPECT_DOUBLE_EQ(generic_bound(Case::c, 4, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(generic_bound(Case::d, 5, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(generic_bound(Case::d, 2, 3), 3.0 / 5.0);
  EXPECT_THROW(generic_bound(Case::a, 0, 2), DomainError);
}

TEST(DoubleCone, KnownConfigurations) {
  const std::vector<BlochVec> zx{BlochVec{0, 0, 1}, BlochVec{1, 0, 0}};
  EXPECT_NEAR(double_cone_angle(zx).theta, kPi / 2, 1e-12);
  const std::vector<BlochVec> zz{BlochVec{0, 0, 1}, BlochVec{0, 0, 1}};
  EXPECT_NEAR(double_cone_angle(zz).theta, 0.0, 1e-12);
  const std::vector<BlochVec> xyz{BlochVec{1, 0, 0}, BlochVec{0, 1, 0}, BlochVec{0, 0, 1}};
  const auto r = double_cone_angle(xyz);
  EXPECT_NEAR(r.theta, 2.0 * std::acos(1.0 / std::sqrt(3.0)), 1e-6);
  EXPECT_TRUE(r.certified);
  const std::vector<BlochVec> one{BlochVec{0, 1, 0}};
  EXPECT_EQ(double_cone_angle(one).theta, 0.0);
}

TEST(DoubleCone, HalfAngleIsMaxPerAxisAngle) {
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<BlochVec> dirs{random_unit(), random_unit(), random_unit(), random_unit()};
    const auto r = double_cone_angle(dirs);
    double mx = 0.0;
    for (double a : r.per_axis_angles) mx = std::max(mx, a);
    EXPECT_NEAR(r.theta / 2.0, mx, 1e-9);
    EXPECT_GE(r.theta, 0.0);
    EXPECT_LE(r.theta, kPi);
  }
}

TEST(DoubleCone, PairClosedFormMatchesNumeric) {
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<BlochVec> dirs{random_unit(), random_unit()};
    EXPECT_NEAR(double_cone_angle(dirs).theta, double_cone_angle_numeric(dirs).theta, 1e-7);
  }
}

TEST(DoubleCone, AntipodalAxesIdentified) {
  const std::vector<BlochVec> dirs{BlochVec{0, 0, 1}, BlochVec{0, 0, -1}, xz_axis(0.3)};
  EXPECT_NEAR(double_cone_angle(dirs).theta, 0.3, 1e-7);
}

TEST(DoubleCone, ZeroVectorRejected) {
  const std::vector<BlochVec> dirs{BlochVec{0, 0, 0}};
  EXPECT_THROW(double_cone_angle(dirs), DomainError);
}

TEST(CaseDAxisAngle, Examples) {
  EXPECT_NEAR(case_d_axis_angle(pair_axes(kPi / 2)), kPi / 2, 1e-12);
  for (double th : {0.1, 0.7, 1.5}) EXPECT_NEAR(case_d_axis_angle(pair_axes(th)), th, 1e-12);
  const std::vector<BlochVec> anti{BlochVec{0, 0, 1}, BlochVec{0, 0, -1}};
  EXPECT_NEAR(case_d_axis_angle(anti), 0.0, 1e-12);
  const std::vector<BlochVec> single{BlochVec{0, 0, 1}};
  EXPECT_EQ(case_d_axis_angle(single), 0.0);
}

TEST(QubitBounds, CaseCValues) {
  EXPECT_NEAR(qubit_bound_case_c(kPi / 2), 2.0 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(qubit_bound_case_c(0.0), 1.0, 1e-15);
  const double t = 2.0 * std::acos(1.0 / std::sqrt(3.0));
  EXPECT_NEAR(qubit_bound_case_c(t), 1.0 / (1.0 + std::sin(std::acos(1.0 / std::sqrt(3.0)))), 1e-12);
  EXPECT_THROW(qubit_bound_case_c(-0.1), DomainError);
  EXPECT_THROW(qubit_bound_case_c(3.2), DomainError);
}

TEST(QubitBounds, CaseDValues) {
  EXPECT_NEAR(qubit_bound_case_d(kPi / 2, CaseDVariant::n2), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(qubit_bound_case_d(kPi / 2, CaseDVariant::general), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(qubit_bound_case_d(kPi / 6, CaseDVariant::n2), 0.8, 1e-12);
  EXPECT_THROW(qubit_bound_case_d(2.0, CaseDVariant::n2), DomainError);
}

TEST(QubitBounds, GapIdentity) {
  for (int i = 0; i <= 20; ++i) {
    const double th = kPi / 2 * i / 20.0;
    const double s = std::sin(th);
    const double direct = qubit_bound_case_d(th, CaseDVariant::n2) - qubit_bound_case_d(th, CaseDVariant::general);
    EXPECT_NEAR(case_d_bound_gap(th), direct, 1e-14);
    EXPECT_NEAR(direct, s * (1 - s) / ((2 + s) * (1 + 2 * s)), 1e-14);
    EXPECT_GE(direct, -1e-15);
  }
}

TEST(QubitBounds, StrictlyAboveHalfAndMonotone) {
  double prev_c = 2.0;
  double prev_n2 = 2.0;
  double prev_gen = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double th = kPi * i / 200.0;
    const double c = qubit_bound_case_c(th);
    EXPECT_GT(c, 0.5);
    EXPECT_LE(c, prev_c + 1e-15);
    prev_c = c;
    if (th <= kPi / 2) {
      const double n2 = qubit_bound_case_d(th, CaseDVariant::n2);
      const double gen = qubit_bound_case_d(th, CaseDVariant::general);
      EXPECT_LE(n2, prev_n2 + 1e-15);
      EXPECT_LE(gen, prev_gen + 1e-15);
      prev_n2 = n2;
      prev_gen = gen;
    }
  }
}

TEST(CaseDParams, HalfPiBothVariants) {
  const auto n2 = case_d_params(kPi / 2, CaseDVariant::n2);
  ASSERT_TRUE(n2.x_star.has_value());
  EXPECT_NEAR(*n2.x_star, 0.0, 1e-12);
  EXPECT_NEAR(n2.nu_star, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(n2.gamma.at(0), 0.0, 1e-12);
  EXPECT_NEAR(F(n2.nu_star, std::cos(*n2.x_star)), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(G(n2.nu_star, std::cos(kPi / 2 - *n2.x_star)), 2.0 / 3.0, 1e-12);
  const auto gen = case_d_params(kPi / 2, CaseDVariant::general);
  EXPECT_FALSE(gen.x_star.has_value());
  EXPECT_NEAR(gen.nu_star, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(gen.bound, 2.0 / 3.0, 1e-12);
}

TEST(CaseDParams, ZeroAngleLimit) {
  const auto p = case_d_params(0.0, CaseDVariant::n2);
  EXPECT_NEAR(*p.x_star, 0.0, 1e-12);
  EXPECT_NEAR(p.nu_star, 1.0, 1e-12);
  EXPECT_NEAR(p.bound, 1.0, 1e-12);
}

TEST(CaseDParams, AdmissibleAndBounded) {
  for (int i = 0; i <= 20; ++i) {
    const double th = kPi / 2 * i / 20.0;
    for (auto v : {CaseDVariant::n2, CaseDVariant::general}) {
      const auto p = case_d_params(th, v);
      EXPECT_TRUE(p.admissible) << th;
      EXPECT_GE(p.nu_star, 0.0);
      EXPECT_LE(p.nu_star, 1.0);
      for (double g : p.gamma) {
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, 1.0);
      }
    }
  }
}

TEST(FG, Examples) {
  for (double t : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(F(0.0, t), 0.5);
  EXPECT_DOUBLE_EQ(G(0.4, 1.0), 1.0);
  EXPECT_NEAR(G(0.5, std::cos(kPi / 4)), 1.0 - 0.5 * std::sin(kPi / 4), 1e-15);
  EXPECT_NEAR(brute_force_g(0.5, std::cos(kPi / 4)), G(0.5, std::cos(kPi / 4)), 1e-9);
  EXPECT_THROW(F(-0.1, 0.5), DomainError);
  EXPECT_THROW(G(0.5, 1.5), DomainError);
}

TEST(FG, ContinuousAtBranchPoint) {
  for (double t : {0.1, 0.5, 0.9}) {
    const double nu = 1.0 / (t + std::sqrt(1.0 - t * t));
    EXPECT_NEAR(1.0 - nu * std::sqrt(1.0 - t * t), F(nu, t), 1e-12);
  }
}

TEST(FG, GMatchesBruteForce) {
  for (int rep = 0; rep < 100; ++rep) {
    const double nu = uniform(0.0, 0.99);
    const double t = uniform(0.0, 1.0);
    EXPECT_NEAR(G(nu, t), brute_force_g(nu, t), 1e-7) << nu << " " << t;
  }
}

TEST(CaseDPairOptimum, ClosedFormsAttainTheSufficientBound) {
  for (int i = 0; i <= 20; ++i) {
    const double th = kPi / 2 * i / 20.0;
    const auto p = case_d_params(th, CaseDVariant::n2);
    const BlochVec m = xz_axis(*p.x_star);
    EXPECT_NEAR(case_d_sufficient_bound(m, p.nu_star, pair_axes(th)), qubit_bound_case_d(th, CaseDVariant::n2), 1e-9);
    const auto g = case_d_params(th, CaseDVariant::general);
    EXPECT_NEAR(case_d_sufficient_bound(BlochVec{0, 0, 1}, g.nu_star, cone_axes(th)),
                qubit_bound_case_d(th, CaseDVariant::general), 1e-9);
  }
}

TEST(CaseDPairOptimum, ReducedUpperBoundOnGrid) {
  for (int i = 1; i <= 20; ++i) {
    const double th = kPi / 2 * i / 20.0;
    const double cap = 2.0 / (2.0 + std::sin(th));
    double best = 0.0;
    for (int a = 0; a <= 200; ++a) {
      const double x = th * a / 200.0;
      for (int b = 0; b < 400; ++b) {
        const double nu = b / 400.0;
        best = std::max(best, std::min(F(nu, std::cos(x)), 1.0 - nu * std::sin(th - x)));
      }
    }
    EXPECT_LE(best, cap + 1e-9);
  }
}

TEST(CaseDVariantNames, Parse) {
  EXPECT_EQ(parse_case_d_variant("n2"), CaseDVariant::n2);
  EXPECT_EQ(parse_case_d_variant("n2-optimal"), CaseDVariant::n2);
  EXPECT_EQ(parse_case_d_variant("cone-axis"), CaseDVariant::general);
  EXPECT_THROW(parse_case_d_variant("bogus"), ValidationError);
}
