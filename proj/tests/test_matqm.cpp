#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gjm;
using namespace gjm::testing;

TEST(IsPsd, IdentityAndNegativeDiagonal) {
  EXPECT_TRUE(is_psd(HermMat::identity(2), 1e-9));
  EXPECT_FALSE(is_psd(HermMat::diag({1.0, -0.5}), 1e-9));
}

TEST(IsPsd, BlochProjectorsHaveEigenvaluesZeroAndOne) {
  for (int i = 0; i < 20; ++i) {
    const auto p = bloch_projector(random_unit(), 1);
    const auto ev = eigenvalues(p);
    EXPECT_NEAR(ev(0), 0.0, 1e-12);
    EXPECT_NEAR(ev(1), 1.0, 1e-12);
    EXPECT_TRUE(is_psd(p, 1e-9));
  }
}

TEST(IsPsd, RejectsNonSquare) { EXPECT_THROW(is_psd(CplxMat::Zero(2, 3), 1e-9), ShapeError); }

TEST(HermMat, SymmetrizationIsExact) {
  for (int d = 1; d <= 6; ++d) {
    const HermMat h(random_matrix(d, d));
    EXPECT_EQ(max_abs(h.mat() - h.mat().adjoint()), 0.0);
  }
}

TEST(HermSqrt, DiagonalCases) {
  EXPECT_LE(max_abs_diff(herm_sqrt(HermMat::identity(2)), HermMat::identity(2)), 1e-14);
  EXPECT_LE(max_abs_diff(herm_sqrt(HermMat::diag({4.0, 9.0})), HermMat::diag({2.0, 3.0})), 1e-14);
}

TEST(HermSqrt, SquaresBackOnRandomPsd) {
  for (int d = 2; d <= 6; ++d) {
    for (int rep = 0; rep < 5; ++rep) {
      const HermMat m = random_psd(d, 1 + rep % d);
      const HermMat s = herm_sqrt(m);
      EXPECT_LE(max_abs(s.mat() * s.mat() - m.mat()), 1e-9 * std::max(1.0, max_abs(m.mat())));
      EXPECT_TRUE(is_psd(s, 1e-12));
    }
  }
}

TEST(HermSqrt, SqrtOfSquareIsIdentityOnPsd) {
  for (int d = 2; d <= 6; ++d) {
    const HermMat s = random_psd(d, d);
    const HermMat sq(s.mat() * s.mat());
    EXPECT_LE(max_abs_diff(herm_sqrt(sq), s), 1e-9 * std::max(1.0, max_abs(s.mat())));
  }
}

TEST(HermSqrt, RejectsNegativeEigenvalue) { EXPECT_THROW(herm_sqrt(HermMat::diag({1.0, -1e-6})), NotPsdError); }

TEST(PinvSqrt, DiagonalCases) {
  EXPECT_LE(max_abs_diff(pinv_sqrt(HermMat::identity(2)), HermMat::identity(2)), 1e-14);
  EXPECT_LE(max_abs_diff(pinv_sqrt(HermMat::diag({4.0, 0.0})), HermMat::diag({0.5, 0.0})), 1e-14);
}

TEST(PinvSqrt, ReproducesSupportProjector) {
  for (int d = 2; d <= 6; ++d) {
    for (int rank = 1; rank <= d; ++rank) {
      const HermMat m = random_psd(d, rank);
      const HermMat p = pinv_sqrt(m);
      const CplxMat pm = p.mat() * m.mat() * p.mat();
      const HermMat pi = support_projector(m);
      EXPECT_LE(max_abs(pm - pi.mat()), 1e-9);
      EXPECT_NEAR(pi.trace(), rank, 1e-9);
    }
  }
}

TEST(BlochProjector, KnownBases) {
  EXPECT_LE(max_abs_diff(bloch_projector({0, 0, 1}, 1), HermMat::diag({1.0, 0.0})), 1e-15);
  CplxMat h(2, 2);
  h << 0.5, 0.5, 0.5, 0.5;
  EXPECT_LE(max_abs_diff(bloch_projector({1, 0, 0}, 1), HermMat(h)), 1e-15);
}

TEST(BlochProjector, OrthogonalAndComplete) {
  for (int i = 0; i < 20; ++i) {
    const BlochVec r = random_unit();
    const auto p = bloch_projector(r, 1);
    const auto m = bloch_projector(r, -1);
    EXPECT_LE(max_abs(p.mat() * m.mat()), 1e-12);
    EXPECT_LE(max_abs_diff(p + m, HermMat::identity(2)), 1e-12);
  }
}

TEST(BlochProjector, RejectsNonUnit) { EXPECT_THROW(bloch_projector({0, 0, 2}, 1), ValidationError); }

TEST(RealEmbedding, PsdIffEmbeddingPsd) {
  for (int i = 0; i < 30; ++i) {
    const int d = 2 + i % 4;
    const HermMat h = random_hermitian(d);
    const double lo = min_eigenvalue(h);
    const HermMat shifted = h - (lo - (i % 2 ? 1e-3 : -1e-3)) * HermMat::identity(d);
    const RealMat e = real_embedding(shifted.mat());
    Eigen::SelfAdjointEigenSolver<RealMat> es(e);
    EXPECT_EQ(is_psd(shifted, 0.0), es.eigenvalues().minCoeff() >= 0.0);
  }
}

TEST(HermCoords, RoundTrip) {
  for (int d = 1; d <= 5; ++d) {
    const HermMat h = random_hermitian(d);
    std::vector<double> c(herm_coord_count(d));
    herm_to_coords(h.mat(), c.data());
    EXPECT_LE(max_abs(coords_to_herm(c.data(), d) - h.mat()), 1e-13);
  }
}

namespace {

void expect_dilation_reproduces(const std::vector<HermMat>& povm, int states) {
  const auto nd = naimark_dilate(povm);
  const int d = povm.front().dim();
  ASSERT_EQ(nd.projectors.size(), povm.size());
  HermMat sum = HermMat::zero(nd.embed_dim);
  for (std::size_t b = 0; b < povm.size(); ++b) {
    sum += nd.projectors[b];
    for (std::size_t c = 0; c < povm.size(); ++c) {
      const CplxMat prod = nd.projectors[b].mat() * nd.projectors[c].mat();
      const CplxMat want = b == c ? nd.projectors[b].mat() : CplxMat::Zero(nd.embed_dim, nd.embed_dim);
      EXPECT_LE(max_abs(prod - want), 1e-10);
    }
  }
  EXPECT_LE(max_abs_diff(sum, HermMat::identity(nd.embed_dim)), 1e-12);
  for (int i = 0; i < states; ++i) {
    const HermMat rho = random_state(d);
    const HermMat big(nd.embedding * rho.mat() * nd.embedding.adjoint());
    for (std::size_t b = 0; b < povm.size(); ++b) {
      EXPECT_NEAR(prob(rho, povm[b]), prob(big, nd.projectors[b]), 1e-10);
    }
  }
}

}  // namespace

TEST(Naimark, ProjectiveInput) {
  expect_dilation_reproduces({HermMat::diag({1.0, 0.0}), HermMat::diag({0.0, 1.0})}, 5);
}

TEST(Naimark, TrineOnQubit) {
  std::vector<HermMat> trine;
  for (int i = 0; i < 3; ++i) trine.push_back((2.0 / 3.0) * bloch_projector(xz_axis(2.0 * kPi * i / 3.0), 1));
  const auto nd = naimark_dilate(trine);
  EXPECT_EQ(nd.embed_dim, 6);
  expect_dilation_reproduces(trine, 20);
}

TEST(Naimark, SingleIdentityEffect) {
  const auto nd = naimark_dilate(std::vector<HermMat>{HermMat::identity(2)});
  ASSERT_EQ(nd.projectors.size(), 1u);
  EXPECT_LE(max_abs_diff(nd.projectors[0], HermMat::identity(nd.embed_dim)), 1e-12);
}

TEST(Naimark, RandomPovms) {
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 2 + rep % 3;
    const int k = 2 + rep % 3;
    std::vector<HermMat> raw;
    HermMat total = HermMat::zero(d);
    for (int b = 0; b < k; ++b) {
      raw.push_back(random_psd(d, 1 + b % d));
      total += raw.back();
    }
    const HermMat w = pinv_sqrt(total);
    std::vector<HermMat> povm;
    for (const auto& e : raw) povm.push_back(conjugate_adjoint(w.mat(), e));
    expect_dilation_reproduces(povm, 10);
  }
}

TEST(Naimark, RejectsNonPovm) {
  EXPECT_THROW(naimark_dilate(std::vector<HermMat>{HermMat::diag({1.0, 0.0})}), ValidationError);
}
