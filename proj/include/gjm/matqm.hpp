#pragma once

// Dense complex matrix helpers shared by every other header: Hermitian
// wrapper, PSD tests, square roots, Bloch-sphere projectors and Naimark
// dilation.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gjm {

using cplx = std::complex<double>;
using CplxMat = Eigen::MatrixXcd;
using CplxVec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

inline constexpr double kDecisionTol = 1e-9;
inline constexpr double kHygieneTol = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Hermitian matrix. The constructor symmetrizes its input as (M + M^dagger)/2,
// which makes the stored entries exactly Hermitian in floating point.
class HermMat {
 public:
  HermMat() = default;

  explicit HermMat(const CplxMat& m) : m_(m.rows(), m.cols()) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw ShapeError("HermMat: expected a non-empty square matrix, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const auto d = m.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
      m_(i, i) = cplx(m(i, i).real(), 0.0);
      for (Eigen::Index j = i + 1; j < d; ++j) {
        const cplx upper = 0.5 * (m(i, j) + std::conj(m(j, i)));
        m_(i, j) = upper;
        m_(j, i) = std::conj(upper);
      }
    }
  }

  static HermMat identity(int d) { return HermMat(CplxMat::Identity(d, d)); }
  static HermMat zero(int d) { return HermMat(CplxMat::Zero(d, d)); }
  static HermMat diag(std::span<const double> values) {
    CplxMat m = CplxMat::Zero(static_cast<Eigen::Index>(values.size()),
                              static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    }
    return HermMat(m);
  }
  static HermMat diag(std::initializer_list<double> values) {
    return diag(std::span<const double>(values.begin(), values.size()));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CplxMat& mat() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  HermMat& operator+=(const HermMat& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  HermMat& operator-=(const HermMat& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  HermMat& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermMat operator+(HermMat a, const HermMat& b) { return a += b; }
  friend HermMat operator-(HermMat a, const HermMat& b) { return a -= b; }
  friend HermMat operator*(double s, HermMat a) { return a *= s; }
  friend HermMat operator*(HermMat a, double s) { return a *= s; }

 private:
  void check_same(const HermMat& o) const {
    if (o.dim() != dim()) {
      throw ShapeError("HermMat: dimension mismatch " + std::to_string(dim()) + " vs " +
                       std::to_string(o.dim()));
    }
  }

  CplxMat m_;
};

// Largest absolute entry of a difference; the norm used for every residual.
inline double max_abs(const CplxMat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double max_abs_diff(const HermMat& a, const HermMat& b) {
  return max_abs(a.mat() - b.mat());
}

inline Eigen::VectorXd eigenvalues(const HermMat& m) {
  Eigen::SelfAdjointEigenSolver<CplxMat> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const HermMat& m) { return eigenvalues(m).minCoeff(); }
inline double max_eigenvalue(const HermMat& m) { return eigenvalues(m).maxCoeff(); }

inline bool is_psd(const CplxMat& m, double tol) {
  if (m.rows() != m.cols()) {
    throw ShapeError("is_psd: non-square input");
  }
  return min_eigenvalue(HermMat(m)) >= -tol;
}
inline bool is_psd(const HermMat& m, double tol) { return min_eigenvalue(m) >= -tol; }

namespace detail {

template <typename F>
HermMat spectral_map(const HermMat& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<CplxMat> es(m.mat());
  const auto& v = es.eigenvectors();
  Eigen::VectorXd mapped = es.eigenvalues().unaryExpr(f);
  return HermMat(v * mapped.asDiagonal() * v.adjoint());
}

}  // namespace detail

inline HermMat herm_sqrt(const HermMat& m) {
  const double lo = min_eigenvalue(m);
  if (lo < -1e-10) {
    throw NotPsdError("herm_sqrt: matrix has eigenvalue " + std::to_string(lo));
  }
  return detail::spectral_map(m, [](double x) { return x < kHygieneTol ? 0.0 : std::sqrt(x); });
}

// Moore-Penrose pseudo-inverse of sqrt(M); eigenvalues <= rank_tol are kernel.
inline HermMat pinv_sqrt(const HermMat& m, double rank_tol = 1e-10) {
  return detail::spectral_map(m, [rank_tol](double x) { return x > rank_tol ? 1.0 / std::sqrt(x) : 0.0; });
}

// Orthogonal projector onto the span of eigenvectors with eigenvalue > rank_tol.
inline HermMat support_projector(const HermMat& m, double rank_tol = 1e-10) {
  return detail::spectral_map(m, [rank_tol](double x) { return x > rank_tol ? 1.0 : 0.0; });
}

// Conjugation K^dagger X K, the adjoint action of one Kraus operator.
inline HermMat conjugate_adjoint(const CplxMat& k, const HermMat& x) {
  return HermMat(k.adjoint() * x.mat() * k);
}

// Real orthonormal coordinates of a Hermitian d x d matrix under the trace
// inner product: diagonal entries, then sqrt(2) Re and sqrt(2) Im of the
// strict upper triangle. coords(X)_k = tr(E_k X) for the matching basis E_k.
inline std::size_t herm_coord_count(int d) { return static_cast<std::size_t>(d) * d; }

inline void herm_to_coords(const CplxMat& x, double* out) {
  const auto d = x.rows();
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    out[k++] = x(i, i).real();
  }
  constexpr double r2 = 1.4142135623730951;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      out[k++] = r2 * x(i, j).real();
      out[k++] = r2 * x(i, j).imag();
    }
  }
}

inline CplxMat coords_to_herm(const double* c, int d) {
  CplxMat x(d, d);
  std::size_t k = 0;
  for (int i = 0; i < d; ++i) {
    x(i, i) = c[k++];
  }
  constexpr double inv_r2 = 0.7071067811865476;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const cplx v(inv_r2 * c[k], inv_r2 * c[k + 1]);
      k += 2;
      x(i, j) = v;
      x(j, i) = std::conj(v);
    }
  }
  return x;
}

// Real symmetric embedding [[Re, -Im], [Im, Re]] of a complex matrix.
inline RealMat real_embedding(const CplxMat& m) {
  const auto r = m.rows();
  const auto c = m.cols();
  RealMat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

struct BlochVec {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double dot(const BlochVec& o) const { return x * o.x + y * o.y + z * o.z; }
  BlochVec operator-() const { return {-x, -y, -z}; }
  BlochVec scaled(double s) const { return {s * x, s * y, s * z}; }
  BlochVec normalized() const {
    const double n = norm();
    if (n == 0.0) {
      throw ValidationError("BlochVec: cannot normalize the zero vector");
    }
    return scaled(1.0 / n);
  }
  BlochVec cross(const BlochVec& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  friend BlochVec operator+(const BlochVec& a, const BlochVec& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend BlochVec operator-(const BlochVec& a, const BlochVec& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
};

// Axis (sin a, 0, cos a) in the x-z plane.
inline BlochVec xz_axis(double angle) { return {std::sin(angle), 0.0, std::cos(angle)}; }

inline CplxMat pauli_dot(const BlochVec& r) {
  CplxMat m(2, 2);
  m << cplx(r.z, 0.0), cplx(r.x, -r.y), cplx(r.x, r.y), cplx(-r.z, 0.0);
  return m;
}

// (1 + sign r.sigma)/2 for a unit Bloch vector r.
inline HermMat bloch_projector(const BlochVec& r, int sign) {
  if (std::abs(r.norm() - 1.0) > kHygieneTol) {
    throw ValidationError("bloch_projector: direction is not unit norm (|r| = " +
                          std::to_string(r.norm()) + ")");
  }
  if (sign != 1 && sign != -1) {
    throw ValidationError("bloch_projector: sign must be +1 or -1");
  }
  return HermMat(0.5 * (CplxMat::Identity(2, 2) + static_cast<double>(sign) * pauli_dot(r)));
}

inline void validate_povm_effects(std::span<const HermMat> effects, double tol) {
  if (effects.empty()) {
    throw ValidationError("POVM has no effects");
  }
  const int d = effects.front().dim();
  CplxMat sum = CplxMat::Zero(d, d);
  for (std::size_t i = 0; i < effects.size(); ++i) {
    if (effects[i].dim() != d) {
      throw ValidationError("POVM effects have inconsistent dimensions");
    }
    const double lo = min_eigenvalue(effects[i]);
    if (lo < -tol) {
      throw ValidationError("POVM effect " + std::to_string(i) + " is not PSD (min eigenvalue " +
                            std::to_string(lo) + ")");
    }
    sum += effects[i].mat();
  }
  const double dev = max_abs(sum - CplxMat::Identity(d, d));
  if (dev > tol) {
    throw ValidationError("POVM effects do not sum to identity (deviation " + std::to_string(dev) + ")");
  }
}

struct NaimarkDilation {
  std::vector<HermMat> projectors;
  int embed_dim = 0;
  int ancilla_dim = 0;
  // Isometry |psi> -> |psi> (x) |0>, system index major: row i*k + 0.
  CplxMat embedding;
};

// Modified Gram-Schmidt (two passes) of v against the first `count` columns of basis.
namespace detail {
inline CplxVec orthogonalize(CplxVec v, const CplxMat& basis, std::span<const Eigen::Index> cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (auto c : cols) {
      v -= basis.col(c).dot(v) * basis.col(c);
    }
  }
  return v;
}
}  // namespace detail

// Square-root dilation: U maps |i>|0> to sum_b |b> (x) sqrt(B_b)|i>, completed
// to a unitary by Gram-Schmidt, and P_b = U^dagger (|b><b| (x) 1) U.
inline NaimarkDilation naimark_dilate(std::span<const HermMat> povm) {
  validate_povm_effects(povm, 1e-10);
  const int d = povm.front().dim();
  const int k = static_cast<int>(povm.size());
  const int big = d * k;

  CplxMat w(big, d);  // ancilla-major rows: b*d + i
  for (int b = 0; b < k; ++b) {
    w.middleRows(b * d, d) = herm_sqrt(povm[static_cast<std::size_t>(b)]).mat();
  }

  CplxMat u = CplxMat::Zero(big, big);
  std::vector<Eigen::Index> filled;
  for (int i = 0; i < d; ++i) {
    u.col(i * k) = w.col(i);
    filled.push_back(i * k);
  }
  // Re-orthonormalize the isometry columns to wash out sqrt round-off.
  {
    std::vector<Eigen::Index> done;
    for (auto c : filled) {
      CplxVec v = detail::orthogonalize(u.col(c), u, done);
      u.col(c) = v / v.norm();
      done.push_back(c);
    }
  }
  Eigen::Index next_basis = 0;
  for (Eigen::Index col = 0; col < big; ++col) {
    if (col % k == 0) {
      continue;
    }
    while (true) {
      CplxVec e = CplxVec::Zero(big);
      e(next_basis++) = 1.0;
      CplxVec v = detail::orthogonalize(e, u, filled);
      const double n = v.norm();
      if (n > 1e-6) {
        u.col(col) = v / n;
        filled.push_back(col);
        break;
      }
    }
  }

  NaimarkDilation out;
  out.embed_dim = big;
  out.ancilla_dim = k;
  out.embedding = CplxMat::Zero(big, d);
  for (int i = 0; i < d; ++i) {
    out.embedding(i * k, i) = 1.0;
  }
  for (int b = 0; b < k; ++b) {
    CplxMat q = CplxMat::Zero(big, big);
    q.block(b * d, b * d, d, d) = CplxMat::Identity(d, d);
    out.projectors.emplace_back(u.adjoint() * q * u);
  }
  return out;
}

// A (x) B.
inline CplxMat kron(const CplxMat& a, const CplxMat& b) {
  CplxMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace gjm
