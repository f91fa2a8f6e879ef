#pragma once

// Partial joint-measurability as a semidefinite feasibility problem.
//
// build_program() enumerates the deterministic response tuples beta = (beta_1..beta_n),
// eliminates the blocks of guessable outcomes (E_{beta,b|y} = delta_{b,beta_y} E_{beta,*|y})
// and records the no-signaling and consistency equalities. solve() maximizes
// the common slack t with every block >= t*1 over the affine solution set, using
// a barrier path-following method on a nullspace parameterization of the
// equalities. threshold() bisects the detection efficiency.

#include "gjm/matqm.hpp"
#include "gjm/povm.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gjm {

// beta_y is nullopt when the setting has no guessable outcomes.
using BetaTuple = std::vector<std::optional<Label>>;

struct BlockKey {
  std::size_t beta = 0;
  int y = 0;
  std::optional<Label> label;  // nullopt marks the E_{beta,*|y} block

  bool is_star() const { return !label.has_value(); }
};

enum class ConstraintKind { no_signaling, consistency };

struct AffineConstraint {
  ConstraintKind kind = ConstraintKind::consistency;
  std::vector<std::pair<std::size_t, double>> terms;  // (block index, coefficient)
  HermMat rhs;
};

inline constexpr std::size_t kNoBlock = std::numeric_limits<std::size_t>::max();

struct GjmProgram {
  int dim = 0;
  int n = 0;
  std::vector<std::vector<Label>> labels;  // per setting, as in the assembly
  GSpec gspec;
  std::vector<BetaTuple> beta_tuples;
  std::vector<BlockKey> blocks;
  std::vector<AffineConstraint> constraints;
  // label_block[beta][y][label index] for non-guessable labels, star_block[beta][y].
  std::vector<std::vector<std::vector<std::size_t>>> label_block;
  std::vector<std::vector<std::size_t>> star_block;

  std::size_t num_blocks() const { return blocks.size(); }
};

namespace detail {

inline std::vector<BetaTuple> enumerate_betas(const GSpec& g) {
  std::vector<BetaTuple> out{BetaTuple{}};
  for (const auto& subset : g.subsets) {
    std::vector<BetaTuple> next;
    if (subset.empty()) {
      for (auto t : out) {
        t.emplace_back(std::nullopt);
        next.push_back(std::move(t));
      }
    } else {
      for (const auto& t : out) {
        for (const auto& l : subset) {
          auto u = t;
          u.emplace_back(l);
          next.push_back(std::move(u));
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

inline GjmProgram build_program(const Assembly& a, const GSpec& g) {
  g.check_against(a);
  GjmProgram p;
  p.dim = a.dim();
  p.n = a.n();
  p.gspec = g;
  for (const auto& povm : a.povms()) {
    p.labels.push_back(povm.labels());
  }
  p.beta_tuples = detail::enumerate_betas(g);

  const std::size_t nb = p.beta_tuples.size();
  p.label_block.assign(nb, {});
  p.star_block.assign(nb, std::vector<std::size_t>(static_cast<std::size_t>(p.n), kNoBlock));
  for (std::size_t beta = 0; beta < nb; ++beta) {
    p.label_block[beta].resize(static_cast<std::size_t>(p.n));
    for (int y = 0; y < p.n; ++y) {
      const auto& labels = p.labels[static_cast<std::size_t>(y)];
      auto& row = p.label_block[beta][static_cast<std::size_t>(y)];
      row.assign(labels.size(), kNoBlock);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!g.contains(y, labels[i])) {
          row[i] = p.blocks.size();
          p.blocks.push_back(BlockKey{beta, y, labels[i]});
        }
      }
      if (!g.empty_at(y)) {
        p.star_block[beta][static_cast<std::size_t>(y)] = p.blocks.size();
        p.blocks.push_back(BlockKey{beta, y, std::nullopt});
      }
    }
  }

  const HermMat zero = HermMat::zero(p.dim);
  // No-signaling: the b-marginal of setting y equals that of setting y+1.
  for (std::size_t beta = 0; beta < nb; ++beta) {
    for (int y = 0; y + 1 < p.n; ++y) {
      AffineConstraint c{ConstraintKind::no_signaling, {}, zero};
      for (int yy : {y, y + 1}) {
        const double sign = yy == y ? 1.0 : -1.0;
        for (auto idx : p.label_block[beta][static_cast<std::size_t>(yy)]) {
          if (idx != kNoBlock) c.terms.emplace_back(idx, sign);
        }
        if (auto s = p.star_block[beta][static_cast<std::size_t>(yy)]; s != kNoBlock) {
          c.terms.emplace_back(s, sign);
        }
      }
      p.constraints.push_back(std::move(c));
    }
  }
  // Consistency: the beta-sum of E_{beta,b|y} reproduces B_{b|y}.
  for (int y = 0; y < p.n; ++y) {
    const auto& povm = a.povm(y);
    for (std::size_t i = 0; i < povm.size(); ++i) {
      const Label& b = povm.labels()[i];
      AffineConstraint c{ConstraintKind::consistency, {}, povm.effect(i)};
      for (std::size_t beta = 0; beta < nb; ++beta) {
        if (g.contains(y, b)) {
          if (p.beta_tuples[beta][static_cast<std::size_t>(y)] == b) {
            c.terms.emplace_back(p.star_block[beta][static_cast<std::size_t>(y)], 1.0);
          }
        } else {
          c.terms.emplace_back(p.label_block[beta][static_cast<std::size_t>(y)][i], 1.0);
        }
      }
      p.constraints.push_back(std::move(c));
    }
  }
  return p;
}

// E_{beta,b|y} read off a block assignment (zero when b is guessable and b != beta_y).
inline HermMat effective_block(const GjmProgram& p, std::span<const HermMat> blocks, std::size_t beta, int y,
                               std::size_t label_index) {
  const auto idx = p.label_block[beta][static_cast<std::size_t>(y)][label_index];
  if (idx != kNoBlock) {
    return blocks[idx];
  }
  const Label& b = p.labels[static_cast<std::size_t>(y)][label_index];
  if (p.beta_tuples[beta][static_cast<std::size_t>(y)] == b) {
    return blocks[p.star_block[beta][static_cast<std::size_t>(y)]];
  }
  return HermMat::zero(p.dim);
}

// Largest entrywise violation of the affine equalities.
inline double constraint_residual(const GjmProgram& p, std::span<const HermMat> blocks) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    CplxMat lhs = -c.rhs.mat();
    for (const auto& [idx, coeff] : c.terms) {
      lhs += coeff * blocks[idx].mat();
    }
    worst = std::max(worst, max_abs(lhs));
  }
  return worst;
}

enum class Status { feasible, infeasible, marginal };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::feasible:
      return "FEASIBLE";
    case Status::infeasible:
      return "INFEASIBLE";
    case Status::marginal:
      return "MARGINAL";
  }
  return "?";
}

struct SolveOptions {
  double tol = 1e-7;
  int max_newton = 600;
  // Return as soon as the certified upper bound on the slack drops below -tol.
  bool stop_when_infeasible = true;
};

struct FeasibilityReport {
  Status status = Status::marginal;
  double slack = 0.0;        // best t reached; blocks >= t*1
  double slack_upper = 0.0;  // certified upper bound on the optimal t
  std::vector<HermMat> witness_blocks;
  int iterations = 0;
  double residuals = 0.0;  // max(equality violation, negative part of min eigenvalue)
  std::string diagnostics;
};

namespace detail {

class SlackBarrier {
 public:
  explicit SlackBarrier(const GjmProgram& p) : p_(p), d_(p.dim), q_(herm_coord_count(p.dim)) {
    nb_ = p.num_blocks();
    const std::size_t nvar = nb_ * q_;
    std::size_t rows = p.constraints.size() * q_;
    RealMat a = RealMat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nvar));
    RealVec b(static_cast<Eigen::Index>(rows));
    for (std::size_t ci = 0; ci < p.constraints.size(); ++ci) {
      const auto& c = p.constraints[ci];
      herm_to_coords(c.rhs.mat(), b.data() + ci * q_);
      for (const auto& [idx, coeff] : c.terms) {
        for (std::size_t k = 0; k < q_; ++k) {
          a(static_cast<Eigen::Index>(ci * q_ + k), static_cast<Eigen::Index>(idx * q_ + k)) += coeff;
        }
      }
    }
    Eigen::CompleteOrthogonalDecomposition<RealMat> cod(a);
    x0_ = cod.solve(b);
    eq_residual0_ = rows ? (a * x0_ - b).cwiseAbs().maxCoeff() : 0.0;

    Eigen::ColPivHouseholderQR<RealMat> qr(a.transpose());
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    RealMat qfull = qr.householderQ() * RealMat::Identity(static_cast<Eigen::Index>(nvar),
                                                          static_cast<Eigen::Index>(nvar));
    null_ = qfull.rightCols(static_cast<Eigen::Index>(nvar) - rank);
    a_ = std::move(a);
    b_ = std::move(b);

    basis_.reserve(q_);
    for (std::size_t k = 0; k < q_; ++k) {
      RealVec e = RealVec::Zero(static_cast<Eigen::Index>(q_));
      e(static_cast<Eigen::Index>(k)) = 1.0;
      basis_.push_back(coords_to_herm(e.data(), d_));
    }
  }

  double eq_residual0() const { return eq_residual0_; }
  Eigen::Index free_dim() const { return null_.cols(); }
  double barrier_degree() const { return static_cast<double>(nb_) * d_; }

  RealVec point(const RealVec& w) const { return null_.cols() ? RealVec(x0_ + null_ * w) : x0_; }

  CplxMat block(const RealVec& x, std::size_t j) const { return coords_to_herm(x.data() + j * q_, d_); }

  double min_block_eig(const RealVec& x) const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb_; ++j) {
      lo = std::min(lo, min_eigenvalue(HermMat(block(x, j))));
    }
    return lo;
  }

  double eq_residual(const RealVec& x) const {
    return b_.size() ? (a_ * x - b_).cwiseAbs().maxCoeff() : 0.0;
  }

  // Barrier value -t/mu - sum log det(X_j - t), or nullopt outside the domain.
  std::optional<double> value(const RealVec& w, double t, double mu) const {
    const RealVec x = point(w);
    double f = -t / mu;
    for (std::size_t j = 0; j < nb_; ++j) {
      CplxMat s = block(x, j) - t * CplxMat::Identity(d_, d_);
      Eigen::LLT<CplxMat> llt(s);
      if (llt.info() != Eigen::Success) return std::nullopt;
      const auto& l = llt.matrixLLT();
      for (int i = 0; i < d_; ++i) {
        const double lii = l(i, i).real();
        if (!(lii > 0.0)) return std::nullopt;
        f -= 2.0 * std::log(lii);
      }
    }
    return f;
  }

  // Gradient and Hessian in z = (w, t).
  bool derivatives(const RealVec& w, double t, double mu, RealVec& grad, RealMat& hess) const {
    const auto p = null_.cols();
    grad = RealVec::Zero(p + 1);
    hess = RealMat::Zero(p + 1, p + 1);
    grad(p) = -1.0 / mu;
    const RealVec x = point(w);
    const auto qi = static_cast<Eigen::Index>(q_);
    RealVec gx(qi), cx(qi), tmp(qi);
    RealMat hx(qi, qi);
    for (std::size_t j = 0; j < nb_; ++j) {
      CplxMat s = block(x, j) - t * CplxMat::Identity(d_, d_);
      Eigen::LLT<CplxMat> llt(s);
      if (llt.info() != Eigen::Success) return false;
      const CplxMat sinv = llt.solve(CplxMat::Identity(d_, d_));
      const CplxMat sinv2 = sinv * sinv;
      herm_to_coords(sinv, gx.data());
      herm_to_coords(sinv2, cx.data());
      for (std::size_t l = 0; l < q_; ++l) {
        const CplxMat y = sinv * basis_[l] * sinv;
        herm_to_coords(y, tmp.data());
        hx.col(static_cast<Eigen::Index>(l)) = tmp;
      }
      grad(p) += sinv.trace().real();
      hess(p, p) += sinv2.trace().real();
      if (p > 0) {
        const auto zj = null_.middleRows(static_cast<Eigen::Index>(j * q_), qi);
        grad.head(p).noalias() -= zj.transpose() * gx;
        hess.topLeftCorner(p, p).noalias() += zj.transpose() * (hx * zj);
        hess.col(p).head(p).noalias() -= zj.transpose() * cx;
      }
    }
    hess.row(p).head(p) = hess.col(p).head(p).transpose();
    return true;
  }

 private:
  const GjmProgram& p_;
  int d_;
  std::size_t q_;
  std::size_t nb_ = 0;
  RealMat a_;
  RealVec b_;
  RealVec x0_;
  RealMat null_;
  double eq_residual0_ = 0.0;
  std::vector<CplxMat> basis_;
};

}  // namespace detail

inline FeasibilityReport solve(const GjmProgram& p, const SolveOptions& opt = {}) {
  FeasibilityReport rep;
  detail::SlackBarrier bar(p);
  if (bar.eq_residual0() > 1e-8) {
    rep.status = Status::infeasible;
    rep.slack = rep.slack_upper = -std::numeric_limits<double>::infinity();
    rep.residuals = bar.eq_residual0();
    rep.diagnostics = "affine constraints are inconsistent";
    return rep;
  }

  const auto np = bar.free_dim();
  const double nu = bar.barrier_degree();
  RealVec w = RealVec::Zero(np);
  double t = bar.min_block_eig(bar.point(w)) - 1.0;
  double mu = 1.0;
  double upper = std::numeric_limits<double>::infinity();
  int newton = 0;
  bool stalled = false;

  RealVec grad;
  RealMat hess;
  while (newton < opt.max_newton) {
    // Centering.
    double dec2 = std::numeric_limits<double>::infinity();
    while (newton < opt.max_newton) {
      if (!bar.derivatives(w, t, mu, grad, hess)) {
        stalled = true;
        break;
      }
      Eigen::LDLT<RealMat> ldlt(hess);
      RealVec step = ldlt.solve(-grad);
      if (!step.allFinite()) {
        stalled = true;
        break;
      }
      dec2 = -grad.dot(step);
      ++newton;
      if (dec2 < 1e-10) break;
      const auto f0 = bar.value(w, t, mu);
      double s = dec2 > 0.25 ? 1.0 / (1.0 + std::sqrt(dec2)) : 1.0;
      bool moved = false;
      while (s > 1e-14) {
        RealVec w1 = w + s * step.head(np);
        const double t1 = t + s * step(np);
        const auto f1 = bar.value(w1, t1, mu);
        if (f1 && *f1 <= *f0 - 0.25 * s * dec2) {
          w = std::move(w1);
          t = t1;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) {
        stalled = dec2 > 1e-6;
        break;
      }
      if (dec2 < 1e-9) break;
    }
    if (stalled) break;

    // Duality-gap bound at an approximately centred point.
    const double lam = std::sqrt(std::max(dec2, 0.0));
    const double gap = mu * (nu + lam * std::sqrt(nu)) * (1.0 + lam);
    upper = std::min(upper, t + gap);
    if (opt.stop_when_infeasible && upper < -opt.tol) break;
    if (gap < 0.1 * opt.tol) break;
    mu /= 10.0;
  }

  const RealVec x = bar.point(w);
  for (std::size_t j = 0; j < p.num_blocks(); ++j) {
    rep.witness_blocks.emplace_back(bar.block(x, j));
  }
  const double min_eig = p.num_blocks() ? bar.min_block_eig(x) : 0.0;
  rep.slack = p.num_blocks() ? std::min(t, min_eig) : 0.0;
  rep.slack_upper = std::max(upper, rep.slack);
  rep.iterations = newton;
  rep.residuals = std::max(bar.eq_residual(x), std::max(0.0, -min_eig));

  if (rep.slack >= -opt.tol && rep.residuals <= opt.tol) {
    rep.status = Status::feasible;
  } else if (rep.slack_upper < -opt.tol) {
    rep.status = Status::infeasible;
  } else {
    rep.status = Status::marginal;
    rep.diagnostics = stalled ? "Newton iteration stalled" : "slack undecided at tolerance";
  }
  if (newton >= opt.max_newton) {
    rep.diagnostics += rep.diagnostics.empty() ? "Newton budget exhausted" : "; Newton budget exhausted";
  }
  return rep;
}

inline bool feasible_or_marginal(const FeasibilityReport& r) { return r.status != Status::infeasible; }

struct ThresholdResult {
  double eta_star = 0.0;
  double eta_lo = 0.0;  // last feasible probe
  double eta_hi = 1.0;  // last infeasible probe
  double tol = 0.0;
  int evaluations = 0;
  bool always_jm = false;
  int newton_iterations = 0;
  Status lo_status = Status::feasible;
  Status hi_status = Status::infeasible;
  double hi_slack_upper = 0.0;  // certificate strength at the infeasible end
};

// Called after every probe; used for logging.
using ProbeHook = std::function<void(double eta, const FeasibilityReport&)>;

using GSpecBuilder = std::function<GSpec(const Assembly& lossy)>;

inline GSpecBuilder case_builder(Case c) {
  return [c](const Assembly& lossy) { return gspec_case(c, lossy); };
}

class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

// Bisection on eta for the largest efficiency at which the lossy (and possibly
// noisy) assembly is G-JM. Relies on the feasible set of eta being an interval
// containing 0.
inline ThresholdResult threshold(const Assembly& ideal, const GSpecBuilder& gspec, double tol = 1e-4,
                                 double nu_vis = 1.0, const SolveOptions& opt = {},
                                 const ProbeHook& hook = {}) {
  if (!(tol > 0.0)) {
    throw ValidationError("threshold: tol must be positive");
  }
  ThresholdResult res;
  res.tol = tol;
  auto probe = [&](double eta) {
    const Assembly lossy = apply_loss_visibility(ideal, LossParams{eta, nu_vis});
    const auto rep = solve(build_program(lossy, gspec(lossy)), opt);
    ++res.evaluations;
    res.newton_iterations += rep.iterations;
    if (hook) hook(eta, rep);
    if (feasible_or_marginal(rep)) {
      res.lo_status = rep.status;
      return true;
    }
    res.hi_status = rep.status;
    res.hi_slack_upper = rep.slack_upper;
    return false;
  };
  if (probe(1.0)) {
    res.eta_star = res.eta_lo = res.eta_hi = 1.0;
    res.always_jm = true;
    return res;
  }
  if (!probe(0.0)) {
    throw InternalConsistencyError("threshold: program infeasible at eta = 0");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? lo : hi) = mid;
  }
  res.eta_lo = lo;
  res.eta_hi = hi;
  res.eta_star = lo;
  return res;
}

inline ThresholdResult threshold(const Assembly& ideal, Case c, double tol = 1e-4, double nu_vis = 1.0,
                                 const SolveOptions& opt = {}, const ProbeHook& hook = {}) {
  return threshold(ideal, case_builder(c), tol, nu_vis, opt, hook);
}

}  // namespace gjm
