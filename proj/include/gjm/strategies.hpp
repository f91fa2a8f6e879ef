#pragma once

// Explicit attack strategies (instrument + conditional measurements + guess
// tables), their verification, and the conversions between strategies,
// partial parent POVMs and deterministic-response parents.

#include "gjm/bounds.hpp"
#include "gjm/gjm_sdp.hpp"
#include "gjm/matqm.hpp"
#include "gjm/povm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gjm {

// Raised when a constructor is asked for an efficiency its construction cannot reach.
class BoundViolatedError : public ValidationError {
 public:
  BoundViolatedError(const std::string& what, std::vector<std::string> names, std::vector<double> margins)
      : ValidationError(what), constraint_names(std::move(names)), margins(std::move(margins)) {}
  std::vector<std::string> constraint_names;
  std::vector<double> margins;  // negative entries are the violated constraints
};

class ReversalInvalidError : public BoundViolatedError {
 public:
  using BoundViolatedError::BoundViolatedError;
};

class SupportViolationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Instrument {
  std::vector<std::string> outcome_names;
  std::vector<std::vector<CplxMat>> kraus;  // [c][j], each out_c x in

  std::size_t size() const { return kraus.size(); }
  int in_dim() const { return static_cast<int>(kraus.front().front().cols()); }
  int out_dim(std::size_t c) const { return static_cast<int>(kraus[c].front().rows()); }

  // I_c^dagger(1)
  HermMat effect(std::size_t c) const {
    HermMat e = HermMat::zero(in_dim());
    for (const auto& k : kraus[c]) e += HermMat(k.adjoint() * k);
    return e;
  }
  // I_c^dagger(m)
  HermMat adjoint(std::size_t c, const HermMat& m) const {
    HermMat e = HermMat::zero(in_dim());
    for (const auto& k : kraus[c]) e += conjugate_adjoint(k, m);
    return e;
  }
  // Projector onto the range of I_c.
  HermMat output_support(std::size_t c, double rank_tol = 1e-10) const {
    HermMat s = HermMat::zero(out_dim(c));
    for (const auto& k : kraus[c]) s += HermMat(k * k.adjoint());
    return support_projector(s, rank_tol);
  }
};

struct Strategy {
  std::string name;
  Instrument instrument;
  std::vector<std::vector<Label>> labels;  // per setting, matching the lossy assembly
  GSpec gspec;
  std::vector<std::vector<std::vector<HermMat>>> conditional;  // [y][c][label index]
  std::vector<std::vector<std::optional<Label>>> guess;        // [y][c]
  // Optional explicit response p(b|y,c) over gspec.subsets[y]; [y][c][j]. Empty: read from guess.
  std::vector<std::vector<std::vector<double>>> response;

  int n() const { return static_cast<int>(labels.size()); }
  std::size_t label_index(int y, const Label& l) const {
    const auto& ls = labels[static_cast<std::size_t>(y)];
    auto it = std::find(ls.begin(), ls.end(), l);
    if (it == ls.end()) throw ValidationError("strategy: unknown label " + l.str());
    return static_cast<std::size_t>(it - ls.begin());
  }
  // E_{c,b|y}
  HermMat effective(int y, std::size_t c, std::size_t i) const {
    return instrument.adjoint(c, conditional[static_cast<std::size_t>(y)][c][i]);
  }
};

// p(b|y,c) over gspec.subsets[y]; empty when neither response nor guess is known.
inline std::vector<double> response_row(const Strategy& s, int y, std::size_t c) {
  const auto yy = static_cast<std::size_t>(y);
  if (!s.response.empty()) return s.response[yy][c];
  const auto& g = s.guess[yy][c];
  if (!g) return {};
  std::vector<double> row;
  for (const auto& b : s.gspec.subsets[yy]) row.push_back(b == *g ? 1.0 : 0.0);
  return row;
}

struct PsdMargin {
  int y = 0;
  std::size_t c = 0;
  Label label;
  double margin = 0.0;
};

struct VerificationReport {
  double consistency_residual = 0.0;
  double nosignaling_residual = 0.0;
  double partial_jm_residual = 0.0;
  double guess_failure_prob = 0.0;
  double completeness_residual = 0.0;
  double trace_preservation_residual = 0.0;
  double min_psd_margin = 0.0;
  std::vector<PsdMargin> validity;
  double tol = 0.0;
  bool pass = false;
};

inline VerificationReport verify_strategy(const Strategy& s, const Assembly& lossy, const GSpec& g,
                                          double tol = 1e-9) {
  if (s.instrument.size() == 0 || s.instrument.in_dim() != lossy.dim() || s.n() != lossy.n()) {
    throw ShapeError("verify_strategy: strategy and assembly shapes differ");
  }
  g.check_against(lossy);
  VerificationReport r;
  r.tol = tol;
  const auto nc = s.instrument.size();
  const int d = lossy.dim();

  std::vector<HermMat> e_c;
  HermMat total = HermMat::zero(d);
  for (std::size_t c = 0; c < nc; ++c) {
    e_c.push_back(s.instrument.effect(c));
    total += e_c.back();
  }
  r.trace_preservation_residual = max_abs_diff(total, HermMat::identity(d));
  r.min_psd_margin = std::numeric_limits<double>::infinity();

  for (int y = 0; y < lossy.n(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    const auto& povm = lossy.povm(y);
    // effective[c][i] aligned with the assembly's labels
    std::vector<std::vector<HermMat>> eff(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      HermMat sum_m = HermMat::zero(s.instrument.out_dim(c));
      HermMat marg = HermMat::zero(d);
      for (std::size_t i = 0; i < povm.size(); ++i) {
        const std::size_t si = s.label_index(y, povm.labels()[i]);
        const HermMat& m = s.conditional[yy][c][si];
        const double lo = min_eigenvalue(m);
        r.validity.push_back({y, c, povm.labels()[i], lo});
        r.min_psd_margin = std::min(r.min_psd_margin, lo);
        sum_m += m;
        eff[c].push_back(s.instrument.adjoint(c, m));
        marg += eff[c].back();
      }
      const HermMat target = s.instrument.output_support(c);
      HermMat full_target = HermMat::identity(s.instrument.out_dim(c));
      const double to_support = max_abs_diff(sum_m, target);
      const double to_identity = max_abs_diff(sum_m, full_target);
      r.completeness_residual = std::max(r.completeness_residual, std::min(to_support, to_identity));
      r.nosignaling_residual = std::max(r.nosignaling_residual, max_abs_diff(marg, e_c[c]));
    }
    for (std::size_t i = 0; i < povm.size(); ++i) {
      HermMat sum = HermMat::zero(d);
      for (std::size_t c = 0; c < nc; ++c) sum += eff[c][i];
      r.consistency_residual = std::max(r.consistency_residual, max_abs_diff(sum, povm.effect(i)));
    }
    const auto& gy = g.subsets[yy];
    if (gy.empty()) continue;
    std::vector<std::size_t> gidx;
    for (const auto& b : gy) gidx.push_back(*povm.index_of(b));

    HermMat fail = HermMat::zero(d);
    for (std::size_t c = 0; c < nc; ++c) {
      HermMat star = HermMat::zero(d);
      for (auto i : gidx) star += eff[c][i];
      // Use the strategy's own response when it is defined over the same subset,
      // otherwise the one implied by the operators.
      std::vector<double> p;
      if (s.gspec.subsets.size() == g.subsets.size() && s.gspec.subsets[yy] == gy) p = response_row(s, y, c);
      if (p.empty()) {
        const double ts = star.trace();
        for (auto i : gidx) p.push_back(ts > 1e-14 ? eff[c][i].trace() / ts : 0.0);
      }
      for (std::size_t j = 0; j < gy.size(); ++j) {
        r.partial_jm_residual = std::max(r.partial_jm_residual, max_abs_diff(eff[c][gidx[j]], p[j] * star));
      }
      const auto& guess = s.guess.empty() ? std::optional<Label>{} : s.guess[yy][c];
      for (std::size_t j = 0; j < gy.size(); ++j) {
        if (!guess || gy[j] != *guess) fail += eff[c][gidx[j]];
      }
    }
    r.guess_failure_prob = std::max(r.guess_failure_prob, std::max(0.0, max_eigenvalue(fail)));
  }
  r.pass = r.consistency_residual <= tol && r.nosignaling_residual <= tol && r.partial_jm_residual <= tol &&
           r.guess_failure_prob <= tol && r.completeness_residual <= tol && r.trace_preservation_residual <= tol &&
           r.min_psd_margin >= -tol;
  return r;
}

namespace detail {

inline std::vector<std::vector<Label>> lossy_labels(const Assembly& ideal) {
  std::vector<std::vector<Label>> out;
  for (const auto& p : ideal.povms()) {
    auto l = p.labels();
    l.push_back(kNoClick);
    out.push_back(std::move(l));
  }
  return out;
}

inline Strategy blank_strategy(std::string name, const Assembly& ideal, Case gcase, std::size_t outcomes) {
  if (ideal.lossy()) throw ValidationError(name + ": expects an ideal (loss-free) assembly");
  Strategy s;
  s.name = std::move(name);
  s.labels = lossy_labels(ideal);
  s.gspec = gspec_case(gcase, apply_loss(ideal, 1.0));
  s.conditional.assign(s.labels.size(), std::vector<std::vector<HermMat>>(outcomes));
  s.guess.assign(s.labels.size(), std::vector<std::optional<Label>>(outcomes));
  return s;
}

inline void check_eta(double eta, double bound, const std::string& who) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError(who + ": eta outside [0,1]");
  if (eta > bound + 1e-12) {
    throw BoundViolatedError(who + ": eta = " + std::to_string(eta) + " exceeds the construction bound " +
                                 std::to_string(bound),
                             {"eta <= bound"}, {bound - eta});
  }
}

inline CplxMat scaled_sqrt(const HermMat& m, double s) { return std::sqrt(s) * herm_sqrt(m).mat(); }

}  // namespace detail

// Classical mixture: the given strategy with weight lambda, the all-no-click
// device with weight 1 - lambda.
inline Strategy mix_with_no_click(Strategy s, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("mix_with_no_click: weight outside [0,1]");
  if (lambda >= 1.0) return s;
  const int d = s.instrument.in_dim();
  for (auto& set : s.instrument.kraus) {
    for (auto& k : set) k *= std::sqrt(lambda);
  }
  s.instrument.outcome_names.push_back("no-click");
  s.instrument.kraus.push_back({std::sqrt(1.0 - lambda) * CplxMat::Identity(d, d)});
  for (int y = 0; y < s.n(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    std::vector<HermMat> effects;
    for (const auto& l : s.labels[yy]) {
      effects.push_back(l.is_none() ? HermMat::identity(d) : HermMat::zero(d));
    }
    s.conditional[yy].push_back(std::move(effects));
    std::optional<Label> g;
    const auto& gy = s.gspec.subsets[yy];
    if (!gy.empty()) {
      g = std::find(gy.begin(), gy.end(), kNoClick) != gy.end() ? kNoClick : gy.front();
    }
    s.guess[yy].push_back(g);
    if (!s.response.empty()) {
      std::vector<double> row;
      for (const auto& b : gy) row.push_back(g && b == *g ? 1.0 : 0.0);
      s.response[yy].push_back(std::move(row));
    }
  }
  return s;
}

inline Strategy strat_full_jm(const Assembly& ideal, double eta) {
  const int n = ideal.n();
  detail::check_eta(eta, 1.0 / n, "strat_full_jm");
  std::size_t nc = 0;
  for (const auto& p : ideal.povms()) nc += p.size();
  Strategy s = detail::blank_strategy("full-jm", ideal, Case::a, nc);
  const int d = ideal.dim();
  std::size_t c = 0;
  for (int yp = 0; yp < n; ++yp) {
    const auto& povm = ideal.povm(yp);
    for (std::size_t bp = 0; bp < povm.size(); ++bp, ++c) {
      s.instrument.outcome_names.push_back("(" + std::to_string(yp + 1) + "," + povm.labels()[bp].str() + ")");
      s.instrument.kraus.push_back({detail::scaled_sqrt(povm.effect(bp), 1.0 / n)});
      for (int y = 0; y < n; ++y) {
        const auto yy = static_cast<std::size_t>(y);
        const Label out = y == yp ? povm.labels()[bp] : kNoClick;
        for (const auto& l : s.labels[yy]) {
          s.conditional[yy][c].push_back(l == out ? HermMat::identity(d) : HermMat::zero(d));
        }
        s.guess[yy][c] = out;
      }
    }
  }
  return mix_with_no_click(std::move(s), eta * n);
}

inline Strategy strat_partial_input(const Assembly& ideal, double eta) {
  detail::check_eta(eta, 0.5, "strat_partial_input");
  const auto& key = ideal.povm(0);
  const std::size_t k = key.size();
  Strategy s = detail::blank_strategy("partial-input", ideal, Case::b, k + 1);
  const int d = ideal.dim();
  const HermMat id = HermMat::identity(d);
  const HermMat zero = HermMat::zero(d);
  for (std::size_t c = 0; c <= k; ++c) {
    const bool forwarded = c == k;  // the c = no-click branch forwards the state untouched
    s.instrument.outcome_names.push_back(forwarded ? "∅" : key.labels()[c].str());
    s.instrument.kraus.push_back({forwarded ? std::sqrt(0.5) * CplxMat::Identity(d, d)
                                            : detail::scaled_sqrt(key.effect(c), 0.5)});
    const Label cl = forwarded ? kNoClick : key.labels()[c];
    for (int y = 0; y < ideal.n(); ++y) {
      const auto yy = static_cast<std::size_t>(y);
      for (std::size_t i = 0; i < s.labels[yy].size(); ++i) {
        const Label& b = s.labels[yy][i];
        if (y == 0) {
          s.conditional[yy][c].push_back(b == cl ? id : zero);
        } else if (forwarded) {
          s.conditional[yy][c].push_back(b.is_none() ? zero : ideal.povm(y).effect(i));
        } else {
          s.conditional[yy][c].push_back(b.is_none() ? id : zero);
        }
      }
    }
    s.guess[0][c] = cl;
  }
  return mix_with_no_click(std::move(s), eta * 2.0);
}

inline Strategy strat_partial_outcome_generic(const Assembly& ideal, double eta) {
  std::size_t k = 0;
  for (const auto& p : ideal.povms()) k = std::max(k, p.size());
  detail::check_eta(eta, 1.0 / static_cast<double>(k), "strat_partial_outcome_generic");
  Strategy s = detail::blank_strategy("partial-outcome", ideal, Case::c, k);
  const int d = ideal.dim();
  const HermMat id = HermMat::identity(d);
  for (std::size_t c = 0; c < k; ++c) {
    s.instrument.outcome_names.push_back(std::to_string(c + 1));
    s.instrument.kraus.push_back({std::sqrt(1.0 / static_cast<double>(k)) * CplxMat::Identity(d, d)});
    for (int y = 0; y < ideal.n(); ++y) {
      const auto yy = static_cast<std::size_t>(y);
      const auto& povm = ideal.povm(y);
      const HermMat bc = c < povm.size() ? povm.effect(c) : HermMat::zero(d);
      for (std::size_t i = 0; i < s.labels[yy].size(); ++i) {
        if (s.labels[yy][i].is_none()) {
          s.conditional[yy][c].push_back(id - bc);
        } else {
          s.conditional[yy][c].push_back(i == c ? bc : HermMat::zero(d));
        }
      }
      s.guess[yy][c] = c < povm.size() ? povm.labels()[c] : povm.labels().front();
    }
  }
  return mix_with_no_click(std::move(s), eta * static_cast<double>(k));
}

// Operators of the case-(d) weak measurement on the dilated space and its
// probabilistic reversal, with the two reversal margins.
struct CaseDReversal {
  int k = 0;
  double eta = 0.0;
  double gamma = 0.0;
  double margin_eta = 0.0;   // eta - gamma
  double margin_loss = 0.0;  // (1-eta)/(k-1) - gamma
  NaimarkDilation dilation;
  std::vector<CplxMat> kraus;     // on the dilated space, before the embedding
  std::vector<CplxMat> reversal;  // L_c
};

inline CaseDReversal case_d_reversal(const Assembly& ideal, double eta) {
  const auto& key = ideal.povm(0);
  const int k = static_cast<int>(key.size());
  if (k < 2) throw ValidationError("case_d_reversal: key measurement needs at least two outcomes");
  if (!(eta >= 1.0 / k - 1e-12 && eta <= 1.0)) throw ValidationError("case_d_reversal: eta below 1/k");
  CaseDReversal r;
  r.k = k;
  r.eta = eta;
  r.gamma = eta / k;
  r.margin_eta = eta - r.gamma;
  r.margin_loss = (1.0 - eta) / (k - 1) - r.gamma;
  if (r.margin_loss < -1e-12) {
    throw ReversalInvalidError("case_d_reversal: eta = " + std::to_string(eta) + " above k/(2k-1) = " +
                                   std::to_string(static_cast<double>(k) / (2.0 * k - 1.0)) +
                                   "; reversal needs gamma <= (1-eta)/(k-1)",
                               {"gamma <= eta", "gamma <= (1-eta)/(k-1)"}, {r.margin_eta, r.margin_loss});
  }
  r.dilation = naimark_dilate(key.effects());
  const int big = r.dilation.embed_dim;
  const CplxMat id = CplxMat::Identity(big, big);
  const double a = std::sqrt((1.0 - eta) / (k - 1));
  const double inv_b = eta > 0 ? std::sqrt(1.0 / eta) : 0.0;
  const double inv_a = eta < 1 ? std::sqrt((k - 1) / (1.0 - eta)) : 0.0;
  for (const auto& p : r.dilation.projectors) {
    r.kraus.push_back(std::sqrt(eta) * p.mat() + a * (id - p.mat()));
    r.reversal.push_back(std::sqrt(r.gamma) * (inv_b * p.mat() + inv_a * (id - p.mat())));
  }
  return r;
}

inline Strategy strat_case_d_generic(const Assembly& ideal, double eta) {
  const auto& key = ideal.povm(0);
  const int k = static_cast<int>(key.size());
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("strat_case_d_generic: eta outside [0,1]");
  if (k < 2) throw ValidationError("strat_case_d_generic: key measurement needs at least two outcomes");
  if (eta < 1.0 / k) {
    std::size_t kmax = 0;
    for (const auto& p : ideal.povms()) kmax = std::max(kmax, p.size());
    if (eta <= 1.0 / static_cast<double>(kmax)) {
      Strategy s = strat_partial_outcome_generic(ideal, eta);
      s.gspec = gspec_case(Case::d, apply_loss(ideal, 1.0));
      return s;
    }
    Strategy s = strat_case_d_generic(ideal, 1.0 / k);
    return mix_with_no_click(std::move(s), eta * k);
  }
  const CaseDReversal rev = case_d_reversal(ideal, eta);
  Strategy s = detail::blank_strategy("case-d-generic", ideal, Case::d, static_cast<std::size_t>(k));
  const int big = rev.dilation.embed_dim;
  const HermMat id = HermMat::identity(big);
  const CplxMat id_k = CplxMat::Identity(k, k);
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    s.instrument.outcome_names.push_back(key.labels()[cc].str());
    s.instrument.kraus.push_back({rev.kraus[cc] * rev.dilation.embedding});
    const HermMat& pc = rev.dilation.projectors[cc];
    for (int y = 0; y < ideal.n(); ++y) {
      const auto yy = static_cast<std::size_t>(y);
      const auto& povm = ideal.povm(y);
      if (y == 0) {
        for (const auto& b : s.labels[0]) {
          if (b.is_none()) {
            s.conditional[0][cc].push_back(id - pc);
          } else {
            s.conditional[0][cc].push_back(b == key.labels()[cc] ? pc : HermMat::zero(big));
          }
        }
        s.guess[0][cc] = key.labels()[cc];
        continue;
      }
      const CplxMat& l = rev.reversal[cc];
      HermMat used = HermMat::zero(big);
      for (std::size_t i = 0; i < povm.size(); ++i) {
        HermMat m = conjugate_adjoint(l, HermMat(kron(povm.effect(i).mat(), id_k)));
        used += m;
        s.conditional[yy][cc].push_back(std::move(m));
      }
      s.conditional[yy][cc].push_back(id - used);
    }
  }
  return s;
}

struct QubitWeakMeasurement {
  BlochVec m;
  double nu = 0.0;
  std::vector<CplxMat> kraus;    // c = +1, -1
  std::vector<CplxMat> inverse;  // analytic (pseudo-)inverses
};

inline QubitWeakMeasurement qubit_weak_measurement(const BlochVec& m, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ValidationError("weak measurement strength outside [0,1]");
  QubitWeakMeasurement w;
  w.m = m;
  w.nu = nu;
  for (int c : {1, -1}) {
    const CplxMat p = bloch_projector(m, c).mat();
    const CplxMat q = bloch_projector(m, -c).mat();
    w.kraus.push_back(std::sqrt((1 + nu) / 2) * p + std::sqrt((1 - nu) / 2) * q);
    w.inverse.push_back(std::sqrt(2 / (1 + nu)) * p + (nu < 1 ? std::sqrt(2 / (1 - nu)) : 0.0) * q);
  }
  return w;
}

inline int axis_sign(double x) { return x >= 0 ? 1 : -1; }

namespace detail {

inline Strategy qubit_blank(const std::string& name, std::span<const BlochVec> dirs, Case gcase,
                            const QubitWeakMeasurement& w) {
  const Assembly ideal = qubit_assembly(dirs);
  Strategy s = blank_strategy(name, ideal, gcase, 2);
  s.instrument.outcome_names = {"+", "-"};
  s.instrument.kraus = {{w.kraus[0]}, {w.kraus[1]}};
  return s;
}

// M_g = eta K^-1 B_g K^-1 for the guessed label g, M_{-g} = 0, M_0 = 1 - M_g.
inline void sharp_conditionals(Strategy& s, int y, const BlochVec& r, const QubitWeakMeasurement& w, double eta) {
  const auto yy = static_cast<std::size_t>(y);
  const int sg = axis_sign(w.m.dot(r));
  for (std::size_t ci = 0; ci < 2; ++ci) {
    const int c = ci == 0 ? 1 : -1;
    const int g = c * sg;
    const HermMat star(eta * w.inverse[ci] * bloch_projector(r, g).mat() * w.inverse[ci]);
    for (const auto& b : s.labels[yy]) {
      if (b.is_none()) {
        s.conditional[yy][ci].push_back(HermMat::identity(2) - star);
      } else {
        s.conditional[yy][ci].push_back(b.value() == g ? star : HermMat::zero(2));
      }
    }
    s.guess[yy][ci] = Label::of(g);
  }
}

}  // namespace detail

inline Strategy strat_qubit_case_c(std::span<const BlochVec> dirs, const BlochVec& m, double nu, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("strat_qubit_case_c: eta outside [0,1]");
  const auto w = qubit_weak_measurement(m, nu);
  std::vector<std::string> names;
  std::vector<double> margins;
  bool ok = true;
  for (std::size_t y = 0; y < dirs.size(); ++y) {
    const double f = F(nu, std::min(std::abs(m.dot(dirs[y])), 1.0));
    names.push_back("F(nu, t_" + std::to_string(y + 1) + ")");
    margins.push_back(f - eta);
    ok = ok && f - eta >= -1e-12;
  }
  if (!ok) {
    std::string msg = "strat_qubit_case_c: validity violated;";
    for (std::size_t y = 0; y < margins.size(); ++y) msg += " y=" + std::to_string(y + 1) + " margin " + std::to_string(margins[y]);
    throw BoundViolatedError(msg, std::move(names), std::move(margins));
  }
  Strategy s = detail::qubit_blank("qubit-c", dirs, Case::c, w);
  for (std::size_t y = 0; y < dirs.size(); ++y) {
    detail::sharp_conditionals(s, static_cast<int>(y), dirs[y], w, eta);
  }
  return s;
}

// Cone axis of the directions and nu = mu / (1 + sqrt(1 - mu^2)).
inline Strategy strat_qubit_case_c_optimal(std::span<const BlochVec> dirs, double eta) {
  const ConeResult cone = double_cone_angle(dirs);
  double mu = 1.0;
  for (const auto& r : dirs) mu = std::min(mu, std::abs(cone.axis.dot(r)));
  const double nu = mu / (1.0 + std::sqrt(std::max(0.0, 1.0 - mu * mu)));
  return strat_qubit_case_c(dirs, cone.axis, nu, eta);
}

struct QubitCaseDSetup {
  BlochVec m;
  double nu = 0.0;
  std::vector<double> gamma;  // per setting; gamma[0] unused
  double theta = 0.0;
};

inline QubitCaseDSetup qubit_case_d_setup(std::span<const BlochVec> dirs, CaseDVariant v) {
  if (dirs.empty()) throw ValidationError("qubit case d: no directions");
  QubitCaseDSetup st;
  const BlochVec r1 = dirs[0];
  if (v == CaseDVariant::n2) {
    if (dirs.size() != 2) throw ValidationError("qubit case d, n2 variant: needs exactly two directions");
    const BlochVec r2 = r1.dot(dirs[1]) >= 0 ? dirs[1] : -dirs[1];
    st.theta = std::acos(std::clamp(r1.dot(r2), 0.0, 1.0));
    const auto p = case_d_params(st.theta, v);
    BlochVec e = r2 - r1.scaled(r1.dot(r2));
    const double s = std::sin(*p.x_star);
    st.m = e.norm() > 1e-12 && s != 0.0 ? (r1.scaled(std::cos(*p.x_star)) + e.normalized().scaled(s)).normalized() : r1;
    st.nu = p.nu_star;
  } else {
    st.theta = case_d_axis_angle(dirs);
    st.m = r1;
    st.nu = case_d_params(st.theta, v).nu_star;
  }
  st.gamma.assign(dirs.size(), 0.0);
  for (std::size_t y = 1; y < dirs.size(); ++y) {
    st.gamma[y] = optimal_gamma(st.nu, std::min(std::abs(st.m.dot(dirs[y])), 1.0));
  }
  return st;
}

inline Strategy strat_qubit_case_d(std::span<const BlochVec> dirs, CaseDVariant v, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("strat_qubit_case_d: eta outside [0,1]");
  const auto st = qubit_case_d_setup(dirs, v);
  const auto w = qubit_weak_measurement(st.m, st.nu);

  std::vector<std::string> names{"F(nu, t_1)"};
  std::vector<double> margins{F(st.nu, std::min(std::abs(st.m.dot(dirs[0])), 1.0)) - eta};
  for (std::size_t y = 1; y < dirs.size(); ++y) {
    const double t = std::min(std::abs(st.m.dot(dirs[y])), 1.0);
    names.push_back("G(nu, t_" + std::to_string(y + 1) + ")");
    margins.push_back(g_objective(st.nu, t, st.gamma[y]) - eta);
  }
  if (*std::min_element(margins.begin(), margins.end()) < -1e-12) {
    std::string msg = "strat_qubit_case_d: validity violated;";
    for (std::size_t i = 0; i < margins.size(); ++i) msg += " " + names[i] + " margin " + std::to_string(margins[i]);
    throw BoundViolatedError(msg, std::move(names), std::move(margins));
  }

  Strategy s = detail::qubit_blank(std::string("qubit-d-") + to_string(v), dirs, Case::d, w);
  detail::sharp_conditionals(s, 0, dirs[0], w, eta);
  for (std::size_t y = 1; y < dirs.size(); ++y) {
    const int sg = axis_sign(st.m.dot(dirs[y]));
    for (std::size_t ci = 0; ci < 2; ++ci) {
      const int c = ci == 0 ? 1 : -1;
      HermMat used = HermMat::zero(2);
      std::vector<HermMat> effects;
      for (const auto& b : s.labels[y]) {
        if (b.is_none()) continue;
        const double q = 0.5 * (1.0 + b.value() * c * sg * st.gamma[y]);
        HermMat mb(q * eta * w.inverse[ci] * bloch_projector(dirs[y], b.value()).mat() * w.inverse[ci]);
        used += mb;
        effects.push_back(std::move(mb));
      }
      effects.push_back(HermMat::identity(2) - used);
      s.conditional[y][ci] = std::move(effects);
    }
  }
  return s;
}

// Effective operators E_{c,b|y} with a response function over gspec.subsets[y].
struct PartialParent {
  int dim = 0;
  std::vector<std::vector<Label>> labels;
  GSpec gspec;
  std::vector<std::string> outcome_names;
  std::vector<std::vector<std::vector<HermMat>>> blocks;    // [c][y][label index]
  std::vector<std::vector<std::vector<double>>> response;  // [y][c][j]

  std::size_t size() const { return blocks.size(); }
  HermMat marginal(std::size_t c, int y) const {
    HermMat e = HermMat::zero(dim);
    for (const auto& b : blocks[c][static_cast<std::size_t>(y)]) e += b;
    return e;
  }
  HermMat star(std::size_t c, int y) const {
    HermMat e = HermMat::zero(dim);
    const auto yy = static_cast<std::size_t>(y);
    for (std::size_t i = 0; i < labels[yy].size(); ++i) {
      if (gspec.contains(y, labels[yy][i])) e += blocks[c][yy][i];
    }
    return e;
  }
};

struct PartialParentResiduals {
  double nosignaling = 0.0;
  double consistency = 0.0;
  double partial_jm = 0.0;
  double response_normalization = 0.0;
  double min_eigenvalue = 0.0;
};

inline PartialParentResiduals validate_partial_parent(const PartialParent& pp, const Assembly& lossy) {
  PartialParentResiduals r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int y = 0; y < lossy.n(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    const auto& povm = lossy.povm(y);
    for (std::size_t i = 0; i < povm.size(); ++i) {
      const auto pi = std::find(pp.labels[yy].begin(), pp.labels[yy].end(), povm.labels()[i]);
      if (pi == pp.labels[yy].end()) throw ValidationError("partial parent: label sets differ from the assembly");
      const auto at = static_cast<std::size_t>(pi - pp.labels[yy].begin());
      HermMat sum = HermMat::zero(pp.dim);
      for (std::size_t c = 0; c < pp.size(); ++c) sum += pp.blocks[c][yy][at];
      r.consistency = std::max(r.consistency, max_abs_diff(sum, povm.effect(i)));
    }
    for (std::size_t c = 0; c < pp.size(); ++c) {
      r.nosignaling = std::max(r.nosignaling, max_abs_diff(pp.marginal(c, y), pp.marginal(c, 0)));
      for (const auto& b : pp.blocks[c][yy]) r.min_eigenvalue = std::min(r.min_eigenvalue, min_eigenvalue(b));
      const auto& gy = pp.gspec.subsets[yy];
      if (gy.empty()) continue;
      const HermMat st = pp.star(c, y);
      double total = 0.0;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        const double p = pp.response[yy][c][j];
        total += p;
        const auto i = static_cast<std::size_t>(
            std::find(pp.labels[yy].begin(), pp.labels[yy].end(), gy[j]) - pp.labels[yy].begin());
        r.partial_jm = std::max(r.partial_jm, max_abs_diff(pp.blocks[c][yy][i], p * st));
      }
      r.response_normalization = std::max(r.response_normalization, std::abs(total - 1.0));
    }
  }
  return r;
}

// Instrument sqrt(E_c) . sqrt(E_c) and conditionals E_c^{-1/2} E_{c,b|y} E_c^{-1/2}.
inline Strategy pp_to_strategy(const PartialParent& pp, double tol = 1e-9) {
  Strategy s;
  s.name = "from-partial-parent";
  s.labels = pp.labels;
  s.gspec = pp.gspec;
  s.response = pp.response;
  const std::size_t nc = pp.size();
  const int n = static_cast<int>(pp.labels.size());
  s.conditional.assign(static_cast<std::size_t>(n), std::vector<std::vector<HermMat>>(nc));
  s.guess.assign(static_cast<std::size_t>(n), std::vector<std::optional<Label>>(nc));
  for (std::size_t c = 0; c < nc; ++c) {
    const HermMat ec = pp.marginal(c, 0);
    const HermMat root = detail::spectral_map(ec, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
    const HermMat inv = pinv_sqrt(ec);
    const HermMat proj = support_projector(ec);
    const CplxMat outside = CplxMat::Identity(pp.dim, pp.dim) - proj.mat();
    s.instrument.outcome_names.push_back(c < pp.outcome_names.size() ? pp.outcome_names[c] : std::to_string(c + 1));
    s.instrument.kraus.push_back({root.mat()});
    for (int y = 0; y < n; ++y) {
      const auto yy = static_cast<std::size_t>(y);
      for (const auto& e : pp.blocks[c][yy]) {
        const double leak = max_abs(outside * e.mat());
        if (leak > tol) {
          throw SupportViolationError("pp_to_strategy: block leaves supp(E_c) by " + std::to_string(leak));
        }
        s.conditional[yy][c].push_back(HermMat(inv.mat() * e.mat() * inv.mat()));
      }
      const auto& gy = pp.gspec.subsets[yy];
      for (std::size_t j = 0; j < gy.size(); ++j) {
        if (std::abs(pp.response[yy][c][j] - 1.0) <= 1e-12) s.guess[yy][c] = gy[j];
      }
    }
  }
  return s;
}

// E_{c,b|y} = I_c^dagger(M_{b|y,c}), response from the strategy's table or guesses.
inline PartialParent strategy_to_pp(const Strategy& s) {
  PartialParent pp;
  pp.dim = s.instrument.in_dim();
  pp.labels = s.labels;
  pp.gspec = s.gspec;
  pp.outcome_names = s.instrument.outcome_names;
  const std::size_t nc = s.instrument.size();
  pp.response.assign(s.labels.size(), std::vector<std::vector<double>>(nc));
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<std::vector<HermMat>> per_y;
    for (int y = 0; y < s.n(); ++y) {
      std::vector<HermMat> row;
      for (std::size_t i = 0; i < s.labels[static_cast<std::size_t>(y)].size(); ++i) row.push_back(s.effective(y, c, i));
      per_y.push_back(std::move(row));
      auto resp = response_row(s, y, c);
      const auto& gy = s.gspec.subsets[static_cast<std::size_t>(y)];
      if (resp.empty() && !gy.empty()) resp.assign(gy.size(), 1.0 / static_cast<double>(gy.size()));
      pp.response[static_cast<std::size_t>(y)][c] = std::move(resp);
    }
    pp.blocks.push_back(std::move(per_y));
  }
  return pp;
}

inline std::string beta_name(const BetaTuple& beta) {
  std::string out = "(";
  for (std::size_t y = 0; y < beta.size(); ++y) {
    out += (y ? "," : "") + (beta[y] ? beta[y]->str() : std::string("-"));
  }
  return out + ")";
}

inline PartialParent randomize_to_deterministic(const PartialParent& pp) {
  const int n = static_cast<int>(pp.labels.size());
  for (int y = 0; y < n; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    if (pp.gspec.subsets[yy].empty()) continue;
    for (std::size_t c = 0; c < pp.size(); ++c) {
      const auto& row = pp.response[yy][c];
      double total = 0.0;
      for (double p : row) {
        if (p < -1e-12) throw ValidationError("randomize_to_deterministic: negative response");
        total += p;
      }
      if (row.size() != pp.gspec.subsets[yy].size() || std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("randomize_to_deterministic: response row not normalized");
      }
    }
  }
  PartialParent out;
  out.dim = pp.dim;
  out.labels = pp.labels;
  out.gspec = pp.gspec;
  const auto betas = detail::enumerate_betas(pp.gspec);
  out.response.assign(static_cast<std::size_t>(n), {});
  for (const auto& beta : betas) {
    out.outcome_names.push_back(beta_name(beta));
    std::vector<std::vector<HermMat>> per_y;
    for (int y = 0; y < n; ++y) {
      const auto yy = static_cast<std::size_t>(y);
      std::vector<HermMat> row(pp.labels[yy].size(), HermMat::zero(pp.dim));
      for (std::size_t c = 0; c < pp.size(); ++c) {
        double w = 1.0;
        for (int z = 0; z < n; ++z) {
          const auto zz = static_cast<std::size_t>(z);
          const auto& gz = pp.gspec.subsets[zz];
          if (gz.empty()) continue;
          const auto j = static_cast<std::size_t>(std::find(gz.begin(), gz.end(), *beta[zz]) - gz.begin());
          w *= pp.response[zz][c][j];
        }
        if (w == 0.0) continue;
        const HermMat st = pp.star(c, y);
        for (std::size_t i = 0; i < pp.labels[yy].size(); ++i) {
          const Label& b = pp.labels[yy][i];
          if (!pp.gspec.contains(y, b)) {
            row[i] += w * pp.blocks[c][yy][i];
          } else if (beta[yy] && *beta[yy] == b) {
            row[i] += w * st;
          }
        }
      }
      per_y.push_back(std::move(row));
      std::vector<double> resp;
      for (const auto& b : pp.gspec.subsets[yy]) resp.push_back(beta[yy] && *beta[yy] == b ? 1.0 : 0.0);
      out.response[yy].push_back(std::move(resp));
    }
    out.blocks.push_back(std::move(per_y));
  }
  return out;
}

// Deterministic-response parent read off a solved feasibility program.
inline PartialParent program_to_pp(const GjmProgram& p, std::span<const HermMat> blocks) {
  PartialParent pp;
  pp.dim = p.dim;
  pp.labels = p.labels;
  pp.gspec = p.gspec;
  pp.response.assign(static_cast<std::size_t>(p.n), {});
  for (std::size_t beta = 0; beta < p.beta_tuples.size(); ++beta) {
    pp.outcome_names.push_back(beta_name(p.beta_tuples[beta]));
    std::vector<std::vector<HermMat>> per_y;
    for (int y = 0; y < p.n; ++y) {
      const auto yy = static_cast<std::size_t>(y);
      std::vector<HermMat> row;
      for (std::size_t i = 0; i < p.labels[yy].size(); ++i) row.push_back(effective_block(p, blocks, beta, y, i));
      per_y.push_back(std::move(row));
      std::vector<double> resp;
      for (const auto& b : p.gspec.subsets[yy]) resp.push_back(p.beta_tuples[beta][yy] == b ? 1.0 : 0.0);
      pp.response[yy].push_back(std::move(resp));
    }
    pp.blocks.push_back(std::move(per_y));
  }
  return pp;
}

}  // namespace gjm
