#pragma once

// Measurement assemblies, outcome labels, guessable-outcome subsets and the
// detection-loss / visibility transforms.

#include "gjm/matqm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gjm {

// Outcome label: an integer value or the distinguished no-click outcome.
class Label {
 public:
  constexpr Label() = default;
  static constexpr Label of(int v) { return Label(v, false); }
  static constexpr Label none() { return Label(0, true); }

  constexpr bool is_none() const { return none_; }
  constexpr int value() const { return value_; }

  std::string str() const {
    if (none_) {
      return "∅";
    }
    return std::to_string(value_);
  }

  friend constexpr bool operator==(const Label& a, const Label& b) {
    return a.none_ == b.none_ && (a.none_ || a.value_ == b.value_);
  }
  // Conclusive labels order by value; no-click sorts last.
  friend constexpr std::strong_ordering operator<=>(const Label& a, const Label& b) {
    if (a.none_ != b.none_) {
      return a.none_ ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    if (a.none_) {
      return std::strong_ordering::equal;
    }
    return a.value_ <=> b.value_;
  }

 private:
  constexpr Label(int v, bool none) : value_(v), none_(none) {}
  int value_ = 0;
  bool none_ = false;
};

inline const Label kPlus = Label::of(1);
inline const Label kMinus = Label::of(-1);
inline const Label kNoClick = Label::none();

class Povm {
 public:
  Povm() = default;
  Povm(std::vector<Label> labels, std::vector<HermMat> effects, double tol = 1e-10)
      : labels_(std::move(labels)), effects_(std::move(effects)) {
    if (labels_.size() != effects_.size()) {
      throw ValidationError("Povm: label and effect counts differ");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      for (std::size_t j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) {
          throw ValidationError("Povm: duplicate label " + labels_[i].str());
        }
      }
    }
    validate_povm_effects(effects_, tol);
  }

  int dim() const { return effects_.front().dim(); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<HermMat>& effects() const { return effects_; }
  const HermMat& effect(std::size_t i) const { return effects_[i]; }

  std::optional<std::size_t> index_of(const Label& l) const {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }
  const HermMat& effect(const Label& l) const {
    auto i = index_of(l);
    if (!i) {
      throw ValidationError("Povm: unknown label " + l.str());
    }
    return effects_[*i];
  }
  bool has_no_click() const { return index_of(kNoClick).has_value(); }

 private:
  std::vector<Label> labels_;
  std::vector<HermMat> effects_;
};

class Assembly {
 public:
  Assembly() = default;
  explicit Assembly(std::vector<Povm> povms) : povms_(std::move(povms)) {
    if (povms_.empty()) {
      throw ValidationError("Assembly: need at least one setting");
    }
    for (const auto& p : povms_) {
      if (p.dim() != povms_.front().dim()) {
        throw ValidationError("Assembly: settings act on different dimensions");
      }
    }
  }

  int dim() const { return povms_.front().dim(); }
  int n() const { return static_cast<int>(povms_.size()); }
  const Povm& povm(int y) const { return povms_.at(static_cast<std::size_t>(y)); }
  const std::vector<Povm>& povms() const { return povms_; }
  bool lossy() const {
    return std::any_of(povms_.begin(), povms_.end(), [](const Povm& p) { return p.has_no_click(); });
  }

 private:
  std::vector<Povm> povms_;
};

// Per-setting subsets of guessable outcome labels. The complement is derived.
struct GSpec {
  std::vector<std::vector<Label>> subsets;

  bool contains(int y, const Label& l) const {
    const auto& s = subsets.at(static_cast<std::size_t>(y));
    return std::find(s.begin(), s.end(), l) != s.end();
  }
  bool empty_at(int y) const { return subsets.at(static_cast<std::size_t>(y)).empty(); }

  std::vector<Label> complement(const Assembly& a, int y) const {
    std::vector<Label> out;
    for (const auto& l : a.povm(y).labels()) {
      if (!contains(y, l)) {
        out.push_back(l);
      }
    }
    return out;
  }

  // Every subset a subset of the matching POVM's labels, one subset per setting.
  void check_against(const Assembly& a) const {
    if (static_cast<int>(subsets.size()) != a.n()) {
      throw ValidationError("GSpec: " + std::to_string(subsets.size()) + " subsets for " +
                            std::to_string(a.n()) + " settings");
    }
    for (int y = 0; y < a.n(); ++y) {
      const auto& s = subsets[static_cast<std::size_t>(y)];
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!a.povm(y).index_of(s[i])) {
          throw ValidationError("GSpec: label " + s[i].str() + " unknown for setting " + std::to_string(y));
        }
        for (std::size_t j = i + 1; j < s.size(); ++j) {
          if (s[i] == s[j]) {
            throw ValidationError("GSpec: duplicate label " + s[i].str());
          }
        }
      }
    }
  }

  // True if every subset here is contained in the matching subset of `wider`.
  bool subset_of(const GSpec& wider) const {
    if (subsets.size() != wider.subsets.size()) {
      return false;
    }
    for (std::size_t y = 0; y < subsets.size(); ++y) {
      for (const auto& l : subsets[y]) {
        if (!wider.contains(static_cast<int>(y), l)) {
          return false;
        }
      }
    }
    return true;
  }
};

struct LossParams {
  double eta = 1.0;
  double nu_vis = 1.0;
};

enum class Case { a, b, c, d };

inline Case parse_case(std::string_view s) {
  if (s == "a") return Case::a;
  if (s == "b") return Case::b;
  if (s == "c") return Case::c;
  if (s == "d") return Case::d;
  throw ValidationError("unknown case tag '" + std::string(s) + "' (expected a, b, c or d)");
}

inline char case_char(Case c) { return "abcd"[static_cast<int>(c)]; }

// Two-outcome projective qubit measurements along each direction, labels {+1, -1}.
inline Assembly qubit_assembly(std::span<const BlochVec> directions) {
  if (directions.empty()) {
    throw ValidationError("qubit_assembly: no directions given");
  }
  std::vector<Povm> povms;
  for (const auto& r : directions) {
    povms.emplace_back(std::vector<Label>{kPlus, kMinus},
                       std::vector<HermMat>{bloch_projector(r, 1), bloch_projector(r, -1)});
  }
  return Assembly(std::move(povms));
}

inline Assembly qubit_assembly(std::initializer_list<BlochVec> directions) {
  return qubit_assembly(std::span<const BlochVec>(directions.begin(), directions.size()));
}

// n rank-1 projective measurements on C^k with labels 1..k: the computational
// basis, then Fourier bases twisted by quadratic phases exp(2 pi i y j^2 / k).
// Deterministic; distinct settings never commute.
inline Assembly fourier_assembly(int n, int k) {
  if (n < 1 || k < 2) {
    throw ValidationError("fourier_assembly: need n >= 1 and k >= 2");
  }
  const double tau = 2.0 * std::acos(-1.0);
  std::vector<Povm> povms;
  for (int y = 0; y < n; ++y) {
    std::vector<Label> labels;
    std::vector<HermMat> effects;
    for (int b = 0; b < k; ++b) {
      CplxVec v = CplxVec::Zero(k);
      if (y == 0) {
        v(b) = 1.0;
      } else {
        for (int j = 0; j < k; ++j) {
          v(j) = std::polar(1.0 / std::sqrt(double(k)), tau * (double(b) * j + double(y - 1) * j * j / 2.0) / k);
        }
      }
      labels.push_back(Label::of(b + 1));
      effects.emplace_back(v * v.adjoint());
    }
    povms.emplace_back(std::move(labels), std::move(effects));
  }
  return Assembly(std::move(povms));
}

inline Assembly apply_loss_visibility(const Assembly& a, const LossParams& p) {
  if (p.eta < 0.0 || p.eta > 1.0 || p.nu_vis < 0.0 || p.nu_vis > 1.0) {
    throw ValidationError("loss parameters must lie in [0,1]");
  }
  if (a.lossy()) {
    throw ValidationError("apply_loss: assembly already has a no-click outcome");
  }
  const int d = a.dim();
  const HermMat id = HermMat::identity(d);
  std::vector<Povm> out;
  for (const auto& povm : a.povms()) {
    std::vector<Label> labels = povm.labels();
    std::vector<HermMat> effects;
    for (const auto& e : povm.effects()) {
      const double t = e.trace() / d;
      effects.push_back((p.eta * p.nu_vis) * e + (p.eta * (1.0 - p.nu_vis) * t) * id);
    }
    labels.push_back(kNoClick);
    effects.push_back((1.0 - p.eta) * id);
    out.emplace_back(std::move(labels), std::move(effects));
  }
  return Assembly(std::move(out));
}

inline Assembly apply_loss(const Assembly& a, double eta) {
  return apply_loss_visibility(a, LossParams{eta, 1.0});
}

inline std::vector<Label> conclusive_labels(const Povm& p) {
  std::vector<Label> out;
  for (const auto& l : p.labels()) {
    if (!l.is_none()) {
      out.push_back(l);
    }
  }
  return out;
}

inline GSpec gspec_case(Case c, const Assembly& a) {
  if (!a.lossy()) {
    throw ValidationError("gspec_case: assembly has no no-click outcome");
  }
  GSpec g;
  for (int y = 0; y < a.n(); ++y) {
    const auto& p = a.povm(y);
    switch (c) {
      case Case::a:
        g.subsets.push_back(p.labels());
        break;
      case Case::b:
        g.subsets.push_back(y == 0 ? p.labels() : std::vector<Label>{});
        break;
      case Case::c:
        g.subsets.push_back(conclusive_labels(p));
        break;
      case Case::d:
        g.subsets.push_back(y == 0 ? conclusive_labels(p) : std::vector<Label>{});
        break;
    }
  }
  return g;
}

}  // namespace gjm
