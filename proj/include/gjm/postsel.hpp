#pragma once

// The Alice-Bob-Eve distribution of the post-selection example: entropies with
// and without the click announcement, one-way key-rate differences, sampling
// checks and the single-erasure parity reconciliation toy.

#include "gjm/matqm.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gjm {

using Rational = boost::rational<std::int64_t>;

// P(a, b, e) with a, e in [0, d) and b in [0, d]; b = d is the no-click outcome.
template <typename T>
struct AbeTable {
  int d = 0;
  std::vector<T> p;

  T& at(int a, int b, int e) { return p[index(a, b, e)]; }
  const T& at(int a, int b, int e) const { return p[index(a, b, e)]; }
  std::size_t index(int a, int b, int e) const {
    return (static_cast<std::size_t>(a) * (d + 1) + static_cast<std::size_t>(b)) * d + static_cast<std::size_t>(e);
  }
  int no_click() const { return d; }
};

namespace detail {
template <typename T>
AbeTable<T> build_abe(int d, T eta) {
  if (d < 2) throw ValidationError("abe_dist: alphabet size must be at least 2");
  if (eta < T(0) || eta > T(1)) throw ValidationError("abe_dist: eta outside [0,1]");
  AbeTable<T> t;
  t.d = d;
  t.p.assign(static_cast<std::size_t>(d) * (d + 1) * d, T(0));
  for (int a = 0; a < d; ++a) {
    t.at(a, a, a) = eta / T(d);
    for (int e = 0; e < d; ++e) t.at(a, d, e) = (T(1) - eta) / T(d * d);
  }
  return t;
}
}  // namespace detail

struct AbeDist {
  double eta = 0.0;
  AbeTable<double> table;
  int d() const { return table.d; }
};

inline AbeDist abe_dist(int d, double eta) { return AbeDist{eta, detail::build_abe<double>(d, eta)}; }

inline AbeTable<Rational> abe_dist_exact(int d, Rational eta) { return detail::build_abe<Rational>(d, eta); }

namespace detail {

inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// Joint entropy of the marginal on the kept coordinates; key(a, b, e) -> cell index.
template <typename Key>
double marginal_entropy(const AbeTable<double>& t, std::size_t cells, Key key) {
  std::vector<double> m(cells, 0.0);
  for (int a = 0; a < t.d; ++a) {
    for (int b = 0; b <= t.d; ++b) {
      for (int e = 0; e < t.d; ++e) m[key(a, b, e)] += t.at(a, b, e);
    }
  }
  double h = 0.0;
  for (double p : m) h += plogp(p);
  return h;
}

}  // namespace detail

struct EntropyReport {
  double h_A_given_E = 0.0;
  double h_A_given_Eprime = 0.0;  // E' = (E, C), C the click flag
  double i_AB_minus_AE = 0.0;
  double i_BA_minus_BE = 0.0;
  double n_rounds = 1.0;

  EntropyReport scaled(double n) const {
    EntropyReport r = *this;
    r.h_A_given_E *= n;
    r.h_A_given_Eprime *= n;
    r.i_AB_minus_AE *= n;
    r.i_BA_minus_BE *= n;
    r.n_rounds = n;
    return r;
  }
};

// Per-round values by direct summation over a (possibly empirical) table.
inline EntropyReport entropies_from_table(const AbeTable<double>& t) {
  using detail::marginal_entropy;
  const auto d = static_cast<std::size_t>(t.d);
  const auto D = d + 1;
  auto A = [](int a, int, int) { return static_cast<std::size_t>(a); };
  auto B = [](int, int b, int) { return static_cast<std::size_t>(b); };
  auto E = [](int, int, int e) { return static_cast<std::size_t>(e); };
  auto AE = [d](int a, int, int e) { return static_cast<std::size_t>(a) * d + static_cast<std::size_t>(e); };
  auto AB = [D](int a, int b, int) { return static_cast<std::size_t>(a) * D + static_cast<std::size_t>(b); };
  auto BE = [d](int, int b, int e) { return static_cast<std::size_t>(b) * d + static_cast<std::size_t>(e); };
  const int nc = t.d;
  auto EC = [d, nc](int, int b, int e) { return static_cast<std::size_t>(e) + (b == nc ? 0 : d); };
  auto AEC = [d, nc](int a, int b, int e) {
    return (static_cast<std::size_t>(a) * d + static_cast<std::size_t>(e)) * 2 + (b == nc ? 0 : 1);
  };

  const double hA = marginal_entropy(t, d, A);
  const double hB = marginal_entropy(t, D, B);
  const double hE = marginal_entropy(t, d, E);
  const double hAE = marginal_entropy(t, d * d, AE);
  const double hAB = marginal_entropy(t, d * D, AB);
  const double hBE = marginal_entropy(t, D * d, BE);
  const double hEC = marginal_entropy(t, 2 * d, EC);
  const double hAEC = marginal_entropy(t, 2 * d * d, AEC);

  const double iAB = hA + hB - hAB;
  const double iAE = hA + hE - hAE;
  const double iBE = hB + hE - hBE;
  EntropyReport r;
  r.h_A_given_E = hAE - hE;
  r.h_A_given_Eprime = hAEC - hEC;
  r.i_AB_minus_AE = iAB - iAE;
  r.i_BA_minus_BE = iAB - iBE;
  return r;
}

inline EntropyReport entropies_closed_form(int d, double eta) {
  if (d < 2 || eta < 0.0 || eta > 1.0) throw ValidationError("entropies: domain violation");
  using detail::plogp;
  const double dd = d;
  EntropyReport r;
  r.h_A_given_E = plogp(eta + (1 - eta) / dd) + (dd - 1) * plogp((1 - eta) / dd);
  r.h_A_given_Eprime = (1 - eta) * std::log2(dd);
  auto xlog = [](double x) { return x > 0.0 ? x * std::log2(x) : 0.0; };
  r.i_AB_minus_AE = eta * std::log2(dd) - (xlog(1 + eta * (dd - 1)) + (dd - 1) * xlog(1 - eta)) / dd;
  r.i_BA_minus_BE = 0.0;
  return r;
}

inline EntropyReport entropies(const AbeDist& dist) { return entropies_from_table(dist.table); }

// True when the (B, A) and (B, E) joint tables coincide cell by cell in exact
// arithmetic, which makes I(B:A) - I(B:E) exactly zero.
inline bool exact_reverse_rate_zero(const AbeTable<Rational>& t) {
  for (int b = 0; b <= t.d; ++b) {
    for (int x = 0; x < t.d; ++x) {
      Rational pa(0), pe(0);
      for (int y = 0; y < t.d; ++y) {
        pa += t.at(x, b, y);
        pe += t.at(y, b, x);
      }
      if (pa != pe) return false;
    }
  }
  return true;
}

inline Rational exact_total(const AbeTable<Rational>& t) {
  Rational s(0);
  for (const auto& p : t.p) s += p;
  return s;
}

struct MonteCarloReport {
  std::size_t samples = 0;
  EntropyReport estimate;
  EntropyReport std_error;
};

namespace detail {

// Sample variance of an influence function g(a, b, e) under the empirical table.
template <typename G>
double influence_se(const AbeTable<double>& emp, std::size_t n, G g) {
  double mean = 0.0;
  double sq = 0.0;
  for (int a = 0; a < emp.d; ++a) {
    for (int b = 0; b <= emp.d; ++b) {
      for (int e = 0; e < emp.d; ++e) {
        const double p = emp.at(a, b, e);
        if (p <= 0.0) continue;
        const double v = g(a, b, e);
        mean += p * v;
        sq += p * v * v;
      }
    }
  }
  return std::sqrt(std::max(sq - mean * mean, 0.0) / static_cast<double>(n));
}

}  // namespace detail

// Seeded sampling over a fixed number of shards; the result does not depend on
// how many shards run at once.
inline MonteCarloReport monte_carlo(const AbeDist& dist, std::size_t samples, std::uint64_t seed,
                                    int jobs = 1, int shards = 8) {
  if (samples == 0) throw ValidationError("monte_carlo: need at least one sample");
  const auto& t = dist.table;
  std::vector<std::future<std::vector<std::size_t>>> futures;
  std::vector<std::vector<std::size_t>> counts(static_cast<std::size_t>(shards));
  auto run = [&t, samples, seed, shards](int s) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(s)};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<std::size_t> pick(t.p.begin(), t.p.end());
    std::vector<std::size_t> c(t.p.size(), 0);
    const std::size_t mine = samples / static_cast<std::size_t>(shards) +
                             (static_cast<std::size_t>(s) < samples % static_cast<std::size_t>(shards) ? 1 : 0);
    for (std::size_t i = 0; i < mine; ++i) ++c[pick(rng)];
    return c;
  };
  const int width = std::max(1, jobs);
  for (int base = 0; base < shards; base += width) {
    futures.clear();
    for (int s = base; s < std::min(shards, base + width); ++s) futures.push_back(std::async(std::launch::async, run, s));
    for (int s = base; s < std::min(shards, base + width); ++s) {
      counts[static_cast<std::size_t>(s)] = futures[static_cast<std::size_t>(s - base)].get();
    }
  }
  AbeTable<double> emp;
  emp.d = t.d;
  emp.p.assign(t.p.size(), 0.0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < c.size(); ++i) emp.p[i] += static_cast<double>(c[i]);
  }
  for (auto& p : emp.p) p /= static_cast<double>(samples);

  MonteCarloReport r;
  r.samples = samples;
  r.estimate = entropies_from_table(emp);

  // Marginals for the delta-method influence functions.
  const int d = t.d;
  std::vector<double> pA(static_cast<std::size_t>(d)), pB(static_cast<std::size_t>(d + 1)),
      pE(static_cast<std::size_t>(d)), pAE(static_cast<std::size_t>(d * d)),
      pAB(static_cast<std::size_t>(d * (d + 1))), pBE(static_cast<std::size_t>((d + 1) * d)),
      pEC(static_cast<std::size_t>(2 * d)), pAEC(static_cast<std::size_t>(2 * d * d));
  auto u = [](int v) { return static_cast<std::size_t>(v); };
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b <= d; ++b) {
      for (int e = 0; e < d; ++e) {
        const double p = emp.at(a, b, e);
        const int c = b == d ? 0 : 1;
        pA[u(a)] += p;
        pB[u(b)] += p;
        pE[u(e)] += p;
        pAE[u(a * d + e)] += p;
        pAB[u(a * (d + 1) + b)] += p;
        pBE[u(b * d + e)] += p;
        pEC[u(e * 2 + c)] += p;
        pAEC[u((a * d + e) * 2 + c)] += p;
      }
    }
  }
  const std::size_t n = samples;
  r.std_error.h_A_given_E = detail::influence_se(emp, n, [&](int a, int, int e) {
    return -std::log2(pAE[u(a * d + e)] / pE[u(e)]);
  });
  r.std_error.h_A_given_Eprime = detail::influence_se(emp, n, [&](int a, int b, int e) {
    const int c = b == d ? 0 : 1;
    return -std::log2(pAEC[u((a * d + e) * 2 + c)] / pEC[u(e * 2 + c)]);
  });
  auto pmi_ab = [&](int a, int b) { return std::log2(pAB[u(a * (d + 1) + b)] / (pA[u(a)] * pB[u(b)])); };
  auto pmi_ae = [&](int a, int e) { return std::log2(pAE[u(a * d + e)] / (pA[u(a)] * pE[u(e)])); };
  auto pmi_be = [&](int b, int e) { return std::log2(pBE[u(b * d + e)] / (pB[u(b)] * pE[u(e)])); };
  r.std_error.i_AB_minus_AE =
      detail::influence_se(emp, n, [&](int a, int b, int e) { return pmi_ab(a, b) - pmi_ae(a, e); });
  r.std_error.i_BA_minus_BE =
      detail::influence_se(emp, n, [&](int a, int b, int e) { return pmi_ab(a, b) - pmi_be(b, e); });
  return r;
}

// Bob's symbols: 0, 1 or nullopt for an erasure.
using BitString = std::vector<int>;
using ErasedString = std::vector<std::optional<int>>;

struct ReconcileResult {
  ErasedString bob_corrected;
  std::vector<int> leaked_parities;  // one per block, in order
  std::size_t filled = 0;
};

inline ReconcileResult parity_reconcile(const BitString& alice, const ErasedString& bob, std::size_t block) {
  if (alice.size() != bob.size()) throw ValidationError("parity_reconcile: strings differ in length");
  if (block < 2) throw ValidationError("parity_reconcile: block size must be at least 2");
  ReconcileResult r;
  r.bob_corrected = bob;
  for (std::size_t start = 0; start < alice.size(); start += block) {
    const std::size_t end = std::min(alice.size(), start + block);
    int parity = 0;
    int known = 0;
    std::size_t erased = 0;
    std::size_t where = 0;
    for (std::size_t i = start; i < end; ++i) {
      if (alice[i] != 0 && alice[i] != 1) throw ValidationError("parity_reconcile: Alice's string must be binary");
      parity ^= alice[i];
      if (bob[i]) {
        known ^= *bob[i] & 1;
      } else {
        ++erased;
        where = i;
      }
    }
    r.leaked_parities.push_back(parity);
    if (erased == 1) {
      r.bob_corrected[where] = parity ^ known;
      ++r.filled;
    }
  }
  return r;
}

inline BitString parse_bits(std::string_view s) {
  BitString out;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw ValidationError("parse_bits: expected only 0 and 1");
    out.push_back(ch - '0');
  }
  return out;
}

// Accepts 0, 1 and an erasure written as "∅", "x" or "?".
inline ErasedString parse_erased(std::string_view s) {
  static constexpr std::string_view empty_set = "∅";
  ErasedString out;
  for (std::size_t i = 0; i < s.size();) {
    if (s.substr(i, empty_set.size()) == empty_set) {
      out.emplace_back(std::nullopt);
      i += empty_set.size();
    } else if (s[i] == 'x' || s[i] == '?') {
      out.emplace_back(std::nullopt);
      ++i;
    } else if (s[i] == '0' || s[i] == '1') {
      out.emplace_back(s[i] - '0');
      ++i;
    } else {
      throw ValidationError("parse_erased: unexpected symbol");
    }
  }
  return out;
}

inline std::string format_erased(const ErasedString& s) {
  std::string out;
  for (const auto& v : s) out += v ? std::to_string(*v) : std::string("∅");
  return out;
}

}  // namespace gjm
