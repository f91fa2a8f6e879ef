#pragma once

// Closed-form detection-efficiency bounds, the auxiliary functions F and G of
// the qubit case-(d) construction, and the double-cone angle of a set of axes.

#include "gjm/matqm.hpp"
#include "gjm/povm.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace gjm {

class DomainError : public Error {
 public:
  using Error::Error;
};

inline double generic_bound(Case c, int n, int k) {
  if (n < 1 || k < 1) {
    throw DomainError("generic_bound: n and k must be positive");
  }
  switch (c) {
    case Case::a:
      return 1.0 / n;
    case Case::b:
      return 0.5;
    case Case::c:
      return std::max(1.0 / n, 1.0 / k);
    case Case::d:
      return static_cast<double>(k) / (2.0 * k - 1.0);
  }
  throw DomainError("generic_bound: unknown case");
}

enum class CaseDVariant { n2, general };

inline CaseDVariant parse_case_d_variant(std::string_view s) {
  if (s == "n2" || s == "n2-optimal") return CaseDVariant::n2;
  if (s == "general" || s == "cone-axis") return CaseDVariant::general;
  throw ValidationError("unknown case-d variant '" + std::string(s) + "' (expected n2 or general)");
}

inline const char* to_string(CaseDVariant v) { return v == CaseDVariant::n2 ? "n2" : "general"; }

namespace detail {
inline void check_theta(double theta, double hi, const char* who) {
  if (!(theta >= 0.0 && theta <= hi + 1e-12)) {
    throw DomainError(std::string(who) + ": theta outside its domain");
  }
}
}  // namespace detail

inline double qubit_bound_case_c(double theta) {
  detail::check_theta(theta, std::numbers::pi, "qubit_bound_case_c");
  return 1.0 / (1.0 + std::sin(theta / 2.0));
}

inline double qubit_bound_case_d(double theta, CaseDVariant v) {
  detail::check_theta(theta, std::numbers::pi / 2, "qubit_bound_case_d");
  const double s = std::sin(theta);
  return v == CaseDVariant::n2 ? 2.0 / (2.0 + s) : (1.0 + s) / (1.0 + 2.0 * s);
}

// n2 bound minus the general bound, in the factored form.
inline double case_d_bound_gap(double theta) {
  detail::check_theta(theta, std::numbers::pi / 2, "case_d_bound_gap");
  const double s = std::sin(theta);
  return s * (1.0 - s) / ((2.0 + s) * (1.0 + 2.0 * s));
}

namespace detail {
inline void check_nu_t(double nu, double t, const char* who) {
  if (!(nu >= 0.0 && nu <= 1.0 && t >= -1e-12 && t <= 1.0 + 1e-12)) {
    throw DomainError(std::string(who) + ": arguments outside nu in [0,1), t in [0,1]");
  }
}
}  // namespace detail

// (1 - nu^2) / (2 (1 - nu t)); nu = 1 is accepted as the limit value.
inline double F(double nu, double t) {
  detail::check_nu_t(nu, t, "F");
  t = std::clamp(t, 0.0, 1.0);
  if (nu == 1.0) {
    return t == 1.0 ? 1.0 : 0.0;
  }
  return (1.0 - nu * nu) / (2.0 * (1.0 - nu * t));
}

// Validity limit on eta from a y != 1 setting for a given post-processing gamma.
inline double g_objective(double nu, double t, double gamma) {
  detail::check_nu_t(nu, t, "g_objective");
  const double a = 1.0 - nu * gamma * t;
  const double disc = std::max(a * a - (1.0 - nu * nu) * (1.0 - gamma * gamma), 0.0);
  const double den = a + std::sqrt(disc);
  return den > 0.0 ? (1.0 - nu * nu) / den : 1.0;
}

inline double stationary_gamma(double nu, double t) {
  detail::check_nu_t(nu, t, "stationary_gamma");
  t = std::clamp(t, 0.0, 1.0);
  return nu * t / (1.0 - nu * std::sqrt(1.0 - t * t));
}

inline bool g_first_branch(double nu, double t) {
  t = std::clamp(t, 0.0, 1.0);
  return nu * (t + std::sqrt(1.0 - t * t)) <= 1.0;
}

inline double G(double nu, double t) {
  detail::check_nu_t(nu, t, "G");
  t = std::clamp(t, 0.0, 1.0);
  if (g_first_branch(nu, t)) {
    return 1.0 - nu * std::sqrt(1.0 - t * t);
  }
  return F(nu, t);
}

// Best gamma in [0,1] for G: the stationary point when admissible, else gamma = 1.
inline double optimal_gamma(double nu, double t) {
  return g_first_branch(nu, t) ? std::min(stationary_gamma(nu, t), 1.0) : 1.0;
}

struct CaseDParams {
  CaseDVariant variant = CaseDVariant::n2;
  double theta = 0.0;
  std::optional<double> x_star;  // n2 only
  double nu_star = 0.0;
  std::vector<double> gamma;  // n2: {gamma_2}; general: worst-case axis at angle theta
  double admissibility = 0.0;  // must be <= 1
  bool admissible = false;
  double bound = 0.0;
};

inline CaseDParams case_d_params(double theta, CaseDVariant v) {
  detail::check_theta(theta, std::numbers::pi / 2, "case_d_params");
  CaseDParams p;
  p.variant = v;
  p.theta = theta;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  if (v == CaseDVariant::n2) {
    const double root = std::sqrt(1.0 + 3.0 * c * c);
    p.x_star = std::atan2(s * c / root, (1.0 + c * c) / root);
    p.nu_star = root / (2.0 + s);
    p.gamma = {c};
    const double beta = theta - *p.x_star;
    p.admissibility = p.nu_star * (std::cos(beta) + std::sin(beta));
  } else {
    p.nu_star = 1.0 / (1.0 + 2.0 * s);
    p.gamma = {p.nu_star * c / (1.0 - p.nu_star * s)};
    p.admissibility = p.nu_star / (1.0 - p.nu_star * s);
  }
  p.admissible = p.admissibility <= 1.0 + 1e-12;
  p.bound = qubit_bound_case_d(theta, v);
  return p;
}

// min{F(nu, t_1), min_{y>1} G(nu, t_y)} with t_y = |m . r_y|.
inline double case_d_sufficient_bound(const BlochVec& m, double nu, std::span<const BlochVec> dirs) {
  if (dirs.empty()) {
    throw DomainError("case_d_sufficient_bound: no directions");
  }
  double v = F(nu, std::min(std::abs(m.dot(dirs[0])), 1.0));
  for (std::size_t y = 1; y < dirs.size(); ++y) {
    v = std::min(v, G(nu, std::min(std::abs(m.dot(dirs[y])), 1.0)));
  }
  return v;
}

struct ConeResult {
  double theta = 0.0;
  BlochVec axis;
  std::vector<double> per_axis_angles;
  bool certified = true;
  int agreeing_restarts = 0;
};

namespace detail {

inline double axis_angle(const BlochVec& m, const BlochVec& r) {
  return std::acos(std::clamp(std::abs(m.dot(r)), 0.0, 1.0));
}

inline double cone_objective(const BlochVec& m, std::span<const BlochVec> dirs) {
  double worst = 0.0;
  for (const auto& r : dirs) worst = std::max(worst, axis_angle(m, r));
  return worst;
}

// Representative of {m, -m}: z > 0, ties to x > 0, then y > 0.
inline BlochVec canonical_axis(BlochVec m) {
  constexpr double eps = 1e-14;
  bool flip = false;
  if (std::abs(m.z) > eps) {
    flip = m.z < 0;
  } else if (std::abs(m.x) > eps) {
    flip = m.x < 0;
  } else {
    flip = m.y < 0;
  }
  return flip ? -m : m;
}

inline std::vector<BlochVec> checked_units(std::span<const BlochVec> dirs, const char* who) {
  if (dirs.empty()) throw DomainError(std::string(who) + ": no directions");
  std::vector<BlochVec> out;
  for (const auto& r : dirs) {
    if (r.norm() < 1e-12) throw DomainError(std::string(who) + ": zero direction vector");
    out.push_back(r.normalized());
  }
  return out;
}

inline BlochVec from_spherical(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

inline ConeResult finish_cone(const BlochVec& m, std::span<const BlochVec> dirs) {
  ConeResult r;
  r.axis = canonical_axis(m.normalized());
  for (const auto& d : dirs) r.per_axis_angles.push_back(axis_angle(r.axis, d));
  r.theta = 2.0 * *std::max_element(r.per_axis_angles.begin(), r.per_axis_angles.end());
  return r;
}

struct NmData {
  const std::vector<BlochVec>* dirs;
};

inline double nm_f(const gsl_vector* v, void* params) {
  const auto* data = static_cast<const NmData*>(params);
  return cone_objective(from_spherical(gsl_vector_get(v, 0), gsl_vector_get(v, 1)), *data->dirs);
}

inline BlochVec nelder_mead(const std::vector<BlochVec>& dirs, const BlochVec& start) {
  NmData data{&dirs};
  gsl_multimin_function fn{&nm_f, 2, &data};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, std::acos(std::clamp(start.z, -1.0, 1.0)));
  gsl_vector_set(x, 1, std::atan2(start.y, start.x));
  gsl_vector_set_all(step, 0.02);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < 2000; ++it) {
    if (gsl_multimin_fminimizer_iterate(s)) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-13) == GSL_SUCCESS) break;
  }
  const BlochVec out = from_spherical(gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1));
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return out;
}

// Exact min-max axis for the axes active at m (1, 2 or 3 of them), if it improves m.
inline BlochVec polish(const BlochVec& m, std::span<const BlochVec> dirs) {
  const double f = cone_objective(m, dirs);
  std::vector<BlochVec> active;
  for (const auto& r : dirs) {
    if (axis_angle(m, r) > f - 1e-5) active.push_back(m.dot(r) >= 0 ? r : -r);
  }
  std::vector<BlochVec> candidates;
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      const BlochVec s = active[i] + active[j];
      if (s.norm() > 1e-12) candidates.push_back(s.normalized());
      for (std::size_t k = j + 1; k < active.size(); ++k) {
        BlochVec c = (active[i] - active[j]).cross(active[i] - active[k]);
        if (c.norm() < 1e-12) continue;
        c = c.normalized();
        candidates.push_back(c.dot(m) >= 0 ? c : -c);
      }
    }
  }
  BlochVec best = m;
  double best_f = f;
  for (const auto& c : candidates) {
    const double fc = cone_objective(c, dirs);
    if (fc < best_f - 1e-15) {
      best = c;
      best_f = fc;
    }
  }
  return best;
}

}  // namespace detail

// Multi-start numerical search, usable for any n.
inline ConeResult double_cone_angle_numeric(std::span<const BlochVec> directions, int grid_points = 10000,
                                            int restarts = 20) {
  const auto dirs = detail::checked_units(directions, "double_cone_angle");
  struct Cell {
    double f;
    BlochVec m;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(grid_points));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < grid_points; ++i) {
    const double z = 1.0 - (i + 0.5) / grid_points;  // upper hemisphere
    const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    const BlochVec m{rad * std::cos(golden * i), rad * std::sin(golden * i), z};
    cells.push_back({detail::cone_objective(m, dirs), m});
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(restarts), cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(take), cells.end(),
                    [](const Cell& a, const Cell& b) { return a.f < b.f; });

  std::vector<Cell> results;
  for (std::size_t i = 0; i < take; ++i) {
    BlochVec m = detail::nelder_mead(dirs, cells[i].m);
    m = detail::canonical_axis(detail::polish(m, dirs).normalized());
    results.push_back({detail::cone_objective(m, dirs), m});
  }
  // Lowest objective; ties by lexicographic axis coordinates.
  const auto best = *std::min_element(results.begin(), results.end(), [](const Cell& a, const Cell& b) {
    if (std::abs(a.f - b.f) > 1e-12) return a.f < b.f;
    return std::tie(a.m.z, a.m.x, a.m.y) > std::tie(b.m.z, b.m.x, b.m.y);
  });
  ConeResult r = detail::finish_cone(best.m, dirs);
  r.agreeing_restarts = static_cast<int>(
      std::count_if(results.begin(), results.end(), [&](const Cell& c) { return c.f - best.f <= 1e-7; }));
  r.certified = r.agreeing_restarts >= 2;
  return r;
}

inline ConeResult double_cone_angle(std::span<const BlochVec> directions) {
  const auto dirs = detail::checked_units(directions, "double_cone_angle");
  if (dirs.size() == 1) {
    return detail::finish_cone(dirs[0], dirs);
  }
  if (dirs.size() == 2) {
    const BlochVec b = dirs[0].dot(dirs[1]) >= 0 ? dirs[1] : -dirs[1];
    const BlochVec s = dirs[0] + b;
    ConeResult r = detail::finish_cone(s.normalized(), dirs);
    r.theta = std::acos(std::clamp(std::abs(dirs[0].dot(dirs[1])), 0.0, 1.0));
    return r;
  }
  return double_cone_angle_numeric(directions);
}

inline double case_d_axis_angle(std::span<const BlochVec> directions) {
  const auto dirs = detail::checked_units(directions, "case_d_axis_angle");
  double theta = 0.0;
  for (std::size_t y = 1; y < dirs.size(); ++y) {
    theta = std::max(theta, detail::axis_angle(dirs[0], dirs[y]));
  }
  return theta;
}

}  // namespace gjm
