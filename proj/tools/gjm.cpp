// gjm: bounds, SDP thresholds, strategy verification, sweeps and entropy reports.
//
// Exit codes: 0 success, 1 verification failed, 2 usage or input error, 3 solver diagnostic.

#include "gjm/gjm.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace gjm;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

struct Globals {
  std::optional<double> tol;
  int jobs = 0;
  bool json = false;
  std::uint64_t seed = 20240601;
};

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Prints aligned "key value" lines, or one JSON object with --json.
class Record {
 public:
  void add(const std::string& k, const json& v) {
    keys_.push_back(k);
    obj_[k] = v;
  }
  void print(bool as_json) const {
    if (as_json) {
      std::cout << obj_.dump(2) << "\n";
      return;
    }
    std::size_t w = 0;
    for (const auto& k : keys_) w = std::max(w, k.size());
    for (const auto& k : keys_) {
      const auto& v = obj_.at(k);
      std::string s;
      if (v.is_number_float()) {
        s = fmt9(v.get<double>());
      } else if (v.is_string()) {
        s = v.get<std::string>();
      } else {
        s = v.dump();
      }
      std::cout << k << std::string(w - k.size() + 2, ' ') << s << "\n";
    }
  }

 private:
  std::vector<std::string> keys_;
  json obj_ = json::object();
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size()) throw ValidationError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty number list");
  return out;
}

std::vector<BlochVec> xz_axes(const std::vector<double>& angles) {
  std::vector<BlochVec> out;
  for (double a : angles) out.push_back(xz_axis(a));
  return out;
}

std::vector<BlochVec> pair_axes(double theta) { return xz_axes({0.0, theta}); }
std::vector<BlochVec> cone_axes(double theta) {
  return {BlochVec{0, 0, 1}, BlochVec{std::sin(theta), 0, std::cos(theta)}, BlochVec{-std::sin(theta), 0, std::cos(theta)}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("gjm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("GJM_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

int worker_count(const Globals& g) {
  if (g.jobs > 0) return g.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n) on a small pool; results land in caller-owned slots.
template <typename F>
void parallel_for(std::size_t n, int jobs, F f) {
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  std::vector<std::thread> pool;
  const int extra = std::min<int>(jobs, static_cast<int>(n)) - 1;
  for (int t = 0; t < extra; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

// ---- bound -------------------------------------------------------------

struct BoundArgs {
  std::string gcase = "c";
  int n = 2;
  int k = 2;
  std::optional<double> theta;
  std::string variant = "n2";
};

int cmd_bound(const BoundArgs& a, const Globals& g) {
  const Case c = parse_case(a.gcase);
  Record r;
  r.add("case", std::string(1, case_char(c)));
  if (!a.theta) {
    r.add("n", a.n);
    r.add("k", a.k);
    r.add("eta_bound", generic_bound(c, a.n, a.k));
    r.print(g.json);
    return kExitOk;
  }
  const double th = *a.theta;
  r.add("theta", th);
  switch (c) {
    case Case::a:
    case Case::b:
      r.add("n", a.n);
      r.add("eta_bound", generic_bound(c, a.n, a.k));
      break;
    case Case::c:
      r.add("eta_bound", qubit_bound_case_c(th));
      break;
    case Case::d: {
      const auto v = parse_case_d_variant(a.variant);
      const auto p = case_d_params(th, v);
      r.add("variant", std::string(to_string(v)));
      r.add("eta_bound", qubit_bound_case_d(th, v));
      if (p.x_star) r.add("x_star", *p.x_star);
      r.add("nu_star", p.nu_star);
      r.add("gamma", p.gamma);
      r.add("admissibility", p.admissibility);
      r.add("admissible", p.admissible);
      break;
    }
  }
  r.print(g.json);
  return kExitOk;
}

// ---- threshold ---------------------------------------------------------

struct ThresholdArgs {
  std::string gcase = "c";
  std::string qubit_angles;
  std::string assembly;
  std::string variant = "n2";
  double nu_vis = 1.0;
  std::string export_sdpa;
  bool sdpa_slack = false;
};

// Closed form for a qubit assembly, where one applies at full visibility.
std::optional<double> analytic_for(Case c, const std::vector<BlochVec>& dirs, CaseDVariant v) {
  const bool distinct = double_cone_angle(dirs).theta > 1e-12;
  switch (c) {
    case Case::a:
      return distinct ? 1.0 / static_cast<double>(dirs.size()) : 1.0;
    case Case::b:
      if (dirs.size() == 2) return distinct ? 0.5 : 1.0;
      return std::nullopt;
    case Case::c:
      return qubit_bound_case_c(double_cone_angle(dirs).theta);
    case Case::d: {
      const double th = case_d_axis_angle(dirs);
      if (v == CaseDVariant::n2 && dirs.size() != 2) return std::nullopt;
      return qubit_bound_case_d(th, v);
    }
  }
  return std::nullopt;
}

int cmd_threshold(const ThresholdArgs& a, const Globals& g) {
  const double tol = g.tol.value_or(1e-4);
  const Case c = parse_case(a.gcase);
  if (a.qubit_angles.empty() == a.assembly.empty()) {
    throw ValidationError("threshold: give exactly one of --qubit-angles or --assembly");
  }
  std::vector<BlochVec> dirs;
  Assembly ideal = a.assembly.empty() ? (dirs = xz_axes(parse_list(a.qubit_angles)), qubit_assembly(dirs))
                                      : assembly_from_json_text(read_file(a.assembly));
  const ProbeHook hook = [](double eta, const FeasibilityReport& rep) {
    spdlog::debug("probe eta={:.6f} status={} slack={:.3e} upper={:.3e} newton={}", eta, to_string(rep.status),
                  rep.slack, rep.slack_upper, rep.iterations);
  };
  const auto res = threshold(ideal, c, tol, a.nu_vis, SolveOptions{}, hook);
  Record r;
  r.add("case", std::string(1, case_char(c)));
  r.add("settings", ideal.n());
  r.add("dim", ideal.dim());
  r.add("nu_vis", a.nu_vis);
  r.add("eta_star", res.eta_star);
  r.add("eta_lo", res.eta_lo);
  r.add("eta_hi", res.eta_hi);
  r.add("tol", res.tol);
  r.add("always_gjm", res.always_jm);
  r.add("evaluations", res.evaluations);
  r.add("newton_iterations", res.newton_iterations);
  r.add("status_lo", std::string(to_string(res.lo_status)));
  if (!dirs.empty() && a.nu_vis == 1.0) {
    if (auto an = analytic_for(c, dirs, parse_case_d_variant(a.variant))) {
      r.add("eta_analytic", *an);
      r.add("gap", res.eta_star - *an);
    }
  }
  if (!a.export_sdpa.empty()) {
    const Assembly lossy = apply_loss_visibility(ideal, LossParams{res.eta_lo, a.nu_vis});
    std::ofstream out(a.export_sdpa);
    if (!out) throw ValidationError("cannot write " + a.export_sdpa);
    out << export_sdpa(build_program(lossy, gspec_case(c, lossy)), a.sdpa_slack);
    r.add("sdpa", a.export_sdpa);
  }
  r.print(g.json);
  // Neither end of the bracket decisively classified.
  if (!res.always_jm && res.lo_status == Status::marginal && res.hi_slack_upper > -2.0 * SolveOptions{}.tol) {
    spdlog::error("threshold: both bracket ends are numerically marginal");
    return kExitSolver;
  }
  return kExitOk;
}

// ---- verify ------------------------------------------------------------

struct VerifyArgs {
  std::string strategy;
  std::string eta = "bound";
  int n = 2;
  int k = 2;
  std::optional<double> theta;
  std::string qubit_angles;
  std::string variant = "n2";
  bool dump = false;
};

struct Built {
  Strategy s;
  Assembly ideal;
  Case gcase;
  double eta;
};

Built build_named(const VerifyArgs& a) {
  const bool at_bound = a.eta == "bound";
  auto eta_or = [&](double bound) { return at_bound ? bound : parse_list(a.eta).at(0); };
  auto qubit_dirs = [&](bool cone) {
    if (!a.qubit_angles.empty()) return xz_axes(parse_list(a.qubit_angles));
    if (!a.theta) throw ValidationError("verify: qubit strategies need --theta or --qubit-angles");
    return cone ? cone_axes(*a.theta) : pair_axes(*a.theta);
  };
  const std::string& name = a.strategy;
  if (name == "full-jm") {
    auto ideal = fourier_assembly(a.n, a.k);
    const double eta = eta_or(1.0 / a.n);
    return {strat_full_jm(ideal, eta), ideal, Case::a, eta};
  }
  if (name == "partial-input") {
    auto ideal = fourier_assembly(a.n, a.k);
    const double eta = eta_or(0.5);
    return {strat_partial_input(ideal, eta), ideal, Case::b, eta};
  }
  if (name == "partial-outcome") {
    auto ideal = fourier_assembly(a.n, a.k);
    const double eta = eta_or(1.0 / a.k);
    return {strat_partial_outcome_generic(ideal, eta), ideal, Case::c, eta};
  }
  if (name == "case-d-generic") {
    auto ideal = fourier_assembly(a.n, a.k);
    const double eta = eta_or(generic_bound(Case::d, a.n, a.k));
    return {strat_case_d_generic(ideal, eta), ideal, Case::d, eta};
  }
  if (name == "qubit-c") {
    const auto dirs = qubit_dirs(false);
    const double eta = eta_or(qubit_bound_case_c(double_cone_angle(dirs).theta));
    return {strat_qubit_case_c_optimal(dirs, eta), qubit_assembly(dirs), Case::c, eta};
  }
  if (name == "qubit-d") {
    const auto v = parse_case_d_variant(a.variant);
    const auto dirs = qubit_dirs(v == CaseDVariant::general);
    const double eta = eta_or(qubit_bound_case_d(case_d_axis_angle(dirs), v));
    return {strat_qubit_case_d(dirs, v, eta), qubit_assembly(dirs), Case::d, eta};
  }
  throw ValidationError("verify: unknown strategy '" + name +
                        "' (full-jm, partial-input, partial-outcome, case-d-generic, qubit-c, qubit-d)");
}

int cmd_verify(const VerifyArgs& a, const Globals& g) {
  const double tol = g.tol.value_or(1e-9);
  Record r;
  r.add("strategy", a.strategy);
  Built b;
  try {
    b = build_named(a);
  } catch (const BoundViolatedError& e) {
    r.add("eta", a.eta);
    r.add("pass", false);
    r.add("error", std::string(e.what()));
    json m = json::object();
    for (std::size_t i = 0; i < e.margins.size(); ++i) m[e.constraint_names[i]] = e.margins[i];
    r.add("validity_margins", m);
    r.print(g.json);
    return kExitFail;
  }
  const Assembly lossy = apply_loss(b.ideal, b.eta);
  const auto rep = verify_strategy(b.s, lossy, gspec_case(b.gcase, lossy), tol);
  r.add("case", std::string(1, case_char(b.gcase)));
  r.add("eta", b.eta);
  r.add("consistency_residual", rep.consistency_residual);
  r.add("nosignaling_residual", rep.nosignaling_residual);
  r.add("partial_jm_residual", rep.partial_jm_residual);
  r.add("guess_failure_prob", rep.guess_failure_prob);
  r.add("completeness_residual", rep.completeness_residual);
  r.add("trace_preservation_residual", rep.trace_preservation_residual);
  r.add("min_psd_margin", rep.min_psd_margin);
  r.add("tol", tol);
  r.add("pass", rep.pass);
  if (a.dump) r.add("strategy_json", strategy_to_json(b.s));
  r.print(g.json);
  return rep.pass ? kExitOk : kExitFail;
}

// ---- sweep -------------------------------------------------------------

struct SweepArgs {
  std::string param = "theta";
  double start = 0.0;
  double stop = 1.5707963267948966;
  int steps = 9;
  double theta = 1.5707963267948966;
  std::string nu_vis = "1.0";
  std::string cases = "a,b,c,d";
  std::string mode = "both";
  int n = 2;
};

struct SweepRow {
  double theta = 0.0;
  double nu_vis = 1.0;
  Case gcase = Case::a;
  double analytic = std::nan("");
  double sdp = std::nan("");
};

int cmd_sweep(const SweepArgs& a, const Globals& g) {
  if (a.steps < 2) throw ValidationError("sweep: --steps must be at least 2");
  if (a.n != 2 && a.n != 3) throw ValidationError("sweep: --n must be 2 (pair) or 3 (cone)");
  if (a.mode != "analytic" && a.mode != "sdp" && a.mode != "both") throw ValidationError("sweep: bad --mode");
  std::vector<double> grid;
  for (int i = 0; i < a.steps; ++i) grid.push_back(a.start + (a.stop - a.start) * i / (a.steps - 1));
  std::vector<double> thetas;
  std::vector<double> nus = parse_list(a.nu_vis);
  if (a.param == "theta") {
    thetas = grid;
  } else if (a.param == "nu_vis") {
    thetas = {a.theta};
    nus = grid;
  } else {
    throw ValidationError("sweep: --param must be theta or nu_vis");
  }
  for (double th : thetas) {
    if (th < 0.0 || th > 1.5707963267948966 + 1e-9) throw ValidationError("sweep: theta outside [0, pi/2]");
  }
  for (double nu : nus) {
    if (nu < 0.0 || nu > 1.0) throw ValidationError("sweep: nu_vis outside [0, 1]");
  }
  std::vector<Case> cases;
  std::stringstream ss(a.cases);
  for (std::string item; std::getline(ss, item, ',');) cases.push_back(parse_case(item));

  std::vector<SweepRow> rows;
  for (double nu : nus) {
    for (double th : thetas) {
      for (Case c : cases) rows.push_back({th, nu, c});
    }
  }
  const double tol = g.tol.value_or(1e-4);
  const auto variant = a.n == 2 ? CaseDVariant::n2 : CaseDVariant::general;
  parallel_for(rows.size(), worker_count(g), [&](std::size_t i) {
    auto& row = rows[i];
    const auto dirs = a.n == 2 ? pair_axes(row.theta) : cone_axes(row.theta);
    if (a.mode != "sdp" && row.nu_vis == 1.0) {
      row.analytic = analytic_for(row.gcase, dirs, variant).value_or(std::nan(""));
    }
    if (a.mode != "analytic") {
      try {
        row.sdp = threshold(qubit_assembly(dirs), row.gcase, tol, row.nu_vis).eta_star;
      } catch (const std::exception& e) {
        spdlog::error("sweep point theta={} nu_vis={} case={}: {}", row.theta, row.nu_vis, case_char(row.gcase),
                      e.what());
      }
    }
    spdlog::info("theta={:.6f} nu_vis={:.3f} case={} done", row.theta, row.nu_vis, case_char(row.gcase));
  });
  std::cout << "theta,nu_vis,case,eta_analytic,eta_sdp,gap\n";
  for (const auto& row : rows) {
    std::cout << fmt9(row.theta) << "," << fmt9(row.nu_vis) << "," << case_char(row.gcase) << ","
              << fmt9(row.analytic) << "," << fmt9(row.sdp) << "," << fmt9(row.sdp - row.analytic) << "\n";
  }
  return kExitOk;
}

// ---- entropy -----------------------------------------------------------

struct EntropyArgs {
  int d = 2;
  double eta = 2.0 / 3.0;
  double rounds = 1.0;
  std::size_t mc = 0;
  int grid = 0;
  std::string alice;
  std::string bob;
  std::size_t block = 5;
};

json entropy_json(const EntropyReport& e) {
  return {{"h_A_given_E", e.h_A_given_E},
          {"h_A_given_Eprime", e.h_A_given_Eprime},
          {"i_AB_minus_AE", e.i_AB_minus_AE},
          {"i_BA_minus_BE", e.i_BA_minus_BE}};
}

int cmd_entropy(const EntropyArgs& a, const Globals& g) {
  if (a.grid > 0) {
    if (a.grid < 2) throw ValidationError("entropy: --grid needs at least 2 points");
    std::cout << "d,eta,h_A_given_E,h_A_given_Eprime,i_AB_minus_AE,i_BA_minus_BE\n";
    for (int i = 0; i < a.grid; ++i) {
      const double eta = static_cast<double>(i) / (a.grid - 1);
      const auto e = entropies_closed_form(a.d, eta).scaled(a.rounds);
      std::cout << a.d << "," << fmt9(eta) << "," << fmt9(e.h_A_given_E) << "," << fmt9(e.h_A_given_Eprime) << ","
                << fmt9(e.i_AB_minus_AE) << "," << fmt9(e.i_BA_minus_BE) << "\n";
    }
    return kExitOk;
  }
  const auto dist = abe_dist(a.d, a.eta);
  const auto closed = entropies_closed_form(a.d, a.eta);
  const auto table = entropies(dist);
  Record r;
  r.add("d", a.d);
  r.add("eta", a.eta);
  r.add("n_rounds", a.rounds);
  const auto scaled = closed.scaled(a.rounds);
  r.add("h_A_given_E", scaled.h_A_given_E);
  r.add("h_A_given_Eprime", scaled.h_A_given_Eprime);
  r.add("i_AB_minus_AE", scaled.i_AB_minus_AE);
  r.add("i_BA_minus_BE", scaled.i_BA_minus_BE);
  const double agree = std::max({std::abs(closed.h_A_given_E - table.h_A_given_E),
                                 std::abs(closed.h_A_given_Eprime - table.h_A_given_Eprime),
                                 std::abs(closed.i_AB_minus_AE - table.i_AB_minus_AE),
                                 std::abs(closed.i_BA_minus_BE - table.i_BA_minus_BE)});
  r.add("closed_vs_table", agree);
  // eta is read as a decimal; the exact check uses its nearest fraction with denominator <= 10^6.
  const Rational q(static_cast<std::int64_t>(std::llround(a.eta * 1e6)), 1000000);
  r.add("reverse_rate_exactly_zero", exact_reverse_rate_zero(abe_dist_exact(a.d, q)));
  if (a.mc > 0) {
    const auto mc = monte_carlo(dist, a.mc, g.seed, worker_count(g));
    r.add("mc_samples", static_cast<double>(mc.samples));
    r.add("mc_estimate", entropy_json(mc.estimate));
    r.add("mc_std_error", entropy_json(mc.std_error));
    auto z = [](double est, double exact, double se) { return se > 0 ? std::abs(est - exact) / se : (est == exact ? 0.0 : INFINITY); };
    const double zmax = std::max({z(mc.estimate.h_A_given_E, closed.h_A_given_E, mc.std_error.h_A_given_E),
                                  z(mc.estimate.h_A_given_Eprime, closed.h_A_given_Eprime, mc.std_error.h_A_given_Eprime),
                                  z(mc.estimate.i_AB_minus_AE, closed.i_AB_minus_AE, mc.std_error.i_AB_minus_AE),
                                  z(mc.estimate.i_BA_minus_BE, closed.i_BA_minus_BE, mc.std_error.i_BA_minus_BE)});
    r.add("mc_max_z", zmax);
    r.add("mc_within_3sigma", zmax <= 3.0);
  }
  if (!a.alice.empty() || !a.bob.empty()) {
    const auto rec = parity_reconcile(parse_bits(a.alice), parse_erased(a.bob), a.block);
    r.add("parity_alice", a.alice);
    r.add("parity_bob", a.bob);
    r.add("parity_bob_corrected", format_erased(rec.bob_corrected));
    r.add("parity_leaked", rec.leaked_parities);
    r.add("parity_filled", rec.filled);
  }
  r.print(g.json);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Partial joint measurability: bounds, SDP thresholds, attack strategies, post-selection entropies"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  double tol_flag = 0.0;
  auto* tol_opt = app.add_option("--tol", tol_flag, "Tolerance (threshold bisection width, or verification tolerance)")
                      ->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "Worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_flag("--json", g.json, "Print records as JSON");
  app.add_option("--seed", g.seed, "Seed for sampling");

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Closed-form efficiency bounds");
  bound->add_option("--case", ba.gcase, "a, b, c or d")->required();
  bound->add_option("--n", ba.n, "Number of settings")->check(CLI::PositiveNumber);
  bound->add_option("--k", ba.k, "Outcomes per setting")->check(CLI::PositiveNumber);
  bound->add_option("--theta", ba.theta, "Qubit angle in radians (cases c and d)");
  bound->add_option("--variant", ba.variant, "Case d: n2 or general");

  ThresholdArgs ta;
  auto* thr = app.add_subcommand("threshold", "Critical efficiency by SDP bisection");
  thr->add_option("--case", ta.gcase, "a, b, c or d")->required();
  thr->add_option("--qubit-angles", ta.qubit_angles, "Comma-separated angles; axes (sin a, 0, cos a)");
  thr->add_option("--assembly", ta.assembly, "Assembly JSON file");
  thr->add_option("--variant", ta.variant, "Case d closed form to compare against: n2 or general");
  thr->add_option("--nu-vis", ta.nu_vis, "Visibility")->check(CLI::Range(0.0, 1.0));
  thr->add_option("--export-sdpa", ta.export_sdpa, "Write the program at eta_lo in sparse SDPA format");
  thr->add_flag("--sdpa-slack", ta.sdpa_slack, "Export the max-slack form instead of pure feasibility");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Build a named attack strategy and verify it");
  ver->add_option("--strategy", va.strategy,
                  "full-jm, partial-input, partial-outcome, case-d-generic, qubit-c, qubit-d")
      ->required();
  ver->add_option("--eta", va.eta, "Efficiency, or 'bound' for the strategy's own bound");
  ver->add_option("--n", va.n, "Settings (generic strategies)")->check(CLI::PositiveNumber);
  ver->add_option("--k", va.k, "Outcomes (generic strategies)")->check(CLI::Range(2, 16));
  ver->add_option("--theta", va.theta, "Qubit angle in radians");
  ver->add_option("--qubit-angles", va.qubit_angles, "Comma-separated qubit axis angles");
  ver->add_option("--variant", va.variant, "qubit-d: n2 or general (cone-axis)");
  ver->add_flag("--dump", va.dump, "Include the strategy itself in the record");

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Threshold curves as CSV");
  sw->add_option("--param", sa.param, "theta or nu_vis");
  sw->add_option("--start", sa.start);
  sw->add_option("--stop", sa.stop);
  sw->add_option("--steps", sa.steps);
  sw->add_option("--theta", sa.theta, "Fixed angle when sweeping nu_vis");
  sw->add_option("--nu-vis", sa.nu_vis, "Comma-separated visibilities when sweeping theta");
  sw->add_option("--cases", sa.cases, "Comma-separated subset of a,b,c,d");
  sw->add_option("--mode", sa.mode, "analytic, sdp or both");
  sw->add_option("--n", sa.n, "2: {Z, cos Z + sin X}; 3: cone {Z, +-sin X + cos Z}");

  EntropyArgs ea;
  auto* ent = app.add_subcommand("entropy", "Post-selection entropies and key-rate differences");
  ent->add_option("--d", ea.d, "Alphabet size")->check(CLI::Range(2, 64));
  ent->add_option("--eta", ea.eta, "Detection efficiency")->check(CLI::Range(0.0, 1.0));
  ent->add_option("--rounds", ea.rounds, "Multiply per-round values by this many rounds");
  ent->add_option("--mc", ea.mc, "Monte Carlo samples");
  ent->add_option("--grid", ea.grid, "Print a CSV over eta in [0,1] with this many points");
  ent->add_option("--parity-alice", ea.alice, "Alice's bits for the parity demo");
  ent->add_option("--parity-bob", ea.bob, "Bob's symbols (0, 1, and x or the empty-set sign for erasures)");
  ent->add_option("--block", ea.block, "Parity block length")->check(CLI::Range(2, 1 << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (*tol_opt) g.tol = tol_flag;

  try {
    if (*bound) return cmd_bound(ba, g);
    if (*thr) return cmd_threshold(ta, g);
    if (*ver) return cmd_verify(va, g);
    if (*sw) return cmd_sweep(sa, g);
    if (*ent) return cmd_entropy(ea, g);
  } catch (const InternalConsistencyError& e) {
    spdlog::error("{}", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
