#pragma once

// End-to-end acceptance suite.  Each criterion runs at a pinned seed with
// pinned tolerances and emits a CSV table of everything it compared; quick
// mode shrinks ensemble sizes but keeps the pass logic identical.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "qmeter/analytic.hpp"
#include "qmeter/csv.hpp"
#include "qmeter/fock.hpp"
#include "qmeter/limits.hpp"
#include "qmeter/model.hpp"
#include "qmeter/montecarlo.hpp"
#include "qmeter/rng.hpp"
#include "qmeter/stats.hpp"

namespace qmeter {

inline constexpr std::uint64_t kAcceptanceSeed = 0x51CA9Eu;

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> failures;  // empty when pass
  CsvTable table{{}};
};

struct AcceptanceOptions {
  bool quick = false;
  unsigned threads = 0;
};

namespace acceptance_detail {

inline std::string fmt(double v) { return csv_cell(v); }

struct Gate {
  CriterionResult* r;
  CsvTable* t;

  // |estimate - exact| <= k se
  void se_check(const std::string& label, double time, double estimate,
                double se, double exact, double k) {
    const double dev = se > 0.0 ? (estimate - exact) / se
                                : (estimate == exact ? 0.0 : INFINITY);
    const bool ok = std::fabs(dev) <= k;
    t->row({label, fmt(time), fmt(estimate), fmt(se), fmt(exact), fmt(dev),
            fmt(k), ok ? "pass" : "fail"});
    if (!ok)
      r->failures.push_back(label + " at t=" + fmt(time) + ": dev " +
                            fmt(dev) + " se exceeds " + fmt(k));
  }

  // |value - target| <= tol |target|
  void rel_check(const std::string& label, double time, double value,
                 double target, double tol) {
    const double rel = std::fabs(value - target) / std::fabs(target);
    const bool ok = rel <= tol;
    t->row({label, fmt(time), fmt(value), fmt(0.0), fmt(target), fmt(rel),
            fmt(tol), ok ? "pass" : "fail"});
    if (!ok)
      r->failures.push_back(label + " at t=" + fmt(time) + ": rel err " +
                            fmt(rel) + " exceeds " + fmt(tol));
  }

  // value <= limit (+ tiny fp slack)
  void le_check(const std::string& label, double time, double value,
                double limit) {
    const bool ok = value <= limit * (1.0 + 1e-12) + 1e-300;
    t->row({label, fmt(time), fmt(value), fmt(0.0), fmt(limit),
            fmt(value - limit), fmt(0.0), ok ? "pass" : "fail"});
    if (!ok)
      r->failures.push_back(label + " at t=" + fmt(time) + ": " + fmt(value) +
                            " exceeds " + fmt(limit));
  }

  void bool_check(const std::string& label, bool ok,
                  const std::string& on_fail) {
    t->row({label, fmt(0.0), fmt(ok ? 1.0 : 0.0), fmt(0.0), fmt(1.0),
            fmt(0.0), fmt(0.0), ok ? "pass" : "fail"});
    if (!ok) r->failures.push_back(label + ": " + on_fail);
  }
};

inline CsvTable check_table() {
  return CsvTable{{"check", "t", "value", "se", "target", "deviation",
                   "tolerance", "status"}};
}

// -- criterion 1: closed-form moments vs ensemble ---------------------------

inline CriterionResult moment_suite(const AcceptanceOptions& opt) {
  CriterionResult r{1, "moment-suite", false, {}, check_table()};
  Gate g{&r, &r.table};

  EnsembleSpec spec;
  spec.params = {1.0, 0.25, {0.1, 0.0}};
  spec.grid = {50.0, 50000};
  spec.sample_nodes = {100, 1000, 10000, 50000};
  spec.seed = kAcceptanceSeed;
  spec.n_paths = opt.quick ? 10000 : 100000;

  auto rows = functional_moments(spec, opt.threads);
  for (const auto& row : rows) {
    const MomentSet ex = moments(spec.params, row.t);
    g.se_check("eiphi_re", row.t, row.eiphi_re.value, row.eiphi_re.se,
               ex.eiphi.real(), 3.0);
    g.se_check("eiphi_im", row.t, row.eiphi_im.value, row.eiphi_im.se,
               ex.eiphi.imag(), 3.0);
    g.se_check("z_re", row.t, row.z_re.value, row.z_re.se, ex.z.real(), 3.0);
    g.se_check("z_im", row.t, row.z_im.value, row.z_im.se, ex.z.imag(), 3.0);
    g.se_check("zz", row.t, row.zz.value, row.zz.se, ex.zz, 3.0);
    g.se_check("y1_re", row.t, row.y1_re.value, row.y1_re.se, ex.y1.real(),
               3.0);
    g.se_check("y1_im", row.t, row.y1_im.value, row.y1_im.se, ex.y1.imag(),
               3.0);
    g.se_check("y0", row.t, row.y0.value, row.y0.se, ex.y0, 3.0);
    g.se_check("y1y1", row.t, row.y1y1.value, row.y1y1.se, ex.y1y1, 3.0);
  }
  r.pass = r.failures.empty();
  return r;
}

// -- criterion 2: closed-form covariances vs ensemble ------------------------

inline CriterionResult covariance_suite(const AcceptanceOptions& opt) {
  CriterionResult r{2, "covariance-suite", false, {}, check_table()};
  Gate g{&r, &r.table};

  EnsembleSpec spec;
  spec.params = {1.0, 0.25, {0.1, 0.0}};
  spec.grid = {20.0, 20000};
  spec.sample_nodes = {1000, 5000, 20000};
  spec.seed = kAcceptanceSeed + 1;
  spec.n_paths = opt.quick ? 10000 : 100000;

  auto rows = covariance_estimates(spec, opt.threads);
  for (const auto& row : rows) {
    const CovarianceSet ex = covariances(spec.params, row.t);
    auto both = [&](const std::string& label, const CovarianceEstimate& e,
                    cplx exact) {
      g.se_check(label + "_re", row.t, e.value.real(), e.se_re, exact.real(),
                 3.0);
      g.se_check(label + "_im", row.t, e.value.imag(), e.se_im, exact.imag(),
                 3.0);
    };
    both("cov_zz_eiphi", row.zz_eiphi, ex.zz_eiphi);
    both("cov_zstar_eiphi_z", row.zstar_eiphi_z, ex.zstar_eiphi_z);
    both("cov_eiphi_z_z", row.eiphi_z_z, ex.eiphi_z_z);
  }
  r.pass = r.failures.empty();
  return r;
}

// -- criterion 3: regime asymptotics of the exact shifts ----------------------

inline CriterionResult regime_suite(const AcceptanceOptions&) {
  CriterionResult r{3, "regime-asymptotics", false, {}, check_table()};
  Gate g{&r, &r.table};

  const ModelParams p{1.0, 0.1, {0.1, 0.0}};
  const double a2 = std::norm(p.alpha);
  const double g2 = p.gamma * p.gamma;

  // early: t = 0.1 / omega
  {
    const double t = 0.1 / p.omega;
    g.bool_check("regime_label_early", classify_regime(p, t) == Regime::kEarly,
                 "expected early label");
    g.rel_check("number_early", t, exact_number_shift(p, t),
                a2 * (p.omega * t) * (p.omega * t), 0.05);
    g.rel_check("pointer_early", t, exact_pointer_shift(p, t),
                a2 * (p.omega * t) * (p.omega * t) / 3.0, 0.05);
  }
  // oscillatory: omega t = pi
  {
    const double t = M_PI / p.omega;
    g.bool_check("regime_label_mid",
                 classify_regime(p, t) == Regime::kOscillatory,
                 "expected oscillatory label");
    g.rel_check("number_mid", t, exact_number_shift(p, t), 4.0 * a2, 0.15);
    g.rel_check("pointer_mid", t, exact_pointer_shift(p, t), 2.0 * a2, 0.15);
  }
  // late: slope between 50/gamma^2 and 100/gamma^2
  {
    const double t1 = 50.0 / g2, t2 = 100.0 / g2;
    g.bool_check("regime_label_late", classify_regime(p, t2) == Regime::kLate,
                 "expected late label");
    const double num_slope =
        (exact_number_shift(p, t2) - exact_number_shift(p, t1)) / (t2 - t1);
    const double ptr_slope =
        (exact_pointer_shift(p, t2) - exact_pointer_shift(p, t1)) / (t2 - t1);
    g.rel_check("number_late_slope", t2, num_slope, a2 * g2, 0.10);
    g.rel_check("pointer_late_slope", t2, ptr_slope, a2 * g2 / 2.0, 0.10);
  }
  // regime_asymptotics agrees with the targets used above
  for (double t : {0.1, M_PI, 1e4}) {
    const RegimeAsymptotics ra = regime_asymptotics(p, t);
    g.bool_check("asymptotics_consistent_t" + fmt(t),
                 ra.weak_coupling && std::isfinite(ra.number_shift) &&
                     std::isfinite(ra.pointer_shift),
                 "asymptotic evaluation failed");
  }
  r.pass = r.failures.empty();
  return r;
}

// -- criterion 4: analytic bounds + variance growth ---------------------------

inline CriterionResult bound_suite(const AcceptanceOptions& opt) {
  CriterionResult r{4, "bound-suite", false, {}, check_table()};
  Gate g{&r, &r.table};

  // randomized admissible draws
  RandomStream draw(kAcceptanceSeed + 4, 0);
  const int n_draws = 1000;
  double worst_zz = 0.0, worst_y0 = 0.0, worst_y1y1 = 0.0;
  double worst_r0 = 0.0, worst_r1 = 0.0, worst_r2 = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    ModelParams p;
    p.omega = 0.1 + 3.9 * draw.next_unit();
    p.gamma = 1.5 * draw.next_unit();
    p.alpha = {0.5, -0.25};
    const double t = 40.0 * draw.next_unit() + 1e-6;
    const MomentSet m = moments(p, t);
    worst_zz = std::max(worst_zz, m.zz / zz_bound(p, t));
    worst_y0 = std::max(worst_y0, m.y0 / y0_bound(p, t));
    worst_y1y1 = std::max(worst_y1y1, m.y1y1 / y1y1_bound(p, t));

    // Taylor remainders on the closed half-plane Re z <= 0
    const double mag = 30.0 * draw.next_unit();
    const double ang = M_PI * (0.5 + draw.next_unit());  // Re <= 0
    const cplx z = std::polar(mag, ang);
    worst_r0 = std::max(worst_r0, std::abs(exp_remainder(0, z)) / 2.0);
    if (mag > 0.0) {
      worst_r1 =
          std::max(worst_r1, std::abs(exp_remainder(1, z)) / (2.0 * mag));
      worst_r2 =
          std::max(worst_r2, std::abs(exp_remainder(2, z)) / (mag * mag));
    }
  }
  g.le_check("moment_bound_zz_worst_ratio", 0.0, worst_zz, 1.0);
  g.le_check("moment_bound_y0_worst_ratio", 0.0, worst_y0, 1.0);
  g.le_check("moment_bound_y1y1_worst_ratio", 0.0, worst_y1y1, 1.0);
  g.le_check("taylor_r0_worst_ratio", 0.0, worst_r0, 1.0);
  g.le_check("taylor_r1_worst_ratio", 0.0, worst_r1, 1.0);
  g.le_check("taylor_r2_worst_ratio", 0.0, worst_r2, 1.0);

  // growth of var(|Z|^2) in t: log-log regression slope <= 2.1
  EnsembleSpec spec;
  spec.params = {1.0, 0.25, {0.1, 0.0}};
  spec.grid = {40.0, 20000};
  spec.sample_nodes = {2500, 5000, 10000, 20000};
  spec.seed = kAcceptanceSeed + 5;
  spec.n_paths = opt.quick ? 4000 : 20000;
  auto rows = functional_moments(spec, opt.threads);
  std::vector<double> lt, lv;
  for (const auto& row : rows) {
    lt.push_back(std::log(row.t));
    lv.push_back(std::log(row.var_zz));
    r.table.row({"var_zz_point", fmt(row.t), fmt(row.var_zz), fmt(0.0),
                 fmt(0.0), fmt(0.0), fmt(0.0), "info"});
  }
  const LinearFit fit = linear_fit(lt, lv);
  g.le_check("var_zz_growth_exponent", spec.grid.t_end, fit.slope, 2.1);

  // calibrated fluctuation envelopes dominate the sampled variances
  for (const auto& row : rows) {
    const VarianceBounds vb = variance_bounds(spec.params, row.t, row.t);
    g.le_check("var_zz_envelope_t" + fmt(row.t), row.t, row.var_zz, vb.var_zz);
    g.le_check("var_y0_envelope_t" + fmt(row.t), row.t, row.var_y0, vb.var_y0);
  }

  r.pass = r.failures.empty();
  return r;
}

// -- criterion 5: truncated ladder realization --------------------------------

inline CriterionResult fock_suite(const AcceptanceOptions&) {
  CriterionResult r{5, "fock-suite", false, {}, check_table()};
  Gate g{&r, &r.table};

  const int dim = 64, block = 32;
  ModelParams p{1.0, 0.25, {0.2, 0.0}};

  // time-averaged number over 200 whole periods
  const double t_avg = 200.0 * 2.0 * M_PI / p.omega;
  const auto avg = fock::time_averaged_number(p, t_avg, dim);
  for (int n : {0, 1, 3}) {
    const auto lm = fock::level_moments(avg.op, n);
    const auto pred = fock::averaged_number_prediction(p, n);
    g.rel_check("avg_number_mean_n" + std::to_string(n), t_avg, lm.mean,
                pred.mean, 0.02);
    g.rel_check("avg_number_var_n" + std::to_string(n), t_avg, lm.var,
                pred.var, 0.02);
  }

  // pathwise Heisenberg identity on the reliable block
  TimeGrid grid{6.0, 600};
  BrownianPath path = sample_path(grid, kAcceptanceSeed + 6, 0);
  PathFunctionals f = compute_functionals(p, path);
  const std::size_t k = grid.n_steps;
  fock::Mat u = fock::propagator(p, f.phi[k], f.z[k], f.g[k], dim);
  g.le_check("heisenberg_number_error", grid.t_end,
             fock::heisenberg_number_error(p, u, f.z[k], block), 1e-6);
  g.le_check("propagator_unitarity_error", grid.t_end,
             fock::block_unitarity_error(u, block), 1e-8);

  // displacement composition law
  const cplx za{0.3, 0.2}, zb{-0.1, 0.45};
  fock::Mat lhs = fock::displacement(za, dim) * fock::displacement(zb, dim);
  fock::Mat rhs = std::exp(cplx(0.0, (za * std::conj(zb)).imag())) *
                  fock::displacement(za + zb, dim);
  g.le_check("displacement_composition_error", 0.0,
             fock::block_error(lhs - rhs, block), 1e-8);

  r.pass = r.failures.empty();
  return r;
}

// -- criterion 6: pointer mean-square error vs bound --------------------------

inline CriterionResult estimator_suite(const AcceptanceOptions& opt) {
  CriterionResult r{6, "estimator-error", false, {}, check_table()};
  Gate g{&r, &r.table};

  EnsembleSpec spec;
  spec.params = {1.0, 0.25, {0.1, 0.0}};
  const double g2 = spec.params.gamma * spec.params.gamma;
  const double a2 = std::norm(spec.params.alpha);
  const double t_lo = 0.1 / g2, t_hi = 10.0 / (a2 * g2);
  const double win_lo = 1.0 / g2, win_hi = 0.1 / (a2 * g2);

  spec.grid = {t_hi, std::size_t(std::llround(t_hi / 0.1))};
  spec.seed = kAcceptanceSeed + 7;
  spec.n_paths = opt.quick ? 256 : 768;
  // log-spaced times snapped to grid nodes
  const int n_pts = 16;
  std::vector<std::size_t> nodes;
  for (int i = 0; i < n_pts; ++i) {
    const double t =
        t_lo * std::pow(t_hi / t_lo, double(i) / double(n_pts - 1));
    const auto node = std::size_t(std::llround(t / spec.grid.dt()));
    if (nodes.empty() || node > nodes.back())
      nodes.push_back(std::min(node, spec.grid.n_steps));
  }
  spec.sample_nodes = nodes;

  std::vector<int> levels = opt.quick ? std::vector<int>{0, 3}
                                      : std::vector<int>{0, 1, 2, 3};
  for (int n : levels) {
    auto curve = estimator_error_curve(spec, unsigned(n), opt.threads);
    std::size_t best = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto& pt = curve[i];
      g.le_check("mse_below_bound_n" + std::to_string(n), pt.t, pt.mse,
                 pt.bound);
      r.table.row({"mse_point_n" + std::to_string(n), fmt(pt.t), fmt(pt.mse),
                   fmt(pt.mse_se), fmt(pt.bound), fmt(0.0), fmt(0.0), "info"});
      if (pt.mse < curve[best].mse) best = i;
    }
    const double t_min = curve[best].t;
    const bool interior = best > 0 && best + 1 < curve.size() &&
                          t_min >= win_lo && t_min <= win_hi;
    g.bool_check("mse_minimum_in_window_n" + std::to_string(n), interior,
                 "argmin t=" + fmt(t_min) + " outside (" + fmt(win_lo) + ", " +
                     fmt(win_hi) + ")");
  }
  r.pass = r.failures.empty();
  return r;
}

// -- criterion 7: scaling limits ----------------------------------------------

inline CriterionResult limit_suite(const AcceptanceOptions& opt) {
  CriterionResult r{7, "scaling-limits", false, {}, check_table()};
  Gate g{&r, &r.table};

  LimitSpec spec;
  spec.params = {1.0, 0.5, {0.2, 0.0}};
  spec.eps = 1e-3;
  spec.t = 1.0;
  spec.dt_micro = 0.01;
  spec.seed = kAcceptanceSeed + 8;
  spec.n_paths = opt.quick ? 2000 : 10000;

  const ScaledSamples s = scaled_samples(spec, opt.threads);
  const double n = double(spec.n_paths);

  // (i) endpoint Gaussianity and component variances
  const GaussianCheck gc = gaussian_check(s, spec.params);
  g.bool_check("gaussian_ks_re", gc.ks_re.p_value >= 0.01,
               "p=" + fmt(gc.ks_re.p_value));
  g.bool_check("gaussian_ks_im", gc.ks_im.p_value >= 0.01,
               "p=" + fmt(gc.ks_im.p_value));
  const double var_se = gc.target_var * std::sqrt(2.0 / (n - 1.0));
  g.se_check("gaussian_var_re", spec.t, gc.var_re, var_se, gc.target_var, 3.0);
  g.se_check("gaussian_var_im", spec.t, gc.var_im, var_se, gc.target_var, 3.0);

  // (ii) endpoint readout transform vs 1/(1 + lambda |kappa|^2 t)
  const double kap2t = std::norm(spec.params.kappa()) * spec.t;
  for (double u : {0.5, 1.0, 2.0}) {
    const double lam = u / kap2t;
    const auto lc = laplace_check(
        s.number_x, lam, number_limit_target(spec.params, spec.t, lam));
    g.se_check("laplace_number_u" + fmt(u), spec.t, lc.estimate, lc.se,
               lc.target, 3.0);
  }

  // time-averaged readout transform vs 1/cosh(sqrt(lambda |kappa|^2 t));
  // finite-eps bias is below 2 se at this scale, gate at 4 se.
  for (double u : {0.5, 1.0, 2.0}) {
    const double lam = u / kap2t;
    const auto lc = laplace_check(
        s.pointer_x, lam, pointer_limit_target(spec.params, spec.t, lam));
    g.se_check("laplace_pointer_u" + fmt(u), spec.t, lc.estimate, lc.se,
               lc.target, 4.0);
  }

  // (iii) transform machinery sanity on synthetic Gaussian endpoints
  {
    RandomStream stream(kAcceptanceSeed + 9, 0);
    std::vector<double> v2(spec.n_paths);
    for (auto& x : v2) {
      const double v = std::sqrt(spec.t) * normal(stream);
      x = v * v;
    }
    for (double u : {0.5, 1.0, 2.0}) {
      const double lam = u / (2.0 * spec.t);
      const auto lc =
          laplace_check(v2, lam, gaussian_square_target(spec.t, lam));
      g.se_check("laplace_real_sanity_u" + fmt(u), spec.t, lc.estimate, lc.se,
                 lc.target, 3.0);
    }
  }
  r.pass = r.failures.empty();
  return r;
}

// -- criterion 8: deterministic replay ----------------------------------------

inline CriterionResult determinism_suite(const AcceptanceOptions&) {
  CriterionResult r{8, "determinism", false, {}, check_table()};
  Gate g{&r, &r.table};

  EnsembleSpec spec;
  spec.params = {1.0, 0.25, {0.1, 0.0}};
  spec.grid = {2.0, 200};
  spec.sample_nodes = {100, 200};
  spec.seed = kAcceptanceSeed + 10;
  spec.n_paths = 768;

  auto render = [&](unsigned threads) {
    auto rows = functional_moments(spec, threads);
    CsvTable t{{"t", "zz", "zz_se", "y0", "y0_se"}};
    for (const auto& row : rows)
      t.row({csv_cell(row.t), csv_cell(row.zz.value), csv_cell(row.zz.se),
             csv_cell(row.y0.value), csv_cell(row.y0.se)});
    return t.text();
  };

  const std::string once = render(1);
  g.bool_check("replay_same_thread_count", once == render(1),
               "second single-thread run differs");
  g.bool_check("replay_across_thread_counts",
               once == render(3) && once == render(4),
               "multi-thread run differs from single-thread");
  r.pass = r.failures.empty();
  return r;
}

}  // namespace acceptance_detail

inline std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt) {
  using namespace acceptance_detail;
  std::vector<CriterionResult> out;
  out.push_back(moment_suite(opt));
  out.push_back(covariance_suite(opt));
  out.push_back(regime_suite(opt));
  out.push_back(bound_suite(opt));
  out.push_back(fock_suite(opt));
  out.push_back(estimator_suite(opt));
  out.push_back(limit_suite(opt));
  out.push_back(determinism_suite(opt));
  return out;
}

}  // namespace qmeter
