#pragma once

// Ensemble simulation over Wiener paths.  Each path is generated from a
// counter RNG stream (seed, base_stream + path index), so results are
// reproducible and independent of the number of worker threads: paths are
// accumulated into fixed 256-path blocks and block sums are combined in
// index order regardless of which thread produced them.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmeter/analytic.hpp"
#include "qmeter/functionals.hpp"
#include "qmeter/model.hpp"
#include "qmeter/parallel.hpp"
#include "qmeter/stats.hpp"
#include "qmeter/wiener.hpp"

namespace qmeter {

struct EnsembleSpec {
  ModelParams params;
  TimeGrid grid;
  std::vector<std::size_t> sample_nodes;  // strictly increasing, <= n_steps
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
  std::uint64_t base_stream = 0;
  bool enforce_resolution = true;

  void validate() const {
    params.validate();
    grid.validate();
    if (enforce_resolution) check_resolution(grid, params);
    if (n_paths == 0) throw std::invalid_argument("n_paths: must be positive");
    if (sample_nodes.empty())
      throw std::invalid_argument("sample_nodes: must be non-empty");
    for (std::size_t i = 0; i < sample_nodes.size(); ++i) {
      if (sample_nodes[i] > grid.n_steps)
        throw std::invalid_argument("sample_nodes: node beyond grid");
      if (i > 0 && sample_nodes[i] <= sample_nodes[i - 1])
        throw std::invalid_argument("sample_nodes: must be strictly increasing");
    }
  }
};

// Runs the ensemble and accumulates k quantities per sample node.
// extract(state, x) must fill x[0..k).  Returns one finalized moment
// matrix (means + covariances across paths) per sample node.
template <class Extract>
std::vector<MomentMatrix> run_ensemble(const EnsembleSpec& spec, std::size_t k,
                                       Extract extract, unsigned threads = 0) {
  spec.validate();
  const std::size_t n_blocks = (spec.n_paths + kPathBlock - 1) / kPathBlock;
  std::vector<MomentMatrix> acc(spec.sample_nodes.size(),
                                MomentMatrix(k, n_blocks));
  const std::size_t last_node = spec.sample_nodes.back();

  run_blocks(
      n_blocks,
      [&](std::size_t b) {
        std::vector<double> w;
        std::vector<double> x(k);
        FunctionalStepper stepper(spec.params, spec.grid);
        const std::size_t lo = b * kPathBlock;
        const std::size_t hi = std::min(spec.n_paths, lo + kPathBlock);
        for (std::size_t path = lo; path < hi; ++path) {
          fill_path(w, spec.grid, spec.seed, spec.base_stream + path);
          stepper.reset();
          std::size_t next = 0;
          if (spec.sample_nodes[0] == 0) {
            extract(stepper.corrected_state(), x.data());
            MomentMatrix::accumulate(acc[0].block_slot(b), x.data(), k);
            next = 1;
          }
          for (std::size_t node = 1; node <= last_node; ++node) {
            stepper.advance(w[node]);
            if (node == spec.sample_nodes[next]) {
              extract(stepper.corrected_state(), x.data());
              MomentMatrix::accumulate(acc[next].block_slot(b), x.data(), k);
              ++next;
            }
          }
        }
      },
      threads);

  for (auto& m : acc) m.finalize();
  return acc;
}

struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Sample moments of the path functionals at one time, with standard errors.
struct FunctionalMomentRow {
  double t = 0.0;
  std::size_t n_paths = 0;
  MomentEstimate eiphi_re, eiphi_im;
  MomentEstimate z_re, z_im;
  MomentEstimate zz;      // |Z|^2
  MomentEstimate y1_re, y1_im;
  MomentEstimate y1y1;    // |Y1|^2
  MomentEstimate y0;
  MomentEstimate g;
  double var_zz = 0.0;    // sample variance of |Z|^2 across paths
  double var_y0 = 0.0;    // sample variance of Y0 across paths

  std::complex<double> eiphi() const { return {eiphi_re.value, eiphi_im.value}; }
  std::complex<double> z() const { return {z_re.value, z_im.value}; }
  std::complex<double> y1() const { return {y1_re.value, y1_im.value}; }
};

namespace detail {

// Quantity layout shared by the moment suite.
enum MomentQty : std::size_t {
  kQEr = 0, kQEi, kQZr, kQZi, kQZZ, kQY1r, kQY1i, kQY1Y1, kQY0, kQG,
  kNumMomentQty
};

inline void extract_moment_qty(const FunctionalState& s, double* x) {
  x[kQEr] = s.eiphi_re;
  x[kQEi] = s.eiphi_im;
  x[kQZr] = s.z_re;
  x[kQZi] = s.z_im;
  x[kQZZ] = s.z_norm2();
  x[kQY1r] = s.y1_re;
  x[kQY1i] = s.y1_im;
  x[kQY1Y1] = s.y1_norm2();
  x[kQY0] = s.y0;
  x[kQG] = s.g;
}

inline MomentEstimate estimate(const MomentMatrix& m, std::size_t q) {
  return {m.mean(q), m.se_mean(q)};
}

}  // namespace detail

inline std::vector<FunctionalMomentRow> functional_moments(
    const EnsembleSpec& spec, unsigned threads = 0) {
  auto mats = run_ensemble(spec, detail::kNumMomentQty,
                           detail::extract_moment_qty, threads);
  std::vector<FunctionalMomentRow> rows(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const MomentMatrix& m = mats[i];
    FunctionalMomentRow& r = rows[i];
    r.t = spec.grid.time(spec.sample_nodes[i]);
    r.n_paths = spec.n_paths;
    r.eiphi_re = detail::estimate(m, detail::kQEr);
    r.eiphi_im = detail::estimate(m, detail::kQEi);
    r.z_re = detail::estimate(m, detail::kQZr);
    r.z_im = detail::estimate(m, detail::kQZi);
    r.zz = detail::estimate(m, detail::kQZZ);
    r.y1_re = detail::estimate(m, detail::kQY1r);
    r.y1_im = detail::estimate(m, detail::kQY1i);
    r.y1y1 = detail::estimate(m, detail::kQY1Y1);
    r.y0 = detail::estimate(m, detail::kQY0);
    r.g = detail::estimate(m, detail::kQG);
    r.var_zz = m.var(detail::kQZZ);
    r.var_y0 = m.var(detail::kQY0);
  }
  return rows;
}

// Moments of the two observables read out after the interaction: the field
// quantum counter N and the time-averaged pointer N = Q_t / (2 gamma t),
// both for the oscillator prepared in level n.  The pointer statistics use
// the exact vacuum quadrature variance <P_t^2> = t, so only the functional
// moments are estimated.
struct ObservableMoments {
  double t = 0.0;
  unsigned level = 0;
  MomentEstimate number_mean;   // E<N>
  double number_var = 0.0;      // Var<N>
  MomentEstimate pointer_mean;  // E<pointer>, gamma > 0 only
  double pointer_var = 0.0;
  bool pointer_valid = false;
};

inline ObservableMoments observable_moments_from_row(
    const ModelParams& p, const FunctionalMomentRow& r, unsigned level) {
  const double oa2 = p.omega * p.omega * std::norm(p.alpha);
  const double g2 = p.gamma * p.gamma;
  const double two_n1 = 2.0 * level + 1.0;
  ObservableMoments out;
  out.t = r.t;
  out.level = level;
  out.number_mean = {level + oa2 * r.zz.value, oa2 * r.zz.se};
  out.number_var = oa2 * (oa2 * r.var_zz + two_n1 * r.zz.value);
  if (p.gamma > 0.0 && r.t > 0.0) {
    const double t = r.t;
    out.pointer_mean = {level + oa2 * r.y0.value / t, oa2 * r.y0.se / t};
    out.pointer_var = (t + 4.0 * g2 * oa2 *
                               (oa2 * r.var_y0 + two_n1 * r.y1y1.value)) /
                      (4.0 * g2 * t * t);
    out.pointer_valid = true;
  }
  return out;
}

inline std::vector<ObservableMoments> estimate_moments(
    const EnsembleSpec& spec, unsigned level, unsigned threads = 0) {
  auto rows = functional_moments(spec, threads);
  std::vector<ObservableMoments> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back(observable_moments_from_row(spec.params, r, level));
  return out;
}

// --- covariance estimation -------------------------------------------------

struct CovarianceEstimate {
  std::complex<double> value;
  double se_re = 0.0;
  double se_im = 0.0;
};

struct CovarianceRow {
  double t = 0.0;
  std::size_t n_paths = 0;
  CovarianceEstimate zz_eiphi;        // cov(|Z|^2, e^{i phi})
  CovarianceEstimate zstar_eiphi_z;   // cov(conj(Z) e^{i phi}, Z)
  CovarianceEstimate eiphi_z_z;       // cov(e^{-i phi} Z, Z)
};

namespace detail {

// Quantity layout for the covariance suite.  p1 = |Z|^2 e^{i phi},
// p2 = conj(Z) e^{i phi}, p3 = e^{-i phi} Z^2, p4 = e^{-i phi} Z.
enum CovQty : std::size_t {
  kCP1r = 0, kCP1i, kCP2r, kCP2i, kCP3r, kCP3i, kCP4r, kCP4i,
  kCEr, kCEi, kCZr, kCZi, kCZZ,
  kNumCovQty
};

inline void extract_cov_qty(const FunctionalState& s, double* x) {
  const double er = s.eiphi_re, ei = s.eiphi_im;
  const double zr = s.z_re, zi = s.z_im;
  const double zz = zr * zr + zi * zi;
  x[kCP1r] = zz * er;
  x[kCP1i] = zz * ei;
  x[kCP2r] = zr * er + zi * ei;   // conj(z) * e
  x[kCP2i] = zr * ei - zi * er;
  const double z2r = zr * zr - zi * zi;  // z^2
  const double z2i = 2.0 * zr * zi;
  x[kCP3r] = z2r * er + z2i * ei;  // z^2 * conj(e)
  x[kCP3i] = z2i * er - z2r * ei;
  x[kCP4r] = zr * er + zi * ei;    // z * conj(e)
  x[kCP4i] = zi * er - zr * ei;
  x[kCEr] = er;
  x[kCEi] = ei;
  x[kCZr] = zr;
  x[kCZi] = zi;
  x[kCZZ] = zz;
}

// Delta-method covariance estimator: mean(P) - mean(A) mean(B), where P is
// the triple product and A, B the factors.  Index -1 marks a factor with no
// imaginary component.
inline CovarianceEstimate product_covariance(const MomentMatrix& m,
                                             int pr, int pi,
                                             int ar, int ai,
                                             int br, int bi) {
  auto mean_of = [&](int q) { return q < 0 ? 0.0 : m.mean(std::size_t(q)); };
  const std::complex<double> P(mean_of(pr), mean_of(pi));
  const std::complex<double> A(mean_of(ar), mean_of(ai));
  const std::complex<double> B(mean_of(br), mean_of(bi));

  CovarianceEstimate out;
  out.value = P - A * B;

  // Gradient of Re / Im of the estimator in the quantity means.
  std::vector<double> cre(m.n_quantities(), 0.0), cim(m.n_quantities(), 0.0);
  auto add = [](std::vector<double>& c, int q, double v) {
    if (q >= 0) c[std::size_t(q)] += v;
  };
  add(cre, pr, 1.0);
  add(cre, ar, -B.real());
  add(cre, ai, +B.imag());
  add(cre, br, -A.real());
  add(cre, bi, +A.imag());
  add(cim, pi, 1.0);
  add(cim, ar, -B.imag());
  add(cim, ai, -B.real());
  add(cim, br, -A.imag());
  add(cim, bi, -A.real());
  out.se_re = m.se_of_combination(cre);
  out.se_im = m.se_of_combination(cim);
  return out;
}

}  // namespace detail

inline std::vector<CovarianceRow> covariance_estimates(
    const EnsembleSpec& spec, unsigned threads = 0) {
  using namespace detail;
  auto mats = run_ensemble(spec, kNumCovQty, extract_cov_qty, threads);
  std::vector<CovarianceRow> rows(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const MomentMatrix& m = mats[i];
    CovarianceRow& r = rows[i];
    r.t = spec.grid.time(spec.sample_nodes[i]);
    r.n_paths = spec.n_paths;
    r.zz_eiphi = product_covariance(m, kCP1r, kCP1i, kCZZ, -1, kCEr, kCEi);
    r.zstar_eiphi_z = product_covariance(m, kCP1r, kCP1i, kCP2r, kCP2i,
                                         kCZr, kCZi);
    r.eiphi_z_z = product_covariance(m, kCP3r, kCP3i, kCP4r, kCP4i,
                                     kCZr, kCZi);
  }
  return rows;
}

// --- estimator error curve ---------------------------------------------------

// Mean squared error of the pointer as an estimator of the level n, versus
// the a-priori bound.  Exact ingredients (E Y0, E|Y1|^2, and E[Y0]^2) come
// from the closed-form moments; Var Y0 is the one Monte-Carlo ingredient.
struct ErrorCurvePoint {
  double t = 0.0;
  double mse = 0.0;        // E[(pointer - n)^2]
  double mse_se = 0.0;     // from the Var Y0 standard error
  double bound = 0.0;
  std::size_t n_paths = 0;
};

inline std::vector<ErrorCurvePoint> estimator_error_curve(
    const EnsembleSpec& spec, unsigned level, unsigned threads = 0) {
  if (!(spec.params.gamma > 0.0))
    throw std::invalid_argument("gamma: pointer error curve requires gamma > 0");
  const ModelParams& p = spec.params;
  const double oa2 = p.omega * p.omega * std::norm(p.alpha);
  const double g2 = p.gamma * p.gamma;
  const double two_n1 = 2.0 * level + 1.0;

  // Var Y0 per node, with a jackknife-style SE of the variance from block
  // spread: run one quantity and read the moment matrix.
  auto mats = run_ensemble(
      spec, 2,
      [](const FunctionalState& s, double* x) {
        x[0] = s.y0;
        x[1] = s.y0 * s.y0;
      },
      threads);

  std::vector<ErrorCurvePoint> out(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const double t = spec.grid.time(spec.sample_nodes[i]);
    const MomentSet ms = moments(p, t);
    const double var_y0 = mats[i].var(0);
    // d(var)/d(mean y0^2) = 1, d(var)/d(mean y0) = -2 mean(y0); propagate.
    std::vector<double> cvar = {-2.0 * mats[i].mean(0), 1.0};
    const double se_var = mats[i].se_of_combination(cvar);
    const double ey0_sq = ms.y0 * ms.y0 + var_y0;  // E[Y0^2]
    const double denom = 4.0 * g2 * t * t;
    ErrorCurvePoint& pt = out[i];
    pt.t = t;
    pt.n_paths = spec.n_paths;
    pt.mse = (t + 4.0 * g2 * oa2 * (two_n1 * ms.y1y1 + oa2 * ey0_sq)) / denom;
    pt.mse_se = 4.0 * g2 * oa2 * oa2 * se_var / denom;
    pt.bound = estimator_error_bound(p, level, t);
  }
  return out;
}

// --- level resolution demo ---------------------------------------------------

// Whether adjacent levels n, n+1 are separated by the pointer readout:
// means differ by exactly 1, so resolution requires 4 max(sd_n, sd_{n+1}) <= 1.
struct ResolutionRow {
  double t = 0.0;
  unsigned level = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double sd = 0.0;
  bool resolvable_from_next = false;
};

inline std::vector<ResolutionRow> window_demo(const EnsembleSpec& spec,
                                              unsigned max_level,
                                              unsigned threads = 0) {
  if (spec.sample_nodes.size() != 1)
    throw std::invalid_argument("sample_nodes: window demo uses a single time");
  auto rows = functional_moments(spec, threads);
  const FunctionalMomentRow& r = rows[0];
  std::vector<ResolutionRow> out;
  std::vector<double> sd(max_level + 2);
  for (unsigned n = 0; n <= max_level + 1; ++n) {
    auto obs = observable_moments_from_row(spec.params, r, n);
    if (!obs.pointer_valid)
      throw std::invalid_argument("gamma: window demo requires gamma > 0");
    sd[n] = std::sqrt(obs.pointer_var);
    if (n <= max_level)
      out.push_back({r.t, n, obs.pointer_mean.value, obs.pointer_mean.se,
                     sd[n], false});
  }
  for (unsigned n = 0; n <= max_level; ++n)
    out[n].resolvable_from_next = 4.0 * std::max(sd[n], sd[n + 1]) <= 1.0;
  return out;
}

}  // namespace qmeter
