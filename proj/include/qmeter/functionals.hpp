#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qmeter/model.hpp"
#include "qmeter/stats.hpp"
#include "qmeter/wiener.hpp"

namespace qmeter {

// State of the path functionals at a grid node:
//   phi = omega t + gamma W_t            (exact at nodes)
//   Z   = int_0^t e^{i phi_s} ds         (trapezoid)
//   Y1  = int_0^t Z_s ds, Y0 = int_0^t |Z_s|^2 ds
//   G   = omega^2 |alpha|^2 int_0^t Im(e^{-i phi_s} Z_s) ds
struct FunctionalState {
  double t = 0.0;
  double w = 0.0;
  double phi = 0.0;
  double eiphi_re = 1.0, eiphi_im = 0.0;
  double z_re = 0.0, z_im = 0.0;
  double y1_re = 0.0, y1_im = 0.0;
  double y0 = 0.0;
  double g = 0.0;

  cplx eiphi() const { return {eiphi_re, eiphi_im}; }
  cplx z() const { return {z_re, z_im}; }
  cplx y1() const { return {y1_re, y1_im}; }
  double z_norm2() const { return z_re * z_re + z_im * z_im; }
  double y1_norm2() const { return y1_re * y1_re + y1_im * y1_im; }
};

// One-step evaluator.  e^{i phi} advances by a unit rotation whose angle is
// the exact node difference; the rotation uses a small-angle polynomial
// (|dphi| <= 0.1, error < 1e-13 per step) and resyncs against the exact
// sin/cos every 512 steps, so the product stays consistent with phi.
class FunctionalStepper {
 public:
  FunctionalStepper(const ModelParams& params, const TimeGrid& grid)
      : omega_(params.omega),
        gamma_(params.gamma),
        oa2_(params.omega * params.omega * std::norm(params.alpha)),
        dt_(grid.dt()),
        half_dt_(0.5 * grid.dt()) {}

  const FunctionalState& state() const { return s_; }
  std::size_t step_index() const { return k_; }

  // State with the trapezoid endpoint term (dt^2/12)[f'(t) - f'(0)] removed
  // from Y1, Y0 and G; their integrand derivatives are exact functions of
  // the endpoint state, and all three vanish at t = 0 except Z'(0) = 1.
  // Skipping this correction leaves Y0 biased by several standard errors at
  // small t, where the sampling spread collapses faster than the bias.
  FunctionalState corrected_state() const {
    FunctionalState c = s_;
    const double k = dt_ * dt_ / 12.0;
    c.y1_re -= k * (s_.eiphi_re - 1.0);
    c.y1_im -= k * s_.eiphi_im;
    c.y0 -= k * 2.0 * (s_.z_re * s_.eiphi_re + s_.z_im * s_.eiphi_im);
    c.g -= k * oa2_ * (s_.eiphi_re * s_.z_im - s_.eiphi_im * s_.z_re);
    return c;
  }

  void reset() {
    s_ = FunctionalState{};
    k_ = 0;
  }

  void advance(double w_next) {
    ++k_;
    const double t_next = static_cast<double>(k_) * dt_;
    const double phi_next = omega_ * t_next + gamma_ * w_next;
    const double dphi = phi_next - s_.phi;
    double er_n, ei_n;
    if ((k_ & 511u) == 0 || std::fabs(dphi) > 0.1) {
      er_n = std::cos(phi_next);
      ei_n = std::sin(phi_next);
    } else {
      const double x2 = dphi * dphi;
      const double sp =
          dphi * (1.0 - x2 * (1.0 / 6 - x2 * (1.0 / 120 - x2 * (1.0 / 5040))));
      const double cp =
          1.0 -
          x2 * (0.5 - x2 * (1.0 / 24 - x2 * (1.0 / 720 - x2 * (1.0 / 40320))));
      er_n = s_.eiphi_re * cp - s_.eiphi_im * sp;
      ei_n = s_.eiphi_re * sp + s_.eiphi_im * cp;
    }
    const double zr_n = s_.z_re + half_dt_ * (s_.eiphi_re + er_n);
    const double zi_n = s_.z_im + half_dt_ * (s_.eiphi_im + ei_n);
    s_.y1_re += half_dt_ * (s_.z_re + zr_n);
    s_.y1_im += half_dt_ * (s_.z_im + zi_n);
    s_.y0 += half_dt_ * (s_.z_re * s_.z_re + s_.z_im * s_.z_im +
                         zr_n * zr_n + zi_n * zi_n);
    const double gd_prev = s_.eiphi_re * s_.z_im - s_.eiphi_im * s_.z_re;
    const double gd_next = er_n * zi_n - ei_n * zr_n;
    s_.g += half_dt_ * oa2_ * (gd_prev + gd_next);
    s_.z_re = zr_n;
    s_.z_im = zi_n;
    s_.eiphi_re = er_n;
    s_.eiphi_im = ei_n;
    s_.phi = phi_next;
    s_.w = w_next;
    s_.t = t_next;
  }

 private:
  double omega_, gamma_, oa2_, dt_, half_dt_;
  FunctionalState s_{};
  std::size_t k_ = 0;
};

// All functionals along one path.  |Z_{k+1} - Z_k| <= dt and Y0 is
// nondecreasing by construction.
struct PathFunctionals {
  TimeGrid grid;
  std::vector<double> phi;
  std::vector<cplx> z;
  std::vector<cplx> y1;
  std::vector<double> y0;
  std::vector<double> g;
};

inline PathFunctionals compute_functionals(const ModelParams& params,
                                           const BrownianPath& path,
                                           bool enforce_resolution = true) {
  params.validate();
  check_resolution(path.grid, params, enforce_resolution);
  const std::size_t n = path.grid.n_nodes();
  PathFunctionals f{path.grid, {}, {}, {}, {}, {}};
  f.phi.resize(n);
  f.z.resize(n);
  f.y1.resize(n);
  f.y0.resize(n);
  f.g.resize(n);
  FunctionalStepper stepper(params, path.grid);
  auto record = [&f](std::size_t k, const FunctionalState& s) {
    f.phi[k] = s.phi;
    f.z[k] = s.z();
    f.y1[k] = s.y1();
    f.y0[k] = s.y0;
    f.g[k] = s.g;
  };
  record(0, stepper.state());
  for (std::size_t k = 1; k < n; ++k) {
    stepper.advance(path.w[k]);
    record(k, stepper.corrected_state());
  }
  return f;
}

// Semimartingale route for the same Z:
//   Z_t = (e^{i phi_t} - 1)/c - (i gamma / c) int_0^t e^{i phi_s} dW_s
// with the stochastic integral evaluated at left endpoints.  Agrees with the
// trapezoid route pathwise at rate O(sqrt(dt)).
inline std::vector<cplx> z_via_ito_parts(const ModelParams& params,
                                         const BrownianPath& path) {
  params.validate();
  const std::size_t n = path.grid.n_nodes();
  const cplx c = params.c();
  const cplx pref = cplx(0.0, params.gamma) / c;
  std::vector<cplx> z(n);
  z[0] = 0.0;
  cplx ito(0.0, 0.0);
  const double dt = path.grid.dt();
  for (std::size_t k = 1; k < n; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double phi_prev = params.omega * t_prev + params.gamma * path.w[k - 1];
    const cplx e_prev(std::cos(phi_prev), std::sin(phi_prev));
    ito += e_prev * (path.w[k] - path.w[k - 1]);
    const double t_k = static_cast<double>(k) * dt;
    const double phi_k = params.omega * t_k + params.gamma * path.w[k];
    const cplx e_k(std::cos(phi_k), std::sin(phi_k));
    z[k] = (e_k - 1.0) / c - pref * ito;
  }
  return z;
}

// Distributional check of the increment decomposition: conditionally on the
// path up to s, e^{-i phi_s}(Z_t - Z_s) is a fresh copy of Z_{t-s}.
struct IncrementCheck {
  KsResult re;
  KsResult im;
  bool pass(double level = 0.01) const {
    return re.p_value >= level && im.p_value >= level;
  }
};

inline IncrementCheck increment_decomposition_check(
    const ModelParams& params, const TimeGrid& grid, std::size_t s_node,
    std::size_t n_paths, std::uint64_t seed) {
  if (n_paths < 1000)
    throw std::invalid_argument("n_paths: need >= 1000 for the KS check");
  if (s_node == 0 || s_node >= grid.n_steps)
    throw std::invalid_argument("s_node: must satisfy 0 < s_node < n_steps");
  std::vector<double> re_a, im_a, re_b, im_b;
  re_a.reserve(n_paths);
  im_a.reserve(n_paths);
  re_b.reserve(n_paths);
  im_b.reserve(n_paths);
  TimeGrid tail{grid.t_end - grid.time(s_node), grid.n_steps - s_node};
  for (std::size_t i = 0; i < n_paths; ++i) {
    const BrownianPath path = sample_path(grid, seed, i);
    const PathFunctionals f = compute_functionals(params, path);
    const cplx rot(std::cos(f.phi[s_node]), -std::sin(f.phi[s_node]));
    const cplx inc = rot * (f.z.back() - f.z[s_node]);
    re_a.push_back(inc.real());
    im_a.push_back(inc.imag());
    const BrownianPath fresh = sample_path(tail, seed, n_paths + i);
    const PathFunctionals g = compute_functionals(params, fresh);
    re_b.push_back(g.z.back().real());
    im_b.push_back(g.z.back().imag());
  }
  return {ks_two_sample(std::move(re_a), std::move(re_b)),
          ks_two_sample(std::move(im_a), std::move(im_b))};
}

}  // namespace qmeter
