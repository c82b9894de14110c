#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmeter {

using cplx = std::complex<double>;

// Oscillator frequency omega, meter coupling gamma, drive amplitude alpha.
// gamma = 0 is the decoupled edge case and is accepted; formulas that need
// gamma > 0 guard for it explicitly.
struct ModelParams {
  double omega = 1.0;
  double gamma = 0.25;
  cplx alpha = {0.1, 0.0};

  // c = i omega - gamma^2/2.  |c| >= omega and 1/c + 1/conj(c) = -gamma^2/|c|^2.
  cplx c() const { return {-0.5 * gamma * gamma, omega}; }
  cplx kappa() const { return omega * alpha * gamma / c(); }

  void validate() const {
    if (!std::isfinite(omega) || !(omega > 0.0))
      throw std::invalid_argument("omega: must be finite and > 0");
    if (!std::isfinite(gamma) || !(gamma >= 0.0))
      throw std::invalid_argument("gamma: must be finite and >= 0");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
      throw std::invalid_argument("alpha: components must be finite");
  }
};

// Uniform grid over [0, t_end] with n_steps steps, nodes t_k = k dt.
struct TimeGrid {
  double t_end = 10.0;
  std::size_t n_steps = 10000;

  double dt() const { return t_end / static_cast<double>(n_steps); }
  std::size_t n_nodes() const { return n_steps + 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

  void validate() const {
    if (!std::isfinite(t_end) || !(t_end > 0.0))
      throw std::invalid_argument("t_end: must be finite and > 0");
    if (n_steps == 0) throw std::invalid_argument("n_steps: must be >= 1");
  }
};

// Resolution guard: the fastest scale is max(omega, gamma^2); a step must
// resolve it.  Overridable for intentionally coarse studies.
inline constexpr double kResolutionLimit = 0.1;

inline bool resolution_ok(const TimeGrid& grid, const ModelParams& p) {
  return grid.dt() * std::max(p.omega, p.gamma * p.gamma) <= kResolutionLimit;
}

inline void check_resolution(const TimeGrid& grid, const ModelParams& p,
                             bool enforce = true) {
  if (enforce && !resolution_ok(grid, p))
    throw std::invalid_argument(
        "n_steps: dt * max(omega, gamma^2) exceeds " +
        std::to_string(kResolutionLimit));
}

enum class Regime { kEarly, kOscillatory, kLate };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::kEarly: return "early";
    case Regime::kOscillatory: return "oscillatory";
    default: return "late";
  }
}

// Factor-of-10 separations around the two intrinsic times 1/omega, 1/gamma^2.
inline Regime classify_regime(const ModelParams& p, double t) {
  if (t * p.gamma * p.gamma >= 10.0) return Regime::kLate;
  if (t * p.omega <= 0.1) return Regime::kEarly;
  return Regime::kOscillatory;
}

struct WindowConfig {
  double a_max = 0.1;  // drive small enough that heating stays mild
  double f_hi = 0.1;   // t <= f_hi / (|alpha|^2 gamma^2)
  double f_lo = 10.0;  // t >= f_lo / gamma^2
};

struct RegimeReport {
  Regime regime;
  bool drive_ok;      // |alpha| <= a_max
  bool below_heating; // t <= f_hi |alpha|^-2 gamma^-2
  bool past_noise;    // t >= f_lo gamma^-2
  bool window_ok() const { return drive_ok && below_heating && past_noise; }
};

// IEEE semantics give the intended gamma = 0 / alpha = 0 behaviour:
// the heating bound becomes +inf (holds), the noise bound never holds.
inline RegimeReport measurement_window(const ModelParams& p, double t,
                                       const WindowConfig& w = {}) {
  const double a2 = std::norm(p.alpha);
  const double g2 = p.gamma * p.gamma;
  RegimeReport r;
  r.regime = classify_regime(p, t);
  r.drive_ok = std::sqrt(a2) <= w.a_max;
  r.below_heating = t <= w.f_hi / (a2 * g2);
  r.past_noise = t >= w.f_lo / g2;
  return r;
}

}  // namespace qmeter
