#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qmeter/functionals.hpp"
#include "qmeter/model.hpp"
#include "qmeter/wiener.hpp"

namespace qmeter {
namespace {

// Restriction of a sampled path to every stride-th node; still a Brownian
// path on the coarser grid, so both routes can be refined on shared noise.
BrownianPath subsample(const BrownianPath& fine, std::size_t stride) {
  BrownianPath out;
  out.grid = {fine.grid.t_end, fine.grid.n_steps / stride};
  out.seed = fine.seed;
  out.stream = fine.stream;
  out.w.resize(out.grid.n_nodes());
  for (std::size_t k = 0; k < out.w.size(); ++k) out.w[k] = fine.w[k * stride];
  return out;
}

TEST(Functionals, NodeZeroIsTheZeroState) {
  ModelParams p;
  const BrownianPath path = sample_path(TimeGrid{1.0, 100}, 1, 0);
  const PathFunctionals f = compute_functionals(p, path);
  EXPECT_EQ(f.phi[0], 0.0);
  EXPECT_EQ(f.z[0], cplx(0.0, 0.0));
  EXPECT_EQ(f.y1[0], cplx(0.0, 0.0));
  EXPECT_EQ(f.y0[0], 0.0);
  EXPECT_EQ(f.g[0], 0.0);
}

TEST(Functionals, NoiselessZIsTheRotationIntegral) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.0;
  const double t_end = 2.0 * std::numbers::pi;
  const TimeGrid grid{t_end, 2000};
  const PathFunctionals f = compute_functionals(p, sample_path(grid, 1, 0));
  const cplx iw(0.0, p.omega);
  // trapezoid error is O(dt^2 omega^2 t) plus the stepper's rotation drift
  for (std::size_t k : {std::size_t(500), std::size_t(1500)}) {
    const double t = grid.time(k);
    const cplx exact = (std::exp(iw * t) - 1.0) / iw;
    EXPECT_NEAR(std::abs(f.z[k] - exact), 0.0, 1e-5);
  }
  // a whole period integrates to zero
  EXPECT_NEAR(std::abs(f.z.back()), 0.0, 1e-8);
}

TEST(Functionals, PathwiseStructuralInvariants) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.5;
  p.alpha = {0.2, 0.1};
  const TimeGrid grid{5.0, 2000};
  const double dt = grid.dt();
  for (std::uint64_t s : {0ull, 1ull, 2ull}) {
    const PathFunctionals f = compute_functionals(p, sample_path(grid, 12, s));
    for (std::size_t k = 0; k + 1 < f.z.size(); ++k) {
      // |dZ| = dt |e1 + e2|/2 <= dt for a unit-modulus integrand
      EXPECT_LE(std::abs(f.z[k + 1] - f.z[k]), dt * (1.0 + 1e-12));
      EXPECT_GE(f.y0[k + 1], f.y0[k]);
    }
  }
}

TEST(Functionals, AlphaZeroLeavesGIdenticallyZero) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.5;
  p.alpha = {0.0, 0.0};
  const PathFunctionals f =
      compute_functionals(p, sample_path(TimeGrid{3.0, 600}, 4, 9));
  for (double g : f.g) EXPECT_EQ(g, 0.0);
}

TEST(Functionals, ResolutionGuardIsHonored) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.25;
  const BrownianPath coarse = sample_path(TimeGrid{10.0, 50}, 1, 0);  // dt 0.2
  EXPECT_THROW(compute_functionals(p, coarse), std::invalid_argument);
  EXPECT_NO_THROW(compute_functionals(p, coarse, false));
}

TEST(Functionals, CorrectedStateAppliesTheEndpointTerm) {
  ModelParams p;
  p.omega = 1.3;
  p.gamma = 0.4;
  p.alpha = {0.2, -0.1};
  const TimeGrid grid{1.0, 200};
  const BrownianPath path = sample_path(grid, 8, 2);
  FunctionalStepper stepper(p, grid);
  for (std::size_t k = 1; k <= 150; ++k) stepper.advance(path.w[k]);
  const FunctionalState s = stepper.state();
  const FunctionalState c = stepper.corrected_state();
  const double kf = grid.dt() * grid.dt() / 12.0;
  const double oa2 = p.omega * p.omega * std::norm(p.alpha);
  EXPECT_DOUBLE_EQ(c.y1_re, s.y1_re - kf * (s.eiphi_re - 1.0));
  EXPECT_DOUBLE_EQ(c.y1_im, s.y1_im - kf * s.eiphi_im);
  EXPECT_DOUBLE_EQ(
      c.y0, s.y0 - kf * 2.0 * (s.z_re * s.eiphi_re + s.z_im * s.eiphi_im));
  EXPECT_DOUBLE_EQ(
      c.g, s.g - kf * oa2 * (s.eiphi_re * s.z_im - s.eiphi_im * s.z_re));
  // Z and the phase pass through untouched.
  EXPECT_EQ(c.z_re, s.z_re);
  EXPECT_EQ(c.z_im, s.z_im);
  EXPECT_EQ(c.phi, s.phi);
}

TEST(ItoRoute, NoiselessCaseIsExact) {
  ModelParams p;
  p.omega = 2.0;
  p.gamma = 0.0;
  const TimeGrid grid{3.0, 600};
  const BrownianPath path = sample_path(grid, 3, 1);
  const std::vector<cplx> z = z_via_ito_parts(p, path);
  const cplx c = p.c();
  for (std::size_t k = 0; k < z.size(); k += 60) {
    const cplx exact = (std::exp(c * grid.time(k)) - 1.0) / c;
    EXPECT_NEAR(std::abs(z[k] - exact), 0.0, 1e-13);
  }
}

TEST(ItoRoute, AgreesWithTrapezoidAtRateSqrtDt) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.5;
  const TimeGrid fine_grid{1.0, 4096};
  const std::size_t n_paths = 64;
  // Mean endpoint gap between the two routes on shared noise, per grid level.
  auto mean_gap = [&](std::size_t stride) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      const BrownianPath coarse =
          subsample(sample_path(fine_grid, 33, i), stride);
      const PathFunctionals f = compute_functionals(p, coarse);
      const std::vector<cplx> z = z_via_ito_parts(p, coarse);
      acc += std::abs(f.z.back() - z.back());
    }
    return acc / double(n_paths);
  };
  const double g16 = mean_gap(16);
  const double g4 = mean_gap(4);
  const double g1 = mean_gap(1);
  // each 4x refinement should shrink the gap by about 2
  EXPECT_GE(g16 / g4, 1.4);
  EXPECT_GE(g4 / g1, 1.4);
  EXPECT_LT(g1, 2e-2);
}

TEST(IncrementDecomposition, FreshCopyInLaw) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.5;
  const TimeGrid grid{2.0, 400};
  const IncrementCheck chk =
      increment_decomposition_check(p, grid, 200, 2000, 77);
  EXPECT_TRUE(chk.pass(0.01));
}

TEST(IncrementDecomposition, InputValidation) {
  ModelParams p;
  const TimeGrid grid{2.0, 400};
  EXPECT_THROW(increment_decomposition_check(p, grid, 200, 10, 1),
               std::invalid_argument);
  EXPECT_THROW(increment_decomposition_check(p, grid, 0, 2000, 1),
               std::invalid_argument);
  EXPECT_THROW(increment_decomposition_check(p, grid, 400, 2000, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace qmeter
