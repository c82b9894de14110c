#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qmeter/fock.hpp"
#include "qmeter/functionals.hpp"
#include "qmeter/model.hpp"
#include "qmeter/wiener.hpp"

namespace qmeter {
namespace {

constexpr int kDim = 64;
constexpr int kBlock = kDim / 2;

TEST(Operators, LadderCommutatorOnTheInnerBlock) {
  const fock::Mat a = fock::lowering(kDim);
  const fock::Mat comm = a * a.adjoint() - a.adjoint() * a;
  const fock::Mat id = fock::Mat::Identity(kDim, kDim);
  // the defect lives entirely in the last diagonal entry
  EXPECT_LT(fock::block_error(comm - id, kDim - 1), 1e-12);
  EXPECT_NEAR(std::abs(comm(kDim - 1, kDim - 1) - double(1 - kDim)), 0.0,
              1e-12);
}

TEST(Operators, HamiltonianIsHermitianWithDisplacedSpectrum) {
  ModelParams p;
  p.omega = 1.3;
  p.gamma = 0.25;
  p.alpha = {0.2, 0.1};
  const fock::Mat h = fock::hamiltonian(p, kDim);
  EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<fock::Mat> es(h);
  const double a2 = std::norm(p.alpha);
  // far from the truncation edge the spectrum is omega (k - |alpha|^2)
  for (int k = 0; k < kBlock; ++k)
    EXPECT_NEAR(es.eigenvalues()[k], p.omega * (k - a2), 1e-9);
}

TEST(Displacement, IdentityAtZeroAndGuardAtTheEdge) {
  const fock::Mat d0 = fock::displacement(cplx(0.0, 0.0), 16);
  EXPECT_EQ((d0 - fock::Mat::Identity(16, 16)).norm(), 0.0);
  EXPECT_NO_THROW(fock::displacement(cplx(4.0, 0.0), kDim));  // |z|^2 = 16
  EXPECT_THROW(fock::displacement(cplx(4.1, 0.0), kDim),
               std::invalid_argument);
}

TEST(Displacement, RecurrenceMatchesTheMatrixExponential) {
  const cplx z{0.7, -0.3};
  const fock::Mat rec = fock::displacement(z, kDim);
  const fock::Mat exp = fock::displacement_expm(z, kDim);
  EXPECT_LT(fock::block_error(rec - exp, kBlock), 1e-10);
}

TEST(Displacement, UnitaryOnTheReliableBlock) {
  const fock::Mat d = fock::displacement(cplx(1.0, 0.5), kDim);
  EXPECT_LT(fock::block_unitarity_error(d, kBlock), 1e-10);
  // truncation is visible once the full dimension is included
  EXPECT_GT(fock::block_unitarity_error(fock::displacement(cplx(3.5, 0.0), kDim),
                                        kDim),
            1e-3);
}

TEST(Displacement, CompositionLaw) {
  const cplx za{0.4, 0.2}, zb{-0.3, 0.5};
  const fock::Mat lhs = fock::displacement(za, kDim) * fock::displacement(zb, kDim);
  const cplx phase = std::exp(cplx(0.0, (za * std::conj(zb)).imag()));
  const fock::Mat rhs = phase * fock::displacement(za + zb, kDim);
  EXPECT_LT(fock::block_error(lhs - rhs, kBlock), 1e-8);
}

TEST(Propagator, IdentityAtTheOrigin) {
  ModelParams p;
  const fock::Mat u = fock::propagator(p, 0.0, cplx(0.0, 0.0), 0.0, 16);
  EXPECT_LT((u - fock::Mat::Identity(16, 16)).norm(), 1e-14);
}

TEST(Propagator, UnitaryAndHeisenbergConsistentAlongAPath) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.25;
  p.alpha = {0.2, 0.0};
  const TimeGrid grid{6.0, 600};
  const BrownianPath path = sample_path(grid, 15, 0);
  const PathFunctionals f = compute_functionals(p, path);
  const std::size_t k = grid.n_steps;
  const fock::Mat u = fock::propagator(p, f.phi[k], f.z[k], f.g[k], kDim);
  EXPECT_LT(fock::block_unitarity_error(u, kBlock), 1e-8);
  EXPECT_LT(fock::heisenberg_number_error(p, u, f.z[k], kBlock), 1e-6);
}

TEST(Propagator, MeterShiftIsTheDisplacementArgument) {
  ModelParams p;
  p.omega = 2.0;
  p.alpha = {0.1, -0.2};
  const cplx z{0.3, 0.7};
  EXPECT_EQ(fock::meter_shift(p, z), cplx(0.0, 1.0) * p.omega * p.alpha * z);
  EXPECT_EQ(fock::meter_shift(p, cplx(0.0, 0.0)), cplx(0.0, 0.0));
}

TEST(Propagator, NoiseEquationResidualIsFirstOrderInDt) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.25;
  p.alpha = {0.2, 0.0};
  const int dim = 32, block = 16;
  const fock::Mat h = fock::hamiltonian(p, dim);
  const TimeGrid fine{1.0, 1024};
  const BrownianPath path = sample_path(fine, 4, 0);
  const PathFunctionals f = compute_functionals(p, path);

  // mean Euler-step residual at step length m dt_fine; a single step is
  // dominated by one (dW^2 - dt) draw, so average over abutting windows
  auto residual = [&](std::size_t m) {
    const double dt = double(m) * fine.dt();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k + m <= 512; k += m) {
      const fock::Mat u = fock::propagator(p, f.phi[k], f.z[k], f.g[k], dim);
      const fock::Mat u_next =
          fock::propagator(p, f.phi[k + m], f.z[k + m], f.g[k + m], dim);
      const double dw = path.w[k + m] - path.w[k];
      sum += fock::block_error(
          fock::qsde_step_residual(p, h, u_next, u, dt, dw), block);
      ++count;
    }
    return sum / double(count);
  };

  const double r16 = residual(16);
  const double r4 = residual(4);
  const double r1 = residual(1);
  EXPECT_GE(r16 / r4, 2.0);
  EXPECT_GE(r4 / r1, 2.0);
  EXPECT_LT(r1, 2e-2);
}

TEST(AveragedNumber, ReducesToTheNumberOperatorWithoutDrive) {
  ModelParams p;
  p.omega = 1.0;
  p.alpha = {0.0, 0.0};
  const auto avg = fock::time_averaged_number(p, 7.3, 32);
  EXPECT_LT((avg.op - fock::number_op(32)).norm(), 1e-10);
  ASSERT_EQ(avg.eigenvalues.size(), 32u);
  for (int k = 0; k < 32; ++k)
    EXPECT_NEAR(avg.eigenvalues[std::size_t(k)], double(k), 1e-10);
  EXPECT_THROW(fock::time_averaged_number(p, 0.0, 32), std::invalid_argument);
}

TEST(AveragedNumber, WholePeriodAverageHitsThePredictions) {
  ModelParams p;
  p.omega = 1.0;
  p.gamma = 0.25;
  p.alpha = {0.2, 0.0};
  const double t_avg = 200.0 * 2.0 * M_PI / p.omega;
  const auto avg = fock::time_averaged_number(p, t_avg, kDim);
  for (int n : {0, 1, 3}) {
    const auto lm = fock::level_moments(avg.op, n);
    const auto pred = fock::averaged_number_prediction(p, n);
    EXPECT_NEAR(lm.mean, pred.mean, 1e-6 * pred.mean);
    EXPECT_NEAR(lm.var, pred.var, 1e-6 * pred.var);
  }
}

TEST(AveragedNumber, LevelMomentsOfTheBareNumberOperator) {
  const auto lm = fock::level_moments(fock::number_op(kDim), 5);
  EXPECT_DOUBLE_EQ(lm.mean, 5.0);
  EXPECT_DOUBLE_EQ(lm.var, 0.0);
  const auto pred = fock::averaged_number_prediction(
      ModelParams{1.0, 0.25, {0.2, 0.0}}, 2);
  const double a2 = std::norm(cplx{0.2, 0.0});
  EXPECT_DOUBLE_EQ(pred.mean, 2.0 + 2.0 * a2);
  EXPECT_DOUBLE_EQ(pred.var, 5.0 * a2);
}

}  // namespace
}  // namespace qmeter
