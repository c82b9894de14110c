#pragma once

// Truncated Fock-space realization of the model.  Matrices live on the
// full dimension D; accuracy claims are made on the leading D/2 block,
// where truncation effects of moderate displacements stay below tolerance.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "qmeter/functionals.hpp"
#include "qmeter/model.hpp"

namespace qmeter::fock {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat lowering(int dim) {
  Mat a = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

inline Mat number_op(int dim) {
  Mat n = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = double(k);
  return n;
}

// H = omega (N - conj(alpha) a - alpha a†); spectrum omega (k - |alpha|^2)
// in the untruncated space, eigenvectors displaced from the Fock ladder.
inline Mat hamiltonian(const ModelParams& p, int dim) {
  Mat a = lowering(dim);
  Mat h = number_op(dim);
  h -= std::conj(p.alpha) * a;
  h -= p.alpha * a.adjoint();
  return p.omega * h;
}

// Matrix elements <m|D(z)|n> of the displacement e^{z a† - conj(z) a},
// by diagonal via the generalized Laguerre recurrence, O(dim^2) total.
// Truncation degrades rapidly once |z|^2 approaches dim, hence the guard.
inline Mat displacement(cplx z, int dim) {
  const double x = std::norm(z);
  if (!(x <= 0.25 * dim))
    throw std::invalid_argument("z: |z|^2 must be <= dim/4 for this dimension");
  Mat d(dim, dim);
  const double pre = std::exp(-0.5 * x);
  // Offset 0 upward: entries (n+off, n) carry z^off sqrt(n!/(n+off)!)
  // L_n^{off}(x); entries (n, n+off) carry (-conj(z))^off with the same
  // Laguerre factor.  head = e^{-x/2} z^off / sqrt(off!).
  cplx head_up = pre, head_dn = pre;
  for (int off = 0; off < dim; ++off) {
    if (off > 0) {
      head_up *= z / std::sqrt(double(off));
      head_dn *= -std::conj(z) / std::sqrt(double(off));
    }
    cplx up = head_up;
    cplx dn = head_dn;
    double lm2 = 0.0, lm1 = 1.0;  // L_{n-2}, L_{n-1} with L_0 = 1
    for (int n = 0; n + off < dim; ++n) {
      double ln;
      if (n == 0) {
        ln = 1.0;
      } else if (n == 1) {
        ln = 1.0 + off - x;
      } else {
        ln = ((2.0 * n - 1.0 + off - x) * lm1 - (n - 1.0 + off) * lm2) / n;
      }
      lm2 = lm1;
      lm1 = ln;
      d(n + off, n) = up * ln;
      if (off > 0) d(n, n + off) = dn * ln;
      // carry sqrt(n!/(n+off)!) z^off one row down: factor sqrt((n+1)/(n+1+off))
      const double carry = std::sqrt((n + 1.0) / (n + 1.0 + off));
      up *= carry;
      dn *= carry;
    }
  }
  return d;
}

// Reference route through the dense matrix exponential; used to cross-check
// the recurrence, not in hot paths.
inline Mat displacement_expm(cplx z, int dim) {
  Mat a = lowering(dim);
  Mat g = z * a.adjoint() - std::conj(z) * a;
  return g.exp();
}

// Meter displacement argument fed to the propagator.
inline cplx meter_shift(const ModelParams& p, cplx z_functional) {
  return cplx(0.0, 1.0) * p.omega * p.alpha * z_functional;
}

// Propagator along one noise realization, from the path functionals at a
// node: U = e^{-i phi N} D(i omega alpha Z) e^{-i G}.
inline Mat propagator(const ModelParams& p, double phi, cplx z_functional,
                      double g, int dim) {
  Mat u = displacement(meter_shift(p, z_functional), dim);
  const cplx gphase = std::exp(cplx(0.0, -g));
  for (int row = 0; row < dim; ++row) {
    const cplx rphase = std::exp(cplx(0.0, -phi * row)) * gphase;
    u.row(row) *= rphase;
  }
  return u;
}

inline double block_error(const Mat& m, int block) {
  return m.topLeftCorner(block, block).norm();
}

// ||U†U - I|| restricted to the reliable block.
inline double block_unitarity_error(const Mat& u, int block) {
  Mat r = u.adjoint() * u;
  r.diagonal().array() -= 1.0;
  return block_error(r, block);
}

// Heisenberg-picture number: U† N U must equal (a† + conj(s))(a + s) with
// s the meter shift, up to truncation on the block.
inline double heisenberg_number_error(const ModelParams& p, const Mat& u,
                                      cplx z_functional, int block) {
  const int dim = int(u.rows());
  const cplx s = meter_shift(p, z_functional);
  Mat a = lowering(dim);
  Mat lhs = u.adjoint() * number_op(dim) * u;
  Mat rhs = (a.adjoint() + Mat::Identity(dim, dim) * std::conj(s)) *
            (a + Mat::Identity(dim, dim) * s);
  return block_error(lhs - rhs, block);
}

// One Euler-Maruyama residual of the noise equation
//   dU = -[(iH + Gamma^2/2) dt + i Gamma dW] U,  Gamma = gamma N:
// r = U_{k+1} - U_k + (iH + Gamma^2/2) U_k dt + i Gamma U_k dW.
// Along an exact propagator sequence the block norm of r is O(dt).
inline Mat qsde_step_residual(const ModelParams& p, const Mat& h,
                              const Mat& u_next, const Mat& u, double dt,
                              double dw) {
  const int dim = int(u.rows());
  const double g = p.gamma;
  Mat r = u_next - u;
  const cplx ic(0.0, 1.0);
  // (iH + (gamma N)^2 / 2) U dt + i gamma N U dW, with N diagonal.
  Mat drift = ic * (h * u) * dt;
  for (int row = 0; row < dim; ++row) {
    const double gn = g * row;
    drift.row(row) += (0.5 * gn * gn * dt) * u.row(row);
    drift.row(row) += ic * gn * dw * u.row(row);
  }
  return r + drift;
}

// Exact finite-time average of the evolved number operator,
//   (1/T) \int_0^T e^{iHt} N e^{-iHt} dt,
// through the eigendecomposition of H: in the eigenbasis the average is an
// entrywise filter (e^{i dL T} - 1)/(i dL T) on N.  For T a whole number of
// periods 2 pi / omega the filter kills all off-diagonal terms.
struct AveragedNumber {
  Mat op;                      // the averaged operator
  std::vector<double> eigenvalues;
};

inline AveragedNumber time_averaged_number(const ModelParams& p, double t_avg,
                                           int dim) {
  if (!(t_avg > 0.0)) throw std::invalid_argument("t_avg: must be > 0");
  Eigen::SelfAdjointEigenSolver<Mat> es(hamiltonian(p, dim));
  const Mat& v = es.eigenvectors();
  Mat ntil = v.adjoint() * number_op(dim) * v;
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < dim; ++k) {
      const double dl = es.eigenvalues()[j] - es.eigenvalues()[k];
      if (dl != 0.0) {
        const cplx idlt(0.0, dl * t_avg);
        ntil(j, k) *= (std::exp(idlt) - 1.0) / idlt;
      }
    }
  }
  AveragedNumber out;
  out.op = v * ntil * v.adjoint();
  out.eigenvalues.assign(es.eigenvalues().data(),
                         es.eigenvalues().data() + dim);
  return out;
}

// Mean and variance of an operator in the Fock level |n>.
struct LevelMoments {
  double mean = 0.0;
  double var = 0.0;
};

inline LevelMoments level_moments(const Mat& op, int n) {
  LevelMoments m;
  m.mean = op(n, n).real();
  m.var = (op.row(n) * op.col(n)).value().real() - m.mean * m.mean;
  return m;
}

// Long-time predictions for the averaged number in level n.
inline LevelMoments averaged_number_prediction(const ModelParams& p, int n) {
  const double a2 = std::norm(p.alpha);
  return {n + 2.0 * a2, (2.0 * n + 1.0) * a2};
}

}  // namespace qmeter::fock
