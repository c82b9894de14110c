#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmeter {

// Pairwise (cascade) summation: deterministic for a fixed element order and
// O(log n) error growth.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// Kolmogorov distribution tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2k²λ²).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_pvalue(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  return kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
}

struct KsResult {
  double statistic;
  double p_value;
};

// One-sample KS against a continuous CDF.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
  if (samples.size() < 8) throw std::invalid_argument("ks_test: too few samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return {d, ks_pvalue(d, n)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 8 || b.size() < 8)
    throw std::invalid_argument("ks_two_sample: too few samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double xa = a[i], xb = b[j];
    if (xa <= xb) ++i;
    if (xb <= xa) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return {d, ks_pvalue(d, na * nb / (na + nb))};
}

struct LinearFit {
  double slope;
  double intercept;
};

inline LinearFit linear_fit(std::span<const double> x,
                            std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need matching sizes >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// Per-block sums of k quantities and their pairwise products.  Blocks are
// combined componentwise by pairwise summation in block order, so the final
// numbers are bit-identical for any thread count.
class MomentMatrix {
 public:
  MomentMatrix(std::size_t k, std::size_t n_blocks)
      : k_(k), stride_(1 + k + k * (k + 1) / 2),
        raw_(stride_ * n_blocks, 0.0), n_blocks_(n_blocks) {}

  std::size_t n_quantities() const { return k_; }
  double* block_slot(std::size_t b) { return raw_.data() + b * stride_; }

  // slot layout: [count, s1[0..k), s2 upper triangle row-major]
  static void accumulate(double* slot, const double* x, std::size_t k) {
    slot[0] += 1.0;
    double* s1 = slot + 1;
    double* s2 = slot + 1 + k;
    for (std::size_t i = 0; i < k; ++i) s1[i] += x[i];
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j, ++idx) s2[idx] += x[i] * x[j];
  }

  void finalize() {
    total_.assign(stride_, 0.0);
    std::vector<double> comp(n_blocks_);
    for (std::size_t c = 0; c < stride_; ++c) {
      for (std::size_t b = 0; b < n_blocks_; ++b) comp[b] = raw_[b * stride_ + c];
      total_[c] = pairwise_sum(comp);
    }
  }

  double n() const { return total_[0]; }
  double mean(std::size_t i) const { return total_[1 + i] / n(); }

  // Sample covariance of quantities i and j.
  double cov(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const double nn = n();
    const double sij = total_[1 + k_ + pair_index(i, j)];
    return (sij - total_[1 + i] * total_[1 + j] / nn) / (nn - 1.0);
  }

  double var(std::size_t i) const { return std::max(0.0, cov(i, i)); }
  double se_mean(std::size_t i) const { return std::sqrt(var(i) / n()); }

  // Variance of sum_i a_i x_i under the sample covariance.
  double var_of_combination(std::span<const double> a) const {
    double v = 0.0;
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j) v += a[i] * a[j] * cov(i, j);
    return std::max(0.0, v);
  }

  double se_of_combination(std::span<const double> a) const {
    return std::sqrt(var_of_combination(a) / n());
  }

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const {
    // offset of (i, j), j >= i, in the packed upper triangle
    return i * k_ - i * (i - 1) / 2 + (j - i);
  }

  std::size_t k_;
  std::size_t stride_;
  std::vector<double> raw_;
  std::size_t n_blocks_;
  std::vector<double> total_;
};

}  // namespace qmeter
