#pragma once

#include <cmath>
#include <cstdint>

namespace qmeter {

// Philox2x64-10: stateless counter-based generator. The output block is a
// pure function of (key, counter), so stream `s` of a run keyed by `seed`
// produces the same bits no matter how work is partitioned across threads.
struct Philox2x64 {
  std::uint64_t key;

  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

  void generate(std::uint64_t c0, std::uint64_t c1,
                std::uint64_t& r0, std::uint64_t& r1) const {
    std::uint64_t x0 = c0, x1 = c1, k = key;
    for (int round = 0; round < 10; ++round) {
      const auto prod = static_cast<unsigned __int128>(kMul) * x0;
      const auto hi = static_cast<std::uint64_t>(prod >> 64);
      const auto lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += kWeyl;
    }
    r0 = x0;
    r1 = x1;
  }
};

// Sequential view of one stream: counter = (stream, block index).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : philox_{seed}, stream_(stream) {}

  std::uint64_t next_u64() {
    if (have_ == 0) {
      philox_.generate(stream_, block_++, buf_[0], buf_[1]);
      have_ = 2;
    }
    return buf_[--have_];
  }

  // Uniform on (0,1): 53-bit mantissa offset by half an ulp, never 0 or 1.
  double next_unit() { return ((next_u64() >> 11) + 0.5) * 0x1p-53; }

  std::uint64_t seed() const { return philox_.key; }
  std::uint64_t stream() const { return stream_; }

 private:
  Philox2x64 philox_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
};

namespace detail {

// 256-layer ziggurat table for the standard normal (ZIGNOR layout).
struct ZigguratTable {
  double x[257];
  double ratio[256];

  ZigguratTable() {
    const double r = 3.6541528853610088;
    const double v = 4.92867323399e-3;  // area of each layer
    x[0] = v / std::exp(-0.5 * r * r);
    x[1] = r;
    x[256] = 0.0;
    for (int i = 2; i < 256; ++i)
      x[i] = std::sqrt(-2.0 * std::log(v / x[i - 1] +
                                       std::exp(-0.5 * x[i - 1] * x[i - 1])));
    for (int i = 0; i < 256; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

inline const ZigguratTable& ziggurat() {
  static const ZigguratTable table;
  return table;
}

}  // namespace detail

// Standard normal draw: ~99% of draws take the rejection-free fast path.
inline double normal(RandomStream& rs) {
  const auto& zt = detail::ziggurat();
  for (;;) {
    const std::uint64_t bits = rs.next_u64();
    const int i = static_cast<int>(bits & 255u);
    // bits 11..63 give a uniform in [-1, 1); low index bits are independent.
    const double u = static_cast<double>(bits >> 11) * 0x1p-52 - 1.0;
    if (std::fabs(u) < zt.ratio[i]) return u * zt.x[i];
    if (i == 0) {
      // Tail beyond r, Marsaglia's method.
      const double r = zt.x[1];
      double xt, yt;
      do {
        xt = std::log(rs.next_unit()) / r;
        yt = std::log(rs.next_unit());
      } while (-2.0 * yt < xt * xt);
      return u < 0 ? xt - r : r - xt;
    }
    const double xv = u * zt.x[i];
    const double f0 = std::exp(-0.5 * (zt.x[i] * zt.x[i] - xv * xv));
    const double f1 = std::exp(-0.5 * (zt.x[i + 1] * zt.x[i + 1] - xv * xv));
    if (f1 + rs.next_unit() * (f0 - f1) < 1.0) return xv;
  }
}

// Box-Muller pair; slower independent route kept as a test reference.
class BoxMullerSampler {
 public:
  double operator()(RandomStream& rs) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(rs.next_unit()));
    const double a = 6.283185307179586476925286766559 * rs.next_unit();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qmeter
