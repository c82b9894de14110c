#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "qmeter/model.hpp"
#include "qmeter/rng.hpp"

namespace qmeter {

// One sampled Wiener path on a uniform grid; w[0] = 0.  A path is a pure
// function of (grid, seed, stream), bit-identical across runs and thread
// layouts, so the same path can feed several functional evaluations.
struct BrownianPath {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> w;
};

// Fills w (resized to n_nodes) with the path of the given stream; the single
// source of the path bits for both the public API and the ensemble runners.
inline void fill_path(std::vector<double>& w, const TimeGrid& grid,
                      std::uint64_t seed, std::uint64_t stream) {
  w.resize(grid.n_nodes());
  RandomStream rs(seed, stream);
  const double sdt = std::sqrt(grid.dt());
  double acc = 0.0;
  w[0] = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    acc += sdt * normal(rs);
    w[k] = acc;
  }
}

inline BrownianPath sample_path(const TimeGrid& grid, std::uint64_t seed,
                                std::uint64_t stream) {
  grid.validate();
  BrownianPath path{grid, seed, stream, {}};
  fill_path(path.w, grid, seed, stream);
  return path;
}

// Diffusive rescaling of the values only: w -> sqrt(eps) w on the same grid.
inline BrownianPath rescale_path(const BrownianPath& path, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("eps: must be finite and > 0");
  BrownianPath out = path;
  const double s = std::sqrt(eps);
  for (double& v : out.w) v *= s;
  return out;
}

// Binary dump: 8-byte magic, seed, stream, t_end, n_steps, then the node
// values as little-endian IEEE doubles.
inline constexpr char kPathMagic[8] = {'Q', 'M', 'P', 'B', '0', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "path dump assumes a little-endian host");

inline void write_path(std::ostream& os, const BrownianPath& path) {
  os.write(kPathMagic, 8);
  auto put = [&os](const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  const std::uint64_t n_steps = path.grid.n_steps;
  put(&path.seed, 8);
  put(&path.stream, 8);
  put(&path.grid.t_end, 8);
  put(&n_steps, 8);
  put(path.w.data(), 8 * path.w.size());
  if (!os) throw std::runtime_error("path dump: write failed");
}

inline BrownianPath read_path(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kPathMagic, 8) != 0)
    throw std::runtime_error("path dump: bad magic");
  auto get = [&is](void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  };
  BrownianPath path;
  std::uint64_t n_steps = 0;
  get(&path.seed, 8);
  get(&path.stream, 8);
  get(&path.grid.t_end, 8);
  get(&n_steps, 8);
  if (!is) throw std::runtime_error("path dump: truncated header");
  path.grid.n_steps = static_cast<std::size_t>(n_steps);
  path.grid.validate();
  path.w.resize(path.grid.n_nodes());
  get(path.w.data(), 8 * path.w.size());
  if (!is) throw std::runtime_error("path dump: truncated data");
  return path;
}

}  // namespace qmeter
