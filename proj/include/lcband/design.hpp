#pragma once

// Design points (every 2^s_n-th order statistic) and the dyadic interval
// system whose probability contents are bounded by beta quantiles.
//
// Indices are 0-based throughout: design point i is the order statistic
// X_(1 + i * spacing) in 1-based order-statistic notation, and a pair (j, k)
// refers to design points j < k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "lcband/errors.hpp"
#include "lcband/specfun.hpp"

namespace lcband {

struct DesignGrid {
  std::size_t n = 0;        // sample size
  int s_n = 0;              // block-spacing exponent
  std::size_t spacing = 0;  // 2^s_n
  std::vector<double> x;    // m strictly increasing design points

  std::size_t m() const { return x.size(); }
  double gap(std::size_t i) const { return x[i + 1] - x[i]; }
};

struct IndexPair {
  std::size_t j;
  std::size_t k;
};

struct Block {
  int B = 0;
  std::size_t n_B = 0;
  std::vector<IndexPair> pairs;
  double c = 0.0;  // lower bound on F(x_k) - F(x_j)
  double d = 0.0;  // upper bound on F(x_k) - F(x_j)
};

struct IntervalSystem {
  double alpha = 0.0;
  int B_max = 0;
  double t_n = 0.0;
  std::vector<Block> blocks;

  std::size_t num_pairs() const {
    std::size_t total = 0;
    for (const auto& blk : blocks) total += blk.pairs.size();
    return total;
  }
};

/// Smallest s with 2^s >= ln(n), i.e. ceil(log2(ln n)).
inline int spacing_exponent(std::size_t n) {
  const double target = std::log(static_cast<double>(n));
  int s = 0;
  while (std::ldexp(1.0, s) < target) ++s;
  return s;
}

/// floor(log2(n / 8)) - s_n, computed in integer arithmetic (any n < 8 maps
/// to a negative value, which is all callers check).
inline int max_block_index(std::size_t n) {
  int b = -1;
  while ((std::size_t{8} << (b + 1)) <= n) ++b;
  return b - spacing_exponent(n);
}

inline DesignGrid select_design_points(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2 || max_block_index(n) < 0) {
    std::ostringstream os;
    os << "need more samples: n=" << n << " leaves no interval block";
    throw TooFewSamples(os.str());
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw DomainError("samples must be finite");
  }
  std::sort(sorted.begin(), sorted.end());

  DesignGrid grid;
  grid.n = n;
  grid.s_n = spacing_exponent(n);
  grid.spacing = std::size_t{1} << grid.s_n;
  const std::size_t m = (n - 1) / grid.spacing + 1;
  grid.x.reserve(m);
  for (std::size_t i = 0; i < m; ++i) grid.x.push_back(sorted[i * grid.spacing]);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (!(grid.x[i] < grid.x[i + 1])) {
      std::ostringstream os;
      os << "design points " << i << " and " << i + 1 << " coincide (value " << grid.x[i]
         << "); the data contain ties";
      throw DuplicateDesignPoint(os.str());
    }
  }
  return grid;
}

inline IntervalSystem build_interval_system(const DesignGrid& grid, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0,1), got " << alpha;
    throw InvalidAlpha(os.str());
  }
  IntervalSystem sys;
  sys.alpha = alpha;
  sys.B_max = max_block_index(grid.n);
  if (sys.B_max < 0) throw TooFewSamples("grid has no interval block");
  for (int B = 0; B <= sys.B_max; ++B) sys.t_n += 1.0 / (B + 2);

  const double n = static_cast<double>(grid.n);
  for (int B = 0; B <= sys.B_max; ++B) {
    Block blk;
    blk.B = B;
    const std::size_t width = std::size_t{1} << B;
    const std::size_t gaps = std::size_t{1} << (B + grid.s_n);
    blk.n_B = (grid.n - 1) / gaps;
    for (std::size_t i = 1; i <= blk.n_B; ++i) {
      blk.pairs.push_back({(i - 1) * width, i * width});
    }
    const double level = alpha / (2.0 * (B + 2) * static_cast<double>(blk.n_B) * sys.t_n);
    const BetaParams shape{static_cast<double>(gaps), n + 1.0 - static_cast<double>(gaps)};
    blk.c = qbeta(level, shape);
    blk.d = qbeta(1.0 - level, shape);
    sys.blocks.push_back(std::move(blk));
  }
  return sys;
}

}  // namespace lcband
