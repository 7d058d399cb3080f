#pragma once

// Finite-dimensional relaxation of the confidence set under log-concavity.
//
// For consecutive design points x_i < x_{i+1} with log-density values
// l_i, l_{i+1} and supporting slopes g at interior points, the mass
// of [x_i, x_{i+1}] is bracketed by
//
//   L_i = dx * exp(l_i) * E(l_{i+1} - l_i)          (chord, lower bound)
//   U_i, V_i = dx * exp(l_a) * E(+-g_a * dx)         (tangent at anchor a)
//
// U anchors the tangent at the right end of each interval except the last,
// V at the left end of each interval except the first. All three are convex
// in (l, g).
//
// Variable ordering used for gradients and affine functions:
//   z = (l_0, ..., l_{m-1}, g_1, ..., g_{m-2})
// slopes exist only for interior points 1..m-2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "lcband/design.hpp"
#include "lcband/errors.hpp"
#include "lcband/specfun.hpp"

namespace lcband {

struct VarLayout {
  std::size_t m = 0;

  std::size_t ell(std::size_t i) const { return i; }
  std::size_t g(std::size_t i) const { return m + i - 1; }  // i in 1..m-2
  std::size_t num_core() const { return 2 * m - 2; }
};

struct FeasiblePoint {
  std::vector<double> ell;  // m values
  std::vector<double> g;    // m-2 values, g[i-1] is the slope at point i

  double slope(std::size_t i) const { return g[i - 1]; }
  double& slope(std::size_t i) { return g[i - 1]; }

  /// Pack into the global ordering (l, g).
  std::vector<double> packed() const {
    std::vector<double> z(ell);
    z.insert(z.end(), g.begin(), g.end());
    return z;
  }

  static FeasiblePoint unpack(std::span<const double> z, std::size_t m) {
    FeasiblePoint p;
    p.ell.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m));
    p.g.assign(z.begin() + static_cast<std::ptrdiff_t>(m),
               z.begin() + static_cast<std::ptrdiff_t>(2 * m - 2));
    return p;
  }
};

struct Term {
  std::size_t var;
  double coef;
};

using SparseGradient = std::vector<Term>;

struct AffineFunction {
  double constant = 0.0;
  std::vector<Term> terms;

  double operator()(std::span<const double> z) const {
    double v = constant;
    for (const auto& t : terms) v += t.coef * z[t.var];
    return v;
  }
};

/// Anchor and direction of the tangent line used by U_i or V_i.
struct Tangent {
  std::size_t anchor;
  double sign;  // +1: tangent at the left end, -1: tangent at the right end
};

inline Tangent u_tangent(std::size_t m, std::size_t i) {
  if (i + 2 == m) return {i, 1.0};
  return {i + 1, -1.0};
}

inline Tangent v_tangent(std::size_t /*m*/, std::size_t i) {
  if (i == 0) return {1, -1.0};
  return {i, 1.0};
}

namespace detail {

inline double tangent_value(const DesignGrid& grid, const FeasiblePoint& p, std::size_t i,
                            Tangent tg) {
  const double dx = grid.gap(i);
  return dx * std::exp(p.ell[tg.anchor]) * exp_mean(tg.sign * p.slope(tg.anchor) * dx);
}

inline SparseGradient tangent_grad(const DesignGrid& grid, const FeasiblePoint& p,
                                   std::size_t i, Tangent tg) {
  const VarLayout lay{grid.m()};
  const double dx = grid.gap(i);
  const double scale = dx * std::exp(p.ell[tg.anchor]);
  const double arg = tg.sign * p.slope(tg.anchor) * dx;
  return {{lay.ell(tg.anchor), scale * exp_mean(arg)},
          {lay.g(tg.anchor), scale * exp_mean_deriv(arg) * tg.sign * dx}};
}

inline AffineFunction tangent_plane(double value, const SparseGradient& grad,
                                    std::span<const double> center) {
  AffineFunction f;
  f.constant = value;
  for (const auto& t : grad) f.constant -= t.coef * center[t.var];
  f.terms = grad;
  return f;
}

// Raise `acc` to `r`, treating NaN as an infinite violation.
inline void raise_to(double& acc, double r) {
  if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
  acc = std::max(acc, r);
}

inline void check_interval(const DesignGrid& grid, std::size_t i) {
  if (grid.m() < 3 || i + 1 >= grid.m()) {
    std::ostringstream os;
    os << "interval index " << i << " out of range for m=" << grid.m();
    throw DimensionMismatch(os.str());
  }
}

}  // namespace detail

// The chord integral is symmetric in its end values; anchoring at the larger
// one keeps it finite when the other is very negative.
inline double eval_L(const DesignGrid& grid, std::span<const double> ell, std::size_t i) {
  const double hi = std::max(ell[i], ell[i + 1]);
  const double lo = std::min(ell[i], ell[i + 1]);
  return grid.gap(i) * std::exp(hi) * exp_mean(lo - hi);
}

inline double eval_U(const DesignGrid& grid, const FeasiblePoint& p, std::size_t i) {
  detail::check_interval(grid, i);
  return detail::tangent_value(grid, p, i, u_tangent(grid.m(), i));
}

inline double eval_V(const DesignGrid& grid, const FeasiblePoint& p, std::size_t i) {
  detail::check_interval(grid, i);
  return detail::tangent_value(grid, p, i, v_tangent(grid.m(), i));
}

inline SparseGradient grad_L(const DesignGrid& grid, std::span<const double> ell,
                             std::size_t i) {
  const double dx = grid.gap(i);
  const bool left = ell[i] >= ell[i + 1];
  const std::size_t a = left ? i : i + 1;
  const std::size_t b = left ? i + 1 : i;
  const double diff = ell[b] - ell[a];
  const double base = dx * std::exp(ell[a]);
  const double dE = exp_mean_deriv(diff);
  SparseGradient gr{{i, 0.0}, {i + 1, 0.0}};
  gr[a - i].coef = base * (exp_mean(diff) - dE);
  gr[b - i].coef = base * dE;
  return gr;
}

inline SparseGradient grad_U(const DesignGrid& grid, const FeasiblePoint& p, std::size_t i) {
  detail::check_interval(grid, i);
  return detail::tangent_grad(grid, p, i, u_tangent(grid.m(), i));
}

inline SparseGradient grad_V(const DesignGrid& grid, const FeasiblePoint& p, std::size_t i) {
  detail::check_interval(grid, i);
  return detail::tangent_grad(grid, p, i, v_tangent(grid.m(), i));
}

/// First-order expansion of U_i at p0; an underestimator since U_i is convex.
inline AffineFunction linearize_U(const DesignGrid& grid, const FeasiblePoint& p0,
                                  std::size_t i) {
  const auto z0 = p0.packed();
  return detail::tangent_plane(eval_U(grid, p0, i), grad_U(grid, p0, i), z0);
}

inline AffineFunction linearize_V(const DesignGrid& grid, const FeasiblePoint& p0,
                                  std::size_t i) {
  const auto z0 = p0.packed();
  return detail::tangent_plane(eval_V(grid, p0, i), grad_V(grid, p0, i), z0);
}

inline AffineFunction linearize_L(const DesignGrid& grid, std::span<const double> ell0,
                                  std::size_t i) {
  return detail::tangent_plane(eval_L(grid, ell0, i), grad_L(grid, ell0, i), ell0);
}

struct ConstraintReport {
  double conc_violation = 0.0;
  double up_violation = 0.0;
  double down1_violation = 0.0;
  double down2_violation = 0.0;
  bool feasible = true;

  double max_violation() const {
    return std::max({conc_violation, up_violation, down1_violation, down2_violation});
  }
};

/// Evaluates the concavity, mass-upper and both mass-lower constraint
/// families at `p` and reports the largest positive violation of each.
inline ConstraintReport check_feasible(const DesignGrid& grid, const IntervalSystem& sys,
                                       const FeasiblePoint& p, double eps = 1e-7) {
  const std::size_t m = grid.m();
  if (m < 3 || p.ell.size() != m || p.g.size() != m - 2) {
    std::ostringstream os;
    os << "point dimensions (" << p.ell.size() << ", " << p.g.size()
       << ") do not match m=" << m;
    throw DimensionMismatch(os.str());
  }
  ConstraintReport rep;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    for (std::size_t j : {i - 1, i + 1}) {
      const double r = p.ell[j] - p.ell[i] - p.slope(i) * (grid.x[j] - grid.x[i]);
      detail::raise_to(rep.conc_violation, r);
    }
  }
  std::vector<double> L(m - 1), U(m - 1), V(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    L[i] = eval_L(grid, p.ell, i);
    U[i] = eval_U(grid, p, i);
    V[i] = eval_V(grid, p, i);
  }
  for (const auto& blk : sys.blocks) {
    for (const auto& pr : blk.pairs) {
      double sl = 0.0, su = 0.0, sv = 0.0;
      for (std::size_t i = pr.j; i < pr.k; ++i) {
        sl += L[i];
        su += U[i];
        sv += V[i];
      }
      detail::raise_to(rep.up_violation, sl - blk.d);
      detail::raise_to(rep.down1_violation, blk.c - su);
      detail::raise_to(rep.down2_violation, blk.c - sv);
    }
  }
  rep.feasible = rep.max_violation() <= eps;
  return rep;
}

}  // namespace lcband
