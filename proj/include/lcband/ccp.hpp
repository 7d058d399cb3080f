#pragma once

// Penalty convex-concave procedure for the pointwise bounds
//
//   min / max  l_t   over (l, g) in the relaxed confidence set.
//
// Each iteration linearizes the tangent bounds U, V (and by default the
// chord bound L) at the current iterate, adds one nonnegative slack per
// interval pair to the mass-lower rows, and solves the resulting LP with
// slack penalty tau. tau grows geometrically up to tau_max.
//
// An optional box |l - l^K| <= rho keeps the LP bounded while tau is still
// too small to price the slacks; it is widened automatically if the first
// iterate cannot reach a concave point inside it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcband/design.hpp"
#include "lcband/errors.hpp"
#include "lcband/lpsolve.hpp"
#include "lcband/parallel.hpp"
#include "lcband/relax.hpp"
#include "lcband/rng.hpp"

namespace lcband {

enum class Sense { Min, Max };
enum class InitStrategy { Data, Random };
enum class UpMode { Linearized, Exact };

inline const char* to_string(Sense s) { return s == Sense::Min ? "min" : "max"; }
inline const char* to_string(InitStrategy s) { return s == InitStrategy::Data ? "data" : "random"; }

struct CcpConfig {
  double tau0 = 100.0;
  double kappa = 2.0;
  double tau_max = 1e4;
  std::size_t k_max = 50;
  double slack_tol = 1e-6;
  double obj_tol = 1e-7;
  InitStrategy init = InitStrategy::Data;
  std::uint64_t seed = 1;
  UpMode up_mode = UpMode::Linearized;
  double trust_radius = 1.0;  // 0 disables the box
  double feas_eps = 1e-5;

  void validate() const {
    std::ostringstream os;
    if (!(tau0 > 0.0)) os << "tau0 must be > 0; ";
    if (!(kappa > 1.0)) os << "kappa must be > 1; ";
    if (!(tau_max > tau0)) os << "tau_max must exceed tau0; ";
    if (k_max == 0) os << "k_max must be >= 1; ";
    if (!(slack_tol > 0.0)) os << "slack_tol must be > 0; ";
    if (!(obj_tol > 0.0)) os << "obj_tol must be > 0; ";
    if (!(trust_radius >= 0.0) || !std::isfinite(trust_radius)) os << "trust_radius must be >= 0; ";
    if (!os.str().empty()) throw DomainError("invalid CCP config: " + os.str());
  }
};

/// tau_K = min(kappa^K tau0, tau_max).
inline double penalty_at(const CcpConfig& cfg, std::size_t K) {
  return std::min(cfg.tau0 * std::pow(cfg.kappa, static_cast<double>(K)), cfg.tau_max);
}

enum class PointStatus { Converged, NotConverged, LpFailure };

inline const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::Converged: return "converged";
    case PointStatus::NotConverged: return "not_converged";
    case PointStatus::LpFailure: return "lp_failure";
  }
  return "unknown";
}

struct IterationRecord {
  double tau = 0.0;
  double value = 0.0;          // l_t after the step
  double slack_sum = 0.0;      // LP slacks after the step
  double merit_before = 0.0;   // +-l_t + tau * true slack, at the center
  double merit_after = 0.0;    // same merit (same tau) after the step
  double true_slack_after = 0.0;
  std::size_t lp_pivots = 0;
};

struct PointDiagnostics {
  std::size_t iterations = 0;
  double slack_sum = std::numeric_limits<double>::quiet_NaN();
  PointStatus status = PointStatus::NotConverged;
  LpStatus lp_status = LpStatus::Optimal;
  double max_violation = std::numeric_limits<double>::quiet_NaN();
  std::vector<IterationRecord> history;
};

struct PointResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  FeasiblePoint point;
  PointDiagnostics diag;
};

struct PointwiseIntervals {
  std::vector<std::size_t> indices;  // 0-based design indices, increasing
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<PointDiagnostics> lo_diag;
  std::vector<PointDiagnostics> hi_diag;

  bool all_converged() const {
    auto ok = [](const PointDiagnostics& d) { return d.status == PointStatus::Converged; };
    return std::all_of(lo_diag.begin(), lo_diag.end(), ok) &&
           std::all_of(hi_diag.begin(), hi_diag.end(), ok);
  }

  std::size_t num_failed() const {
    std::size_t f = 0;
    for (const auto& d : lo_diag) f += d.status != PointStatus::Converged;
    for (const auto& d : hi_diag) f += d.status != PointStatus::Converged;
    return f;
  }
};

/// Variable and row bookkeeping of one subproblem.
struct SubproblemLayout {
  std::size_t m = 0;
  std::size_t num_pairs = 0;
  std::size_t num_vars = 0;
  std::size_t conc_rows = 0;
  std::size_t up_rows = 0;
  std::size_t down_rows = 0;   // both mass-lower families
  std::size_t trust_rows = 0;
  std::size_t num_slacks = 0;  // sign constraints s >= 0 (carried by the nonneg mask)

  std::size_t slack(std::size_t pair) const { return 2 * m - 2 + pair; }
  std::size_t conc_begin() const { return 0; }
  std::size_t up_begin() const { return conc_rows; }
  std::size_t down1_begin() const { return conc_rows + up_rows; }
  std::size_t down2_begin() const { return conc_rows + up_rows + num_pairs; }
  std::size_t trust_begin() const { return conc_rows + up_rows + down_rows; }
  std::size_t base_rows() const { return conc_rows + up_rows + down_rows + trust_rows; }
};

struct SubproblemOptions {
  double trust_radius = 0.0;  // 0: no box rows
  bool include_up = true;     // false: UP rows omitted (cuts supplied separately)
  // Drop the chord terms of the two end intervals. The end values enter only
  // rows that loosen as they decrease, so for an interior target the optimum
  // sits at l_0, l_{m-1} -> -inf, where those chords vanish.
  bool release_ends = false;
};

inline SubproblemLayout subproblem_layout(const DesignGrid& grid, const IntervalSystem& sys,
                                          const SubproblemOptions& opts = {}) {
  SubproblemLayout lay;
  lay.m = grid.m();
  lay.num_pairs = sys.num_pairs();
  lay.num_vars = 2 * lay.m - 2 + lay.num_pairs;
  lay.conc_rows = 2 * (lay.m - 2);
  lay.up_rows = opts.include_up ? lay.num_pairs : 0;
  lay.down_rows = 2 * lay.num_pairs;
  lay.trust_rows = opts.trust_radius > 0.0 ? 2 * lay.m : 0;
  lay.num_slacks = lay.num_pairs;
  return lay;
}

namespace detail {

// Writes sum_i f_i over the pair's intervals as an LP row: coefficients in
// `row`, and returns the summed constant.
template <class Row>
double accumulate_affine(const std::vector<AffineFunction>& fs, const IndexPair& pr, Row&& row,
                         double sign) {
  double constant = 0.0;
  for (std::size_t i = pr.j; i < pr.k; ++i) {
    constant += fs[i].constant;
    for (const auto& t : fs[i].terms) row(static_cast<Eigen::Index>(t.var)) += sign * t.coef;
  }
  return constant;
}

inline void append_row(LinearProgram& lp, const Eigen::RowVectorXd& row, double rhs) {
  const Eigen::Index r = lp.A.rows();
  lp.A.conservativeResize(r + 1, Eigen::NoChange);
  lp.b.conservativeResize(r + 1);
  lp.A.row(r) = row;
  lp.b(r) = rhs;
}

// True slack of each pair at p: max(0, c - sum U, c - sum V).
inline std::vector<double> true_slacks(const DesignGrid& grid, const IntervalSystem& sys,
                                       const FeasiblePoint& p) {
  const std::size_t m = grid.m();
  std::vector<double> U(m - 1), V(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    U[i] = eval_U(grid, p, i);
    V[i] = eval_V(grid, p, i);
  }
  std::vector<double> s;
  for (const auto& blk : sys.blocks) {
    for (const auto& pr : blk.pairs) {
      double su = 0.0, sv = 0.0;
      for (std::size_t i = pr.j; i < pr.k; ++i) {
        su += U[i];
        sv += V[i];
      }
      s.push_back(std::max({0.0, blk.c - su, blk.c - sv}));
    }
  }
  return s;
}

inline double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

/// LP subproblem at expansion point `center`: variables (l, g, s), objective
/// +-l_t + tau * sum s, rows in the order CONC, UP, DOWN1, DOWN2, box.
inline LinearProgram build_subproblem(const DesignGrid& grid, const IntervalSystem& sys,
                                      const FeasiblePoint& center, std::size_t t, Sense sense,
                                      double tau, const SubproblemOptions& opts = {}) {
  const std::size_t m = grid.m();
  if (m < 3 || center.ell.size() != m || center.g.size() != m - 2) {
    throw DimensionMismatch("subproblem center does not match the design grid");
  }
  if (t >= m) throw DimensionMismatch("target index outside the design grid");
  const SubproblemLayout lay = subproblem_layout(grid, sys, opts);
  const VarLayout vl{m};
  const std::size_t nrows = lay.base_rows();
  LinearProgram lp(lay.num_vars, nrows);
  for (std::size_t q = 0; q < lay.num_pairs; ++q) {
    lp.nonneg[lay.slack(q)] = true;
    lp.objective(static_cast<Eigen::Index>(lay.slack(q))) = tau;
  }
  lp.objective(static_cast<Eigen::Index>(vl.ell(t))) = sense == Sense::Min ? 1.0 : -1.0;

  // CONC: l_j - l_i - g_i (x_j - x_i) <= 0.
  std::size_t r = lay.conc_begin();
  for (std::size_t i = 1; i + 1 < m; ++i) {
    for (std::size_t j : {i - 1, i + 1}) {
      const auto row = static_cast<Eigen::Index>(r++);
      lp.A(row, static_cast<Eigen::Index>(vl.ell(j))) = 1.0;
      lp.A(row, static_cast<Eigen::Index>(vl.ell(i))) = -1.0;
      lp.A(row, static_cast<Eigen::Index>(vl.g(i))) = -(grid.x[j] - grid.x[i]);
    }
  }

  std::vector<AffineFunction> Lh, Uh, Vh;
  const auto z0 = center.packed();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (opts.include_up) {
      const bool end = i == 0 || i + 2 == m;
      Lh.push_back(opts.release_ends && end ? AffineFunction{} : linearize_L(grid, center.ell, i));
    }
    Uh.push_back(detail::tangent_plane(eval_U(grid, center, i), grad_U(grid, center, i), z0));
    Vh.push_back(detail::tangent_plane(eval_V(grid, center, i), grad_V(grid, center, i), z0));
  }

  std::size_t q = 0;
  for (const auto& blk : sys.blocks) {
    for (const auto& pr : blk.pairs) {
      if (opts.include_up) {
        // sum Lhat <= d
        auto row = lp.A.row(static_cast<Eigen::Index>(lay.up_begin() + q));
        const double k = detail::accumulate_affine(Lh, pr, row, 1.0);
        lp.b(static_cast<Eigen::Index>(lay.up_begin() + q)) = blk.d - k;
      }
      {
        // c - sum Uhat <= s
        auto row = lp.A.row(static_cast<Eigen::Index>(lay.down1_begin() + q));
        const double k = detail::accumulate_affine(Uh, pr, row, -1.0);
        row(static_cast<Eigen::Index>(lay.slack(q))) = -1.0;
        lp.b(static_cast<Eigen::Index>(lay.down1_begin() + q)) = k - blk.c;
      }
      {
        auto row = lp.A.row(static_cast<Eigen::Index>(lay.down2_begin() + q));
        const double k = detail::accumulate_affine(Vh, pr, row, -1.0);
        row(static_cast<Eigen::Index>(lay.slack(q))) = -1.0;
        lp.b(static_cast<Eigen::Index>(lay.down2_begin() + q)) = k - blk.c;
      }
      ++q;
    }
  }

  if (lay.trust_rows > 0) {
    const double rho = opts.trust_radius;
    for (std::size_t i = 0; i < m; ++i) {
      const auto up = static_cast<Eigen::Index>(lay.trust_begin() + i);
      const auto dn = static_cast<Eigen::Index>(lay.trust_begin() + m + i);
      lp.A(up, static_cast<Eigen::Index>(i)) = 1.0;
      lp.b(up) = center.ell[i] + rho;
      lp.A(dn, static_cast<Eigen::Index>(i)) = -1.0;
      lp.b(dn) = -center.ell[i] + rho;
    }
  }
  return lp;
}

/// Starting point per the configured strategy. The random stream depends only
/// on (seed, t, sense).
inline FeasiblePoint initial_point(const DesignGrid& grid, const CcpConfig& cfg, std::size_t t,
                                   Sense sense) {
  const std::size_t m = grid.m();
  FeasiblePoint p;
  p.ell.resize(m);
  p.g.assign(m - 2, 0.0);
  if (cfg.init == InitStrategy::Random) {
    CounterRng rng(derive_key(cfg.seed, {t, sense == Sense::Min ? 0u : 1u}));
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& v : p.ell) v = nd(rng);
    return p;
  }
  const double mass = static_cast<double>(grid.spacing) / static_cast<double>(grid.n);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == m ? m - 1 : i + 1;
    const double width = (grid.x[b] - grid.x[a]) / static_cast<double>(b - a);
    p.ell[i] = std::clamp(std::log(mass / width), -30.0, 30.0);
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    p.slope(i) = (p.ell[i + 1] - p.ell[i - 1]) / (grid.x[i + 1] - grid.x[i - 1]);
  }
  return p;
}

namespace detail {

struct StepResult {
  LpSolution sol;
  double rho = 0.0;
};

// Solves the subproblem at `center`; in exact mode the chord rows are
// replaced by tangent cuts of the true chord sums, added until the solution
// satisfies them.
inline StepResult solve_step(const DesignGrid& grid, const IntervalSystem& sys,
                             const FeasiblePoint& center, std::size_t t, Sense sense, double tau,
                             const CcpConfig& cfg, double rho, SimplexSolver& solver,
                             const std::optional<LpBasis>& warm, bool allow_widen,
                             bool release_ends) {
  constexpr int kMaxWiden = 40;
  constexpr int kMaxCutRounds = 200;
  const std::size_t m = grid.m();
  for (int widen = 0;; ++widen) {
    SubproblemOptions opts;
    opts.trust_radius = rho;
    opts.release_ends = release_ends;
    LinearProgram lp = build_subproblem(grid, sys, center, t, sense, tau, opts);
    LpSolution sol = solver.solve(lp, warm ? &*warm : nullptr);
    if (cfg.up_mode == UpMode::Exact && sol.status == LpStatus::Optimal) {
      // The linearized rows above are outer approximations; tighten with cuts
      // at the current LP solution until the true chord sums hold.
      for (int round = 0; round < kMaxCutRounds && sol.status == LpStatus::Optimal; ++round) {
        std::vector<double> ell(sol.z.data(), sol.z.data() + m);
        std::vector<double> L(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) L[i] = eval_L(grid, ell, i);
        if (release_ends) L.front() = L.back() = 0.0;
        bool added = false;
        for (const auto& blk : sys.blocks) {
          for (const auto& pr : blk.pairs) {
            double sl = 0.0;
            for (std::size_t i = pr.j; i < pr.k; ++i) sl += L[i];
            if (sl - blk.d <= 1e-10) continue;
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.A.cols());
            double k = 0.0;
            for (std::size_t i = pr.j; i < pr.k; ++i) {
              if (release_ends && (i == 0 || i + 2 == m)) continue;
              const auto f = linearize_L(grid, ell, i);
              k += f.constant;
              for (const auto& term : f.terms) row(static_cast<Eigen::Index>(term.var)) += term.coef;
            }
            append_row(lp, row, blk.d - k);
            added = true;
          }
        }
        if (!added) break;
        LpBasis prev = sol.basis;
        sol = solver.solve(lp, &prev);
      }
    }
    if (sol.status == LpStatus::Infeasible && allow_widen && rho > 0.0 && widen < kMaxWiden) {
      rho *= 2.0;
      continue;
    }
    return {std::move(sol), rho};
  }
}

// Puts l_0 and l_{m-1} far below the tangent line at their neighbour, where
// the end chords are negligible and concavity holds.
inline void park_ends(const DesignGrid& grid, FeasiblePoint& p) {
  constexpr double kDrop = 1e9;
  const std::size_t m = grid.m();
  p.ell[0] = p.ell[1] + p.g[0] * (grid.x[0] - grid.x[1]) - kDrop;
  p.ell[m - 1] = p.ell[m - 2] + p.g[m - 3] * (grid.x[m - 1] - grid.x[m - 2]) - kDrop;
}

}  // namespace detail

/// Runs the procedure for one target index and sense, returning l_t of the
/// final iterate together with diagnostics.
inline PointResult run_ccp_point(const DesignGrid& grid, const IntervalSystem& sys, std::size_t t,
                                 Sense sense, const CcpConfig& cfg,
                                 std::optional<FeasiblePoint> start = std::nullopt) {
  cfg.validate();
  const std::size_t m = grid.m();
  if (m < 3) throw DimensionMismatch("design grid needs at least 3 points");
  if (t >= m) throw DimensionMismatch("target index outside the design grid");
  PointResult res;
  FeasiblePoint cur = start ? *start : initial_point(grid, cfg, t, sense);
  if (sense == Sense::Min && (t == 0 || t + 1 == m)) {
    // No mass-lower bound involves the end values (both tangent bounds of
    // the end intervals are anchored at the inner neighbour), so l_t can be
    // lowered without limit.
    res.value = -std::numeric_limits<double>::infinity();
    res.diag.status = PointStatus::Converged;
    res.diag.slack_sum = 0.0;
    res.diag.max_violation = 0.0;
    res.point = std::move(cur);
    return res;
  }
  if (cur.ell.size() != m || cur.g.size() != m - 2) {
    throw DimensionMismatch("starting point does not match the design grid");
  }
  const double sgn = sense == Sense::Min ? 1.0 : -1.0;
  const bool release = t > 0 && t + 1 < m;
  if (release) detail::park_ends(grid, cur);
  SimplexSolver solver;
  std::optional<LpBasis> warm;
  const std::size_t nl = 2 * m - 2;

  for (std::size_t K = 0; K < cfg.k_max; ++K) {
    const double tau = penalty_at(cfg, K);
    // Widening is needed only while the iterate may still violate concavity.
    const bool first = K == 0;
    auto step = detail::solve_step(grid, sys, cur, t, sense, tau, cfg, cfg.trust_radius, solver,
                                   warm, first || cfg.up_mode == UpMode::Linearized, release);
    const LpSolution& sol = step.sol;
    res.diag.iterations = K + 1;
    res.diag.lp_status = sol.status;
    if (sol.status != LpStatus::Optimal) {
      res.diag.status = PointStatus::LpFailure;
      break;
    }
    warm = sol.basis;

    std::vector<double> zc(sol.z.data(), sol.z.data() + nl);
    FeasiblePoint next = FeasiblePoint::unpack(zc, m);
    double slack = 0.0;
    for (Eigen::Index q = static_cast<Eigen::Index>(nl); q < sol.z.size(); ++q) slack += std::max(0.0, sol.z(q));
    if (release) detail::park_ends(grid, next);

    IterationRecord rec;
    rec.tau = tau;
    rec.value = next.ell[t];
    rec.slack_sum = slack;
    rec.merit_before = sgn * cur.ell[t] + tau * detail::sum_of(detail::true_slacks(grid, sys, cur));
    rec.true_slack_after = detail::sum_of(detail::true_slacks(grid, sys, next));
    rec.merit_after = sgn * next.ell[t] + tau * rec.true_slack_after;
    rec.lp_pivots = sol.iterations;
    res.diag.history.push_back(rec);

    const double change = std::fabs(next.ell[t] - cur.ell[t]);
    const double prev_slack = res.diag.slack_sum;
    cur = std::move(next);
    res.diag.slack_sum = slack;
    if (tau >= cfg.tau_max && slack > cfg.slack_tol && change <= cfg.obj_tol &&
        std::fabs(slack - prev_slack) <= cfg.slack_tol * 1e-3) {
      // Stationary at the penalty cap with positive slack: the relaxed set
      // appears empty near this iterate; further iterations repeat the LP.
      res.diag.status = PointStatus::NotConverged;
      break;
    }
    if (slack <= cfg.slack_tol && change <= cfg.obj_tol) {
      // Reaching the cap alone is not accepted: keep iterating until the
      // iterate is feasible or the budget runs out.
      const auto rep = check_feasible(grid, sys, cur, cfg.feas_eps);
      res.diag.max_violation = rep.max_violation();
      if (rep.feasible) {
        res.diag.status = PointStatus::Converged;
        break;
      }
    }
  }
  if (std::isnan(res.diag.max_violation)) {
    res.diag.max_violation = check_feasible(grid, sys, cur, cfg.feas_eps).max_violation();
  }
  res.value = cur.ell[t];
  res.point = std::move(cur);
  return res;
}

/// Both bounds at every index in `subset` (0-based). Tasks are independent;
/// results do not depend on `threads`.
inline PointwiseIntervals pointwise_intervals(const DesignGrid& grid, const IntervalSystem& sys,
                                              const CcpConfig& cfg,
                                              std::span<const std::size_t> subset,
                                              std::size_t threads = 1) {
  if (subset.empty()) throw DomainError("subset of design points is empty");
  std::vector<std::size_t> idx(subset.begin(), subset.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.back() >= grid.m()) throw DimensionMismatch("subset index outside the design grid");
  cfg.validate();

  std::vector<PointResult> results(2 * idx.size());
  parallel_for(results.size(), threads, [&](std::size_t k) {
    const Sense sense = k % 2 == 0 ? Sense::Min : Sense::Max;
    results[k] = run_ccp_point(grid, sys, idx[k / 2], sense, cfg);
  });

  PointwiseIntervals out;
  out.indices = idx;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    out.lo.push_back(results[2 * q].value);
    out.hi.push_back(results[2 * q + 1].value);
    out.lo_diag.push_back(std::move(results[2 * q].diag));
    out.hi_diag.push_back(std::move(results[2 * q + 1].diag));
  }
  return out;
}

/// ceil(frac * m) indices spread evenly over 0..m-1 (always including both ends).
inline std::vector<std::size_t> even_subset(std::size_t m, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw DomainError("subset fraction must lie in (0, 1]");
  if (m == 0) return {};
  std::size_t k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(m) - 1e-12));
  k = std::clamp<std::size_t>(k, std::min<std::size_t>(m, 2), m);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < k; ++i) {
    idx.push_back(k == 1 ? 0
                         : static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                                 static_cast<double>(m - 1) /
                                                                 static_cast<double>(k - 1))));
  }
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace lcband
