#pragma once

// Dense-input linear programming:
//
//   minimize    c' z
//   subject to  A z <= b,   z_j >= 0 for flagged j, other z_j free.
//
// The solver is a two-phase primal simplex in the inequality (active-set)
// form: a basis is a working set of num_vars linearly independent tight
// constraints, a vertex is the solution of the corresponding square system,
// and a pivot swaps one working constraint for the blocking constraint of
// the ratio test. Free variables are never split. A free (or not yet bound)
// variable enters the working set as a "fix" entry z_j = current value,
// which may be released in either direction and is never re-added.
//
// The basis matrix is kept as a sparse LU factorization plus a product-form
// eta file, refactorized every `refactor_every` pivots. Rows are scaled to
// unit max-norm internally; all reported quantities are in original units.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lcband/errors.hpp"

namespace lcband {

struct LinearProgram {
  std::size_t num_vars = 0;
  Eigen::VectorXd objective;  // minimized
  Eigen::MatrixXd A;          // one row per constraint A.row(r) z <= b(r)
  Eigen::VectorXd b;
  std::vector<bool> nonneg;   // true: z_j >= 0, false: free

  LinearProgram() = default;
  LinearProgram(std::size_t vars, std::size_t rows)
      : num_vars(vars),
        objective(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vars))),
        A(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                static_cast<Eigen::Index>(vars))),
        b(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows))),
        nonneg(vars, false) {}

  std::size_t num_rows() const { return static_cast<std::size_t>(A.rows()); }

  /// Appends a row; convenient for small hand-built problems.
  void add_row(const std::vector<double>& coeffs, double rhs) {
    if (coeffs.size() != num_vars) throw DimensionMismatch("row length != num_vars");
    const Eigen::Index r = A.rows();
    A.conservativeResize(r + 1, static_cast<Eigen::Index>(num_vars));
    b.conservativeResize(r + 1);
    for (std::size_t j = 0; j < num_vars; ++j) A(r, static_cast<Eigen::Index>(j)) = coeffs[j];
    b(r) = rhs;
  }

  void validate() const {
    const auto nv = static_cast<Eigen::Index>(num_vars);
    if (objective.size() != nv || A.cols() != nv || b.size() != A.rows() ||
        nonneg.size() != num_vars) {
      throw DimensionMismatch("inconsistent linear program dimensions");
    }
    if (!objective.allFinite() || !A.allFinite() || !b.allFinite()) {
      throw DomainError("linear program has non-finite entries");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

/// One member of a working set.
struct WorkingEntry {
  enum class Kind : unsigned char { Row, Bound, Fix };
  Kind kind;
  std::size_t index;  // row index for Row, variable index for Bound and Fix

  bool operator==(const WorkingEntry&) const = default;
};

/// A working set usable as a warm start for a problem of the same shape.
struct LpBasis {
  std::vector<WorkingEntry> entries;
  Eigen::VectorXd point;  // values for Fix entries
};

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd z;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd duals;  // per row multipliers y >= 0 with c + A'y - mu = 0
  LpBasis basis;
  std::size_t iterations = 0;
  bool warm_started = false;
};

struct SimplexOptions {
  double feas_tol = 1e-9;    // on unit-scaled rows
  double opt_tol = 1e-9;     // reduced-cost tolerance
  double pivot_tol = 1e-9;   // relative to the direction's max-norm
  std::size_t refactor_every = 50;
  std::size_t stall_limit = 40;  // consecutive degenerate pivots before Bland's rule
  std::size_t budget_factor = 50;
};

namespace detail {

struct CsrMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> start;
  std::vector<std::size_t> idx;
  std::vector<double> val;

  double dot(std::size_t r, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (std::size_t p = start[r]; p < start[r + 1]; ++p) s += val[p] * v(static_cast<Eigen::Index>(idx[p]));
    return s;
  }
};

// Problem after row scaling, possibly augmented for phase 1.
struct ScaledProblem {
  std::size_t n = 0;
  CsrMatrix A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<bool> nonneg;
};

class BasisFactor {
 public:
  bool factor(const ScaledProblem& P, const std::vector<WorkingEntry>& W) {
    const auto n = static_cast<Eigen::Index>(P.n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(W.size() * 4);
    for (std::size_t p = 0; p < W.size(); ++p) {
      const auto row = static_cast<Eigen::Index>(p);
      const auto& e = W[p];
      switch (e.kind) {
        case WorkingEntry::Kind::Row:
          for (std::size_t q = P.A.start[e.index]; q < P.A.start[e.index + 1]; ++q) {
            trip.emplace_back(row, static_cast<Eigen::Index>(P.A.idx[q]), P.A.val[q]);
          }
          break;
        case WorkingEntry::Kind::Bound:
          trip.emplace_back(row, static_cast<Eigen::Index>(e.index), -1.0);
          break;
        case WorkingEntry::Kind::Fix:
          trip.emplace_back(row, static_cast<Eigen::Index>(e.index), 1.0);
          break;
      }
    }
    Eigen::SparseMatrix<double> B(n, n);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  // Solves B x = r.
  Eigen::VectorXd solve(Eigen::VectorXd r) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const auto q = static_cast<Eigen::Index>(it->pos);
      const double vq = it->v(q);
      const double rest = it->v.dot(r) - vq * r(q);
      r(q) = (r(q) - rest) / vq;
    }
    return lu_.solve(r);
  }

  // Solves B' x = r.
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& r) const {
    Eigen::VectorXd y = lu_.transpose().solve(r);
    for (const auto& eta : etas_) {
      const auto q = static_cast<Eigen::Index>(eta.pos);
      const double xq = y(q) / eta.v(q);
      y -= xq * eta.v;
      y(q) = xq;
    }
    return y;
  }

  // Records the replacement of working row `pos` by a row whose image
  // a' B^{-1} is `v`.
  void replace(std::size_t pos, Eigen::VectorXd v) { etas_.push_back({pos, std::move(v)}); }

  std::size_t num_etas() const { return etas_.size(); }

 private:
  struct Eta {
    std::size_t pos;
    Eigen::VectorXd v;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

enum class CoreResult { Optimal, Unbounded, IterationLimit };

}  // namespace detail

class SimplexSolver {
 public:
  explicit SimplexSolver(SimplexOptions opts = {}) : opts_(opts) {}

  LpSolution solve(const LinearProgram& lp, const LpBasis* warm = nullptr) {
    lp.validate();
    LpSolution sol;
    const std::size_t n = lp.num_vars;
    const std::size_t R = lp.num_rows();
    scale_.assign(R, 1.0);
    build_scaled(lp);
    budget_ = opts_.budget_factor * (R + n + 1);
    pivots_ = 0;

    std::vector<WorkingEntry> W;
    Eigen::VectorXd z;
    bool have_start = false;
    if (warm != nullptr && valid_warm(*warm, n, R)) {
      W = warm->entries;
      if (start_from(P_, W, warm->point, z)) {
        have_start = true;
        sol.warm_started = true;
      }
    }
    if (!have_start) {
      W = crash_basis(n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
      if (!start_from(P_, W, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), z)) {
        throw Error("internal: crash basis is singular");
      }
    }

    // Phase 1 if the starting vertex is infeasible.
    if (max_violation(P_, z) > opts_.feas_tol) {
      const auto ph1 = phase_one(W, z);
      if (ph1 == PhaseOne::Infeasible) {
        sol.status = LpStatus::Infeasible;
        sol.iterations = pivots_;
        return sol;
      }
      if (ph1 == PhaseOne::IterationLimit) {
        sol.status = LpStatus::IterationLimit;
        sol.iterations = pivots_;
        return sol;
      }
    }

    const auto res = run_core(P_, W, z, factor_);
    sol.iterations = pivots_;
    if (res == detail::CoreResult::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    if (res == detail::CoreResult::IterationLimit) {
      sol.status = LpStatus::IterationLimit;
      return sol;
    }
    sol.status = LpStatus::Optimal;
    sol.z = z;
    sol.objective_value = lp.objective.dot(z);
    sol.basis.entries = W;
    sol.basis.point = z;
    // Multipliers of the final working set, mapped to original row units.
    const Eigen::VectorXd lam = -factor_.solve_transpose(P_.c);
    sol.duals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R));
    for (std::size_t p = 0; p < W.size(); ++p) {
      if (W[p].kind == WorkingEntry::Kind::Row) {
        sol.duals(static_cast<Eigen::Index>(W[p].index)) =
            std::max(0.0, lam(static_cast<Eigen::Index>(p))) / scale_[W[p].index];
      }
    }
    return sol;
  }

 private:
  enum class PhaseOne { Feasible, Infeasible, IterationLimit };

  void build_scaled(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars;
    const std::size_t R = lp.num_rows();
    P_ = {};
    P_.n = n;
    P_.A.rows = R;
    P_.A.cols = n;
    P_.A.start.assign(R + 1, 0);
    P_.b.resize(static_cast<Eigen::Index>(R));
    for (std::size_t r = 0; r < R; ++r) {
      const auto row = lp.A.row(static_cast<Eigen::Index>(r));
      double s = row.cwiseAbs().maxCoeff();
      if (!(s > 0.0)) s = 1.0;
      scale_[r] = s;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = row(static_cast<Eigen::Index>(j));
        if (a != 0.0) {
          P_.A.idx.push_back(j);
          P_.A.val.push_back(a / s);
        }
      }
      P_.A.start[r + 1] = P_.A.idx.size();
      P_.b(static_cast<Eigen::Index>(r)) = lp.b(static_cast<Eigen::Index>(r)) / s;
    }
    P_.c = lp.objective;
    P_.nonneg = lp.nonneg;
  }

  static bool valid_warm(const LpBasis& warm, std::size_t n, std::size_t R) {
    if (warm.entries.size() != n || static_cast<std::size_t>(warm.point.size()) != n) return false;
    std::vector<char> seen_row(R, 0), seen_var(n, 0);
    for (const auto& e : warm.entries) {
      if (e.kind == WorkingEntry::Kind::Row) {
        if (e.index >= R || seen_row[e.index]) return false;
        seen_row[e.index] = 1;
      } else {
        if (e.index >= n || seen_var[e.index]) return false;
        seen_var[e.index] = 1;
      }
    }
    return true;
  }

  std::vector<WorkingEntry> crash_basis(std::size_t n, const Eigen::VectorXd& /*z*/) const {
    std::vector<WorkingEntry> W;
    W.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      W.push_back({P_.nonneg[j] ? WorkingEntry::Kind::Bound : WorkingEntry::Kind::Fix, j});
    }
    return W;
  }

  static double rhs_of(const detail::ScaledProblem& P, const WorkingEntry& e,
                       const Eigen::VectorXd& fix_values) {
    switch (e.kind) {
      case WorkingEntry::Kind::Row: return P.b(static_cast<Eigen::Index>(e.index));
      case WorkingEntry::Kind::Bound: return 0.0;
      case WorkingEntry::Kind::Fix: return fix_values(static_cast<Eigen::Index>(e.index));
    }
    return 0.0;
  }

  static Eigen::VectorXd normal_of(const detail::ScaledProblem& P, const WorkingEntry& e) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P.n));
    switch (e.kind) {
      case WorkingEntry::Kind::Row:
        for (std::size_t q = P.A.start[e.index]; q < P.A.start[e.index + 1]; ++q) {
          a(static_cast<Eigen::Index>(P.A.idx[q])) = P.A.val[q];
        }
        break;
      case WorkingEntry::Kind::Bound: a(static_cast<Eigen::Index>(e.index)) = -1.0; break;
      case WorkingEntry::Kind::Fix: a(static_cast<Eigen::Index>(e.index)) = 1.0; break;
    }
    return a;
  }

  // Factor the working set and compute its vertex. Returns false when the
  // working set is (numerically) singular.
  bool start_from(const detail::ScaledProblem& P, const std::vector<WorkingEntry>& W,
                  const Eigen::VectorXd& fix_values, Eigen::VectorXd& z) {
    if (!factor_.factor(P, W)) return false;
    return vertex_of(P, W, fix_values, factor_, z);
  }

  static bool vertex_of(const detail::ScaledProblem& P, const std::vector<WorkingEntry>& W,
                        const Eigen::VectorXd& fix_values, const detail::BasisFactor& F,
                        Eigen::VectorXd& z) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(W.size()));
    for (std::size_t p = 0; p < W.size(); ++p) rhs(static_cast<Eigen::Index>(p)) = rhs_of(P, W[p], fix_values);
    z = F.solve(rhs);
    if (!z.allFinite()) return false;
    double resid = 0.0;
    for (std::size_t p = 0; p < W.size(); ++p) {
      resid = std::max(resid, std::fabs(normal_of(P, W[p]).dot(z) - rhs(static_cast<Eigen::Index>(p))));
    }
    return resid <= 1e-7 * (1.0 + rhs.cwiseAbs().maxCoeff() + z.cwiseAbs().maxCoeff());
  }

  static double max_violation(const detail::ScaledProblem& P, const Eigen::VectorXd& z) {
    double v = 0.0;
    for (std::size_t r = 0; r < P.A.rows; ++r) {
      v = std::max(v, P.A.dot(r, z) - P.b(static_cast<Eigen::Index>(r)));
    }
    for (std::size_t j = 0; j < P.n; ++j) {
      if (P.nonneg[j]) v = std::max(v, -z(static_cast<Eigen::Index>(j)));
    }
    return v;
  }

  PhaseOne phase_one(std::vector<WorkingEntry>& W, Eigen::VectorXd& z) {
    const std::size_t n = P_.n;
    const std::size_t R = P_.A.rows;
    const std::size_t theta = n;
    // Rows violated at the start point get a -theta term; violated sign
    // bounds become explicit rows so they can be relaxed the same way.
    detail::ScaledProblem Q;
    Q.n = n + 1;
    Q.nonneg = P_.nonneg;
    Q.nonneg.push_back(true);
    Q.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    Q.c(static_cast<Eigen::Index>(theta)) = 1.0;
    std::vector<std::size_t> bound_rows;  // variable index of each extra row
    for (std::size_t j = 0; j < n; ++j) {
      if (P_.nonneg[j] && -z(static_cast<Eigen::Index>(j)) > opts_.feas_tol) {
        bound_rows.push_back(j);
        Q.nonneg[j] = false;
      }
    }
    Q.A.rows = R + bound_rows.size();
    Q.A.cols = n + 1;
    Q.A.start.assign(Q.A.rows + 1, 0);
    Q.b.resize(static_cast<Eigen::Index>(Q.A.rows));
    double theta0 = 0.0;
    std::size_t worst = 0;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t q = P_.A.start[r]; q < P_.A.start[r + 1]; ++q) {
        Q.A.idx.push_back(P_.A.idx[q]);
        Q.A.val.push_back(P_.A.val[q]);
      }
      const double viol = P_.A.dot(r, z) - P_.b(static_cast<Eigen::Index>(r));
      if (viol > opts_.feas_tol) {
        Q.A.idx.push_back(theta);
        Q.A.val.push_back(-1.0);
        if (viol > theta0) {
          theta0 = viol;
          worst = r;
        }
      }
      Q.A.start[r + 1] = Q.A.idx.size();
      Q.b(static_cast<Eigen::Index>(r)) = P_.b(static_cast<Eigen::Index>(r));
    }
    for (std::size_t k = 0; k < bound_rows.size(); ++k) {
      const std::size_t j = bound_rows[k];
      Q.A.idx.push_back(j);
      Q.A.val.push_back(-1.0);
      Q.A.idx.push_back(theta);
      Q.A.val.push_back(-1.0);
      Q.A.start[R + k + 1] = Q.A.idx.size();
      Q.b(static_cast<Eigen::Index>(R + k)) = 0.0;
      const double viol = -z(static_cast<Eigen::Index>(j));
      if (viol > theta0) {
        theta0 = viol;
        worst = R + k;
      }
    }

    std::vector<WorkingEntry> QW = W;
    QW.push_back({WorkingEntry::Kind::Row, worst});
    Eigen::VectorXd qz(static_cast<Eigen::Index>(n + 1));
    qz.head(static_cast<Eigen::Index>(n)) = z;
    qz(static_cast<Eigen::Index>(theta)) = theta0;
    detail::BasisFactor qf;
    if (!qf.factor(Q, QW)) throw Error("internal: phase-one basis is singular");

    const auto res = run_core(Q, QW, qz, qf);
    if (res == detail::CoreResult::IterationLimit) return PhaseOne::IterationLimit;
    const double theta_star = qz(static_cast<Eigen::Index>(theta));
    if (theta_star > opts_.feas_tol) return PhaseOne::Infeasible;

    z = qz.head(static_cast<Eigen::Index>(n));
    std::vector<WorkingEntry> next;
    bool dropped_theta = false;
    for (const auto& e : QW) {
      if (e.kind == WorkingEntry::Kind::Bound && e.index == theta) {
        dropped_theta = true;
        continue;
      }
      if (e.kind == WorkingEntry::Kind::Row && e.index >= R) {
        next.push_back({WorkingEntry::Kind::Bound, bound_rows[e.index - R]});
      } else {
        next.push_back(e);
      }
    }
    if (dropped_theta && start_from(P_, next, z, z) && max_violation(P_, z) <= 10 * opts_.feas_tol) {
      W = std::move(next);
      return PhaseOne::Feasible;
    }
    // Degenerate exit: restart phase 2 from the feasible point itself.
    z = qz.head(static_cast<Eigen::Index>(n));
    W = crash_at(z);
    if (!start_from(P_, W, z, z)) throw Error("internal: crash basis is singular");
    return PhaseOne::Feasible;
  }

  std::vector<WorkingEntry> crash_at(const Eigen::VectorXd& z) const {
    std::vector<WorkingEntry> W;
    for (std::size_t j = 0; j < P_.n; ++j) {
      const bool at_bound = P_.nonneg[j] && z(static_cast<Eigen::Index>(j)) <= opts_.feas_tol;
      W.push_back({at_bound ? WorkingEntry::Kind::Bound : WorkingEntry::Kind::Fix, j});
    }
    return W;
  }

  std::size_t entry_id(const detail::ScaledProblem& P, const WorkingEntry& e) const {
    switch (e.kind) {
      case WorkingEntry::Kind::Row: return e.index;
      case WorkingEntry::Kind::Bound: return P.A.rows + e.index;
      case WorkingEntry::Kind::Fix: return P.A.rows + P.n + e.index;
    }
    return 0;
  }

  detail::CoreResult run_core(const detail::ScaledProblem& P, std::vector<WorkingEntry>& W,
                              Eigen::VectorXd& z, detail::BasisFactor& F) {
    const std::size_t n = P.n;
    const std::size_t R = P.A.rows;
    std::vector<char> in_rows(R, 0), bound_in(n, 0);
    for (const auto& e : W) {
      if (e.kind == WorkingEntry::Kind::Row) in_rows[e.index] = 1;
      if (e.kind == WorkingEntry::Kind::Bound) bound_in[e.index] = 1;
    }
    bool bland = false;
    std::size_t stall = 0;
    Eigen::VectorXd fixv = z;
    const double cnorm = std::max(1.0, P.c.cwiseAbs().maxCoeff());
    const double opt_tol = opts_.opt_tol * cnorm;

    while (true) {
      if (F.num_etas() >= opts_.refactor_every) {
        if (!F.factor(P, W)) throw Error("internal: basis became singular");
        Eigen::VectorXd znew;
        for (std::size_t p = 0; p < W.size(); ++p) {
          if (W[p].kind == WorkingEntry::Kind::Fix) fixv(static_cast<Eigen::Index>(W[p].index)) = z(static_cast<Eigen::Index>(W[p].index));
        }
        if (vertex_of(P, W, fixv, F, znew)) z = znew;
      }
      const Eigen::VectorXd lam = -F.solve_transpose(P.c);

      // Pricing.
      std::size_t q = W.size();
      double dir = 0.0;
      double best = 0.0;
      std::size_t best_id = std::numeric_limits<std::size_t>::max();
      for (std::size_t p = 0; p < W.size(); ++p) {
        const double l = lam(static_cast<Eigen::Index>(p));
        double rate = 0.0, d = 0.0;
        if (W[p].kind == WorkingEntry::Kind::Fix) {
          if (std::fabs(l) > opt_tol) {
            rate = std::fabs(l);
            d = l < 0.0 ? -1.0 : 1.0;
          }
        } else if (l < -opt_tol) {
          rate = -l;
          d = -1.0;
        }
        if (rate == 0.0) continue;
        if (bland) {
          const std::size_t id = entry_id(P, W[p]);
          if (id < best_id) {
            best_id = id;
            q = p;
            dir = d;
          }
        } else if (rate > best) {
          best = rate;
          q = p;
          dir = d;
        }
      }
      if (q == W.size()) {
        if (F.num_etas() > 0) {
          // Confirm optimality on a fresh factorization.
          if (!F.factor(P, W)) throw Error("internal: basis became singular");
          for (std::size_t p = 0; p < W.size(); ++p) {
            if (W[p].kind == WorkingEntry::Kind::Fix) fixv(static_cast<Eigen::Index>(W[p].index)) = z(static_cast<Eigen::Index>(W[p].index));
          }
          Eigen::VectorXd znew;
          if (vertex_of(P, W, fixv, F, znew)) z = znew;
          continue;
        }
        return detail::CoreResult::Optimal;
      }
      if (pivots_ >= budget_) return detail::CoreResult::IterationLimit;

      Eigen::VectorXd unit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      unit(static_cast<Eigen::Index>(q)) = 1.0;
      const Eigen::VectorXd u = F.solve(unit);
      const Eigen::VectorXd d = dir * u;
      const double dnorm = std::max(1e-300, d.cwiseAbs().maxCoeff());
      const double ptol = opts_.pivot_tol * dnorm;

      // Ratio test (two passes: bound with tolerance, then best pivot).
      struct Cand {
        std::size_t id;
        WorkingEntry e;
        double slack;
        double rate;
      };
      std::vector<Cand> cands;
      for (std::size_t r = 0; r < R; ++r) {
        if (in_rows[r]) continue;
        const double ad = P.A.dot(r, d);
        if (ad > ptol) {
          const double slack = P.b(static_cast<Eigen::Index>(r)) - P.A.dot(r, z);
          cands.push_back({r, {WorkingEntry::Kind::Row, r}, slack, ad});
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!P.nonneg[j] || bound_in[j]) continue;
        const double ad = -d(static_cast<Eigen::Index>(j));
        if (ad > ptol) {
          cands.push_back({R + j, {WorkingEntry::Kind::Bound, j}, z(static_cast<Eigen::Index>(j)), ad});
        }
      }
      if (cands.empty()) return detail::CoreResult::Unbounded;

      std::size_t pick = 0;
      if (bland) {
        double tmin = std::numeric_limits<double>::infinity();
        for (const auto& c : cands) tmin = std::min(tmin, std::max(0.0, c.slack) / c.rate);
        std::size_t best_cid = std::numeric_limits<std::size_t>::max();
        for (std::size_t k = 0; k < cands.size(); ++k) {
          const double t = std::max(0.0, cands[k].slack) / cands[k].rate;
          if (t <= tmin * (1.0 + 1e-12) + 1e-300 && cands[k].id < best_cid) {
            best_cid = cands[k].id;
            pick = k;
          }
        }
      } else {
        double tmax = std::numeric_limits<double>::infinity();
        for (const auto& c : cands) tmax = std::min(tmax, (std::max(0.0, c.slack) + opts_.feas_tol) / c.rate);
        double best_rate = -1.0;
        for (std::size_t k = 0; k < cands.size(); ++k) {
          const double t = std::max(0.0, cands[k].slack) / cands[k].rate;
          if (t <= tmax && cands[k].rate > best_rate) {
            best_rate = cands[k].rate;
            pick = k;
          }
        }
      }
      const Cand& c = cands[pick];
      const double step = std::max(0.0, c.slack) / c.rate;
      z += step * d;

      if (step * dnorm <= 1e-12) {
        if (++stall >= opts_.stall_limit) bland = true;
      } else {
        stall = 0;
      }

      // Swap the working entry.
      const Eigen::VectorXd an = normal_of(P, c.e);
      Eigen::VectorXd v = F.solve_transpose(an);
      if (std::fabs(v(static_cast<Eigen::Index>(q))) < 1e-14) {
        // Numerically singular swap; refactor and retry the iteration.
        if (!F.factor(P, W)) throw Error("internal: basis became singular");
        continue;
      }
      const auto& old = W[q];
      if (old.kind == WorkingEntry::Kind::Row) in_rows[old.index] = 0;
      if (old.kind == WorkingEntry::Kind::Bound) bound_in[old.index] = 0;
      W[q] = c.e;
      if (c.e.kind == WorkingEntry::Kind::Row) in_rows[c.e.index] = 1;
      if (c.e.kind == WorkingEntry::Kind::Bound) bound_in[c.e.index] = 1;
      F.replace(q, std::move(v));
      ++pivots_;
    }
  }

  SimplexOptions opts_;
  detail::ScaledProblem P_;
  detail::BasisFactor factor_;
  std::vector<double> scale_;
  std::size_t budget_ = 0;
  std::size_t pivots_ = 0;
};

inline LpSolution solve_lp(const LinearProgram& lp) {
  SimplexSolver solver;
  return solver.solve(lp);
}

/// Largest violation of A z <= b and of the sign constraints, in original units.
inline double lp_max_violation(const LinearProgram& lp, const Eigen::VectorXd& z) {
  double v = 0.0;
  if (lp.num_rows() > 0) v = std::max(v, (lp.A * z - lp.b).maxCoeff());
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    if (lp.nonneg[j]) v = std::max(v, -z(static_cast<Eigen::Index>(j)));
  }
  return v;
}

// Text dump, one line per row:
//   c: <objective coefficients>
//   v: <nonneg flags, 1 = z_j >= 0>
//   r: <coefficients> <= <rhs>
inline void write_lp_text(std::ostream& os, const LinearProgram& lp) {
  os << std::setprecision(17);
  os << "c:";
  for (Eigen::Index j = 0; j < lp.objective.size(); ++j) os << ' ' << lp.objective(j);
  os << "\nv:";
  for (bool f : lp.nonneg) os << ' ' << (f ? 1 : 0);
  os << '\n';
  for (Eigen::Index r = 0; r < lp.A.rows(); ++r) {
    os << "r:";
    for (Eigen::Index j = 0; j < lp.A.cols(); ++j) os << ' ' << lp.A(r, j);
    os << " <= " << lp.b(r) << '\n';
  }
}

inline LinearProgram read_lp_text(std::istream& is) {
  LinearProgram lp;
  std::string line;
  std::size_t lineno = 0;
  bool have_c = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line.substr(2));
    const std::string tag = line.substr(0, 2);
    if (tag == "c:") {
      std::vector<double> c;
      for (double v; ls >> v;) c.push_back(v);
      lp.num_vars = c.size();
      lp.objective = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
      lp.nonneg.assign(c.size(), false);
      lp.A.resize(0, static_cast<Eigen::Index>(c.size()));
      lp.b.resize(0);
      have_c = true;
    } else if (tag == "v:" && have_c) {
      for (std::size_t j = 0; j < lp.num_vars; ++j) {
        int f = 0;
        if (!(ls >> f)) throw DomainError("lp text: short v: line " + std::to_string(lineno));
        lp.nonneg[j] = f != 0;
      }
    } else if (tag == "r:" && have_c) {
      std::vector<double> row(lp.num_vars);
      for (auto& v : row) {
        if (!(ls >> v)) throw DomainError("lp text: short r: line " + std::to_string(lineno));
      }
      std::string le;
      double rhs = 0.0;
      if (!(ls >> le >> rhs) || le != "<=") {
        throw DomainError("lp text: malformed r: line " + std::to_string(lineno));
      }
      lp.add_row(row, rhs);
    } else {
      throw DomainError("lp text: unexpected line " + std::to_string(lineno));
    }
  }
  if (!have_c) throw DomainError("lp text: missing objective line");
  return lp;
}

}  // namespace lcband
