#pragma once

// Independent reference computations (quadrature, brute-force vertex
// enumeration, finite differences, bisection) and the randomized checks
// built on them. Used by the test suites and by `lcband selftest`.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lcband/design.hpp"
#include "lcband/lpsolve.hpp"
#include "lcband/relax.hpp"
#include "lcband/rng.hpp"
#include "lcband/simulate.hpp"
#include "lcband/specfun.hpp"

namespace lcband::oracle {

struct CheckResult {
  explicit CheckResult(std::string n) : name(std::move(n)) {}

  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest observed error measure
  std::string detail;

  bool passed() const { return failures == 0; }
};

// ---------------------------------------------------------------- quadrature

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (a == b) return 0.0;
  // Start from a few panels so narrow features are not skipped.
  constexpr int kPanels = 8;
  double sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + (b - a) * p / kPanels;
    const double hi = a + (b - a) * (p + 1) / kPanels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    sum += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, tol / kPanels, 50);
  }
  return sum;
}

/// Beta(a, b) cdf by quadrature of the density.
inline double beta_cdf_quadrature(double x, double a, double b) {
  const BetaParams p{a, b};
  // Split at the mode so the integrand is monotone on each piece.
  const double mode = (a > 1.0 && b > 1.0) ? (a - 1.0) / (a + b - 2.0) : 0.5;
  auto pdf = [&](double t) { return beta_pdf(t, p); };
  if (x <= mode) return integrate(pdf, 0.0, x, 1e-13);
  return integrate(pdf, 0.0, mode, 1e-13) + integrate(pdf, mode, x, 1e-13);
}

/// Quantile by bisection on a cdf.
inline double bisect_quantile(const std::function<double(double)>& cdf, double p, double tol = 1e-13) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------ log-concave families

/// A log-concave density given by log f and a (sub)gradient of log f.
struct LogConcave {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double lo;  // interval where the density is well inside double range
  double hi;
  std::vector<double> kinks;
  std::string label;
};

inline LogConcave random_log_concave(CounterRng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kind = static_cast<int>(u(rng) * 5.0);
  const double mu = -2.0 + 4.0 * u(rng);
  const double s = 0.3 + 2.0 * u(rng);
  switch (kind) {
    case 0:
      return {[=](double x) { return -0.5 * (x - mu) * (x - mu) / (s * s) - std::log(s * 2.5066282746310002); },
              [=](double x) { return -(x - mu) / (s * s); }, mu - 3 * s, mu + 3 * s, {}, "gaussian"};
    case 1:
      return {[=](double x) {
                const double z = (x - mu) / s;
                return -z - 2.0 * std::log1p(std::exp(-z)) - std::log(s);
              },
              [=](double x) {
                const double z = (x - mu) / s;
                return (-1.0 + 2.0 / (1.0 + std::exp(z))) / s;
              },
              mu - 5 * s, mu + 5 * s, {}, "logistic"};
    case 2:
      return {[=](double x) {
                const double z = (x - mu) / s;
                return -(z + std::exp(-z)) - std::log(s);
              },
              [=](double x) {
                const double z = (x - mu) / s;
                return (-1.0 + std::exp(-z)) / s;
              },
              mu - 2 * s, mu + 5 * s, {}, "gumbel"};
    case 3: {
      const double k = 1.0 + 4.0 * u(rng);
      return {[=](double x) { return (k - 1.0) * std::log(x) - x - std::lgamma(k); },
              [=](double x) { return (k - 1.0) / x - 1.0; }, 0.05 + 0.1 * k, 3.0 * k + 3.0, {}, "gamma"};
    }
    default: {
      // min of a few lines: a concave piecewise-linear log-density
      const int pieces = 2 + static_cast<int>(u(rng) * 4.0);
      std::vector<double> a, b;
      for (int p = 0; p < pieces; ++p) {
        const double slope = -3.0 + 6.0 * static_cast<double>(p) / (pieces - 1) + 0.3 * (u(rng) - 0.5);
        b.push_back(-slope);
        a.push_back(-1.0 + 0.5 * u(rng));
      }
      std::vector<double> kinks;
      auto phi = [a, b](double x) {
        double v = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < a.size(); ++p) v = std::min(v, a[p] + b[p] * x);
        return v;
      };
      auto dphi = [a, b](double x) {
        double v = std::numeric_limits<double>::infinity();
        double g = 0.0;
        for (std::size_t p = 0; p < a.size(); ++p) {
          if (a[p] + b[p] * x < v) {
            v = a[p] + b[p] * x;
            g = b[p];
          }
        }
        return g;
      };
      for (std::size_t p = 0; p < a.size(); ++p) {
        for (std::size_t q = p + 1; q < a.size(); ++q) {
          if (b[p] != b[q]) kinks.push_back((a[q] - a[p]) / (b[p] - b[q]));
        }
      }
      return {phi, dphi, -2.0, 2.0, kinks, "piecewise-linear"};
    }
  }
}

/// Integral of exp(phi) over [a, b], split at kinks.
inline double integrate_density(const LogConcave& lc, double a, double b) {
  std::vector<double> cuts{a};
  for (double k : lc.kinks) if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  auto f = [&](double x) { return std::exp(lc.phi(x)); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += integrate(f, cuts[i], cuts[i + 1], 1e-14);
  return s;
}

// ---------------------------------------------------------------- checks

/// Chord and tangent bounds bracket the true integral on every interval.
inline CheckResult check_sandwich(std::size_t trials, std::uint64_t seed, double tol = 1e-9) {
  CheckResult r("integral sandwich (quadrature)");
  CounterRng rng(derive_key(seed, {101}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < trials; ++k) {
    const LogConcave lc = random_log_concave(rng);
    const std::size_t m = 4 + static_cast<std::size_t>(u(rng) * 6.0);
    DesignGrid grid;
    grid.n = 1000;
    for (std::size_t i = 0; i < m; ++i) grid.x.push_back(lc.lo + (lc.hi - lc.lo) * u(rng));
    std::sort(grid.x.begin(), grid.x.end());
    grid.x.erase(std::unique(grid.x.begin(), grid.x.end()), grid.x.end());
    if (grid.m() < 3) continue;
    FeasiblePoint p;
    for (double x : grid.x) p.ell.push_back(lc.phi(x));
    for (std::size_t i = 1; i + 1 < grid.m(); ++i) p.g.push_back(lc.dphi(grid.x[i]));
    ++r.trials;
    bool bad = false;
    for (std::size_t i = 0; i + 1 < grid.m(); ++i) {
      const double I = integrate_density(lc, grid.x[i], grid.x[i + 1]);
      const double L = eval_L(grid, p.ell, i);
      const double up = std::min(eval_U(grid, p, i), eval_V(grid, p, i));
      const double err = std::max(L - I, I - up);
      r.worst = std::max(r.worst, err);
      if (err > tol) {
        bad = true;
        std::ostringstream os;
        os << lc.label << " interval " << i << ": L=" << L << " I=" << I << " U=" << up << "; ";
        if (r.detail.size() < 400) r.detail += os.str();
      }
    }
    r.failures += bad;
  }
  return r;
}

namespace detail {

inline FeasiblePoint random_point(CounterRng& rng, DesignGrid& grid, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  grid = DesignGrid{};
  grid.n = 1000;
  double x = -2.0 + 2.0 * u(rng);
  for (std::size_t i = 0; i < m; ++i) {
    grid.x.push_back(x);
    x += 0.1 + 1.9 * u(rng);
  }
  FeasiblePoint p;
  for (std::size_t i = 0; i < m; ++i) p.ell.push_back(-3.0 + 6.0 * u(rng));
  for (std::size_t i = 1; i + 1 < m; ++i) p.g.push_back(-3.0 + 6.0 * u(rng));
  return p;
}

// Compares an analytic sparse gradient with central differences of f over
// all variables.
inline double gradient_error(const std::function<double(const FeasiblePoint&)>& f,
                             const FeasiblePoint& p, const SparseGradient& grad, std::size_t m,
                             double h) {
  std::vector<double> an(2 * m - 2, 0.0);
  for (const auto& t : grad) an[t.var] += t.coef;
  const auto z = p.packed();
  double worst = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v) {
    auto zp = z, zm = z;
    zp[v] += h;
    zm[v] -= h;
    const double fd = (f(FeasiblePoint::unpack(zp, m)) - f(FeasiblePoint::unpack(zm, m))) / (2.0 * h);
    const double err = an[v] == 0.0 ? (fd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                    : std::fabs(fd - an[v]) / std::fabs(an[v]);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace detail

/// grad_U, grad_V and the gradient of the chord linearization against
/// central differences (relative error).
inline CheckResult check_gradients(std::size_t trials, std::uint64_t seed, double tol = 1e-6,
                                   double h = 1e-6) {
  CheckResult r("gradients vs central differences");
  CounterRng rng(derive_key(seed, {202}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < trials; ++k) {
    DesignGrid grid;
    const std::size_t m = 4 + static_cast<std::size_t>(u(rng) * 4.0);
    const FeasiblePoint p = detail::random_point(rng, grid, m);
    const std::size_t i = std::min(m - 2, static_cast<std::size_t>(u(rng) * static_cast<double>(m - 1)));
    const double eu = detail::gradient_error([&](const FeasiblePoint& q) { return eval_U(grid, q, i); }, p,
                                             grad_U(grid, p, i), m, h);
    const double ev = detail::gradient_error([&](const FeasiblePoint& q) { return eval_V(grid, q, i); }, p,
                                             grad_V(grid, p, i), m, h);
    const double el = detail::gradient_error([&](const FeasiblePoint& q) { return eval_L(grid, q.ell, i); },
                                             p, linearize_L(grid, p.ell, i).terms, m, h);
    const double e = std::max({eu, ev, el});
    ++r.trials;
    r.worst = std::max(r.worst, e);
    if (e > tol) {
      ++r.failures;
      std::ostringstream os;
      os << "i=" << i << " m=" << m << " errU=" << eu << " errV=" << ev << " errL=" << el << "; ";
      if (r.detail.size() < 400) r.detail += os.str();
    }
  }
  return r;
}

/// Linearizations never exceed the convex functions they are tangent to.
inline CheckResult check_tangent_dominance(std::size_t probes, std::uint64_t seed,
                                           double tol = 1e-12) {
  CheckResult r("tangent dominance");
  CounterRng rng(derive_key(seed, {303}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < probes; ++k) {
    DesignGrid grid;
    const std::size_t m = 4 + static_cast<std::size_t>(u(rng) * 4.0);
    const FeasiblePoint p0 = detail::random_point(rng, grid, m);
    const std::size_t i = std::min(m - 2, static_cast<std::size_t>(u(rng) * static_cast<double>(m - 1)));
    FeasiblePoint q = p0;
    const double spread = 3.0 * u(rng);
    for (auto& v : q.ell) v += spread * (2.0 * u(rng) - 1.0);
    for (auto& v : q.g) v += spread * (2.0 * u(rng) - 1.0);
    const auto zq = q.packed();
    const double gu = eval_U(grid, q, i) - linearize_U(grid, p0, i)(zq);
    const double gv = eval_V(grid, q, i) - linearize_V(grid, p0, i)(zq);
    const double gl = eval_L(grid, q.ell, i) - linearize_L(grid, p0.ell, i)(q.ell);
    const double slack = std::min({gu, gv, gl});
    ++r.trials;
    r.worst = std::max(r.worst, -slack);
    if (slack < -tol) {
      ++r.failures;
      std::ostringstream os;
      os << "slack " << slack << " at i=" << i << "; ";
      if (r.detail.size() < 400) r.detail += os.str();
    }
  }
  return r;
}

/// Best objective over all basic feasible solutions (all constraint subsets
/// of size num_vars, sign bounds included). Returns nullopt when no vertex
/// is feasible. Only meaningful for bounded problems.
inline std::optional<double> vertex_enumeration(const LinearProgram& lp, double feas_tol = 1e-9) {
  const auto n = static_cast<Eigen::Index>(lp.num_vars);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index r = 0; r < lp.A.rows(); ++r) {
    rows.push_back(lp.A.row(r).transpose());
    rhs.push_back(lp.b(r));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lp.nonneg[static_cast<std::size_t>(j)]) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = -1.0;
      rows.push_back(e);
      rhs.push_back(0.0);
    }
  }
  const std::size_t total = rows.size();
  std::optional<double> best;
  if (total < static_cast<std::size_t>(n)) return best;
  std::vector<std::size_t> pick(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < pick.size(); ++k) pick[k] = k;
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd v(n);
  while (true) {
    for (Eigen::Index k = 0; k < n; ++k) {
      M.row(k) = rows[pick[static_cast<std::size_t>(k)]].transpose();
      v(k) = rhs[pick[static_cast<std::size_t>(k)]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    if (std::fabs(lu.determinant()) > 1e-10) {
      const Eigen::VectorXd z = lu.solve(v);
      bool ok = true;
      for (std::size_t r = 0; r < total && ok; ++r) {
        const double scale = std::max(1.0, rows[r].cwiseAbs().maxCoeff());
        ok = rows[r].dot(z) - rhs[r] <= feas_tol * scale * std::max(1.0, z.cwiseAbs().maxCoeff());
      }
      if (ok) {
        const double obj = lp.objective.dot(z);
        if (!best || obj < *best) best = obj;
      }
    }
    // next combination
    std::size_t k = pick.size();
    while (k > 0 && pick[k - 1] == total - pick.size() + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t q = k; q < pick.size(); ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

/// Random bounded, feasible LP: rows with positive right-hand sides (the
/// origin is feasible) and one row equal to minus the sum of the first
/// num_vars rows, which makes the feasible set bounded.
inline LinearProgram random_bounded_lp(CounterRng& rng, std::size_t vars, std::size_t rows,
                                       std::size_t nonneg_count) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LinearProgram lp(vars, rows);
  for (std::size_t j = 0; j < vars; ++j) lp.objective(static_cast<Eigen::Index>(j)) = nd(rng);
  for (std::size_t j = 0; j < nonneg_count && j < vars; ++j) lp.nonneg[j] = true;
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t j = 0; j < vars; ++j) lp.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = nd(rng);
    lp.b(static_cast<Eigen::Index>(r)) = 0.5 + 2.0 * u(rng);
  }
  const auto last = static_cast<Eigen::Index>(rows - 1);
  lp.A.row(last) = -lp.A.topRows(static_cast<Eigen::Index>(vars)).colwise().sum();
  lp.b(last) = 0.5 + 2.0 * u(rng);
  return lp;
}

/// Solver objective against vertex enumeration on random bounded LPs, plus
/// status classification on constructed infeasible / unbounded problems.
inline CheckResult check_lp_oracle(std::size_t trials, std::uint64_t seed, std::size_t vars = 10,
                                   std::size_t rows = 17, std::size_t nonneg_count = 3,
                                   double tol = 1e-6) {
  CheckResult r("LP vs vertex enumeration");
  CounterRng rng(derive_key(seed, {404}));
  for (std::size_t k = 0; k < trials; ++k) {
    const auto lp = random_bounded_lp(rng, vars, rows, nonneg_count);
    const auto sol = solve_lp(lp);
    const auto best = vertex_enumeration(lp);
    ++r.trials;
    double err = std::numeric_limits<double>::infinity();
    if (sol.status == LpStatus::Optimal && best) err = std::fabs(sol.objective_value - *best);
    r.worst = std::max(r.worst, err);
    if (!(err <= tol)) {
      ++r.failures;
      std::ostringstream os;
      os << "lp " << k << ": status=" << to_string(sol.status) << " obj=" << sol.objective_value
         << " oracle=" << (best ? *best : std::nan("")) << "; ";
      if (r.detail.size() < 400) r.detail += os.str();
    }
  }

  // Constructed classification cases.
  std::normal_distribution<double> nd(0.0, 1.0);
  auto expect = [&](const LinearProgram& lp, LpStatus want, const char* what) {
    ++r.trials;
    const auto s = solve_lp(lp);
    if (s.status != want) {
      ++r.failures;
      r.detail += std::string(what) + ": got " + to_string(s.status) + "; ";
    }
  };
  for (std::size_t k = 0; k < std::max<std::size_t>(1, trials / 10); ++k) {
    // Infeasible: a random bounded LP plus two contradictory rows along a random direction.
    auto lp = random_bounded_lp(rng, vars, rows, nonneg_count);
    std::vector<double> d(vars);
    for (auto& v : d) v = nd(rng);
    std::vector<double> nd2(vars);
    for (std::size_t j = 0; j < vars; ++j) nd2[j] = -d[j];
    lp.add_row(d, -1.0);
    lp.add_row(nd2, -1.0);
    expect(lp, LpStatus::Infeasible, "contradictory rows");

    // Unbounded: free variables, objective pointing along a recession direction.
    LinearProgram ub(vars, 0);
    std::vector<double> dir(vars);
    for (auto& v : dir) v = nd(rng);
    for (std::size_t q = 0; q < rows; ++q) {
      std::vector<double> row(vars);
      double dot = 0.0;
      for (std::size_t j = 0; j < vars; ++j) {
        row[j] = nd(rng);
        dot += row[j] * dir[j];
      }
      if (dot > 0.0) for (auto& v : row) v = -v;  // keep dir a recession direction
      ub.add_row(row, 1.0);
    }
    for (std::size_t j = 0; j < vars; ++j) ub.objective(static_cast<Eigen::Index>(j)) = -dir[j];
    expect(ub, LpStatus::Unbounded, "recession direction");
  }
  return r;
}

/// Deviation bound for beta quantiles around k/(n+1), both tails.
inline CheckResult check_quantile_deviation(std::size_t trials, std::uint64_t seed) {
  CheckResult r("beta quantile deviation bound");
  CounterRng rng(derive_key(seed, {505}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const double n = std::floor(10.0 + std::pow(10.0, 4.0 * u(rng)));
    double k = (n + 1.0) * u(rng);
    k = std::clamp(k, 1e-3, n + 1.0 - 1e-3);
    const double alpha = std::clamp(u(rng), 1e-6, 1.0 - 1e-6);
    const double p = k / (n + 1.0);
    const BetaParams bp{k, n + 1.0 - k};
    const double la = std::log(1.0 / alpha);
    const double bound = std::sqrt(p * (1.0 - p) / (n + 1.0)) * std::sqrt(2.0 * la) + la / (n + 1.0);
    const double up = qbeta(1.0 - alpha, bp) - p;
    const double dn = p - qbeta(alpha, bp);
    const double excess = std::max(up, dn) - bound;
    ++r.trials;
    r.worst = std::max(r.worst, excess);
    if (excess > 0.0) {
      ++r.failures;
      std::ostringstream os;
      os << "n=" << n << " k=" << k << " alpha=" << alpha << " excess=" << excess << "; ";
      if (r.detail.size() < 400) r.detail += os.str();
    }
  }
  return r;
}

/// qbeta and reg_inc_beta against quadrature of the density and bisection.
inline CheckResult check_beta_functions(std::size_t trials, std::uint64_t seed, double tol = 1e-8) {
  CheckResult r("beta cdf / quantile vs quadrature");
  CounterRng rng(derive_key(seed, {707}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const double a = 1.0 + 60.0 * u(rng);
    const double b = 1.0 + 400.0 * u(rng);
    const double prob = 0.01 + 0.98 * u(rng);
    const double x = u(rng);
    const double cdf_err = std::fabs(reg_inc_beta(x, {a, b}) - beta_cdf_quadrature(x, a, b));
    const double q_ref = bisect_quantile([&](double v) { return beta_cdf_quadrature(v, a, b); }, prob);
    const double q_err = std::fabs(qbeta(prob, {a, b}) - q_ref);
    const double e = std::max(cdf_err, q_err);
    ++r.trials;
    r.worst = std::max(r.worst, e);
    if (e > tol) {
      ++r.failures;
      std::ostringstream os;
      os << "a=" << a << " b=" << b << " p=" << prob << " cdf_err=" << cdf_err << " q_err=" << q_err << "; ";
      if (r.detail.size() < 400) r.detail += os.str();
    }
  }
  return r;
}

/// Fraction of simulated samples for which the true (l, g) of the sampling
/// density satisfies all constraints.
inline double true_point_feasible_rate(Distribution d, std::size_t n, double alpha,
                                       std::size_t sims, std::uint64_t seed) {
  std::size_t ok = 0;
  for (std::size_t s = 0; s < sims; ++s) {
    CounterRng rng(derive_key(seed, {606, static_cast<std::uint64_t>(d), s}));
    const auto x = sample(d, n, rng);
    const auto grid = select_design_points(x);
    const auto sys = build_interval_system(grid, alpha);
    FeasiblePoint p;
    for (double xi : grid.x) p.ell.push_back(true_log_density(d, xi).first);
    for (std::size_t i = 1; i + 1 < grid.m(); ++i) p.g.push_back(true_log_density(d, grid.x[i]).second);
    ok += check_feasible(grid, sys, p).feasible;
  }
  return static_cast<double>(ok) / static_cast<double>(sims);
}

inline std::string summarize(const CheckResult& r) {
  std::ostringstream os;
  os << (r.passed() ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.trials << " trials, "
     << r.failures << " failures, worst " << r.worst << ")";
  if (!r.passed() && !r.detail.empty()) os << "\n      " << r.detail;
  return os.str();
}

}  // namespace lcband::oracle
