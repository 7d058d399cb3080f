#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lcband/ccp.hpp"
#include "lcband/simulate.hpp"

using namespace lcband;

namespace {

struct Instance {
  DesignGrid grid;
  IntervalSystem sys;
};

Instance gaussian_instance(std::size_t n, std::uint64_t seed) {
  CounterRng rng(derive_key(seed, {0}));
  const auto x = sample(Distribution::Gaussian, n, rng);
  Instance in;
  in.grid = select_design_points(x);
  in.sys = build_interval_system(in.grid, 0.1);
  return in;
}

}  // namespace

TEST(CcpConfig, PenaltySchedule) {
  CcpConfig cfg;
  cfg.tau0 = 1e-4;
  cfg.kappa = 2.0;
  cfg.tau_max = 1e4;
  for (std::size_t K = 0; K < 60; ++K) {
    EXPECT_EQ(penalty_at(cfg, K), std::min(cfg.tau0 * std::pow(2.0, static_cast<double>(K)), 1e4));
  }
  EXPECT_DOUBLE_EQ(penalty_at(cfg, 0), 1e-4);
  EXPECT_DOUBLE_EQ(penalty_at(cfg, 3), 8e-4);
  EXPECT_DOUBLE_EQ(penalty_at(cfg, 40), 1e4);
}

TEST(CcpConfig, Validation) {
  CcpConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.tau0 = 0.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.kappa = 1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.tau_max = ok.tau0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.slack_tol = -1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.k_max = 0;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Subproblem, CountsForHundred) {
  const auto in = gaussian_instance(100, 1);
  ASSERT_EQ(in.grid.m(), 13u);
  const auto lay = subproblem_layout(in.grid, in.sys);
  EXPECT_EQ(lay.num_vars, 36u);
  EXPECT_EQ(lay.conc_rows, 22u);
  EXPECT_EQ(lay.up_rows, 12u);
  EXPECT_EQ(lay.down_rows, 24u);
  EXPECT_EQ(lay.num_slacks, 12u);
  EXPECT_EQ(lay.num_slacks, in.sys.num_pairs());

  const auto p = initial_point(in.grid, CcpConfig{}, 5, Sense::Min);
  const auto lp = build_subproblem(in.grid, in.sys, p, 5, Sense::Min, 1.0);
  EXPECT_EQ(lp.num_vars, 36u);
  EXPECT_EQ(lp.num_rows(), 22u + 12u + 24u);
  std::size_t signed_vars = 0;
  for (bool b : lp.nonneg) signed_vars += b;
  EXPECT_EQ(signed_vars, 12u);
  for (std::size_t q = 0; q < 12; ++q) EXPECT_TRUE(lp.nonneg[lay.slack(q)]);

  SubproblemOptions tr;
  tr.trust_radius = 1.0;
  const auto lay_tr = subproblem_layout(in.grid, in.sys, tr);
  EXPECT_EQ(lay_tr.trust_rows, 26u);
  EXPECT_EQ(build_subproblem(in.grid, in.sys, p, 5, Sense::Min, 1.0, tr).num_rows(), 58u + 26u);
}

TEST(Subproblem, Objective) {
  const auto in = gaussian_instance(100, 2);
  const auto p = initial_point(in.grid, CcpConfig{}, 4, Sense::Min);
  for (Sense s : {Sense::Min, Sense::Max}) {
    const auto lp = build_subproblem(in.grid, in.sys, p, 4, s, 3.5);
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
      double want = 0.0;
      if (j == 4) want = s == Sense::Min ? 1.0 : -1.0;
      if (j >= 2 * in.grid.m() - 2) want = 3.5;
      EXPECT_EQ(lp.objective(static_cast<Eigen::Index>(j)), want) << j;
    }
  }
}

TEST(Subproblem, MassLowerRowsExactAtCenter) {
  const auto in = gaussian_instance(1000, 3);
  const auto p = initial_point(in.grid, CcpConfig{}, 10, Sense::Max);
  const auto lay = subproblem_layout(in.grid, in.sys);
  const auto lp = build_subproblem(in.grid, in.sys, p, 10, Sense::Max, 1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lp.num_vars));
  const auto zc = p.packed();
  for (std::size_t j = 0; j < zc.size(); ++j) z(static_cast<Eigen::Index>(j)) = zc[j];
  const Eigen::VectorXd resid = lp.A * z - lp.b;
  std::size_t q = 0;
  for (const auto& blk : in.sys.blocks) {
    for (const auto& pr : blk.pairs) {
      double su = 0.0, sv = 0.0, sl = 0.0;
      for (std::size_t i = pr.j; i < pr.k; ++i) {
        su += eval_U(in.grid, p, i);
        sv += eval_V(in.grid, p, i);
        sl += eval_L(in.grid, p.ell, i);
      }
      const double tol = 1e-12 * std::max(1.0, su);
      EXPECT_NEAR(resid(static_cast<Eigen::Index>(lay.down1_begin() + q)), blk.c - su, tol);
      EXPECT_NEAR(resid(static_cast<Eigen::Index>(lay.down2_begin() + q)), blk.c - sv, tol);
      EXPECT_NEAR(resid(static_cast<Eigen::Index>(lay.up_begin() + q)), sl - blk.d, tol);
      ++q;
    }
  }
  EXPECT_EQ(q, lay.num_pairs);
}

TEST(Subproblem, ReleasedEndsLeaveChordRows) {
  const auto in = gaussian_instance(100, 1);
  const std::size_t m = in.grid.m();
  CcpConfig cfg;
  const auto c = initial_point(in.grid, cfg, 5, Sense::Max);
  SubproblemOptions opts;
  opts.release_ends = true;
  const auto lp = build_subproblem(in.grid, in.sys, c, 5, Sense::Max, 1.0, opts);
  const auto lay = subproblem_layout(in.grid, in.sys, opts);
  EXPECT_EQ(lp.num_rows(), static_cast<Eigen::Index>(lay.base_rows()));
  bool inner_used = false;
  for (std::size_t q = 0; q < lay.num_pairs; ++q) {
    const auto r = static_cast<Eigen::Index>(lay.up_begin() + q);
    EXPECT_EQ(lp.A(r, 0), 0.0);
    EXPECT_EQ(lp.A(r, static_cast<Eigen::Index>(m - 1)), 0.0);
    inner_used = inner_used || lp.A(r, 1) != 0.0;
  }
  EXPECT_TRUE(inner_used);
}

// Interior targets are solved with the end values pushed far down; the
// returned point still satisfies every constraint with the true chords.
TEST(RunCcpPoint, InteriorTargetsPushEndsDown) {
  const auto in = gaussian_instance(100, 1);
  const std::size_t m = in.grid.m();
  CcpConfig cfg;
  for (std::size_t t : {std::size_t{1}, m - 2}) {
    const auto r = run_ccp_point(in.grid, in.sys, t, Sense::Max, cfg);
    ASSERT_EQ(r.diag.status, PointStatus::Converged);
    EXPECT_LT(r.point.ell[0], -1e8);
    EXPECT_LT(r.point.ell[m - 1], -1e8);
    EXPECT_TRUE(check_feasible(in.grid, in.sys, r.point, cfg.feas_eps).feasible);
    // Any finite end values give a point no better than the released optimum.
    auto p = r.point;
    p.ell[0] = p.ell[1] + p.g[0] * (in.grid.x[0] - in.grid.x[1]) - 5.0;
    p.ell[m - 1] = p.ell[m - 2] + p.g[m - 3] * (in.grid.x[m - 1] - in.grid.x[m - 2]) - 5.0;
    const auto rep = check_feasible(in.grid, in.sys, p, cfg.feas_eps);
    EXPECT_GE(rep.up_violation + 1e-12, check_feasible(in.grid, in.sys, r.point).up_violation);
  }
}

TEST(RunCcpPoint, MinBelowMaxAndFeasible) {
  const auto in = gaussian_instance(100, 4);
  const CcpConfig cfg;
  for (std::size_t t = 0; t < in.grid.m(); ++t) {
    const auto lo = run_ccp_point(in.grid, in.sys, t, Sense::Min, cfg);
    const auto hi = run_ccp_point(in.grid, in.sys, t, Sense::Max, cfg);
    ASSERT_EQ(hi.diag.status, PointStatus::Converged) << t;
    ASSERT_EQ(lo.diag.status, PointStatus::Converged) << t;
    EXPECT_LE(lo.value, hi.value + 1e-9);
    EXPECT_TRUE(check_feasible(in.grid, in.sys, hi.point, 1e-5).feasible);
    if (t == 0 || t + 1 == in.grid.m()) {
      EXPECT_EQ(lo.value, -std::numeric_limits<double>::infinity());
    } else {
      EXPECT_TRUE(std::isfinite(lo.value));
      EXPECT_TRUE(check_feasible(in.grid, in.sys, lo.point, 1e-5).feasible);
    }
  }
}

TEST(RunCcpPoint, ExactModeMeritNonincreasing) {
  CcpConfig cfg;
  cfg.up_mode = UpMode::Exact;
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const auto in = gaussian_instance(100, seed);
    for (std::size_t t = 1; t + 1 < in.grid.m(); ++t) {
      for (Sense s : {Sense::Min, Sense::Max}) {
        const auto r = run_ccp_point(in.grid, in.sys, t, s, cfg);
        // From the second step on the center satisfies the hard constraints,
        // so it is a candidate of the convexified problem.
        for (std::size_t K = 1; K < r.diag.history.size(); ++K) {
          const auto& h = r.diag.history[K];
          EXPECT_LE(h.merit_after, h.merit_before + 1e-6) << "t=" << t << " K=" << K;
        }
      }
    }
  }
}

TEST(RunCcpPoint, LinearizedBoundsContainExactBounds) {
  CcpConfig lin;
  CcpConfig ex;
  ex.up_mode = UpMode::Exact;
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const auto in = gaussian_instance(100, seed);
    for (std::size_t t = 1; t + 1 < in.grid.m(); ++t) {
      const double lo_lin = run_ccp_point(in.grid, in.sys, t, Sense::Min, lin).value;
      const double lo_ex = run_ccp_point(in.grid, in.sys, t, Sense::Min, ex).value;
      const double hi_lin = run_ccp_point(in.grid, in.sys, t, Sense::Max, lin).value;
      const double hi_ex = run_ccp_point(in.grid, in.sys, t, Sense::Max, ex).value;
      EXPECT_LE(lo_lin, lo_ex + 1e-6);
      EXPECT_GE(hi_lin, hi_ex - 1e-6);
    }
  }
}

TEST(RunCcpPoint, RejectsBadInput) {
  const auto in = gaussian_instance(100, 5);
  EXPECT_THROW(run_ccp_point(in.grid, in.sys, in.grid.m(), Sense::Max, CcpConfig{}), DimensionMismatch);
  FeasiblePoint wrong;
  wrong.ell.assign(3, 0.0);
  wrong.g.assign(1, 0.0);
  EXPECT_THROW(run_ccp_point(in.grid, in.sys, 3, Sense::Max, CcpConfig{}, wrong), DimensionMismatch);
  CcpConfig bad;
  bad.kappa = 0.5;
  EXPECT_THROW(run_ccp_point(in.grid, in.sys, 3, Sense::Max, bad), DomainError);
}

TEST(PointwiseIntervals, AllPointsForHundred) {
  const auto in = gaussian_instance(100, 6);
  const auto all = even_subset(in.grid.m(), 1.0);
  const auto iv = pointwise_intervals(in.grid, in.sys, CcpConfig{}, all);
  ASSERT_EQ(iv.indices.size(), 13u);
  ASSERT_EQ(iv.lo.size(), 13u);
  ASSERT_EQ(iv.hi.size(), 13u);
  EXPECT_TRUE(iv.all_converged());
  EXPECT_EQ(iv.num_failed(), 0u);
  for (std::size_t q = 0; q < 13; ++q) EXPECT_LE(iv.lo[q], iv.hi[q] + 1e-9);
}

TEST(PointwiseIntervals, SubsetsAndThreadsDoNotChangeValues) {
  const auto in = gaussian_instance(100, 7);
  const std::size_t m = in.grid.m();
  std::vector<std::size_t> all, every_other;
  for (std::size_t t = 0; t < m; ++t) {
    all.push_back(t);
    if (t % 2 == 0) every_other.push_back(t);
  }
  const auto a = pointwise_intervals(in.grid, in.sys, CcpConfig{}, all, 1);
  const auto b = pointwise_intervals(in.grid, in.sys, CcpConfig{}, every_other, 1);
  const auto c = pointwise_intervals(in.grid, in.sys, CcpConfig{}, all, 4);
  for (std::size_t q = 0; q < b.indices.size(); ++q) {
    const std::size_t t = b.indices[q];
    EXPECT_EQ(a.lo[t], b.lo[q]);
    EXPECT_EQ(a.hi[t], b.hi[q]);
  }
  EXPECT_EQ(a.lo, c.lo);
  EXPECT_EQ(a.hi, c.hi);
}

TEST(PointwiseIntervals, Errors) {
  const auto in = gaussian_instance(100, 8);
  EXPECT_THROW(pointwise_intervals(in.grid, in.sys, CcpConfig{}, std::vector<std::size_t>{}), DomainError);
  EXPECT_THROW(pointwise_intervals(in.grid, in.sys, CcpConfig{}, std::vector<std::size_t>{0, 99}),
               DimensionMismatch);
}

TEST(PointwiseIntervals, RandomStartsAgree) {
  const auto in = gaussian_instance(100, 9);
  const auto all = even_subset(in.grid.m(), 1.0);
  CcpConfig base;
  base.init = InitStrategy::Random;
  base.seed = 1;
  const auto ref = pointwise_intervals(in.grid, in.sys, base, all);
  for (std::uint64_t s = 2; s <= 4; ++s) {
    auto cfg = base;
    cfg.seed = s;
    const auto iv = pointwise_intervals(in.grid, in.sys, cfg, all);
    ASSERT_TRUE(iv.all_converged());
    for (std::size_t q = 0; q < all.size(); ++q) {
      if (std::isfinite(ref.lo[q])) {
        EXPECT_NEAR(iv.lo[q], ref.lo[q], 1e-4);
      } else {
        EXPECT_EQ(iv.lo[q], ref.lo[q]);
      }
      EXPECT_NEAR(iv.hi[q], ref.hi[q], 1e-4);
    }
  }
}

TEST(PointwiseIntervals, UniformTruthInsideIntervals) {
  // Uniform(0,1) samples: the true log-density 0 should lie in every
  // interior interval in at least 90% of simulations.
  const int sims = 200;
  int ok = 0;
  for (int s = 0; s < sims; ++s) {
    CounterRng rng(derive_key(123, {static_cast<std::uint64_t>(s)}));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(100);
    for (auto& v : x) v = u(rng);
    const auto grid = select_design_points(x);
    const auto sys = build_interval_system(grid, 0.1);
    std::vector<std::size_t> interior;
    for (std::size_t t = 1; t + 1 < grid.m(); ++t) interior.push_back(t);
    const auto iv = pointwise_intervals(grid, sys, CcpConfig{}, interior);
    bool all = iv.all_converged();
    for (std::size_t q = 0; q < interior.size() && all; ++q) all = iv.lo[q] <= 0.0 && 0.0 <= iv.hi[q];
    ok += all;
  }
  EXPECT_GE(static_cast<double>(ok) / sims, 0.9);
}

TEST(EvenSubset, SpreadAndEnds) {
  const auto s = even_subset(13, 0.3);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.front(), 0u);
  EXPECT_EQ(s.back(), 12u);
  EXPECT_EQ(even_subset(125, 0.3).size(), 38u);
  EXPECT_EQ(even_subset(13, 1.0).size(), 13u);
  EXPECT_EQ(even_subset(13, 0.01).size(), 2u);
  EXPECT_THROW(even_subset(13, 0.0), DomainError);
  EXPECT_THROW(even_subset(13, 1.5), DomainError);
}

TEST(InitialPoint, DataAndRandom) {
  const auto in = gaussian_instance(100, 12);
  CcpConfig cfg;
  const auto p = initial_point(in.grid, cfg, 3, Sense::Min);
  for (double v : p.ell) {
    EXPECT_GE(v, -30.0);
    EXPECT_LE(v, 30.0);
  }
  cfg.init = InitStrategy::Random;
  const auto a = initial_point(in.grid, cfg, 3, Sense::Min);
  const auto b = initial_point(in.grid, cfg, 3, Sense::Min);
  const auto c = initial_point(in.grid, cfg, 4, Sense::Min);
  EXPECT_EQ(a.ell, b.ell);
  EXPECT_NE(a.ell, c.ell);
  for (double g : a.g) EXPECT_EQ(g, 0.0);
}
