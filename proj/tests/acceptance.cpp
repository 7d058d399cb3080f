// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Studies run with worker threads (results do not depend on the count); the
// runtime criterion is measured serially.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lcband/lcband.hpp"
#include "lcband/oracles.hpp"

using namespace lcband;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

StudyReport study(Distribution d, std::size_t n, std::size_t reps) {
  StudySpec s;
  s.distribution = d;
  s.n = n;
  s.reps = reps;
  s.alpha = 0.1;
  s.subset_frac = 0.3;
  s.seed = 2024;
  s.threads = workers();
  return run_study(s);
}

// Studies shared by several criteria, computed once.
const StudyReport& study100(Distribution d) {
  static std::vector<std::pair<Distribution, StudyReport>> cache;
  for (const auto& [k, v] : cache)
    if (k == d) return v;
  cache.emplace_back(d, study(d, 100, 200));
  return cache.back().second;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string describe(const StudyReport& r) {
  std::ostringstream os;
  os << table_label(r.spec.distribution) << " n=" << r.spec.n << " coverage "
     << fmt("%.3f", r.coverage) << " Q2 " << fmt("%.4f", r.width_q2) << " failures "
     << r.failures;
  return os.str();
}

Outcome from_check(const oracle::CheckResult& c) { return {c.passed(), oracle::summarize(c)}; }

const Distribution kAll[] = {Distribution::Gaussian, Distribution::Uniform,
                             Distribution::ChiSquared3, Distribution::Gamma11};

Outcome c1() {
  const auto& r = study100(Distribution::Gaussian);
  return {r.coverage >= 0.90, describe(r) + " (need >= 0.90)"};
}

Outcome c2() {
  Outcome o{true, ""};
  for (auto d : kAll) {
    const auto& r = study100(d);
    o.pass = o.pass && r.coverage >= 0.88;
    o.detail += describe(r) + "; ";
  }
  o.detail += "need >= 0.88 each";
  return o;
}

Outcome c3() {
  const double g = study100(Distribution::Gaussian).width_q2;
  const double u = study100(Distribution::Uniform).width_q2;
  const bool ok = g >= 0.45 && g <= 0.90 && u >= 0.04 && u <= 0.12;
  return {ok, "Gaussian Q2 " + fmt("%.4f", g) + " in [0.45, 0.90], Uniform Q2 " + fmt("%.4f", u) +
                  " in [0.04, 0.12]"};
}

Outcome c4() {
  const auto small = study(Distribution::Uniform, 100, 50);
  const auto large = study(Distribution::Uniform, 1000, 50);
  const double ratio = large.width_q2 / small.width_q2;
  const bool ok = small.failures == 0 && large.failures == 0 && ratio <= 0.6;
  return {ok, "Q2 " + fmt("%.4f", large.width_q2) + " / " + fmt("%.4f", small.width_q2) + " = " +
                  fmt("%.3f", ratio) + " (need <= 0.6)"};
}

Outcome c5() {
  Outcome o{true, ""};
  for (auto d : kAll) {
    const double rate = oracle::true_point_feasible_rate(d, 100, 0.1, 500, 5);
    o.pass = o.pass && rate >= 0.88;
    o.detail += std::string(to_string(d)) + " " + fmt("%.3f", rate) + "; ";
  }
  o.detail += "need >= 0.88 each over 500 simulations";
  return o;
}

Outcome c6() { return from_check(oracle::check_sandwich(1000, 6, 1e-9)); }
Outcome c7() { return from_check(oracle::check_gradients(1000, 7, 1e-6, 1e-6)); }
Outcome c8() { return from_check(oracle::check_tangent_dominance(1000, 8, 1e-12)); }
Outcome c9() { return from_check(oracle::check_lp_oracle(100, 9, 10)); }
Outcome c10() { return from_check(oracle::check_quantile_deviation(1000, 10)); }

Outcome c11() {
  CounterRng rng(derive_key(11, {0, 100}));
  const auto x = sample(Distribution::Gaussian, 100, rng);
  const auto grid = select_design_points(x);
  const auto sys = build_interval_system(grid, 0.1);
  std::vector<std::size_t> all(grid.m());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<PointwiseIntervals> runs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CcpConfig cfg;
    cfg.init = InitStrategy::Random;
    cfg.seed = seed;
    runs.push_back(pointwise_intervals(grid, sys, cfg, all, workers()));
  }
  double worst = 0.0;
  bool ok = true;
  for (const auto& r : runs) {
    ok = ok && r.all_converged();
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (auto [a, b] : {std::pair{r.lo[i], runs[0].lo[i]}, std::pair{r.hi[i], runs[0].hi[i]}}) {
        if (a == b) continue;  // includes matching infinities
        worst = std::max(worst, std::isfinite(a - b) ? std::fabs(a - b)
                                                     : std::numeric_limits<double>::infinity());
      }
    }
  }
  ok = ok && worst <= 1e-4;
  return {ok, "10 random starts, m=" + std::to_string(grid.m()) + ", max endpoint spread " +
                  fmt("%.3g", worst) + " (need <= 1e-4)"};
}

Outcome c12() {
  auto timed = [](std::size_t n) {
    CounterRng rng(derive_key(12, {0, n}));
    const auto x = sample(Distribution::Gaussian, n, rng);
    BandOptions opts;
    opts.subset_frac = 1.0;
    opts.threads = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = compute_band(x, opts);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::pair{s, res.intervals.all_converged()};
  };
  const auto [s100, ok100] = timed(100);
  const auto [s1000, ok1000] = timed(1000);
  const bool ok = ok100 && ok1000 && s100 <= 60.0 && s1000 <= 900.0;
  return {ok, "n=100 " + fmt("%.2f", s100) + " s (<= 60), n=1000 " + fmt("%.1f", s1000) +
                  " s (<= 900), full subset, serial"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"coverage, Gaussian n=100", c1},
      {"coverage, four distributions n=100", c2},
      {"median-quartile widths n=100", c3},
      {"width shrinkage, uniform n=1000 vs n=100", c4},
      {"true density feasible in relaxed set", c5},
      {"sandwich oracle", c6},
      {"gradient suite", c7},
      {"tangent dominance", c8},
      {"LP oracle equivalence", c9},
      {"beta-quantile deviation bound", c10},
      {"CCP random-start agreement", c11},
      {"end-to-end runtime", c12},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << k + 1 << "] " << criteria[k].first << ": "
              << o.detail << "  (" << fmt("%.1f", s) << " s)" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
