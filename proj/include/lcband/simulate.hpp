#pragma once

// Monte Carlo coverage / width study over four log-concave test densities.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcband/errors.hpp"
#include "lcband/parallel.hpp"
#include "lcband/pipeline.hpp"
#include "lcband/rng.hpp"

namespace lcband {

enum class Distribution { Gaussian, Uniform, ChiSquared3, Gamma11 };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Uniform: return "uniform";
    case Distribution::ChiSquared3: return "chisq";
    case Distribution::Gamma11: return "gamma";
  }
  return "unknown";
}

/// Display label used in the text table.
inline const char* table_label(Distribution d) {
  switch (d) {
    case Distribution::Gaussian: return "Gaussian";
    case Distribution::Uniform: return "Uniform";
    case Distribution::ChiSquared3: return "Chi-squared";
    case Distribution::Gamma11: return "Gamma";
  }
  return "?";
}

inline Distribution distribution_from_string(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "gaussian" || s == "normal") return Distribution::Gaussian;
  if (s == "uniform" || s == "uniform(-10,10)") return Distribution::Uniform;
  if (s == "chisq" || s == "chisq(3)" || s == "chi-squared" || s == "chisq3") return Distribution::ChiSquared3;
  if (s == "gamma" || s == "gamma(1,1)" || s == "exponential") return Distribution::Gamma11;
  throw DomainError("unknown distribution '" + s + "' (gaussian, uniform, chisq, gamma)");
}

inline std::vector<double> sample(Distribution d, std::size_t n, CounterRng& rng) {
  std::vector<double> x(n);
  switch (d) {
    case Distribution::Gaussian: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (auto& v : x) v = g(rng);
      break;
    }
    case Distribution::Uniform: {
      std::uniform_real_distribution<double> u(-10.0, 10.0);
      for (auto& v : x) v = u(rng);
      break;
    }
    case Distribution::ChiSquared3: {
      std::chi_squared_distribution<double> c(3.0);
      for (auto& v : x) v = c(rng);
      break;
    }
    case Distribution::Gamma11: {
      std::gamma_distribution<double> g(1.0, 1.0);
      for (auto& v : x) v = g(rng);
      break;
    }
  }
  return x;
}

inline double true_density(Distribution d, double x) {
  switch (d) {
    case Distribution::Gaussian: return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    case Distribution::Uniform: return (x >= -10.0 && x <= 10.0) ? 0.05 : 0.0;
    case Distribution::ChiSquared3:
      return x > 0.0 ? std::sqrt(x) * std::exp(-0.5 * x) / std::sqrt(2.0 * std::numbers::pi) : 0.0;
    case Distribution::Gamma11: return x >= 0.0 ? std::exp(-x) : 0.0;
  }
  return 0.0;
}

/// log f and (log f)' at x inside the support.
inline std::pair<double, double> true_log_density(Distribution d, double x) {
  const double c = 0.5 * std::log(2.0 * std::numbers::pi);
  switch (d) {
    case Distribution::Gaussian: return {-0.5 * x * x - c, -x};
    case Distribution::Uniform: return {std::log(0.05), 0.0};
    case Distribution::ChiSquared3: return {0.5 * std::log(x) - 0.5 * x - c, 0.5 / x - 0.5};
    case Distribution::Gamma11: return {-x, -1.0};
  }
  return {0.0, 0.0};
}

/// Sample quantile, linear interpolation between order statistics.
inline double sample_quantile(std::vector<double> x, double p) {
  if (x.empty()) throw DomainError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

struct StudySpec {
  Distribution distribution = Distribution::Gaussian;
  std::size_t n = 100;
  std::size_t reps = 200;
  double alpha = 0.1;
  double subset_frac = 0.3;
  std::uint64_t seed = 1;
  std::size_t grid_points = 10000;
  BandMode mode = BandMode::Interpolated;
  CcpConfig ccp;
  std::size_t threads = 1;

  void validate() const {
    std::ostringstream os;
    if (reps < 1) os << "reps must be >= 1; ";
    if (!(subset_frac > 0.0 && subset_frac <= 1.0)) os << "subset_frac must lie in (0,1]; ";
    if (grid_points < 2) os << "grid_points must be >= 2; ";
    if (!(alpha > 0.0 && alpha < 1.0)) os << "alpha must lie in (0,1); ";
    if (!os.str().empty()) throw DomainError("invalid study spec: " + os.str());
    ccp.validate();
  }
};

struct RepOutcome {
  bool converged = false;
  bool covered = false;
  double width[3] = {0.0, 0.0, 0.0};
  double runtime_s = 0.0;
  std::string error;
};

struct StudyReport {
  StudySpec spec;
  double coverage = 0.0;
  double width_q1 = 0.0;
  double width_q2 = 0.0;
  double width_q3 = 0.0;
  double mean_runtime_s = 0.0;
  std::size_t failures = 0;
  std::size_t covered = 0;
};

/// One repetition: sample, build the band, check it on the grid, and measure
/// widths at the sample quartiles.
inline RepOutcome run_repetition(const StudySpec& spec, std::size_t rep) {
  RepOutcome out;
  CounterRng rng(derive_key(spec.seed, {static_cast<std::uint64_t>(spec.distribution), spec.n, rep}));
  const auto x = sample(spec.distribution, spec.n, rng);
  BandOptions opts;
  opts.alpha = spec.alpha;
  opts.subset_frac = spec.subset_frac;
  opts.ccp = spec.ccp;
  opts.ccp.seed = derive_key(spec.seed, {static_cast<std::uint64_t>(spec.distribution), spec.n, rep, 1});
  opts.mode = spec.mode;
  const auto t0 = std::chrono::steady_clock::now();
  BandResult res;
  try {
    res = compute_band(x, opts);
  } catch (const Error& e) {
    out.error = e.what();
    return out;
  }
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.converged = res.intervals.all_converged();
  if (!out.converged) return out;

  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  bool ok = true;
  for (std::size_t j = 0; j < spec.grid_points && ok; ++j) {
    const double t = *mn + (*mx - *mn) * static_cast<double>(j) / static_cast<double>(spec.grid_points - 1);
    const auto bd = eval_density_band(res.band, t);
    const double f = true_density(spec.distribution, t);
    const double tol = 1e-12 * std::max(1.0, f);
    ok = bd.lower <= f + tol && f <= bd.upper + tol;
  }
  out.covered = ok;
  for (int q = 0; q < 3; ++q) {
    const double at = sample_quantile(x, 0.25 * (q + 1));
    const auto bd = eval_density_band(res.band, at);
    out.width[q] = bd.upper - bd.lower;
  }
  return out;
}

inline StudyReport run_study(const StudySpec& spec) {
  spec.validate();
  std::vector<RepOutcome> reps(spec.reps);
  parallel_for(spec.reps, spec.threads, [&](std::size_t r) { reps[r] = run_repetition(spec, r); });
  StudyReport rep;
  rep.spec = spec;
  std::size_t ok = 0;
  double rt = 0.0;
  std::size_t rt_count = 0;
  for (const auto& o : reps) {
    if (o.runtime_s > 0.0) {
      rt += o.runtime_s;
      ++rt_count;
    }
    if (!o.converged) {
      ++rep.failures;
      continue;
    }
    rep.covered += o.covered;
    rep.width_q1 += o.width[0];
    rep.width_q2 += o.width[1];
    rep.width_q3 += o.width[2];
    ++ok;
  }
  rep.coverage = static_cast<double>(rep.covered) / static_cast<double>(spec.reps);
  if (ok > 0) {
    rep.width_q1 /= static_cast<double>(ok);
    rep.width_q2 /= static_cast<double>(ok);
    rep.width_q3 /= static_cast<double>(ok);
  }
  rep.mean_runtime_s = rt_count > 0 ? rt / static_cast<double>(rt_count) : 0.0;
  return rep;
}

/// JSON report. Runtime is kept under "timing" so the remaining fields can
/// be compared across runs.
inline nlohmann::json report_to_json(const StudyReport& r) {
  nlohmann::json j;
  j["distribution"] = to_string(r.spec.distribution);
  j["n"] = r.spec.n;
  j["reps"] = r.spec.reps;
  j["alpha"] = r.spec.alpha;
  j["subset_frac"] = r.spec.subset_frac;
  j["seed"] = r.spec.seed;
  j["grid_points"] = r.spec.grid_points;
  j["mode"] = to_string(r.spec.mode);
  j["coverage"] = r.coverage;
  j["covered"] = r.covered;
  j["failures"] = r.failures;
  j["width_q1"] = r.width_q1;
  j["width_q2"] = r.width_q2;
  j["width_q3"] = r.width_q3;
  j["timing"] = {{"mean_runtime_s", r.mean_runtime_s}};
  return j;
}

inline std::string report_table(const std::vector<StudyReport>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Density" << std::right << std::setw(6) << "n"
     << std::setw(10) << "Coverage" << std::setw(8) << "Q1" << std::setw(8) << "Q2" << std::setw(8)
     << "Q3" << std::setw(12) << "Runtime(s)" << std::setw(10) << "Failures" << '\n';
  os << std::fixed;
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << table_label(r.spec.distribution) << std::right
       << std::setw(6) << r.spec.n << std::setw(10) << std::setprecision(3) << r.coverage
       << std::setw(8) << std::setprecision(3) << r.width_q1 << std::setw(8) << r.width_q2
       << std::setw(8) << r.width_q3 << std::setw(12) << std::setprecision(3) << r.mean_runtime_s
       << std::setw(10) << r.failures << '\n';
  }
  return os.str();
}

}  // namespace lcband
