#pragma once

// Extension of pointwise log-density intervals [lo_i, hi_i] at knots x_i to
// functions on the whole line.
//
// Lower: linear interpolation of lo on [x_1, x_m], -inf elsewhere.
// Upper (guaranteed): any concave h with lo <= h <= hi at the knots satisfies
//   h(x) <= hi_k + L_k (x - x_k)   for x >= x_k,  L_k = min_{j<k} (hi_k - lo_j)/(x_k - x_j)
//   h(x) <= hi_k + R_k (x - x_k)   for x <= x_k,  R_k = max_{j>k} (lo_j - hi_k)/(x_j - x_k)
// and the band takes the smaller of the applicable lines on each segment.
//
// Vectors L, R are stored with one entry per knot; entries that do not exist
// (L at the first knot, R at the last) are NaN. xbar holds the crossing
// point of the two lines on each interior segment, NaN when they do not
// cross inside it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcband/ccp.hpp"
#include "lcband/design.hpp"
#include "lcband/errors.hpp"

namespace lcband {

enum class BandMode { Guaranteed, Interpolated };

inline const char* to_string(BandMode m) {
  return m == BandMode::Guaranteed ? "guaranteed" : "interpolated";
}

inline BandMode band_mode_from_string(const std::string& s) {
  if (s == "guaranteed") return BandMode::Guaranteed;
  if (s == "interpolated" || s == "interpolated-upper") return BandMode::Interpolated;
  throw DomainError("unknown band mode '" + s + "'");
}

struct ConfidenceBand {
  std::vector<double> knots;
  std::vector<double> lo_log;
  std::vector<double> hi_log;
  std::vector<double> L;     // size m, L[0] = NaN
  std::vector<double> R;     // size m, R[m-1] = NaN
  std::vector<double> xbar;  // size m-3, entry i-1 for segment [x_i, x_{i+1}], i = 1..m-3
  BandMode mode = BandMode::Guaranteed;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  bool partial = false;

  std::size_t m() const { return knots.size(); }
};

namespace detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Value at x of the line through (xk, yk) with the given slope; exact at xk
// even for infinite slopes.
inline double line_at(double xk, double yk, double slope, double x) {
  if (x == xk) return yk;
  return yk + slope * (x - xk);
}

inline std::size_t segment_of(const std::vector<double>& knots, double x) {
  // Largest i with knots[i] <= x, clamped to [0, m-2].
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knots.begin());
  if (i == 0) return 0;
  return std::min(i - 1, knots.size() - 2);
}

}  // namespace detail

/// Builds the band from knot values directly.
inline ConfidenceBand build_band_from_values(std::vector<double> knots, std::vector<double> lo,
                                             std::vector<double> hi, BandMode mode) {
  const std::size_t m = knots.size();
  if (lo.size() != m || hi.size() != m) throw DimensionMismatch("knot and value counts differ");
  if (m < 3) throw TooFewKnots("band needs at least 3 knots, got " + std::to_string(m));
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (!(knots[i] < knots[i + 1])) throw DomainError("knots must be strictly increasing");
  }
  ConfidenceBand b;
  b.mode = mode;
  b.L.assign(m, detail::kNaN);
  b.R.assign(m, detail::kNaN);
  for (std::size_t k = 1; k < m; ++k) {
    double v = detail::kInf;
    for (std::size_t j = 0; j < k; ++j) v = std::min(v, (hi[k] - lo[j]) / (knots[k] - knots[j]));
    b.L[k] = v;
  }
  for (std::size_t k = 0; k + 1 < m; ++k) {
    double v = -detail::kInf;
    for (std::size_t j = k + 1; j < m; ++j) v = std::max(v, (lo[j] - hi[k]) / (knots[j] - knots[k]));
    b.R[k] = v;
  }
  for (std::size_t i = 1; i + 2 < m; ++i) {
    const double Li = b.L[i];
    const double Rn = b.R[i + 1];
    double xb = detail::kNaN;
    if (std::isfinite(Li) && std::isfinite(Rn) && Li > Rn) {
      xb = (hi[i + 1] - hi[i] + Li * knots[i] - Rn * knots[i + 1]) / (Li - Rn);
      xb = std::clamp(xb, knots[i], knots[i + 1]);
    }
    b.xbar.push_back(xb);
  }
  b.knots = std::move(knots);
  b.lo_log = std::move(lo);
  b.hi_log = std::move(hi);
  return b;
}

/// Band from pointwise intervals; knots are the design points that were solved.
inline ConfidenceBand build_band(const DesignGrid& grid, const PointwiseIntervals& iv,
                                 BandMode mode,
                                 double alpha = std::numeric_limits<double>::quiet_NaN()) {
  std::vector<double> knots;
  for (std::size_t t : iv.indices) {
    if (t >= grid.m()) throw DimensionMismatch("interval index outside the design grid");
    knots.push_back(grid.x[t]);
  }
  auto b = build_band_from_values(std::move(knots), iv.lo, iv.hi, mode);
  b.alpha = alpha;
  b.n = grid.n;
  b.partial = !iv.all_converged();
  return b;
}

/// Lower log-density bound.
inline double eval_lower(const ConfidenceBand& b, double x) {
  if (std::isnan(x)) return detail::kNaN;
  if (x < b.knots.front() || x > b.knots.back()) return -detail::kInf;
  const std::size_t i = detail::segment_of(b.knots, x);
  if (x == b.knots[i]) return b.lo_log[i];
  if (x == b.knots[i + 1]) return b.lo_log[i + 1];
  const double w = (x - b.knots[i]) / (b.knots[i + 1] - b.knots[i]);
  return (1.0 - w) * b.lo_log[i] + w * b.lo_log[i + 1];
}

/// Guaranteed upper log-density bound, defined on the whole line.
inline double eval_upper(const ConfidenceBand& b, double x) {
  if (std::isnan(x)) return detail::kNaN;
  const std::size_t m = b.m();
  const auto& k = b.knots;
  const auto& h = b.hi_log;
  if (x <= k[0]) return detail::line_at(k[0], h[0], b.R[0], x);
  if (x >= k[m - 1]) return detail::line_at(k[m - 1], h[m - 1], b.L[m - 1], x);
  const std::size_t i = detail::segment_of(k, x);
  if (i == 0) return detail::line_at(k[1], h[1], b.R[1], x);
  if (i == m - 2) return detail::line_at(k[m - 2], h[m - 2], b.L[m - 2], x);
  return std::min(detail::line_at(k[i], h[i], b.L[i], x),
                  detail::line_at(k[i + 1], h[i + 1], b.R[i + 1], x));
}

/// Density-scale upper bound obtained by interpolating exp(hi) between
/// knots; outside [x_1, x_m] the guaranteed tails are used. This variant
/// carries no finite-sample guarantee.
inline double eval_upper_interpolated(const ConfidenceBand& b, double x) {
  if (std::isnan(x)) return detail::kNaN;
  if (x < b.knots.front() || x > b.knots.back()) return std::exp(eval_upper(b, x));
  const std::size_t i = detail::segment_of(b.knots, x);
  const double a = std::exp(b.hi_log[i]);
  const double c = std::exp(b.hi_log[i + 1]);
  if (x == b.knots[i]) return a;
  if (x == b.knots[i + 1]) return c;
  const double w = (x - b.knots[i]) / (b.knots[i + 1] - b.knots[i]);
  return (1.0 - w) * a + w * c;
}

struct DensityBounds {
  double lower;
  double upper;
};

inline DensityBounds eval_density_band(const ConfidenceBand& b, double x) {
  const double lo = std::exp(eval_lower(b, x));
  const double up = b.mode == BandMode::Guaranteed ? std::exp(eval_upper(b, x))
                                                   : eval_upper_interpolated(b, x);
  return {lo, up};
}

// JSON: non-finite numbers are written as null (NaN) or the strings
// "inf" / "-inf" so that a round trip reproduces every value exactly.
namespace detail {

inline nlohmann::json encode_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double decode_number(const nlohmann::json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return kNaN;
    throw DomainError("band json: bad number '" + s + "'");
  }
  if (!j.is_number()) throw DomainError("band json: expected a number");
  return j.get<double>();
}

inline nlohmann::json encode_vector(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (double x : v) a.push_back(encode_number(x));
  return a;
}

inline std::vector<double> decode_vector(const nlohmann::json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_array()) {
    throw DomainError(std::string("band json: missing array '") + name + "'");
  }
  std::vector<double> v;
  for (const auto& e : j.at(name)) v.push_back(decode_number(e));
  return v;
}

}  // namespace detail

inline nlohmann::json band_to_json(const ConfidenceBand& b) {
  nlohmann::json j;
  j["knots"] = detail::encode_vector(b.knots);
  j["lo_log"] = detail::encode_vector(b.lo_log);
  j["hi_log"] = detail::encode_vector(b.hi_log);
  j["L"] = detail::encode_vector(b.L);
  j["R"] = detail::encode_vector(b.R);
  j["xbar"] = detail::encode_vector(b.xbar);
  j["mode"] = to_string(b.mode);
  j["alpha"] = detail::encode_number(b.alpha);
  j["n"] = b.n;
  j["partial"] = b.partial;
  return j;
}

inline ConfidenceBand band_from_json(const nlohmann::json& j) {
  try {
    ConfidenceBand b;
    b.knots = detail::decode_vector(j, "knots");
    b.lo_log = detail::decode_vector(j, "lo_log");
    b.hi_log = detail::decode_vector(j, "hi_log");
    b.L = detail::decode_vector(j, "L");
    b.R = detail::decode_vector(j, "R");
    b.xbar = detail::decode_vector(j, "xbar");
    b.mode = band_mode_from_string(j.at("mode").get<std::string>());
    b.alpha = detail::decode_number(j.at("alpha"));
    b.n = j.at("n").get<std::size_t>();
    b.partial = j.value("partial", false);
    const std::size_t m = b.knots.size();
    if (m < 3) throw TooFewKnots("band json: fewer than 3 knots");
    if (b.lo_log.size() != m || b.hi_log.size() != m || b.L.size() != m || b.R.size() != m ||
        b.xbar.size() != m - 3) {
      throw DimensionMismatch("band json: inconsistent array lengths");
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("band json: ") + e.what());
  }
}

}  // namespace lcband
