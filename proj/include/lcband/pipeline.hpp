#pragma once

// samples -> design grid -> interval system -> pointwise intervals -> band.

#include <span>
#include <vector>

#include "lcband/band.hpp"
#include "lcband/ccp.hpp"
#include "lcband/design.hpp"

namespace lcband {

struct BandOptions {
  double alpha = 0.1;
  double subset_frac = 1.0;
  CcpConfig ccp;
  BandMode mode = BandMode::Guaranteed;
  std::size_t threads = 1;
};

struct BandResult {
  DesignGrid grid;
  IntervalSystem system;
  PointwiseIntervals intervals;
  ConfidenceBand band;
};

inline BandResult compute_band(std::span<const double> samples, const BandOptions& opts) {
  BandResult r;
  r.grid = select_design_points(samples);
  r.system = build_interval_system(r.grid, opts.alpha);
  const auto subset = even_subset(r.grid.m(), opts.subset_frac);
  r.intervals = pointwise_intervals(r.grid, r.system, opts.ccp, subset, opts.threads);
  r.band = build_band(r.grid, r.intervals, opts.mode, opts.alpha);
  return r;
}

}  // namespace lcband
