// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "lmqc/errors.hpp"

namespace lmqc {

/// Uniform time grid, times in nanoseconds. Sample k sits at t_start + k*dt.
struct TimeGrid {
  double t_start = 0.0;
  double dt = 0.1;
  std::int64_t n_samples = 0;

  TimeGrid() = default;
  TimeGrid(double t_start_, double dt_, std::int64_t n_samples_)
      : t_start(t_start_), dt(dt_), n_samples(n_samples_) {
    if (!(dt > 0.0)) throw ParameterError("TimeGrid: dt must be > 0");
    if (n_samples < 2) throw ParameterError("TimeGrid: need at least 2 samples");
    if (!std::isfinite(t_start) || !std::isfinite(dt))
      throw ParameterError("TimeGrid: non-finite bounds");
  }

  double time(std::int64_t k) const { return t_start + static_cast<double>(k) * dt; }
  double t_end() const { return time(n_samples - 1); }

  /// Grid covering [lo, hi] with the given step (endpoints included).
  static TimeGrid covering(double lo, double hi, double dt = 0.1) {
    if (!(hi > lo)) throw ParameterError("TimeGrid::covering: empty interval");
    auto n = static_cast<std::int64_t>(std::ceil((hi - lo) / dt)) + 1;
    return TimeGrid(lo, dt, n);
  }

  bool operator==(const TimeGrid& o) const {
    return t_start == o.t_start && dt == o.dt && n_samples == o.n_samples;
  }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

} // namespace lmqc
