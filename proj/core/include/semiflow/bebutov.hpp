#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiflow/state.hpp"

namespace semiflow {

/// Uniformly sampled time-indexed state record on [t0, t0 + dt*(n-1)].
struct TimeSeries {
  double t0 = 0;
  double dt = 0;
  std::vector<StateVector> samples;

  int size() const { return static_cast<int>(samples.size()); }
  double time(int i) const { return t0 + dt * i; }
  double t_end() const { return time(size() - 1); }
};

using StateMetric = std::function<double(const StateVector&, const StateVector&)>;

struct BebutovDistance {
  double value = 0;
  double truncation_bound = 0;  // 2^-n_max, the discarded tail of the sum
};

/// Compact-open distance truncated at n_max:
///   sum_{n=1..n_max} 2^-n d_n / (1 + d_n),  d_n = max_{|t| <= n} dist(u(t), v(t)).
/// Both records must cover [-n_max, n_max] on aligned grids.
BebutovDistance bebutov_distance(const TimeSeries& u, const TimeSeries& v, int n_max,
                                 const StateMetric& metric = {});

struct RecurrenceRow {
  double l = 0;
  bool pass = false;
};

struct RecurrenceReport {
  std::vector<RecurrenceRow> rows;
  double eps = 0;
  double worst_gap = 0;    // largest stretch of centers with distance >= eps
  double smallest_passing_l = 0;  // NaN when every tested l fails
  int centers = 0;
  int good_centers = 0;
  bool pass = false;       // some tested l passed
  std::string csv() const;  // l,eps,worst_gap,pass
};

/// Tests Birkhoff-style recurrence of a forward record: for each window
/// length l, every window of centers inside [n_max, T - n_max] must contain
/// a shift whose truncated compact-open distance to the reference segment
/// (centered at n_max) stays below eps.
RecurrenceReport recurrence_test(const TimeSeries& record, double eps,
                                 const std::vector<double>& l_grid, int n_max,
                                 const StateMetric& metric = {});

/// Smallest eps at which recurrence would pass with window length l_ref:
/// the max over windows of the min over in-window centers of the distance.
double recurrence_defect(const TimeSeries& record, double l_ref, int n_max,
                         const StateMetric& metric = {});

}  // namespace semiflow
