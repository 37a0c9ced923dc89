#pragma once

#include <optional>
#include <vector>

#include "semiflow/bebutov.hpp"
#include "semiflow/spectral.hpp"

namespace semiflow {

/// Knobs for the segmented bounded-solution extraction. The resonant and
/// kernel directions (the V- and V0 modes) are exponentially repelled from
/// the bounded solution, so each segment re-solves those components by a
/// small Newton shoot over [0, t_solve] targeting zero at the far end, and
/// only the first t_advance of the solved segment is kept; the discarded
/// buffer absorbs the wrongness of the zero target.
struct SearchOptions {
  double t_solve = 2.4;
  double t_advance = 0.8;
  double sample_dt = 0.1;
  double abs_tol = 1e-7;
  double rel_tol = 1e-7;
  double blowup_guard = 1e4;   // trial shots get cut off at this norm
  double newton_target = 0.02;  // residual floor for the far-end components
  int max_newton = 10;
  double lock_jump = 0.02;  // re-injection jump below this counts as locked
  int n_max = 5;
  double l_ref = 100;  // window length for the recurrence defect
};

struct SearchDiagnostics {
  double sup_norm = 0;  // V norm over the record
  double j_min = 0, j_max = 0;
  double max_jump = 0;          // largest post-lock re-injection jump
  double mean_jump = 0;
  int segments = 0;
  int newton_iterations = 0;
  double defect_eps = 0;  // smallest recurrence eps at l_ref
  bool locked = false;
  double lock_time = 0;
};

struct BoundedSolutionResult {
  TimeSeries record;  // [0, record_horizon] at sample_dt, times relative to record start
  SearchDiagnostics diag;
  int seed_index = -1;
};

/// Locates a trajectory that stays bounded for transient + record_horizon
/// time units by re-targeting the repelled components segment by segment,
/// then returns the recorded tail with recurrence diagnostics. Blow-up of an
/// accepted locked segment inside N_{c,rho} is a hard error.
BoundedSolutionResult bounded_solution_search(const SpectralModel& model,
                                              const ForcingSignal& g,
                                              const std::vector<StateVector>& seeds,
                                              double transient, double record_horizon,
                                              const SearchOptions& opts = {});

/// The record as a trajectory for CSV emission (times shifted to start at 0).
Trajectory record_to_trajectory(const TimeSeries& record);

}  // namespace semiflow
