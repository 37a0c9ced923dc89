#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "semiflow/integrate.hpp"
#include "semiflow/model.hpp"

namespace semiflow {

/// Thrown by omega_limit when the tail keeps growing or the trajectory
/// explodes before the sampling window ends.
struct UnboundedTailError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite cluster-representative estimate of an omega-limit set.
/// Representatives are pairwise farther apart than cluster_tol and every
/// tail sample lies within cluster_tol of one of them.
struct LimitSetEstimate {
  std::vector<StateVector> points;
  double t0 = 0, t1 = 0;
  double cluster_tol = 0;
};

/// Clusters the samples of [burn_in, burn_in + window] by greedy
/// farthest-point insertion with radius cluster_tol (deterministic).
LimitSetEstimate omega_limit(const FlowModel& model, const StateVector& x, double burn_in,
                             double window, double cluster_tol, double sample_dt = 0);

/// Distance from x to the representative set, in the model norm.
double dist_to_set(const FlowModel& model, const StateVector& x,
                   const std::vector<StateVector>& pts);

struct MonotonicityReport {
  double max_increase = 0;  // over consecutive samples (restricted by floor)
  int argmax_index = -1;
  int pairs_checked = 0;
  bool pass = false;
};

/// Checks that phi never increases along the recorded samples by more than
/// tol. With a floor, only steps starting at phi >= floor are counted
/// (conditional monotonicity).
MonotonicityReport lyapunov_monotonicity(const FlowModel& model,
                                         const std::function<double(const StateVector&)>& phi,
                                         const Trajectory& traj, double tol,
                                         std::optional<double> floor = std::nullopt);

struct AttractionResult {
  bool attracted = false;
  double entry_time = 0;  // first time the tail stays eps-close through the horizon
  TrajectoryStatus status = TrajectoryStatus::completed;
};

struct AttractionReport {
  std::vector<AttractionResult> per_start;
  double fraction_attracted = 0;
};

AttractionReport attraction_probe(const FlowModel& model, const LimitSetEstimate& target,
                                  const std::vector<StateVector>& starts, double horizon,
                                  double eps, double sample_dt = 0);

}  // namespace semiflow
