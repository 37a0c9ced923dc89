#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semiflow/model.hpp"
#include "semiflow/state.hpp"

namespace semiflow {

enum class TrajectoryStatus { completed, exploded, escaped_region };

/// Sampled solution record. Times are strictly increasing and start at 0.
/// On explosion the last state is the bisected threshold-crossing state
/// (norm >= blow_up_norm), except for integrator breakdown (non-finite
/// arithmetic), which is flagged separately and keeps the last finite state.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  TrajectoryStatus status = TrajectoryStatus::completed;
  double event_time = 0;  // explosion / escape time when status != completed
  bool nonfinite_breakdown = false;

  const StateVector& front() const { return states.front(); }
  const StateVector& back() const { return states.back(); }
  int samples() const { return static_cast<int>(times.size()); }
};

std::string trajectory_csv(const Trajectory& traj);

/// One accepted adaptive step at a time; keeps the previous accepted state
/// so escape times can be bisected inside the bracketing step.
class Stepper {
 public:
  Stepper(const FlowModel& model, StateVector x0, double t0 = 0);
  ~Stepper();

  /// Advances by one accepted step, clamped so time never passes t_limit.
  /// Returns false when the trajectory exploded (threshold crossing or
  /// breakdown); the explosion data is then available below.
  bool advance(double t_limit);

  double time() const;
  const StateVector& state() const;
  double prev_time() const;
  const StateVector& prev_state() const;

  bool exploded() const;
  bool nonfinite() const;
  double explode_time() const;
  const StateVector& explode_state() const;

  /// One deterministic step of size h from the previous accepted state,
  /// using the model's scheme without error control.
  StateVector substep_from_prev(double h) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Integrates u' = F(u, t) from x over [0, horizon]. With sample_dt > 0 the
/// record holds exactly the times k*sample_dt (steps land on them), otherwise
/// every accepted step is recorded.
Trajectory evolve(const FlowModel& model, const StateVector& x, double horizon,
                  double sample_dt = 0);

struct SemigroupCheck {
  bool applicable = true;  // false when the trajectory explodes before s+t
  double deviation = 0;
  bool pass = false;
};

/// Compares the state reached in one run of length s+t against evolving for
/// s and then for t.
SemigroupCheck check_semigroup(const FlowModel& model, const StateVector& x, double s,
                               double t, double tol);

}  // namespace semiflow
