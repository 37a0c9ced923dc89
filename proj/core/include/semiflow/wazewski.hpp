#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semiflow/region.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

/// Candidate pair (N, E) of closed margin-defined sets; E plays the exit-set
/// role for N. Exit behavior is only asserted for trajectories inside N.
struct WazewskiPairSpec {
  Region N;
  Region E;
  std::string description;
};

struct ExitViolation {
  int sample_index = -1;
  std::string what;
  double margin = 0;     // offending E-margin
  double time = 0;       // when it happened
  StateVector witness;   // offending state
  Trajectory trajectory; // full record for inspection
};

struct ExitSetReport {
  int samples_checked = 0;
  int precondition_failures = 0;
  std::vector<ExitViolation> violations;
  double lipschitz_estimate = 0;  // max |d margin| / |dx| seen along trajectories
  bool pass = false;
};

/// Verifies, on the given samples, (i) that trajectories starting in N∩E
/// stay within tol of E while they remain in N and (ii) that trajectories
/// leaving N\E do so through E: the bisected escape state has E-margin
/// <= tol.
ExitSetReport exit_set_check(const FlowModel& model, const WazewskiPairSpec& pair,
                             const std::vector<StateVector>& samples, double horizon,
                             double tol);

/// State of the flow induced on N/E: either still interior or collapsed to
/// the absorbing class [E] (escape through E, escape from N, or blow-up all
/// collapse; blow-up stands in for the point at infinity).
struct QuotientState {
  enum class Tag { interior, collapsed } tag = Tag::interior;
  StateVector state;                  // valid when interior
  std::optional<double> collapse_time;

  bool collapsed() const { return tag == Tag::collapsed; }
  static QuotientState make_interior(StateVector x) {
    QuotientState q;
    q.tag = Tag::interior;
    q.state = std::move(x);
    return q;
  }
  static QuotientState make_collapsed(double t) {
    QuotientState q;
    q.tag = Tag::collapsed;
    q.collapse_time = t;
    return q;
  }
};

/// Evolves [x] for time t in the quotient of N by E. Starting points already
/// in E collapse at time 0. e_tol is the E-membership tolerance (default
/// 100 * abs_tol when <= 0).
QuotientState quotient_evolve(const FlowModel& model, const WazewskiPairSpec& pair,
                              const StateVector& x, double t, double e_tol = 0);

/// Composition step: interior states evolve further (collapse times offset
/// by the time already elapsed), collapsed states absorb.
QuotientState quotient_evolve(const FlowModel& model, const WazewskiPairSpec& pair,
                              const QuotientState& q, double elapsed, double t,
                              double e_tol = 0);

struct StabilityRow {
  double r = 0;          // inner radius (the set to stay away from)
  double R = 0;          // smallest tested start radius that worked (NaN if none)
  int samples = 0;       // starts with norm > R
  int violations = 0;    // at the reported R
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  std::optional<Trajectory> counterexample;  // a start that came back inside r
  double counterexample_r = 0;
  bool monotone() const;
  std::string csv() const;  // r,R,samples,violations
};

/// For each inner radius r, finds the smallest tested start radius R such
/// that every sampled start in the region with norm > R keeps norm > r for
/// as long as it stays in the region. Absence of such an R is a finding
/// (counterexample attached), not an error.
StabilityTable stability_at_infinity_probe(const FlowModel& model, const Region& region,
                                           const std::vector<double>& inner_radii,
                                           const std::vector<double>& start_radii,
                                           int samples_per_radius, double horizon, Rng& rng);

/// Same probe but on caller-provided starts (used when uniform sphere
/// sampling cannot reach the region, e.g. thin energy bands).
StabilityTable stability_probe_on_starts(const FlowModel& model, const Region& region,
                                         const std::vector<double>& inner_radii,
                                         const std::vector<StateVector>& starts,
                                         double horizon);

struct NonExplosionReport {
  int samples_checked = 0;
  int blow_ups_inside = 0;
  double circumradius_estimate = 0;
  std::vector<int> offending_samples;
  bool pass = false;
};

/// Confirms that no sampled trajectory blows up while it remains inside the
/// bounded region (trajectories may leave first; that is fine).
NonExplosionReport nonexplosion_probe(const FlowModel& model, const Region& bounded_region,
                                      const std::vector<StateVector>& samples,
                                      double horizon);

}  // namespace semiflow
