#include "semiflow/wazewski.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semiflow/report.hpp"

namespace semiflow {
namespace {

double default_e_tol(const FlowModel& model, double e_tol) {
  return e_tol > 0 ? e_tol : 100.0 * model.policy.abs_tol;
}

void track_lipschitz(double m_prev, double m_cur, const StateVector& a, const StateVector& b,
                     double& lip) {
  const double dx = euclid_dist(a, b);
  if (dx > 1e-14) lip = std::max(lip, std::abs(m_cur - m_prev) / dx);
}

// Bisects the first sub-time of the bracketing step where pred(state) holds.
double bisect_step(const FlowModel& model, const Stepper& st,
                   const std::function<bool(const StateVector&)>& pred, StateVector& state_out) {
  double lo = 0, hi = st.time() - st.prev_time();
  StateVector hi_state = st.state();
  const double res = std::max(model.policy.abs_tol, 1e-15);
  while (hi - lo > res) {
    const double mid = 0.5 * (lo + hi);
    StateVector y = st.substep_from_prev(mid);
    if (pred(y)) {
      hi = mid;
      hi_state = std::move(y);
    } else {
      lo = mid;
    }
  }
  state_out = std::move(hi_state);
  return st.prev_time() + hi;
}

}  // namespace

ExitSetReport exit_set_check(const FlowModel& model, const WazewskiPairSpec& pair,
                             const std::vector<StateVector>& samples, double horizon,
                             double tol) {
  ExitSetReport rep;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const StateVector& x = samples[k];
    model.check_state(x);
    if (pair.N.margin(x) > 0) {
      ++rep.precondition_failures;
      ExitViolation v;
      v.sample_index = static_cast<int>(k);
      v.what = "sample outside N";
      v.margin = pair.N.margin(x);
      v.witness = x;
      rep.violations.push_back(std::move(v));
      continue;
    }
    ++rep.samples_checked;
    const bool starts_in_E = pair.E.margin(x) <= tol;

    Trajectory record;
    record.times.push_back(0);
    record.states.push_back(x);

    Stepper st(model, x);
    double mN_prev = pair.N.margin(x), mE_prev = pair.E.margin(x);
    while (st.time() < horizon) {
      if (!st.advance(horizon)) break;  // blow-up: exit property is vacuous
      record.times.push_back(st.time());
      record.states.push_back(st.state());
      const double mN = pair.N.margin(st.state());
      const double mE = pair.E.margin(st.state());
      track_lipschitz(mN_prev, mN, st.prev_state(), st.state(), rep.lipschitz_estimate);
      track_lipschitz(mE_prev, mE, st.prev_state(), st.state(), rep.lipschitz_estimate);
      mN_prev = mN;
      mE_prev = mE;

      if (starts_in_E) {
        // (i) while the trajectory stays in N it must remain tol-close to E
        if (mN > 0) break;  // left N; nothing more to assert
        if (mE > tol) {
          ExitViolation v;
          v.sample_index = static_cast<int>(k);
          v.what = "E not invariant inside N";
          v.margin = mE;
          v.time = st.time();
          v.witness = st.state();
          record.status = TrajectoryStatus::completed;
          v.trajectory = record;
          rep.violations.push_back(std::move(v));
          break;
        }
      } else {
        // (ii) leaving N\E must happen through E
        if (mE <= tol && mN <= tol) break;  // entered E while still in N: fine
        if (mN > 0) {
          StateVector exit_state;
          const double t_exit = bisect_step(
              model, st, [&](const StateVector& y) { return pair.N.margin(y) > 0; },
              exit_state);
          if (pair.E.margin(exit_state) > tol) {
            ExitViolation v;
            v.sample_index = static_cast<int>(k);
            v.what = "escaped N away from E";
            v.margin = pair.E.margin(exit_state);
            v.time = t_exit;
            v.witness = exit_state;
            record.status = TrajectoryStatus::escaped_region;
            record.event_time = t_exit;
            v.trajectory = record;
            rep.violations.push_back(std::move(v));
          }
          break;
        }
      }
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

QuotientState quotient_evolve(const FlowModel& model, const WazewskiPairSpec& pair,
                              const StateVector& x, double t, double e_tol) {
  model.check_state(x);
  if (t < 0) throw std::invalid_argument("quotient_evolve: t must be >= 0");
  const double etol = default_e_tol(model, e_tol);
  if (pair.N.margin(x) > 0)
    throw std::invalid_argument("quotient_evolve: start lies outside N");
  if (pair.E.margin(x) <= etol) return QuotientState::make_collapsed(0);
  if (t == 0) return QuotientState::make_interior(x);

  Stepper st(model, x);
  while (st.time() < t) {
    if (!st.advance(t)) {
      // Blow-up maps to the collapsed class (it absorbs the unbounded end).
      return QuotientState::make_collapsed(st.explode_time());
    }
    const double mN = pair.N.margin(st.state());
    const double mE = pair.E.margin(st.state());
    if (mE <= etol) {
      StateVector at;
      const double tc = bisect_step(
          model, st, [&](const StateVector& y) { return pair.E.margin(y) <= etol; }, at);
      return QuotientState::make_collapsed(tc);
    }
    if (mN > 0) {
      StateVector at;
      const double tc = bisect_step(
          model, st, [&](const StateVector& y) { return pair.N.margin(y) > 0; }, at);
      return QuotientState::make_collapsed(tc);
    }
  }
  return QuotientState::make_interior(st.state());
}

QuotientState quotient_evolve(const FlowModel& model, const WazewskiPairSpec& pair,
                              const QuotientState& q, double elapsed, double t, double e_tol) {
  if (q.collapsed()) return q;  // absorbing, collapse_time unchanged
  QuotientState next = quotient_evolve(model, pair, q.state, t, e_tol);
  if (next.collapsed()) return QuotientState::make_collapsed(elapsed + *next.collapse_time);
  return next;
}

bool StabilityTable::monotone() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::isnan(rows[i].R) || std::isnan(rows[i - 1].R)) continue;
    if (rows[i].R < rows[i - 1].R) return false;
  }
  return true;
}

std::string StabilityTable::csv() const {
  std::string out = "r,R,samples,violations\n";
  for (const auto& row : rows) {
    out += fmt_double(row.r);
    out += ',';
    out += std::isnan(row.R) ? std::string("nan") : fmt_double(row.R);
    out += ',' + std::to_string(row.samples) + ',' + std::to_string(row.violations) + '\n';
  }
  return out;
}

namespace {

struct ProbeRun {
  double start_norm = 0;
  double min_norm = 0;
  StateVector start;
};

StabilityTable assemble_table(const FlowModel& model, const std::vector<double>& inner_radii,
                              const std::vector<double>& tested_R,
                              const std::vector<ProbeRun>& runs, double horizon) {
  StabilityTable table;
  for (double r : inner_radii) {
    StabilityRow row;
    row.r = r;
    row.R = std::numeric_limits<double>::quiet_NaN();
    const ProbeRun* worst = nullptr;
    for (double R : tested_R) {
      int samples = 0, violations = 0;
      for (const auto& run : runs) {
        if (run.start_norm <= R) continue;
        ++samples;
        if (run.min_norm <= r) {
          ++violations;
          worst = &run;
        }
      }
      row.samples = samples;
      row.violations = violations;
      if (violations == 0 && samples > 0) {
        row.R = R;
        break;
      }
    }
    if (std::isnan(row.R) && worst != nullptr && !table.counterexample) {
      table.counterexample = evolve(model, worst->start, horizon,
                                    std::min(model.policy.dt_max, horizon / 512));
      table.counterexample_r = r;
    }
    table.rows.push_back(row);
  }
  return table;
}

ProbeRun probe_one(const FlowModel& model, const Region& region, const StateVector& start,
                   double horizon) {
  ProbeRun run;
  run.start = start;
  run.start_norm = model.norm(start);
  run.min_norm = run.start_norm;
  Stepper st(model, start);
  while (st.time() < horizon) {
    if (!st.advance(horizon)) break;                    // blow-up ends the region stay
    if (region.margin(st.state()) > 0) break;           // left the region
    run.min_norm = std::min(run.min_norm, model.norm(st.state()));
  }
  return run;
}

}  // namespace

StabilityTable stability_at_infinity_probe(const FlowModel& model, const Region& region,
                                           const std::vector<double>& inner_radii,
                                           const std::vector<double>& start_radii,
                                           int samples_per_radius, double horizon, Rng& rng) {
  if (inner_radii.empty() || start_radii.empty())
    throw std::invalid_argument("stability probe: empty radius lists");
  for (std::size_t i = 1; i < inner_radii.size(); ++i)
    if (inner_radii[i] <= inner_radii[i - 1])
      throw std::invalid_argument("stability probe: inner radii must increase");

  std::vector<ProbeRun> runs;
  for (double R : start_radii) {
    for (int s = 0; s < samples_per_radius; ++s) {
      std::vector<double> dir = rng.unit_vector(model.dim());
      for (auto& v : dir) v *= R;
      StateVector x = model.state(std::move(dir));
      if (region.margin(x) > 0) continue;  // not in the region of interest
      runs.push_back(probe_one(model, region, x, horizon));
    }
  }
  return assemble_table(model, inner_radii, start_radii, runs, horizon);
}

StabilityTable stability_probe_on_starts(const FlowModel& model, const Region& region,
                                         const std::vector<double>& inner_radii,
                                         const std::vector<StateVector>& starts,
                                         double horizon) {
  std::vector<ProbeRun> runs;
  std::vector<double> tested_R;
  for (const auto& x : starts) {
    if (region.margin(x) > 0) continue;
    runs.push_back(probe_one(model, region, x, horizon));
    tested_R.push_back(runs.back().start_norm * (1.0 - 1e-9));
  }
  std::sort(tested_R.begin(), tested_R.end());
  return assemble_table(model, inner_radii, tested_R, runs, horizon);
}

NonExplosionReport nonexplosion_probe(const FlowModel& model, const Region& bounded_region,
                                      const std::vector<StateVector>& samples,
                                      double horizon) {
  NonExplosionReport rep;
  // Boundedness pre-check: membership found at huge radius means the region
  // is not bounded and the probe is meaningless.
  for (int axis = 0; axis < model.dim(); ++axis) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> c(static_cast<std::size_t>(model.dim()), 0.0);
      c[static_cast<std::size_t>(axis)] = sign * 1e8;
      if (bounded_region.margin(model.state(std::move(c))) <= 0)
        throw std::invalid_argument("nonexplosion_probe: region appears unbounded");
    }
  }
  for (const auto& x : samples)
    rep.circumradius_estimate = std::max(rep.circumradius_estimate, model.norm(x));

  for (std::size_t k = 0; k < samples.size(); ++k) {
    ++rep.samples_checked;
    const EscapeResult esc = escape_time(model, samples[k], bounded_region, horizon);
    if (esc.kind == EscapeResult::Kind::blow_up_inside) {
      ++rep.blow_ups_inside;
      rep.offending_samples.push_back(static_cast<int>(k));
    }
  }
  rep.pass = rep.blow_ups_inside == 0;
  return rep;
}

}  // namespace semiflow
