#include "semiflow/probes.hpp"

#include <algorithm>
#include <cmath>

namespace semiflow {

double dist_to_set(const FlowModel& model, const StateVector& x,
                   const std::vector<StateVector>& pts) {
  double best = std::numeric_limits<double>::infinity();
  StateVector diff = x;
  for (const auto& p : pts) {
    for (int i = 0; i < x.dim(); ++i) diff[i] = x[i] - p[i];
    best = std::min(best, model.norm(diff));
  }
  return best;
}

LimitSetEstimate omega_limit(const FlowModel& model, const StateVector& x, double burn_in,
                             double window, double cluster_tol, double sample_dt) {
  if (burn_in < 0 || window <= 0 || cluster_tol <= 0)
    throw std::invalid_argument("omega_limit: bad burn_in/window/cluster_tol");
  if (sample_dt <= 0) sample_dt = std::min(model.policy.dt_max, window / 2048);

  const double total = burn_in + window;
  const Trajectory traj = evolve(model, x, total, sample_dt);
  if (traj.status != TrajectoryStatus::completed)
    throw UnboundedTailError("omega_limit: trajectory exploded before the window ended");

  // Unbounded-growth guard: compare windowed norm maxima at the two ends.
  double head_max = 0, tail_max = 0;
  const double t_head = burn_in + 0.1 * window, t_tail = total - 0.1 * window;
  for (int i = 0; i < traj.samples(); ++i) {
    const double t = traj.times[i];
    if (t < burn_in) continue;
    const double n = model.norm(traj.states[i]);
    if (t <= t_head) head_max = std::max(head_max, n);
    if (t >= t_tail) tail_max = std::max(tail_max, n);
  }
  if (tail_max > 2.0 * std::max(head_max, 10 * model.policy.abs_tol))
    throw UnboundedTailError("omega_limit: norm keeps growing across the window");

  LimitSetEstimate est;
  est.t0 = burn_in;
  est.t1 = total;
  est.cluster_tol = cluster_tol;

  // Greedy clustering; checking the most recently matched representative
  // first makes periodic tails near-linear to cluster.
  StateVector diff = x;
  int last_hit = -1;
  for (int i = 0; i < traj.samples(); ++i) {
    if (traj.times[i] < burn_in) continue;
    const StateVector& s = traj.states[i];
    bool covered = false;
    if (last_hit >= 0) {
      const auto& p = est.points[static_cast<std::size_t>(last_hit)];
      for (int d = 0; d < s.dim(); ++d) diff[d] = s[d] - p[d];
      covered = model.norm(diff) <= cluster_tol;
    }
    if (!covered) {
      for (std::size_t j = 0; j < est.points.size(); ++j) {
        const auto& p = est.points[j];
        for (int d = 0; d < s.dim(); ++d) diff[d] = s[d] - p[d];
        if (model.norm(diff) <= cluster_tol) {
          covered = true;
          last_hit = static_cast<int>(j);
          break;
        }
      }
    }
    if (!covered) {
      est.points.push_back(s);
      last_hit = static_cast<int>(est.points.size()) - 1;
    }
  }
  return est;
}

MonotonicityReport lyapunov_monotonicity(const FlowModel& model,
                                         const std::function<double(const StateVector&)>& phi,
                                         const Trajectory& traj, double tol,
                                         std::optional<double> floor) {
  MonotonicityReport rep;
  if (traj.samples() < 2) {
    rep.pass = true;
    return rep;
  }
  (void)model;
  double prev = phi(traj.states[0]);
  for (int i = 1; i < traj.samples(); ++i) {
    const double cur = phi(traj.states[i]);
    const bool counted = !floor || prev >= *floor;
    if (counted) {
      ++rep.pairs_checked;
      const double inc = cur - prev;
      if (inc > rep.max_increase) {
        rep.max_increase = inc;
        rep.argmax_index = i;
      }
    }
    prev = cur;
  }
  rep.pass = rep.max_increase <= tol;
  return rep;
}

AttractionReport attraction_probe(const FlowModel& model, const LimitSetEstimate& target,
                                  const std::vector<StateVector>& starts, double horizon,
                                  double eps, double sample_dt) {
  if (sample_dt <= 0) sample_dt = std::min(model.policy.dt_max, horizon / 1024);
  AttractionReport rep;
  int attracted = 0;
  for (const auto& x : starts) {
    AttractionResult r;
    const Trajectory traj = evolve(model, x, horizon, sample_dt);
    r.status = traj.status;
    if (traj.status == TrajectoryStatus::completed) {
      // Last sample index after which the trajectory never leaves the
      // eps-neighborhood again.
      int entry = -1;
      for (int i = traj.samples() - 1; i >= 0; --i) {
        if (dist_to_set(model, traj.states[i], target.points) <= eps)
          entry = i;
        else
          break;
      }
      if (entry >= 0 && traj.times[entry] < horizon) {
        r.attracted = true;
        r.entry_time = traj.times[entry];
        ++attracted;
      }
    }
    rep.per_start.push_back(r);
  }
  rep.fraction_attracted =
      starts.empty() ? 0 : static_cast<double>(attracted) / static_cast<double>(starts.size());
  return rep;
}

}  // namespace semiflow
