#include "semiflow/resonant_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semiflow {
namespace {

// End state of the flow after time T, or nullopt on blow-up.
std::optional<StateVector> final_state(const FlowModel& flow, const StateVector& x, double T) {
  Stepper st(flow, x);
  while (st.time() < T)
    if (!st.advance(T)) return std::nullopt;
  return st.state();
}

struct SmallMatrix {
  int n = 0;
  std::vector<double> a;  // row-major
  double& at(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
};

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_small(SmallMatrix m, std::vector<double> b, std::vector<double>& x) {
  const int n = m.n;
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m.at(r, col)) > std::abs(m.at(best, col))) best = r;
    if (std::abs(m.at(best, col)) < 1e-300) return false;
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(m.at(best, j), m.at(col, j));
      std::swap(b[static_cast<std::size_t>(best)], b[static_cast<std::size_t>(col)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = m.at(r, col) / m.at(col, col);
      for (int j = col; j < n; ++j) m.at(r, j) -= f * m.at(col, j);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= m.at(r, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(r)] = s / m.at(r, r);
  }
  return true;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

class SegmentShooter {
 public:
  SegmentShooter(const SpectralModel& model, const ForcingSignal& g, const SearchOptions& opts)
      : model_(model), g_(g), opts_(opts) {
    w_idx_ = model.idx_minus();
    for (int k : model.idx_zero()) w_idx_.push_back(k);
    std::sort(w_idx_.begin(), w_idx_.end());
    jac_.n = static_cast<int>(w_idx_.size());
    jac_.a.assign(static_cast<std::size_t>(jac_.n * jac_.n), 0.0);
  }

  int dim_w() const { return static_cast<int>(w_idx_.size()); }

  std::vector<double> w_of(const StateVector& u) const {
    std::vector<double> w;
    w.reserve(w_idx_.size());
    for (int k : w_idx_) w.push_back(u[k - 1]);
    return w;
  }

  void set_w(StateVector& u, const std::vector<double>& w) const {
    for (std::size_t i = 0; i < w_idx_.size(); ++i) u[w_idx_[i] - 1] = w[i];
  }

  // Far-end W components of the segment starting at absolute time t_abs.
  // Blow-up maps to a large residual, which the damping backs away from.
  std::vector<double> shoot(double t_abs, const StateVector& base,
                            const std::vector<double>& w) {
    ResonantFlow flow(model_, g_, HullShift{t_abs});
    flow.policy.abs_tol = opts_.abs_tol;
    flow.policy.rel_tol = opts_.rel_tol;
    flow.policy.blow_up_norm = opts_.blowup_guard;
    flow.policy.dt_max = 0.05;
    StateVector u = base;
    set_w(u, w);
    const auto end = final_state(flow, u, opts_.t_solve);
    if (!end) return std::vector<double>(w_idx_.size(), 1e6);
    return w_of(*end);
  }

  // Damped Newton with a forward-difference Jacobian, refreshed on stall.
  // Returns the solved W components; `iters` accumulates evaluations.
  std::vector<double> solve(double t_abs, const StateVector& base, int& iters) {
    std::vector<double> w = w_of(base);
    std::vector<double> r = shoot(t_abs, base, w);
    bool have_jac = false;
    for (int it = 0; it < opts_.max_newton; ++it) {
      ++iters;
      if (vec_norm(r) <= opts_.newton_target) return w;
      if (!have_jac) {
        refresh_jacobian(t_abs, base, w, r);
        have_jac = true;
      }
      std::vector<double> delta;
      if (!solve_small(jac_, r, delta)) {
        refresh_jacobian(t_abs, base, w, r);
        if (!solve_small(jac_, r, delta)) break;
      }
      for (auto& d : delta) d = -d;

      double lam = 1.0;
      bool improved = false;
      for (int half = 0; half < 8; ++half) {
        std::vector<double> w_try = w;
        for (std::size_t i = 0; i < w.size(); ++i) w_try[i] += lam * delta[i];
        std::vector<double> r_try = shoot(t_abs, base, w_try);
        if (vec_norm(r_try) < vec_norm(r)) {
          // Broyden update keeps later iterations at one shot each.
          broyden_update(w_try, w, r_try, r, lam, delta);
          w = std::move(w_try);
          r = std::move(r_try);
          improved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!improved) {
        if (have_jac) {
          refresh_jacobian(t_abs, base, w, r);
          continue;
        }
        break;
      }
    }
    return w;  // best effort; caller checks the achieved residual via shoot
  }

 private:
  void refresh_jacobian(double t_abs, const StateVector& base, const std::vector<double>& w,
                        const std::vector<double>& r) {
    const int n = dim_w();
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(w[static_cast<std::size_t>(j)]));
      std::vector<double> wp = w;
      wp[static_cast<std::size_t>(j)] += h;
      const std::vector<double> rp = shoot(t_abs, base, wp);
      for (int i = 0; i < n; ++i)
        jac_.at(i, j) = (rp[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) / h;
    }
  }

  void broyden_update(const std::vector<double>& w_new, const std::vector<double>& w_old,
                      const std::vector<double>& r_new, const std::vector<double>& r_old,
                      double, const std::vector<double>&) {
    const int n = dim_w();
    std::vector<double> dw(static_cast<std::size_t>(n)), dr(static_cast<std::size_t>(n));
    double denom = 0;
    for (int i = 0; i < n; ++i) {
      dw[static_cast<std::size_t>(i)] =
          w_new[static_cast<std::size_t>(i)] - w_old[static_cast<std::size_t>(i)];
      dr[static_cast<std::size_t>(i)] =
          r_new[static_cast<std::size_t>(i)] - r_old[static_cast<std::size_t>(i)];
      denom += dw[static_cast<std::size_t>(i)] * dw[static_cast<std::size_t>(i)];
    }
    if (denom < 1e-30) return;
    for (int i = 0; i < n; ++i) {
      double jd = 0;
      for (int j = 0; j < n; ++j) jd += jac_.at(i, j) * dw[static_cast<std::size_t>(j)];
      const double coef = (dr[static_cast<std::size_t>(i)] - jd) / denom;
      for (int j = 0; j < n; ++j) jac_.at(i, j) += coef * dw[static_cast<std::size_t>(j)];
    }
  }

  const SpectralModel& model_;
  const ForcingSignal& g_;
  const SearchOptions& opts_;
  std::vector<int> w_idx_;
  SmallMatrix jac_;
};

}  // namespace

Trajectory record_to_trajectory(const TimeSeries& record) {
  Trajectory traj;
  for (int i = 0; i < record.size(); ++i) {
    traj.times.push_back(record.dt * i);
    traj.states.push_back(record.samples[static_cast<std::size_t>(i)]);
  }
  return traj;
}

BoundedSolutionResult bounded_solution_search(const SpectralModel& model,
                                              const ForcingSignal& g,
                                              const std::vector<StateVector>& seeds,
                                              double transient, double record_horizon,
                                              const SearchOptions& opts) {
  if (seeds.empty()) throw std::invalid_argument("bounded_solution_search: no seeds");
  const double steps_per_adv = opts.t_advance / opts.sample_dt;
  if (std::abs(steps_per_adv - std::lround(steps_per_adv)) > 1e-9)
    throw std::invalid_argument("bounded_solution_search: sample_dt must divide t_advance");
  if (opts.t_solve <= opts.t_advance)
    throw std::invalid_argument("bounded_solution_search: need t_solve > t_advance");

  std::optional<BoundedSolutionResult> best;
  const StateMetric vmetric = [&model](const StateVector& a, const StateVector& b) {
    StateVector d = a;
    for (int i = 0; i < a.dim(); ++i) d[i] = a[i] - b[i];
    return model.norm_v(d);
  };

  for (std::size_t seed_i = 0; seed_i < seeds.size(); ++seed_i) {
    SegmentShooter shooter(model, g, opts);
    SearchDiagnostics diag;

    StateVector u = seeds[seed_i];
    model.state(u.c);  // dimension check
    const double total = transient + record_horizon;

    TimeSeries record;
    record.t0 = 0;
    record.dt = opts.sample_dt;

    double t_abs = 0;
    double jump_sum = 0;
    int jump_count = 0;
    int consecutive_bad = 0;
    int shrink_retries = 0;
    // Global sample grid k * sample_dt; the record keeps k in [k_next, k_last].
    long long k_next = std::llround(std::ceil(transient / opts.sample_dt - 1e-9));
    const long long k_last = std::llround(std::floor(total / opts.sample_dt + 1e-9));
    while (t_abs < total - 1e-9) {
      const std::vector<double> w_before = shooter.w_of(u);
      const std::vector<double> w_solved = shooter.solve(t_abs, u, diag.newton_iterations);

      std::vector<double> jump_vec = w_solved;
      for (std::size_t i = 0; i < jump_vec.size(); ++i) jump_vec[i] -= w_before[i];
      const double jump = vec_norm(jump_vec);
      shooter.set_w(u, w_solved);

      if (!diag.locked && jump < opts.lock_jump) {
        diag.locked = true;
        diag.lock_time = t_abs;
      }
      if (diag.locked && t_abs > diag.lock_time) {
        diag.max_jump = std::max(diag.max_jump, jump);
        jump_sum += jump;
        ++jump_count;
        if (jump > 10 * opts.lock_jump) ++consecutive_bad;
        else consecutive_bad = 0;
        if (consecutive_bad > 8)
          throw std::runtime_error(
              "bounded_solution_search: lost the bounded solution (re-injection jumps grew)");
      }

      // Accepted span of the solved segment.
      ResonantFlow flow(model, g, HullShift{t_abs});
      flow.policy.abs_tol = opts.abs_tol;
      flow.policy.rel_tol = opts.rel_tol;
      flow.policy.blow_up_norm = opts.blowup_guard;
      flow.policy.dt_max = 0.05;
      const Trajectory seg = evolve(flow, u, opts.t_advance, opts.sample_dt);
      if (seg.status != TrajectoryStatus::completed) {
        if (diag.locked)
          throw std::runtime_error(
              "bounded_solution_search: accepted segment blew up inside the region");
        // Pre-lock failure: restart this segment from a shrunken state.
        if (++shrink_retries > 100)
          throw std::runtime_error("bounded_solution_search: cannot stabilize the seed");
        for (int i = 0; i < u.dim(); ++i) u[i] *= 0.5;
        continue;
      }
      for (int s = 0; s < seg.samples(); ++s) {
        const double ts = t_abs + seg.times[s];
        const long long k = std::llround(ts / opts.sample_dt);
        if (std::abs(ts - static_cast<double>(k) * opts.sample_dt) > 1e-6) continue;
        if (k == k_next && k <= k_last) {
          record.samples.push_back(seg.states[s]);
          ++k_next;
        }
      }
      u = seg.back();
      t_abs += opts.t_advance;
      ++diag.segments;
    }

    diag.mean_jump = jump_count > 0 ? jump_sum / jump_count : 0;

    double jmin = std::numeric_limits<double>::infinity(), jmax = -jmin, sup = 0;
    for (const auto& s : record.samples) {
      const double jv = energy(model, s);
      jmin = std::min(jmin, jv);
      jmax = std::max(jmax, jv);
      sup = std::max(sup, model.norm_v(s));
    }
    diag.j_min = jmin;
    diag.j_max = jmax;
    diag.sup_norm = sup;
    diag.defect_eps = recurrence_defect(record, opts.l_ref, opts.n_max, vmetric);

    BoundedSolutionResult res;
    res.record = std::move(record);
    res.diag = diag;
    res.seed_index = static_cast<int>(seed_i);
    if (!best || res.diag.defect_eps < best->diag.defect_eps) best = std::move(res);
  }
  return *best;
}

}  // namespace semiflow
