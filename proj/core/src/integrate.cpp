#include "semiflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "semiflow/report.hpp"

namespace semiflow {
namespace {

using Vec = std::vector<double>;

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                 e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                 e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

// ARS(2,2,2) implicit-explicit pair.
const double ars_gamma = 1.0 - 1.0 / std::sqrt(2.0);
const double ars_delta = 1.0 - 1.0 / (2.0 * ars_gamma);

struct SchemeCore {
  const FlowModel& model;
  int n;
  // scratch
  Vec k1, k2, k3, k4, k5, k6, k7, ytmp, lin, nl0, nl1, u1, u2;

  explicit SchemeCore(const FlowModel& m)
      : model(m),
        n(m.dim()),
        k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), lin(n), nl0(n), nl1(n),
        u1(n), u2(n) {}

  // One Dormand-Prince step; fills ynew and the embedded error estimate.
  // k1 must hold f(t, y) on entry (FSAL); on exit k7 = f(t+h, ynew).
  void dopri_step(double t, const Vec& y, double h, Vec& ynew, Vec& err) {
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    model.rhs(t + c2 * h, ytmp, k2);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    model.rhs(t + c3 * h, ytmp, k3);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    model.rhs(t + c4 * h, ytmp, k4);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    model.rhs(t + c5 * h, ytmp, k5);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    model.rhs(t + h, ytmp, k6);
    for (int i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    model.rhs(t + h, ynew, k7);
    for (int i = 0; i < n; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                    e7 * k7[i]);
  }

  // One ARS(2,2,2) step for u' = -L u + N(t, u); stiffly accurate.
  void imex_cn_step(double t, const Vec& y, double h, Vec& ynew) {
    const double g = ars_gamma, d = ars_delta;
    model.nonstiff(t, y, nl0);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * g * nl0[i];
    model.stiff_solve(h * g, ytmp, u1);
    model.nonstiff(t + g * h, u1, nl1);
    model.stiff_apply(u1, lin);
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (d * nl0[i] + (1.0 - d) * nl1[i]) - h * (1.0 - g) * lin[i];
    model.stiff_solve(h * g, ytmp, ynew);
  }

  // Backward Euler on L, forward Euler on N. Solving (I + hL) keeps the
  // update inverse-positive, which the cone-invariance checks rely on.
  void imex_euler_step(double t, const Vec& y, double h, Vec& ynew) {
    model.nonstiff(t, y, nl0);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * nl0[i];
    model.stiff_solve(h, ytmp, ynew);
  }
};

}  // namespace

struct Stepper::Impl {
  const FlowModel& model;
  SchemeCore core;
  Scheme scheme;

  double t = 0;
  StateVector y;
  double t_prev = 0;
  StateVector y_prev;

  double h_next = 0;
  bool fsal_valid = false;

  bool exploded = false;
  bool nonfinite = false;
  double t_explode = 0;
  StateVector x_explode;

  Vec ynew, yerr, yhalf, yfull;

  explicit Impl(const FlowModel& m, StateVector x0, double t0)
      : model(m), core(m), scheme(m.policy.scheme), t(t0), y(std::move(x0)), t_prev(t0),
        y_prev(y), ynew(m.dim()), yerr(m.dim()), yhalf(m.dim()), yfull(m.dim()) {
    if (scheme != Scheme::erk45 && !m.has_stiff_split())
      throw std::invalid_argument("imex scheme requested but model has no stiff split");
  }

  double scaled_err(const Vec& e, const Vec& a, const Vec& b) const {
    const double at = model.policy.abs_tol, rt = model.policy.rel_tol;
    double s = 0;
    for (int i = 0; i < core.n; ++i) {
      const double sc = at + rt * std::max(std::abs(a[i]), std::abs(b[i]));
      const double q = e[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / core.n);
  }

  // The controller cannot ask for error below the rounding noise of the
  // state itself; without this floor the step size death-spirals wherever
  // the solution grows fast (blow-up runs).
  double roundoff_floor(const Vec& a, const Vec& b) const {
    const double at = model.policy.abs_tol, rt = model.policy.rel_tol;
    double m = 0;
    for (int i = 0; i < core.n; ++i) {
      const double mag = std::max(std::abs(a[i]), std::abs(b[i]));
      const double sc = at + rt * mag;
      m = std::max(m, mag / sc);
    }
    return 32 * std::numeric_limits<double>::epsilon() * m;
  }

  // Exponent base for the step controller: order of err/budget in h.
  int control_order() const {
    switch (scheme) {
      case Scheme::erk45: return 4;       // err/h ~ h^4
      case Scheme::imex_cn: return 3;     // err ~ h^3
      case Scheme::imex_euler: return 2;  // err ~ h^2
    }
    return 1;
  }

  // Single uncontrolled step of size h from (t0, y0).
  void raw_step(double t0, const Vec& y0, double h, Vec& out) {
    switch (scheme) {
      case Scheme::erk45: {
        model.rhs(t0, y0, core.k1);
        core.dopri_step(t0, y0, h, out, yerr);
        break;
      }
      case Scheme::imex_cn: core.imex_cn_step(t0, y0, h, out); break;
      case Scheme::imex_euler: core.imex_euler_step(t0, y0, h, out); break;
    }
  }

  double initial_step(double t_limit) {
    const auto& p = model.policy;
    if (p.fixed_dt > 0) return p.fixed_dt;
    Vec f(core.n);
    model.rhs(t, y.c, f);
    const double at = p.abs_tol, rt = p.rel_tol;
    double d0 = 0, d1 = 0;
    for (int i = 0; i < core.n; ++i) {
      const double sc = at + rt * std::abs(y.c[i]);
      d0 += (y.c[i] / sc) * (y.c[i] / sc);
      d1 += (f[i] / sc) * (f[i] / sc);
    }
    d0 = std::sqrt(d0 / core.n);
    d1 = std::sqrt(d1 / core.n);
    double h = (d1 > 1e-300) ? 0.01 * (d0 + 1.0) / d1 : p.dt_max;
    h = std::min({h, p.dt_max, t_limit - t});
    return std::max(h, 1e-10);
  }

  void declare_explosion(double te, StateVector xe, bool broke) {
    exploded = true;
    nonfinite = broke;
    t_explode = te;
    x_explode = std::move(xe);
  }

  // Locates the first time the norm reaches the threshold inside the step
  // (t_prev, t_prev + h_acc] by bisecting deterministic substeps.
  void bisect_blow_up(double h_acc) {
    const double B = model.policy.blow_up_norm;
    double lo = 0, hi = h_acc;
    Vec mid_y(core.n);
    StateVector hi_state = model.state(ynew);
    const double res = std::max(model.policy.abs_tol, 1e-15 * std::max(1.0, std::abs(t)));
    for (int it = 0; it < 200 && (hi - lo) > res; ++it) {
      const double mid = 0.5 * (lo + hi);
      raw_step(t_prev, y_prev.c, mid, mid_y);
      if (!all_finite(mid_y) || model.norm(mid_y) >= B) {
        hi = mid;
        if (all_finite(mid_y)) hi_state = model.state(mid_y);
      } else {
        lo = mid;
      }
    }
    declare_explosion(t_prev + hi, std::move(hi_state), false);
  }

  bool advance(double t_limit) {
    if (exploded) return false;
    if (t >= t_limit) return true;
    const auto& p = model.policy;
    if (h_next <= 0) h_next = initial_step(t_limit);

    int rejects = 0;
    double h = std::min({h_next, p.dt_max, t_limit - t});
    const bool fixed = p.fixed_dt > 0;
    if (fixed) h = std::min(p.fixed_dt, t_limit - t);

    while (true) {
      const double h_min = std::max(1e-14, 4 * std::numeric_limits<double>::epsilon() *
                                               std::max(1.0, std::abs(t)));
      if (h < h_min || rejects > 100) {
        declare_explosion(t, y, true);
        return false;
      }

      double err = 0;
      bool finite_ok = true;
      switch (scheme) {
        case Scheme::erk45: {
          if (!fsal_valid) {
            model.rhs(t, y.c, core.k1);
            fsal_valid = true;
          }
          core.dopri_step(t, y.c, h, ynew, yerr);
          finite_ok = all_finite(ynew);
          if (finite_ok && !fixed) err = scaled_err(yerr, y.c, ynew);
          break;
        }
        case Scheme::imex_cn:
        case Scheme::imex_euler: {
          // Step doubling: the accepted value is the two-half-step one.
          raw_step(t, y.c, h, yfull);
          raw_step(t, y.c, 0.5 * h, core.ytmp);
          Vec mid = core.ytmp;  // copy; scratch gets reused
          raw_step(t + 0.5 * h, mid, 0.5 * h, yhalf);
          ynew = yhalf;
          finite_ok = all_finite(ynew) && all_finite(yfull);
          if (finite_ok && !fixed) {
            for (int i = 0; i < core.n; ++i) yerr[i] = yhalf[i] - yfull[i];
            const double denom = (scheme == Scheme::imex_cn) ? 3.0 : 1.0;
            err = scaled_err(yerr, y.c, ynew) / denom;
          }
          break;
        }
      }

      if (fixed) {
        if (!finite_ok) {
          declare_explosion(t + h, y, true);
          return false;
        }
        break;
      }

      if (!finite_ok) {
        h *= 0.25;
        ++rejects;
        fsal_valid = false;
        continue;
      }

      // erk45 runs on error-per-unit-step (err <= kappa*h), which keeps the
      // deviation between two integration routes of length T near
      // kappa*T*tol. The low-order imex schemes use plain error-per-step;
      // per-unit-step control would force h ~ tol there.
      const double kappa = 0.2;
      const double target = (scheme == Scheme::erk45) ? kappa * h : 1.0;
      const double budget = std::max(target, roundoff_floor(y.c, ynew));
      const double q = err / budget;
      if (q <= 1.0) {
        const double grow = 0.9 * std::pow(std::max(q, 1e-10), -1.0 / control_order());
        h_next = h * std::clamp(grow, 0.2, 5.0);
        h_next = std::min(h_next, p.dt_max);
        break;
      }
      const double shrink = 0.9 * std::pow(q, -1.0 / control_order());
      h = h * std::clamp(shrink, 0.1, 0.9);
      ++rejects;
    }

    // Accept.
    t_prev = t;
    y_prev = y;
    y.c = ynew;
    t = (t_limit - (t + h) < 1e-14 * std::max(1.0, std::abs(t_limit))) ? t_limit : t + h;
    if (scheme == Scheme::erk45) {
      core.k1 = core.k7;  // FSAL
      fsal_valid = true;
    }

    if (model.norm(y.c) >= p.blow_up_norm) {
      bisect_blow_up(t - t_prev);
      return false;
    }
    return true;
  }
};

Stepper::Stepper(const FlowModel& model, StateVector x0, double t0) {
  model.check_state(x0);
  impl_ = std::make_unique<Impl>(model, std::move(x0), t0);
}
Stepper::~Stepper() = default;

bool Stepper::advance(double t_limit) { return impl_->advance(t_limit); }
double Stepper::time() const { return impl_->t; }
const StateVector& Stepper::state() const { return impl_->y; }
double Stepper::prev_time() const { return impl_->t_prev; }
const StateVector& Stepper::prev_state() const { return impl_->y_prev; }
bool Stepper::exploded() const { return impl_->exploded; }
bool Stepper::nonfinite() const { return impl_->nonfinite; }
double Stepper::explode_time() const { return impl_->t_explode; }
const StateVector& Stepper::explode_state() const { return impl_->x_explode; }

StateVector Stepper::substep_from_prev(double h) const {
  Vec out(impl_->core.n);
  const_cast<Impl*>(impl_.get())->raw_step(impl_->t_prev, impl_->y_prev.c, h, out);
  const_cast<Impl*>(impl_.get())->fsal_valid = false;
  return impl_->model.state(std::move(out));
}

Trajectory evolve(const FlowModel& model, const StateVector& x, double horizon,
                  double sample_dt) {
  if (horizon < 0) throw std::invalid_argument("evolve: horizon must be >= 0");
  model.check_state(x);

  Trajectory traj;
  traj.times.push_back(0);
  traj.states.push_back(x);
  if (horizon == 0) return traj;

  Stepper st(model, x);
  long long k = 1;
  while (true) {
    const double t_limit =
        sample_dt > 0 ? std::min(horizon, sample_dt * static_cast<double>(k)) : horizon;
    if (!st.advance(t_limit)) {
      traj.status = TrajectoryStatus::exploded;
      traj.event_time = st.explode_time();
      traj.nonfinite_breakdown = st.nonfinite();
      if (!st.nonfinite()) {
        traj.times.push_back(st.explode_time());
        traj.states.push_back(st.explode_state());
      }
      return traj;
    }
    if (sample_dt > 0) {
      if (st.time() >= t_limit) {
        traj.times.push_back(st.time());
        traj.states.push_back(st.state());
        if (st.time() >= horizon) return traj;
        ++k;
      }
    } else {
      traj.times.push_back(st.time());
      traj.states.push_back(st.state());
      if (st.time() >= horizon) return traj;
    }
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  const int d = traj.states.empty() ? 0 : traj.front().dim();
  for (int i = 0; i < d; ++i) out += ",c" + std::to_string(i);
  out += '\n';
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out += fmt_double(traj.times[r]);
    for (int i = 0; i < d; ++i) {
      out += ',';
      out += fmt_double(traj.states[r][i]);
    }
    out += '\n';
  }
  return out;
}

SemigroupCheck check_semigroup(const FlowModel& model, const StateVector& x, double s,
                               double t, double tol) {
  if (s < 0 || t < 0) throw std::invalid_argument("check_semigroup: s, t must be >= 0");
  SemigroupCheck out;
  const Trajectory direct = evolve(model, x, s + t);
  if (direct.status != TrajectoryStatus::completed) {
    out.applicable = false;
    return out;
  }
  const Trajectory leg1 = evolve(model, x, s);
  if (leg1.status != TrajectoryStatus::completed) {
    out.applicable = false;
    return out;
  }
  const Trajectory leg2 = evolve(model, leg1.back(), t);
  if (leg2.status != TrajectoryStatus::completed) {
    out.applicable = false;
    return out;
  }
  StateVector diff = direct.back();
  for (int i = 0; i < diff.dim(); ++i) diff[i] -= leg2.back()[i];
  out.deviation = model.norm(diff);
  out.pass = out.deviation <= tol;
  return out;
}

}  // namespace semiflow
