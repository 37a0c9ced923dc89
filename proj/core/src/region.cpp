#include "semiflow/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiflow {

Region region_intersect(Region a, Region b) {
  Region r;
  r.label = a.label + " & " + b.label;
  r.margin = [ma = std::move(a.margin), mb = std::move(b.margin)](const StateVector& x) {
    return std::max(ma(x), mb(x));
  };
  return r;
}

Region region_union(Region a, Region b) {
  Region r;
  r.label = a.label + " | " + b.label;
  r.margin = [ma = std::move(a.margin), mb = std::move(b.margin)](const StateVector& x) {
    return std::min(ma(x), mb(x));
  };
  return r;
}

Region region_ball(const FlowModel& model, StateVector center, double radius,
                   std::string label) {
  Region r;
  r.label = std::move(label);
  r.margin = [&model, c = std::move(center), radius](const StateVector& x) {
    StateVector d = x;
    for (int i = 0; i < x.dim(); ++i) d[i] = x[i] - c[i];
    return model.norm(d) - radius;
  };
  return r;
}

Region region_sublevel(std::function<double(const StateVector&)> f, double c,
                       std::string label) {
  Region r;
  r.label = std::move(label);
  r.margin = [f = std::move(f), c](const StateVector& x) { return f(x) - c; };
  return r;
}

Region region_band(std::function<double(const StateVector&)> f, double lo, double hi,
                   std::string label) {
  Region r;
  r.label = std::move(label);
  r.margin = [f = std::move(f), lo, hi](const StateVector& x) {
    const double v = f(x);
    return std::max(v - hi, lo - v);
  };
  return r;
}

Region region_interval(double lo, double hi, std::string label) {
  Region r;
  r.label = std::move(label);
  r.margin = [lo, hi](const StateVector& x) { return std::max(x[0] - hi, lo - x[0]); };
  return r;
}

Region region_zero_set(std::function<double(const StateVector&)> f, std::string label) {
  Region r;
  r.label = std::move(label);
  r.margin = [f = std::move(f)](const StateVector& x) { return std::abs(f(x)); };
  return r;
}

EscapeResult escape_time(const FlowModel& model, const StateVector& x, const Region& region,
                         double t_max) {
  model.check_state(x);
  if (region.margin(x) > 0)
    throw std::invalid_argument("escape_time: start lies outside the region");

  EscapeResult out;
  Stepper st(model, x);
  while (st.time() < t_max) {
    const bool ok = st.advance(t_max);
    if (!ok) {
      // Explosion; if the threshold state already left the region, the
      // escape happened first (or simultaneously) and is reported as such.
      if (!st.nonfinite() && region.margin(st.explode_state()) >= 0) {
        out.kind = EscapeResult::Kind::finite;
        out.t = st.explode_time();
        out.state_at_event = st.explode_state();
        return out;
      }
      out.kind = EscapeResult::Kind::blow_up_inside;
      out.t = st.explode_time();
      out.state_at_event = st.nonfinite() ? st.prev_state() : st.explode_state();
      return out;
    }
    if (region.margin(st.state()) > 0) {
      // Bisect the crossing inside the bracketing step.
      double lo = 0, hi = st.time() - st.prev_time();
      StateVector hi_state = st.state();
      const double res = std::max(model.policy.abs_tol, 1e-15);
      while (hi - lo > res) {
        const double mid = 0.5 * (lo + hi);
        StateVector y = st.substep_from_prev(mid);
        if (region.margin(y) > 0) {
          hi = mid;
          hi_state = std::move(y);
        } else {
          lo = mid;
        }
      }
      out.kind = EscapeResult::Kind::finite;
      out.t = st.prev_time() + hi;
      out.state_at_event = std::move(hi_state);
      return out;
    }
  }
  out.kind = EscapeResult::Kind::not_before;
  out.t = t_max;
  out.state_at_event = st.state();
  return out;
}

}  // namespace semiflow
