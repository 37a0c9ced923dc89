#pragma once

#include <functional>
#include <string>

#include "semiflow/integrate.hpp"
#include "semiflow/model.hpp"

namespace semiflow {

/// Closed set given by a signed margin: negative strictly inside, zero on
/// the boundary representation, positive outside. Sub-level sets compose by
/// max (intersection) and min (union).
struct Region {
  std::function<double(const StateVector&)> margin;
  std::string label;

  bool contains(const StateVector& x, double tol = 0) const { return margin(x) <= tol; }
};

Region region_intersect(Region a, Region b);
Region region_union(Region a, Region b);

/// {x : norm(x - center) <= radius} in the model norm.
Region region_ball(const FlowModel& model, StateVector center, double radius,
                   std::string label = "ball");

/// {x : f(x) <= c}
Region region_sublevel(std::function<double(const StateVector&)> f, double c,
                       std::string label = "sublevel");

/// {x : lo <= f(x) <= hi}
Region region_band(std::function<double(const StateVector&)> f, double lo, double hi,
                   std::string label = "band");

/// 1d interval [lo, hi].
Region region_interval(double lo, double hi, std::string label = "interval");

/// Zero set {x : f(x) = 0} via margin |f|; used for thin exit sets.
Region region_zero_set(std::function<double(const StateVector&)> f,
                       std::string label = "zero-set");

struct EscapeResult {
  enum class Kind { finite, not_before, blow_up_inside } kind = Kind::not_before;
  double t = 0;
  StateVector state_at_event;
};

/// First time the trajectory from x attains margin > 0, bisected on the
/// bracketing step to resolution abs_tol. Precondition: x inside the region.
EscapeResult escape_time(const FlowModel& model, const StateVector& x, const Region& region,
                         double t_max);

}  // namespace semiflow
