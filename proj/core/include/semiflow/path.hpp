#pragma once

#include <functional>
#include <vector>

#include "semiflow/model.hpp"
#include "semiflow/state.hpp"

namespace semiflow {

/// Polyline surrogate for a connecting set: ordered nodes with a pinned mask
/// (at minimum both endpoints) and a refinement gap. Pinned nodes are never
/// moved by any operation.
struct DiscretePath {
  std::vector<StateVector> nodes;
  std::vector<bool> pinned;
  double max_gap = 0.1;

  int size() const { return static_cast<int>(nodes.size()); }
  void validate() const;
};

/// Straight path with `count` nodes from a to b, endpoints pinned.
DiscretePath make_line_path(const StateVector& a, const StateVector& b, int count,
                            double max_gap);

/// Inserts coordinate midpoints wherever a gap exceeds max_gap (distance in
/// the model norm); never deletes nodes, inserted nodes are unpinned.
void refine_path(const FlowModel& model, DiscretePath& path);

double max_node_gap(const FlowModel& model, const DiscretePath& path);

/// Largest |phi(a)-phi(b)| / dist(a,b) over consecutive nodes.
double path_lipschitz(const FlowModel& model, const DiscretePath& path,
                      const std::function<double(const StateVector&)>& phi);

struct SphereLinkCheck {
  bool linked = false;
  std::vector<int> crossings;  // indices i where the sign changes between i and i+1
};

/// Discrete intermediate-value check that the polyline crosses the sphere
/// boundary; requires the first node strictly inside and the last strictly
/// outside (throws otherwise).
SphereLinkCheck linking_check_sphere(const FlowModel& model, const DiscretePath& path,
                                     const StateVector& center, double radius);

}  // namespace semiflow
