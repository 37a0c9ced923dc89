#include "semiflow/path.hpp"

#include <cmath>
#include <stdexcept>

namespace semiflow {
namespace {

double node_dist(const FlowModel& model, const StateVector& a, const StateVector& b) {
  StateVector d = a;
  for (int i = 0; i < a.dim(); ++i) d[i] = a[i] - b[i];
  return model.norm(d);
}

StateVector midpoint(const StateVector& a, const StateVector& b) {
  StateVector m = a;
  for (int i = 0; i < a.dim(); ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

}  // namespace

void DiscretePath::validate() const {
  if (nodes.size() < 2) throw std::invalid_argument("path needs at least two nodes");
  if (pinned.size() != nodes.size())
    throw std::invalid_argument("pinned mask length does not match node count");
  if (!pinned.front() || !pinned.back())
    throw std::invalid_argument("both endpoints must be pinned");
  if (max_gap <= 0) throw std::invalid_argument("max_gap must be positive");
}

DiscretePath make_line_path(const StateVector& a, const StateVector& b, int count,
                            double max_gap) {
  if (count < 2) throw std::invalid_argument("make_line_path: need at least two nodes");
  if (a.dim() != b.dim() || a.space != b.space)
    throw std::invalid_argument("make_line_path: endpoint mismatch");
  DiscretePath p;
  p.max_gap = max_gap;
  for (int k = 0; k < count; ++k) {
    const double s = static_cast<double>(k) / (count - 1);
    StateVector x = a;
    for (int i = 0; i < a.dim(); ++i) x[i] = (1 - s) * a[i] + s * b[i];
    p.nodes.push_back(std::move(x));
    p.pinned.push_back(k == 0 || k == count - 1);
  }
  return p;
}

void refine_path(const FlowModel& model, DiscretePath& path) {
  path.validate();
  bool inserted = true;
  int guard = 0;
  while (inserted && guard++ < 64) {
    inserted = false;
    std::vector<StateVector> nodes;
    std::vector<bool> pinned;
    nodes.reserve(path.nodes.size() * 2);
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
      nodes.push_back(path.nodes[i]);
      pinned.push_back(path.pinned[i]);
      if (node_dist(model, path.nodes[i], path.nodes[i + 1]) > path.max_gap) {
        nodes.push_back(midpoint(path.nodes[i], path.nodes[i + 1]));
        pinned.push_back(false);
        inserted = true;
      }
    }
    nodes.push_back(path.nodes.back());
    pinned.push_back(path.pinned.back());
    path.nodes = std::move(nodes);
    path.pinned = std::move(pinned);
  }
}

double max_node_gap(const FlowModel& model, const DiscretePath& path) {
  double g = 0;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i)
    g = std::max(g, node_dist(model, path.nodes[i], path.nodes[i + 1]));
  return g;
}

double path_lipschitz(const FlowModel& model, const DiscretePath& path,
                      const std::function<double(const StateVector&)>& phi) {
  double lip = 0;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const double dx = node_dist(model, path.nodes[i], path.nodes[i + 1]);
    if (dx > 1e-14)
      lip = std::max(lip, std::abs(phi(path.nodes[i + 1]) - phi(path.nodes[i])) / dx);
  }
  return lip;
}

SphereLinkCheck linking_check_sphere(const FlowModel& model, const DiscretePath& path,
                                     const StateVector& center, double radius) {
  path.validate();
  auto signed_dist = [&](const StateVector& x) {
    return node_dist(model, x, center) - radius;
  };
  if (signed_dist(path.nodes.front()) >= 0)
    throw std::invalid_argument("linking_check_sphere: first node must lie strictly inside");
  if (signed_dist(path.nodes.back()) <= 0)
    throw std::invalid_argument("linking_check_sphere: last node must lie strictly outside");

  SphereLinkCheck out;
  double prev = signed_dist(path.nodes.front());
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    const double cur = signed_dist(path.nodes[i]);
    if ((prev < 0 && cur >= 0) || (prev >= 0 && cur < 0))
      out.crossings.push_back(static_cast<int>(i) - 1);
    prev = cur;
  }
  out.linked = !out.crossings.empty();
  return out;
}

}  // namespace semiflow
