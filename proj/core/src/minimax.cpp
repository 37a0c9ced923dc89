#include "semiflow/minimax.hpp"

#include <algorithm>
#include <cmath>

#include "semiflow/integrate.hpp"
#include "semiflow/report.hpp"

namespace semiflow {

std::string minimax_csv(const std::vector<MinimaxRecord>& records) {
  std::string out = "iter,c_estimate,arg_node,flow_residual\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + fmt_double(r.c_estimate) + ',' +
           std::to_string(r.arg_node) + ',' + fmt_double(r.flow_residual) + '\n';
  }
  return out;
}

DiscretePath deform_path(const FlowModel& model, const DiscretePath& path, double dt,
                         const DeformOptions& opts) {
  if (dt <= 0) throw std::invalid_argument("deform_path: dt must be positive");
  path.validate();

  DiscretePath out = path;
  std::vector<bool> survived(path.nodes.size(), true);
  int interior = 0, dead = 0;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (path.pinned[i]) continue;  // pinned nodes are bit-identical by contract
    ++interior;
    const Trajectory traj = evolve(model, path.nodes[i], dt);
    if (traj.status == TrajectoryStatus::completed) {
      StateVector y = traj.back();
      if (opts.project) {
        StateVector p = opts.project(y);
        if (opts.max_projection) {
          StateVector d = p;
          for (int j = 0; j < p.dim(); ++j) d[j] = p[j] - y[j];
          *opts.max_projection = std::max(*opts.max_projection, model.norm(d));
        }
        y = std::move(p);
      }
      out.nodes[i] = std::move(y);
    } else {
      survived[i] = false;
      ++dead;
    }
  }
  if (interior > 0 && dead == interior)
    throw DeformationCollapse("deform_path: every interior node blew up");

  // Replace blown-up nodes by the midpoint of their nearest survivors.
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    if (survived[i]) continue;
    std::size_t l = i;
    while (l > 0 && !survived[l]) --l;
    std::size_t r = i;
    while (r + 1 < out.nodes.size() && !survived[r]) ++r;
    for (int j = 0; j < out.nodes[i].dim(); ++j)
      out.nodes[i][j] = 0.5 * (out.nodes[l][j] + out.nodes[r][j]);
  }

  refine_path(model, out);
  return out;
}

MinimaxResult minimax_estimate(const FlowModel& model, const Functional& phi,
                               DiscretePath path, int max_iters, double dt, double stall_tol,
                               const DeformOptions& opts) {
  path.validate();
  refine_path(model, path);

  MinimaxResult res;
  for (std::size_t i = 0; i < path.nodes.size(); ++i)
    if (path.pinned[i]) res.barrier_note = std::max(res.barrier_note, phi(path.nodes[i]));

  auto record_iteration = [&](int iter, const DiscretePath& p) {
    MinimaxRecord rec;
    rec.iteration = iter;
    rec.c_estimate = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.size(); ++i) {
      const double v = phi(p.nodes[static_cast<std::size_t>(i)]);
      if (v > rec.c_estimate) {
        rec.c_estimate = v;
        rec.arg_node = i;
      }
    }
    rec.flow_residual = model.rhs_norm(p.nodes[static_cast<std::size_t>(rec.arg_node)]);
    res.records.push_back(rec);
  };

  record_iteration(0, path);
  int nodes_before = path.size();
  for (int iter = 1; iter <= max_iters; ++iter) {
    try {
      path = deform_path(model, path, dt, opts);
    } catch (const DeformationCollapse&) {
      res.c = res.records.back().c_estimate;
      res.final_path = std::move(path);
      throw;  // propagate with partial records available via the exception site
    }
    res.refinements += path.size() - nodes_before;
    nodes_before = path.size();
    record_iteration(iter, path);

    const int n = static_cast<int>(res.records.size());
    if (n > 10) {
      const double drop =
          res.records[static_cast<std::size_t>(n - 11)].c_estimate - res.records.back().c_estimate;
      if (drop < stall_tol) {
        res.stalled = true;
        break;
      }
    }
  }
  res.c = res.records.back().c_estimate;
  res.final_path = std::move(path);
  return res;
}

std::vector<InvariantCandidate> invariant_candidates(const FlowModel& model,
                                                     const Functional& phi,
                                                     const DiscretePath& final_path, double c,
                                                     double band, double residual_tol) {
  std::vector<InvariantCandidate> out;
  for (int i = 0; i < final_path.size(); ++i) {
    const StateVector& x = final_path.nodes[static_cast<std::size_t>(i)];
    const double v = phi(x);
    if (std::abs(v - c) > band) continue;
    const double r = model.rhs_norm(x);
    if (r > residual_tol) continue;
    out.push_back({x, r, v, i});
  }
  return out;
}

}  // namespace semiflow
