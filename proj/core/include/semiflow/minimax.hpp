#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiflow/path.hpp"

namespace semiflow {

/// All deformable nodes blew up in one sweep; the path surrogate cannot
/// survive the configuration.
struct DeformationCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Functional = std::function<double(const StateVector&)>;

struct MinimaxRecord {
  int iteration = 0;
  double c_estimate = 0;   // sup of phi over the current nodes
  int arg_node = 0;
  double flow_residual = 0;  // norm of the vector field at the arg node
};

std::string minimax_csv(const std::vector<MinimaxRecord>& records);

struct DeformOptions {
  /// Optional projection applied to every advanced node (e.g. clipping to a
  /// positively invariant cone). Largest applied change is reported.
  std::function<StateVector(const StateVector&)> project;
  double* max_projection = nullptr;
};

/// Advances every unpinned node by the flow for time dt; nodes that blow up
/// are replaced by the midpoint of their surviving neighbors, then the path
/// is re-refined to satisfy max_gap.
DiscretePath deform_path(const FlowModel& model, const DiscretePath& path, double dt,
                         const DeformOptions& opts = {});

struct MinimaxResult {
  double c = 0;
  std::vector<MinimaxRecord> records;
  DiscretePath final_path;
  bool stalled = false;    // stopped by the stall rule rather than max_iters
  int refinements = 0;     // nodes inserted over the whole run
  double barrier_note = 0; // max phi over pinned nodes, logged
};

/// Flow-deformation estimate of c = inf over admissible deformations of
/// sup phi: iterates deform_path, recording sup phi per iteration, and stops
/// at max_iters or when the estimate decreased by less than stall_tol over
/// ten consecutive iterations.
MinimaxResult minimax_estimate(const FlowModel& model, const Functional& phi,
                               DiscretePath path, int max_iters, double dt, double stall_tol,
                               const DeformOptions& opts = {});

struct InvariantCandidate {
  StateVector state;
  double residual = 0;
  double phi_value = 0;
  int node_index = 0;
};

/// Nodes of the final path lying in the level band |phi - c| <= band with
/// vector-field norm below residual_tol; the numerical stand-in for the
/// invariant set located at the minimax level. An empty list is a valid
/// outcome.
std::vector<InvariantCandidate> invariant_candidates(const FlowModel& model,
                                                     const Functional& phi,
                                                     const DiscretePath& final_path, double c,
                                                     double band, double residual_tol);

}  // namespace semiflow
