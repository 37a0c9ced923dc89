#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semiflow/minimax.hpp"
#include "semiflow/path.hpp"

using namespace semiflow;

namespace {

Functional doublewell_phi() {
  return [](const StateVector& x) {
    const double q = x[0] * x[0] - 1.0;
    return q * q;
  };
}

Functional quartic2_phi() {
  return [](const StateVector& x) {
    return std::pow(x[0], 4) - x[0] * x[0] + x[1] * x[1];
  };
}

}  // namespace

TEST_CASE("linking_check_sphere: radial segment crosses once") {
  auto m = make_builtin("saddle");
  DiscretePath p = make_line_path(m->state({0.0, 0.0}), m->state({2.0, 0.0}), 10, 0.5);
  const auto chk = linking_check_sphere(*m, p, m->state({0.0, 0.0}), 1.0);
  CHECK(chk.linked);
  CHECK(chk.crossings.size() == 1);
}

TEST_CASE("linking_check_sphere: both endpoints inside is a precondition error") {
  auto m = make_builtin("saddle");
  DiscretePath p = make_line_path(m->state({0.0, 0.0}), m->state({0.5, 0.0}), 5, 0.5);
  CHECK_THROWS_AS(linking_check_sphere(*m, p, m->state({0.0, 0.0}), 1.0),
                  std::invalid_argument);
}

TEST_CASE("linking_check_sphere: spiral crossing the circle three times") {
  auto m = make_builtin("saddle");
  // radius profile 0.2 -> 1.4 -> 0.6 -> 1.8 crosses r = 1 three times; count
  // the sign changes by brute force on the same nodes.
  DiscretePath p;
  p.max_gap = 10.0;  // no refinement; the crossing count is about the nodes
  const std::vector<double> radii = {0.2, 0.6, 1.2, 1.4, 1.0 - 1e-9, 0.6,
                                     0.9, 1.3, 1.8};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double th = 0.7 * static_cast<double>(k);
    p.nodes.push_back(m->state({radii[k] * std::cos(th), radii[k] * std::sin(th)}));
    p.pinned.push_back(k == 0 || k + 1 == radii.size());
  }
  int brute = 0;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    const bool in0 = radii[k] < 1.0, in1 = radii[k + 1] < 1.0;
    if (in0 != in1) ++brute;
  }
  const auto chk = linking_check_sphere(*m, p, m->state({0.0, 0.0}), 1.0);
  CHECK(chk.linked);
  CHECK(static_cast<int>(chk.crossings.size()) == brute);
  CHECK(brute == 3);
}

TEST_CASE("deform_path: equilibrium nodes do not move") {
  auto m = make_builtin("doublewell");
  DiscretePath p;
  p.max_gap = 10.0;
  for (double x : {-1.0, 0.0, 1.0}) {
    p.nodes.push_back(m->state({x}));
    p.pinned.push_back(x != 0.0);
  }
  const DiscretePath out = deform_path(*m, p, 0.25);
  REQUIRE(out.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(out.nodes[i][0] - p.nodes[i][0]) < 1e-9);
}

TEST_CASE("deform_path: gradient flow moves interior nodes outward, sup nonincreasing") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 21, 0.2);
  double sup0 = 0;
  for (const auto& n : p.nodes) sup0 = std::max(sup0, phi(n));
  const DiscretePath out = deform_path(*m, p, 0.1);
  double sup1 = 0;
  for (const auto& n : out.nodes) sup1 = std::max(sup1, phi(n));
  CHECK(sup1 <= sup0 + 1e-12);
  // interior nodes move toward the wells; verify one against a dense
  // fixed-step reference
  const auto ref = oracles::rk4(
      [&m](double t, std::span<const double> u, std::span<double> du) { m->rhs(t, u, du); },
      {p.nodes[5][0]}, 0.0, 0.1, 8000);
  bool found = false;
  for (const auto& n : out.nodes) {
    if (std::abs(n[0] - ref[0]) < 1e-7) found = true;
  }
  CHECK(found);
}

TEST_CASE("deform_path: pinned middle node stays bit-identical") {
  auto m = make_builtin("doublewell");
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 9, 0.3);
  p.pinned[4] = true;
  const double pinned_val = p.nodes[4][0];
  DiscretePath out = deform_path(*m, p, 0.2);
  bool present = false;
  for (const auto& n : out.nodes) present = present || n[0] == pinned_val;
  CHECK(present);
}

TEST_CASE("deform_path: blown-up nodes are replaced by surviving midpoints") {
  // u' = u^2 blows past the threshold quickly for large seeds
  auto m = make_builtin("quadratic");
  m->policy.blow_up_norm = 1e3;
  DiscretePath p;
  p.max_gap = 1e9;
  p.nodes = {m->state({0.0}), m->state({900.0}), m->state({0.1}), m->state({0.5})};
  p.pinned = {true, false, false, true};
  const DiscretePath out = deform_path(*m, p, 1.0);
  REQUIRE(out.size() == 4);
  CHECK(std::isfinite(out.nodes[1][0]));
  CHECK(out.nodes[1][0] < 1e3);
}

TEST_CASE("deform_path: every interior node blowing up collapses the deformation") {
  auto m = make_builtin("quadratic");
  m->policy.blow_up_norm = 1e3;
  DiscretePath p;
  p.max_gap = 1e9;
  p.nodes = {m->state({0.0}), m->state({900.0}), m->state({950.0}), m->state({0.1})};
  p.pinned = {true, false, false, true};
  CHECK_THROWS_AS(deform_path(*m, p, 2.0), DeformationCollapse);
}

TEST_CASE("minimax_estimate: double-well saddle level 1.000 within 1e-3") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 40, 0.02);
  const MinimaxResult res = minimax_estimate(*m, phi, p, 500, 0.1, 1e-10);
  CHECK(std::abs(res.c - 1.0) <= 1e-3);
  // pinned endpoints never moved
  CHECK(res.final_path.nodes.front()[0] == -1.0);
  CHECK(res.final_path.nodes.back()[0] == 1.0);
}

TEST_CASE("minimax_estimate: 2d quartic saddle level 0.000 within 1e-3") {
  auto m = make_builtin("quartic2");
  const auto phi = quartic2_phi();
  const double mhalf = 1.0 / std::sqrt(2.0);
  DiscretePath p =
      make_line_path(m->state({-mhalf, 0.0}), m->state({mhalf, 0.0}), 41, 0.02);
  const MinimaxResult res = minimax_estimate(*m, phi, p, 500, 0.1, 1e-10);
  CHECK(std::abs(res.c - 0.0) <= 1e-3);
  const auto cands = invariant_candidates(*m, phi, res.final_path, res.c, 1e-3, 2e-2);
  REQUIRE(!cands.empty());
  double best = 1e9;
  for (const auto& cd : cands) best = std::min(best, euclid_norm(cd.state.c));
  CHECK(best <= 1e-2);
}

TEST_CASE("minimax_estimate: path already through the saddle keeps c constant") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 41, 0.06);
  // odd count puts a node exactly at the equilibrium x = 0
  const MinimaxResult res = minimax_estimate(*m, phi, p, 60, 0.1, 1e-12);
  for (const auto& r : res.records) CHECK(std::abs(r.c_estimate - 1.0) < 1e-12);
}

TEST_CASE("minimax monotonicity within the refinement budget") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 40, 0.02);
  const MinimaxResult res = minimax_estimate(*m, phi, p, 300, 0.1, 1e-12);
  const double lip = path_lipschitz(*m, res.final_path, phi);
  const double budget =
      (res.refinements + 1) * res.final_path.max_gap * std::max(lip, 1.0);
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    CHECK(res.records[i].c_estimate <= res.records[i - 1].c_estimate + budget);
  }
}

TEST_CASE("minimax lower bound from the sphere barrier") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p = make_line_path(m->state({-1.0}), m->state({1.0}), 40, 0.02);
  const auto link = linking_check_sphere(*m, p, m->state({-1.0}), 0.5);
  REQUIRE(link.linked);
  // barrier: inf of phi on the two sphere points around the left well
  const double beta =
      std::min(phi(m->state({-1.5})), phi(m->state({-0.5})));
  const MinimaxResult res = minimax_estimate(*m, phi, p, 300, 0.1, 1e-12);
  for (const auto& r : res.records) CHECK(r.c_estimate >= beta - 1e-9);
}

TEST_CASE("refinement never raises the sup beyond the local Lipschitz budget") {
  auto m = make_builtin("quartic2");
  const auto phi = quartic2_phi();
  DiscretePath p = make_line_path(m->state({-1.0, 0.4}), m->state({1.0, -0.3}), 5, 0.01);
  double sup0 = -1e18;
  for (const auto& n : p.nodes) sup0 = std::max(sup0, phi(n));
  const double lip = path_lipschitz(*m, p, phi);
  DiscretePath q = p;
  refine_path(*m, q);
  double sup1 = -1e18;
  for (const auto& n : q.nodes) sup1 = std::max(sup1, phi(n));
  CHECK(sup1 <= sup0 + lip * max_node_gap(*m, p) + 1e-12);
}

TEST_CASE("invariant_candidates: equilibria path qualifies everywhere with residual 0") {
  auto m = make_builtin("doublewell");
  const auto phi = doublewell_phi();
  DiscretePath p;
  p.max_gap = 10.0;
  p.nodes = {m->state({-1.0}), m->state({1.0})};
  p.pinned = {true, true};
  const auto cands = invariant_candidates(*m, phi, p, 0.0, 1e-9, 1e-12);
  REQUIRE(cands.size() == 2);
  for (const auto& cd : cands) CHECK(cd.residual == 0.0);
}

TEST_CASE("minimax records csv schema") {
  std::vector<MinimaxRecord> recs = {{0, 1.5, 3, 0.25}};
  const std::string csv = minimax_csv(recs);
  CHECK(csv.rfind("iter,c_estimate,arg_node,flow_residual\n", 0) == 0);
  CHECK(csv.find("0,1.5,3,0.25\n") != std::string::npos);
}
