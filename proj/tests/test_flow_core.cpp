#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semiflow/integrate.hpp"
#include "semiflow/model.hpp"
#include "semiflow/probes.hpp"
#include "semiflow/region.hpp"
#include "semiflow/rng.hpp"

using namespace semiflow;

TEST_CASE("evolve: linear decay reaches the closed form") {
  auto m = make_builtin("decay");
  const Trajectory t = evolve(*m, m->state({1.0}), std::log(2.0));
  REQUIRE(t.status == TrajectoryStatus::completed);
  CHECK(t.times.back() == std::log(2.0));
  CHECK(std::abs(t.back()[0] - 0.5) < 1e-8);
}

TEST_CASE("evolve: zero horizon returns the initial state bit-exactly") {
  auto m = make_builtin("hopf");
  const StateVector x = m->state({0.12345678901234567, -0.4});
  const Trajectory t = evolve(*m, x, 0.0);
  CHECK(t.samples() == 1);
  CHECK(t.back().c == x.c);
}

TEST_CASE("evolve: quadratic growth explodes at the closed-form crossing") {
  auto m = make_builtin("quadratic");
  const Trajectory t = evolve(*m, m->state({1.0}), 2.0);
  REQUIRE(t.status == TrajectoryStatus::exploded);
  CHECK(!t.nonfinite_breakdown);
  // u(t) = 1/(1-t) crosses 1e6 at t = 1 - 1e-6
  const double expect = oracles::blowup_crossing_time(1.0, m->policy.blow_up_norm);
  CHECK(std::abs(t.event_time - expect) < 1e-5);
  CHECK(m->norm(t.back()) >= m->policy.blow_up_norm * (1 - 1e-9));
}

TEST_CASE("evolve: dimension mismatch is a hard error") {
  auto m = make_builtin("saddle");
  CHECK_THROWS_AS(evolve(*m, make_state({1.0}), 1.0), std::invalid_argument);
}

TEST_CASE("check_semigroup: s = 0 gives zero deviation") {
  auto m = make_builtin("hopf");
  const auto chk = check_semigroup(*m, m->state({0.3, 0.1}), 0.0, 1.3, 1e-12);
  REQUIRE(chk.applicable);
  CHECK(chk.deviation == 0.0);
}

TEST_CASE("check_semigroup: decay at s = t = 1") {
  auto m = make_builtin("decay");
  const auto chk = check_semigroup(*m, m->state({1.0}), 1.0, 1.0, 10 * m->policy.abs_tol);
  REQUIRE(chk.applicable);
  CHECK(chk.pass);
}

TEST_CASE("check_semigroup: hopf versus tight reference split") {
  auto m = make_builtin("hopf");
  Rng rng(7);
  for (int k = 0; k < 5; ++k) {
    const StateVector x = m->state({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    const auto chk = check_semigroup(*m, x, 0.3, 0.7, 10 * m->policy.abs_tol);
    REQUIRE(chk.applicable);
    CHECK(chk.pass);
    // cross-check the direct endpoint against an independent RK4 reference
    const Trajectory direct = evolve(*m, x, 1.0);
    const auto ref = oracles::rk4(
        [&m](double t, std::span<const double> u, std::span<double> du) {
          m->rhs(t, u, du);
        },
        x.c, 0.0, 1.0, 20000);
    CHECK(std::abs(direct.back()[0] - ref[0]) < 1e-8);
    CHECK(std::abs(direct.back()[1] - ref[1]) < 1e-8);
  }
}

TEST_CASE("semigroup property over built-ins, 100 random triples") {
  Rng rng(42);
  const std::vector<std::string> names = {"decay", "saddle", "hopf", "doublewell",
                                          "quartic2", "growth"};
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    auto m = make_builtin(names[static_cast<std::size_t>(k) % names.size()]);
    std::vector<double> x(static_cast<std::size_t>(m->dim()));
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const double s = rng.uniform(0.0, 1.0), t = rng.uniform(0.0, 1.0);
    const auto chk = check_semigroup(*m, m->state(x), s, t, 10 * m->policy.abs_tol);
    if (!chk.applicable) continue;
    ++checked;
    CHECK(chk.pass);
  }
  CHECK(checked >= 95);
}

TEST_CASE("determinism: identical runs produce identical trajectories") {
  auto m = make_builtin("hopf");
  const StateVector x = m->state({0.25, -0.75});
  const Trajectory a = evolve(*m, x, 7.0);
  const Trajectory b = evolve(*m, x, 7.0);
  REQUIRE(a.samples() == b.samples());
  for (int i = 0; i < a.samples(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.states[i].c == b.states[i].c);
  }
}

TEST_CASE("blow-up consistency under a doubled threshold") {
  auto m = make_builtin("quadratic");
  const Trajectory t1 = evolve(*m, m->state({2.0}), 1.0);
  REQUIRE(t1.status == TrajectoryStatus::exploded);
  m->policy.blow_up_norm *= 2;
  const Trajectory t2 = evolve(*m, m->state({2.0}), 1.0);
  REQUIRE(t2.status == TrajectoryStatus::exploded);
  CHECK(t2.event_time >= t1.event_time - m->policy.abs_tol);
}

TEST_CASE("escape_time: unit speed leaves [0,2] at t = 2") {
  auto m = make_builtin("unit_speed");
  const Region box = region_interval(0.0, 2.0);
  const auto esc = escape_time(*m, m->state({0.0}), box, 5.0);
  REQUIRE(esc.kind == EscapeResult::Kind::finite);
  CHECK(std::abs(esc.t - 2.0) < 1e-6);
}

TEST_CASE("escape_time: contraction never exits the unit ball") {
  auto m = make_builtin("decay");
  const Region ball = region_sublevel([](const StateVector& x) { return std::abs(x[0]); },
                                      1.0, "|u|<=1");
  const auto esc = escape_time(*m, m->state({0.5}), ball, 10.0);
  CHECK(esc.kind == EscapeResult::Kind::not_before);
  CHECK(esc.t == 10.0);
}

TEST_CASE("escape_time: quadratic growth exits the big ball near the blow-up time") {
  auto m = make_builtin("quadratic");
  const Region ball = region_sublevel([](const StateVector& x) { return std::abs(x[0]); },
                                      1e6, "|u|<=1e6");
  const auto esc = escape_time(*m, m->state({1.0}), ball, 2.0);
  REQUIRE(esc.kind == EscapeResult::Kind::finite);
  CHECK(std::abs(esc.t - (1.0 - 1e-6)) < 1e-4);
}

TEST_CASE("escape_time: starting outside is a precondition error") {
  auto m = make_builtin("decay");
  const Region box = region_interval(0.0, 1.0);
  CHECK_THROWS_AS(escape_time(*m, m->state({2.0}), box, 1.0), std::invalid_argument);
}

TEST_CASE("omega_limit: global sink clusters at the origin") {
  auto m = make_builtin("decay");
  const auto est = omega_limit(*m, m->state({1.0}), 20.0, 5.0, 1e-6);
  REQUIRE(est.points.size() == 1);
  CHECK(std::abs(est.points[0][0]) < 1e-6);
}

TEST_CASE("omega_limit: hopf tail sits on the unit circle") {
  auto m = make_builtin("hopf");
  m->policy.dt_max = 0.01;
  const auto est = omega_limit(*m, m->state({0.1, 0.0}), 15.0, 7.0, 4e-4, 2.5e-4);
  REQUIRE(est.points.size() > 100);
  // closed-form check that the burn-in put the tail on the circle
  CHECK(std::abs(oracles::hopf_radius(0.1, 15.0) - 1.0) < 1e-9);
  double worst = 0;
  for (const auto& p : est.points)
    worst = std::max(worst, std::abs(euclid_norm(p.c) - 1.0));
  CHECK(worst < 1e-3);
  // representatives are pairwise separated and nonredundant
  for (std::size_t i = 1; i < est.points.size(); ++i)
    CHECK(euclid_dist(est.points[i], est.points[i - 1]) > est.cluster_tol);
}

TEST_CASE("omega_limit: saddle stable manifold lands at the origin") {
  auto m = make_builtin("saddle");
  const auto est = omega_limit(*m, m->state({0.0, 1.0}), 25.0, 5.0, 1e-6);
  REQUIRE(est.points.size() == 1);
  CHECK(euclid_norm(est.points[0].c) < 1e-6);
}

TEST_CASE("omega_limit: growth reports an unbounded tail") {
  auto m = make_builtin("growth");
  CHECK_THROWS_AS(omega_limit(*m, m->state({1.0}), 1.0, 5.0, 1e-3), UnboundedTailError);
}

TEST_CASE("lyapunov_monotonicity: gradient flow descends its potential") {
  auto m = make_builtin("doublewell");
  const auto phi = [](const StateVector& x) {
    const double q = x[0] * x[0] - 1.0;
    return q * q;
  };
  const Trajectory traj = evolve(*m, m->state({0.3}), 5.0, 0.01);
  const auto rep = lyapunov_monotonicity(*m, phi, traj, 10 * m->policy.abs_tol);
  CHECK(rep.pass);
}

TEST_CASE("lyapunov_monotonicity: constant trajectory has zero increase") {
  auto m = make_builtin("doublewell");
  const Trajectory traj = evolve(*m, m->state({1.0}), 3.0, 0.05);  // equilibrium
  const auto rep = lyapunov_monotonicity(
      *m, [](const StateVector& x) { return x[0]; }, traj, 1e-12);
  CHECK(rep.max_increase == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("lyapunov_monotonicity: floor restricts the counted pairs") {
  auto m = make_builtin("hopf");  // r grows toward 1: phi = r^2 increases below the floor
  const auto phi = [](const StateVector& x) { return x[0] * x[0] + x[1] * x[1]; };
  const Trajectory traj = evolve(*m, m->state({0.1, 0.0}), 6.0, 0.01);
  const auto unrestricted = lyapunov_monotonicity(*m, phi, traj, 1e-12);
  CHECK(!unrestricted.pass);
  const auto floored = lyapunov_monotonicity(*m, phi, traj, 1e-9, 2.0);
  CHECK(floored.pairs_checked == 0);
  CHECK(floored.pass);
}

TEST_CASE("attraction_probe: decay attracts the unit sphere with entry near ln(1/eps)") {
  auto m = make_builtin("decay");
  LimitSetEstimate target;
  target.points.push_back(m->state({0.0}));
  target.cluster_tol = 1e-6;
  const double eps = 1e-3;
  const auto rep = attraction_probe(*m, target, {m->state({1.0}), m->state({-1.0})}, 20.0,
                                    eps, 0.002);
  CHECK(rep.fraction_attracted == 1.0);
  for (const auto& r : rep.per_start) CHECK(std::abs(r.entry_time - std::log(1 / eps)) < 0.05);
}

TEST_CASE("attraction_probe: hopf circle attracts from both sides") {
  auto m = make_builtin("hopf");
  m->policy.dt_max = 0.01;
  const auto circle = omega_limit(*m, m->state({0.1, 0.0}), 15.0, 7.0, 1e-3, 5e-4);
  const auto rep = attraction_probe(
      *m, circle, {m->state({0.1, 0.0}), m->state({2.0, 0.0})}, 25.0, 5e-3, 0.01);
  CHECK(rep.fraction_attracted == 1.0);
}

TEST_CASE("attraction_probe: saddle does not attract the unstable direction") {
  auto m = make_builtin("saddle");
  LimitSetEstimate target;
  target.points.push_back(m->state({0.0, 0.0}));
  target.cluster_tol = 1e-6;
  const auto rep = attraction_probe(*m, target, {m->state({1.0, 0.0})}, 10.0, 0.1, 0.01);
  CHECK(rep.fraction_attracted == 0.0);
}

TEST_CASE("omega-limit invariance probe on the hopf circle") {
  auto m = make_builtin("hopf");
  m->policy.dt_max = 0.01;
  const auto est = omega_limit(*m, m->state({0.1, 0.0}), 15.0, 7.0, 1e-3, 5e-4);
  double worst = 0;
  int k = 0;
  for (const auto& p : est.points) {
    if (++k % 50 != 0) continue;  // spot-check a spread of representatives
    const Trajectory t = evolve(*m, p, 0.05);
    worst = std::max(worst, dist_to_set(*m, t.back(), est.points));
  }
  CHECK(worst <= 2 * est.cluster_tol);
}

TEST_CASE("trajectory csv schema") {
  auto m = make_builtin("saddle");
  const Trajectory t = evolve(*m, m->state({0.5, 0.5}), 0.2, 0.1);
  const std::string csv = trajectory_csv(t);
  CHECK(csv.substr(0, 8) == "t,c0,c1\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == t.samples() + 1);
}
