#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semiflow/bebutov.hpp"
#include "semiflow/resonant_search.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/spectral.hpp"

using namespace semiflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpectralModel canonical_model(int modes = 16) {
  return SpectralModel::make(modes, 4.0, nl_arctan2());
}

StateMetric vnorm_metric(const SpectralModel& m) {
  return [&m](const StateVector& a, const StateVector& b) {
    StateVector d = a;
    for (int i = 0; i < a.dim(); ++i) d[i] = a[i] - b[i];
    return m.norm_v(d);
  };
}

}  // namespace

TEST_CASE("quadrature: sine products integrate exactly") {
  const SpectralModel m = canonical_model();
  CHECK(m.orthogonality_error() <= 1e-10);
}

TEST_CASE("galerkin rhs: linear diagonal part on unit modes") {
  const SpectralModel m = SpectralModel::make(8, 4.0, nl_zero());
  const ForcingSignal g = ForcingSignal::zero();
  for (int k : {1, 3, 5}) {
    const StateVector du = galerkin_rhs(m, g, {}, m.unit_mode(k), 0.0);
    for (int j = 1; j <= 8; ++j) {
      const double expect = (j == k) ? -(m.lambda(k) - 4.0) : 0.0;
      CHECK(std::abs(du[j - 1] - expect) < 1e-12);
    }
  }
}

TEST_CASE("galerkin rhs: the kernel mode is stationary for f = 0, g = 0") {
  const SpectralModel m = SpectralModel::make(8, 4.0, nl_zero());
  const StateVector du = galerkin_rhs(m, ForcingSignal::zero(), {}, m.unit_mode(2), 0.0);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(du[j]) < 1e-14);
}

TEST_CASE("galerkin rhs: arctan projection against adaptive quadrature") {
  const SpectralModel m = canonical_model();
  const StateVector du = galerkin_rhs(m, ForcingSignal::zero(), {}, m.unit_mode(1), 0.0);
  // mode 1: 3 u1 + (2/pi) integral of 2 atan(sin x) sin x
  const double integral = oracles::integrate(
      [](double x) { return 2.0 * std::atan(std::sin(x)) * std::sin(x); }, 0.0, kPi);
  CHECK(std::abs(du[0] - (3.0 + 2.0 / kPi * integral)) < 1e-8);
  // a higher mode picks up only the odd harmonics of f(sin x)
  const double i3 = oracles::integrate(
      [](double x) { return 2.0 * std::atan(std::sin(x)) * std::sin(3 * x); }, 0.0, kPi);
  CHECK(std::abs(du[2] - (2.0 / kPi) * i3) < 1e-8);
}

TEST_CASE("projections: sector membership for mu = 4 and the exact algebra") {
  const SpectralModel m = canonical_model();
  CHECK(project(m, m.unit_mode(1), Sector::minus)[0] == 1.0);
  CHECK(project(m, m.unit_mode(2), Sector::zero)[1] == 1.0);
  Rng rng(5);
  std::vector<double> coords(16);
  for (auto& v : coords) v = rng.uniform(-2.0, 2.0);
  const StateVector u = m.state(coords);
  const auto pm = project(m, u, Sector::minus);
  const auto pz = project(m, u, Sector::zero);
  const auto pp = project(m, u, Sector::plus);
  for (int k = 0; k < 16; ++k) {
    CHECK(project(m, pp, Sector::plus)[k] == pp[k]);   // idempotent
    CHECK(project(m, pp, Sector::minus)[k] == 0.0);    // disjoint
    CHECK(pm[k] + pz[k] + pp[k] == u[k]);              // resolution of identity
  }
}

TEST_CASE("energy: zero state and a pure plus mode") {
  const SpectralModel mz = SpectralModel::make(8, 4.0, nl_zero());
  CHECK(energy(mz, mz.zero_state()) == 0.0);
  // J(e3) = (1/2)(9 - 4)(pi/2) = 5 pi / 4
  CHECK(std::abs(energy(mz, mz.unit_mode(3)) - 5.0 * kPi / 4.0) < 1e-12);
}

TEST_CASE("energy: arctan potential term against adaptive quadrature") {
  const SpectralModel m = canonical_model();
  for (double s : {0.5, 1.0, 2.0}) {
    StateVector u = m.unit_mode(2);
    u[1] = s;
    const double expect = -oracles::integrate(
        [s](double x) {
          const double v = s * std::sin(2 * x);
          return 2.0 * v * std::atan(v) - std::log1p(v * v);
        },
        0.0, kPi);
    CHECK(std::abs(energy(m, u) - expect) < 1e-8);
  }
}

TEST_CASE("landesman-lazer margins") {
  const SpectralModel m = canonical_model();
  const auto z = landesman_lazer_margins(m, ForcingSignal::zero());
  CHECK(z.m1 == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(z.m2 == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(z.admissible);

  // sup g = f_under exactly: rejected
  ForcingSignal g = ForcingSignal::quasiperiodic({1.0}, {kPi}, {1.0});
  const auto bad = landesman_lazer_margins(m, g);
  CHECK(bad.m2 <= 0);
  CHECK(!bad.admissible);

  ForcingSignal ok = ForcingSignal::quasiperiodic({1.0, std::sqrt(2.0)}, {0.25, 0.25},
                                                  {1.0, 0.6});
  const auto fine = landesman_lazer_margins(m, ok);
  CHECK(fine.m1 == doctest::Approx(kPi - 0.5).epsilon(1e-12));
  CHECK(fine.m2 == doctest::Approx(kPi - 0.5).epsilon(1e-12));
  CHECK(fine.admissible);
}

TEST_CASE("potential floor: arctan gives kappa = pi/2 and a finite deficit") {
  const SpectralModel m = canonical_model();
  std::vector<double> grid;
  for (int i = -2000; i <= 2000; ++i) grid.push_back(i);
  const auto floor = potential_floor_check(m, grid);
  CHECK(floor.kappa == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(floor.pass);
  CHECK(floor.c0 > 0);
  CHECK(floor.c0 < 1.0);
  // independent check of the deficit maximum near s = pi/4
  double best = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = -5.0 + i * 1e-3;
    const double F = 2 * s * std::atan(s) - std::log1p(s * s);
    best = std::max(best, kPi / 2 * std::abs(s) - F);
  }
  CHECK(floor.c0 == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("potential floor: tanh gives kappa = 1/2; zero f is rejected") {
  const SpectralModel mt = SpectralModel::make(8, 4.0, nl_tanh());
  std::vector<double> grid;
  for (int i = -2400; i <= 2400; ++i) grid.push_back(0.5 * i);
  const auto floor = potential_floor_check(mt, grid);
  CHECK(floor.kappa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(floor.pass);

  const SpectralModel mz = SpectralModel::make(8, 4.0, nl_zero());
  CHECK_THROWS_AS(potential_floor_check(mz, grid), std::invalid_argument);
}

TEST_CASE("invariance thresholds: mu+, lambda, and the residual threshold") {
  const SpectralModel m = canonical_model();
  const ForcingSignal g = ForcingSignal::zero();
  Rng rng(11);
  const auto th = invariance_thresholds(m, g, rng, 2000);
  CHECK(th.mu_plus == 9.0);
  CHECK(th.eps == doctest::Approx((9.0 - 4.0) / 18.0).epsilon(1e-15));
  CHECK(th.lambda == doctest::Approx(2.5).epsilon(1e-12));
  // threshold 3 M sqrt(pi) with M = pi
  CHECK(th.threshold == doctest::Approx(3.0 * std::pow(kPi, 1.5)).epsilon(1e-12));
  CHECK(th.rho1 == doctest::Approx(std::sqrt(th.C_eps / th.lambda)).epsilon(1e-12));
  CHECK(th.c1 > 0);
  CHECK(th.c1 <= 1.5 * th.c1_bound);

  // degenerate f = 0: threshold collapses to zero, any level works
  const SpectralModel mz = SpectralModel::make(8, 4.0, nl_zero());
  Rng rng2(12);
  const auto thz = invariance_thresholds(mz, g, rng2, 500);
  CHECK(thz.threshold == 0.0);
  CHECK(thz.c1_bound == 0.0);
  CHECK(thz.c1 > 0.0);  // smallest tested level
}

TEST_CASE("invariant region: kernel equilibrium of the degenerate model stays put") {
  const SpectralModel mz = SpectralModel::make(8, 4.0, nl_zero());
  const ForcingSignal g = ForcingSignal::zero();
  Rng rng(13);
  auto th = invariance_thresholds(mz, g, rng, 500);
  const StateVector e2 = mz.unit_mode(2);
  // N_{c,rho} with c, rho comfortably above the thresholds
  const auto rep = invariant_region_check(mz, g, th, th.c1 + 5.0, th.rho1 + 3.0, {e2},
                                          20.0, 1e-6, 0.1);
  CHECK(rep.pass);
  CHECK(rep.ran_full_horizon == 1);
  CHECK(rep.seeds[0].worst_p_margin <= 1e-12);
}

TEST_CASE("invariant region: the plus part decays under the envelope") {
  const SpectralModel m = canonical_model(8);
  const ForcingSignal g = ForcingSignal::zero();
  Rng rng(14);
  const auto th = invariance_thresholds(m, g, rng, 2000);
  const double c = std::max(th.c1, th.c1_bound) + 5.0;
  const double rho = th.rho1 + 2.0;
  // seed with a large plus component right at the rho boundary
  StateVector seed = m.zero_state();
  seed[2] = rho / m.norm_v(m.unit_mode(3));  // mode 3 carries lambda = 9
  const auto rep = invariant_region_check(m, g, th, c, rho, {seed}, 10.0, 1e-6, 0.02);
  CHECK(rep.envelope_violations == 0);
  CHECK(rep.margin_violations == 0);
}

TEST_CASE("sampled sweep stays inside N_{c,rho} until unbounded exit") {
  const SpectralModel m = canonical_model();
  const ForcingSignal g =
      ForcingSignal::quasiperiodic({1.0, std::sqrt(2.0)}, {0.25, 0.25}, {1.0, 0.6});
  Rng rng(15);
  const auto th = invariance_thresholds(m, g, rng, 3000);
  const double c = std::max(th.c1, th.c1_bound) * 1.2;
  const double rho = th.rho1 * 1.3;
  Rng seeds_rng(16);
  const auto seeds = sample_region_states(m, c, rho, 25, seeds_rng);
  const auto rep = invariant_region_check(m, g, th, c, rho, seeds, 40.0, 1e-6);
  CHECK(rep.margin_violations == 0);
  CHECK(rep.envelope_violations == 0);
  // the resonant and negative directions send most seeds off to infinity
  CHECK(rep.left_as_unbounded > 0);
}

TEST_CASE("bebutov distance: identical records, constant offset, boundedness") {
  TimeSeries u, v;
  u.t0 = v.t0 = -6;
  u.dt = v.dt = 0.25;
  for (int i = 0; i <= 48; ++i) {
    const double t = -6 + 0.25 * i;
    u.samples.push_back(make_state({std::sin(t)}));
    v.samples.push_back(make_state({std::sin(t) + 0.7}));
  }
  CHECK(bebutov_distance(u, u, 5).value == 0.0);
  const auto d = bebutov_distance(u, v, 5);
  const double delta = 0.7;
  CHECK(std::abs(d.value - (1 - std::pow(0.5, 5)) * delta / (1 + delta)) <= 1e-12);
  CHECK(d.value <= 1.0);
  CHECK(d.truncation_bound == std::pow(0.5, 5));
}

TEST_CASE("bebutov distance: symmetry and triangle inequality over random triples") {
  Rng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    TimeSeries a, b, c;
    a.t0 = b.t0 = c.t0 = -5;
    a.dt = b.dt = c.dt = 0.5;
    for (int i = 0; i <= 20; ++i) {
      a.samples.push_back(make_state({rng.uniform(-2.0, 2.0)}));
      b.samples.push_back(make_state({rng.uniform(-2.0, 2.0)}));
      c.samples.push_back(make_state({rng.uniform(-2.0, 2.0)}));
    }
    const double ab = bebutov_distance(a, b, 5).value;
    const double ba = bebutov_distance(b, a, 5).value;
    const double ac = bebutov_distance(a, c, 5).value;
    const double cb = bebutov_distance(c, b, 5).value;
    CHECK(ab == ba);
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("bebutov distance: insufficient coverage is a precondition error") {
  TimeSeries u;
  u.t0 = -2;
  u.dt = 0.5;
  for (int i = 0; i <= 8; ++i) u.samples.push_back(make_state({0.0}));
  CHECK_THROWS_AS(bebutov_distance(u, u, 5), std::invalid_argument);
}

TEST_CASE("recurrence: constant records pass at every window length") {
  TimeSeries r;
  r.t0 = 0;
  r.dt = 0.25;
  for (int i = 0; i <= 1600; ++i) r.samples.push_back(make_state({1.0}));
  const auto rep = recurrence_test(r, 1e-6, {10.0, 40.0, 100.0}, 5);
  CHECK(rep.pass);
  CHECK(rep.smallest_passing_l == 10.0);
  CHECK(rep.worst_gap <= 0.25 + 1e-12);
}

TEST_CASE("recurrence: periodic record recurs within one period") {
  const double period = 7.0;
  TimeSeries r;
  r.t0 = 0;
  r.dt = 0.25;
  for (int i = 0; i <= 1600; ++i) {
    const double t = 0.25 * i;
    r.samples.push_back(
        make_state({std::sin(2 * kPi * t / period), std::cos(2 * kPi * t / period)}));
  }
  std::vector<double> grid;
  for (double l = 1.0; l <= 100.0; l += 1.0) grid.push_back(l);
  const auto rep = recurrence_test(r, 0.05, grid, 5);
  CHECK(rep.pass);
  CHECK(rep.smallest_passing_l <= period + 1.0);
}

TEST_CASE("recurrence: white-noise record fails at small eps") {
  Rng rng(31);
  TimeSeries r;
  r.t0 = 0;
  r.dt = 0.25;
  for (int i = 0; i <= 1600; ++i)
    r.samples.push_back(make_state({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
  const auto rep = recurrence_test(r, 1e-3, {10.0, 40.0, 100.0}, 5);
  CHECK(!rep.pass);
}

TEST_CASE("recurrence csv schema") {
  TimeSeries r;
  r.t0 = 0;
  r.dt = 0.5;
  for (int i = 0; i <= 700; ++i) r.samples.push_back(make_state({0.0}));
  const auto rep = recurrence_test(r, 0.01, {20.0, 100.0}, 5);
  const std::string csv = rep.csv();
  CHECK(csv.rfind("l,eps,worst_gap,pass\n", 0) == 0);
  CHECK(csv.find(",0.01,") != std::string::npos);
}

TEST_CASE("skew-product cocycle: shifting the forcing splits the evolution") {
  const SpectralModel m = canonical_model(8);
  const ForcingSignal g =
      ForcingSignal::quasiperiodic({1.0, std::sqrt(2.0)}, {0.2, 0.2}, {1.0, 0.6});
  Rng rng(41);
  std::vector<double> coords(8);
  for (auto& v : coords) v = 0.2 * rng.normal();
  const StateVector x = m.state(coords);

  ResonantFlow flow0(m, g, HullShift{0.0});
  const double s = 0.8, t = 0.9;
  const Trajectory direct = evolve(flow0, x, s + t);
  const Trajectory leg1 = evolve(flow0, x, s);
  ResonantFlow flow_s(m, g, HullShift{s});
  const Trajectory leg2 = evolve(flow_s, leg1.back(), t);
  REQUIRE(direct.status == TrajectoryStatus::completed);
  REQUIRE(leg2.status == TrajectoryStatus::completed);
  StateVector diff = direct.back();
  for (int i = 0; i < diff.dim(); ++i) diff[i] -= leg2.back()[i];
  CHECK(m.norm_v(diff) <= 20 * flow0.policy.abs_tol);
}

TEST_CASE("bounded solution search: autonomous case converges to the equilibrium") {
  const SpectralModel m = canonical_model(8);
  const ForcingSignal g = ForcingSignal::zero();
  Rng rng(51);
  std::vector<double> coords(8);
  for (auto& v : coords) v = 0.3 * rng.normal();
  SearchOptions opts;
  opts.l_ref = 40.0;
  const auto sol = bounded_solution_search(m, g, {m.state(coords)}, 40.0, 160.0, opts);
  CHECK(sol.diag.locked);
  CHECK(sol.diag.sup_norm < 1.0);
  // for g = 0 and f(0) = 0 the bounded solution is the origin; the tail of
  // the record must sink into it
  const StateVector& tail = sol.record.samples.back();
  CHECK(m.norm_v(tail) < 1e-3);
  // recurrence at tiny eps: the record is eventually constant
  const auto rec = recurrence_test(sol.record, 1e-3, {20.0, 40.0}, 5, vnorm_metric(m));
  CHECK(rec.pass);
}

TEST_CASE("bounded solution search: quasiperiodic forcing keeps a small bounded record") {
  const SpectralModel m = canonical_model(8);
  const ForcingSignal g =
      ForcingSignal::quasiperiodic({1.0, std::sqrt(2.0)}, {0.25, 0.25}, {1.0, 0.6});
  Rng rng(52);
  std::vector<double> coords(8);
  for (auto& v : coords) v = 0.2 * rng.normal();
  SearchOptions opts;
  opts.l_ref = 60.0;
  const auto sol = bounded_solution_search(m, g, {m.state(coords)}, 60.0, 400.0, opts);
  CHECK(sol.diag.locked);
  CHECK(sol.diag.sup_norm < 2.0);
  CHECK(sol.diag.max_jump < 5e-3);
  CHECK(std::abs(sol.diag.j_min) < 5.0);
  CHECK(std::abs(sol.diag.j_max) < 5.0);
}
