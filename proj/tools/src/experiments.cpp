#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "semiflow/bebutov.hpp"
#include "semiflow/elliptic.hpp"
#include "semiflow/minimax.hpp"
#include "semiflow/probes.hpp"
#include "semiflow/region.hpp"
#include "semiflow/resonant_search.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/spectral.hpp"
#include "semiflow/wazewski.hpp"

namespace semiflow::cli {
namespace {

namespace fs = std::filesystem;

void emit(Report& rep, const std::string& out_dir, const std::string& name,
          const std::string& content) {
  write_text_file((fs::path(out_dir) / name).string(), content);
  rep.attach(name);
}

void echo_config(Report& rep, const Config& cfg) {
  for (const auto& [k, v] : cfg.entries()) rep.kv("config." + k, v);
}

// ---------------------------------------------------------------- verify --

void run_verify(const Config& cfg, Report& rep, const std::string& out_dir, Rng& rng) {
  cfg.require_known({"seed", "verify.semigroup_trials"});
  const int trials = static_cast<int>(cfg.get_int("verify.semigroup_trials", 100));

  // Semigroup property over the built-in systems.
  const std::vector<std::string> names = {"decay", "saddle", "hopf", "doublewell",
                                          "quartic2", "growth"};
  double worst_dev = 0;
  int inapplicable = 0;
  for (int t = 0; t < trials; ++t) {
    const auto& name = names[static_cast<std::size_t>(t) % names.size()];
    auto model = make_builtin(name);
    std::vector<double> x0(static_cast<std::size_t>(model->dim()));
    for (auto& v : x0) v = rng.uniform(-1.0, 1.0);
    const double s = rng.uniform(0.0, 1.0), tt = rng.uniform(0.0, 1.0);
    const auto chk = check_semigroup(*model, model->state(x0), s, tt,
                                     10 * model->policy.abs_tol);
    if (!chk.applicable) {
      ++inapplicable;
      continue;
    }
    worst_dev = std::max(worst_dev, chk.deviation);
  }
  rep.kv("semigroup.trials", static_cast<long long>(trials));
  rep.kv("semigroup.inapplicable", static_cast<long long>(inapplicable));
  rep.kv("semigroup.worst_deviation", worst_dev);
  rep.check("semigroup", worst_dev <= 10 * 1e-10,
            "worst deviation " + fmt_double(worst_dev));

  // Identity and determinism.
  {
    auto hopf = make_builtin("hopf");
    const StateVector x = hopf->state({0.3, -0.2});
    const Trajectory t0 = evolve(*hopf, x, 0);
    const bool id_ok = t0.samples() == 1 && t0.back().c == x.c;
    rep.check("identity_at_zero", id_ok, "");
    const Trajectory a = evolve(*hopf, x, 10.0);
    const Trajectory b = evolve(*hopf, x, 10.0);
    bool same = a.samples() == b.samples();
    for (int i = 0; same && i < a.samples(); ++i)
      same = a.times[i] == b.times[i] && a.states[i].c == b.states[i].c;
    rep.check("determinism", same, "");
  }

  // Blow-up threshold consistency.
  {
    auto quad = make_builtin("quadratic");
    const Trajectory t1 = evolve(*quad, quad->state({1.0}), 2.0);
    quad->policy.blow_up_norm *= 2;
    const Trajectory t2 = evolve(*quad, quad->state({1.0}), 2.0);
    const bool ok = t1.status == TrajectoryStatus::exploded &&
                    t2.status == TrajectoryStatus::exploded &&
                    t2.event_time >= t1.event_time - quad->policy.abs_tol;
    rep.kv("blowup.t_first", t1.event_time);
    rep.kv("blowup.t_doubled", t2.event_time);
    rep.check("blowup_consistency", ok, "");
  }

  // Omega-limit estimates: sink, saddle-on-stable-manifold, Hopf circle.
  {
    auto decay = make_builtin("decay");
    const auto est = omega_limit(*decay, decay->state({1.0}), 20.0, 5.0, 1e-6);
    rep.check("omega_sink",
              est.points.size() == 1 && std::abs(est.points[0][0]) < 1e-6,
              "clusters " + std::to_string(est.points.size()));

    auto saddle = make_builtin("saddle");
    const auto est2 = omega_limit(*saddle, saddle->state({0.0, 1.0}), 25.0, 5.0, 1e-6);
    rep.check("omega_stable_manifold",
              est2.points.size() == 1 && euclid_norm(est2.points[0].c) < 1e-6, "");

    auto hopf = make_builtin("hopf");
    hopf->policy.dt_max = 0.01;
    const auto circle =
        omega_limit(*hopf, hopf->state({0.1, 0.0}), 15.0, 7.0, 4e-4, 2.5e-4);
    double worst_out = 0;  // representative distance to the circle
    for (const auto& p : circle.points)
      worst_out = std::max(worst_out, std::abs(euclid_norm(p.c) - 1.0));
    // Coverage: max angular gap between representatives.
    std::vector<double> ang;
    for (const auto& p : circle.points) ang.push_back(std::atan2(p[1], p[0]));
    std::sort(ang.begin(), ang.end());
    double gap = 0;
    for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
    if (!ang.empty())
      gap = std::max(gap, ang.front() + 2 * 3.14159265358979323846 - ang.back());
    const double hausdorff = std::max(worst_out, gap / 2 + worst_out);
    rep.kv("hopf.representatives", static_cast<long long>(circle.points.size()));
    rep.kv("hopf.hausdorff", hausdorff);
    rep.check("omega_hopf_circle", hausdorff <= 1e-3,
              "hausdorff " + fmt_double(hausdorff));

    // Invariance probe: representatives stay near the set under short flow.
    double worst_drift = 0;
    for (const auto& p : circle.points) {
      const Trajectory tr = evolve(*hopf, p, 0.05);
      worst_drift = std::max(worst_drift, dist_to_set(*hopf, tr.back(), circle.points));
    }
    rep.check("omega_invariance_probe", worst_drift <= 2 * circle.cluster_tol,
              "drift " + fmt_double(worst_drift));

    Trajectory reps;
    for (std::size_t i = 0; i < circle.points.size(); ++i) {
      reps.times.push_back(static_cast<double>(i));
      reps.states.push_back(circle.points[i]);
    }
    emit(rep, out_dir, "hopf_omega.csv", trajectory_csv(reps));
  }

  // Spectral projections and quadrature exactness.
  {
    const SpectralModel sm = SpectralModel::make(16, 4.0, nl_arctan2());
    rep.kv("quadrature.orthogonality_error", sm.orthogonality_error());
    rep.check("quadrature_exact", sm.orthogonality_error() <= 1e-10, "");
    std::vector<double> coords(16);
    for (auto& v : coords) v = rng.uniform(-1.0, 1.0);
    const StateVector u = sm.state(coords);
    const StateVector pm = project(sm, u, Sector::minus);
    const StateVector pz = project(sm, u, Sector::zero);
    const StateVector pp = project(sm, u, Sector::plus);
    bool ok = true;
    for (int k = 0; k < 16; ++k) {
      ok = ok && project(sm, pp, Sector::plus)[k] == pp[k];
      ok = ok && project(sm, pp, Sector::minus)[k] == 0.0;
      ok = ok && pm[k] + pz[k] + pp[k] == u[k];
    }
    rep.check("projection_algebra", ok, "");
  }

  // Bebutov metric sanity on sampled records.
  {
    const int n = 41;
    TimeSeries a, b, c;
    a.t0 = b.t0 = c.t0 = -10;
    a.dt = b.dt = c.dt = 0.5;
    for (int i = 0; i < n; ++i) {
      const double t = a.t0 + 0.5 * i;
      a.samples.push_back(make_state({std::sin(t), std::cos(2 * t)}));
      b.samples.push_back(make_state({std::sin(t) + 0.3, std::cos(2 * t)}));
      c.samples.push_back(make_state({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
    }
    const double dab = bebutov_distance(a, b, 5).value;
    const double dba = bebutov_distance(b, a, 5).value;
    const double dac = bebutov_distance(a, c, 5).value;
    const double dbc = bebutov_distance(b, c, 5).value;
    rep.check("bebutov_symmetry", dab == dba, "");
    rep.check("bebutov_triangle", dac <= dab + dbc + 1e-12, "");
    rep.check("bebutov_bounded", dab <= 1.0 && dac <= 1.0, "");
    const double delta = 0.3;
    const double expect = (1.0 - std::pow(0.5, 5)) * delta / (1.0 + delta);
    rep.check("bebutov_offset_form", std::abs(dab - expect) <= 1e-12,
              "value " + fmt_double(dab));
  }
}

// ----------------------------------------------------------- mountain-pass --

void run_mountain_pass(const Config& cfg, Report& rep, const std::string& out_dir, Rng&) {
  cfg.require_known({"seed", "mp.problem", "mp.nodes", "mp.max_iters", "mp.dt",
                     "mp.stall_tol", "mp.expected_c", "mp.band", "mp.residual_tol"});
  const std::string problem = cfg.get_string("mp.problem", "doublewell");
  const int nodes = static_cast<int>(cfg.get_int("mp.nodes", 40));
  const int max_iters = static_cast<int>(cfg.get_int("mp.max_iters", 500));
  const double dt = cfg.get_double("mp.dt", 0.1);
  const double stall = cfg.get_double("mp.stall_tol", 1e-10);
  const double band = cfg.get_double("mp.band", 1e-3);
  const double residual_tol = cfg.get_double("mp.residual_tol", 2e-2);

  std::unique_ptr<CallbackModel> model;
  Functional phi;
  StateVector a, b, sphere_center;
  double sphere_radius = 0.5;
  if (problem == "doublewell") {
    model = make_builtin("doublewell");
    phi = [](const StateVector& x) {
      const double q = x[0] * x[0] - 1.0;
      return q * q;
    };
    a = model->state({-1.0});
    b = model->state({1.0});
    sphere_center = model->state({-1.0});
  } else if (problem == "quartic2") {
    model = make_builtin("quartic2");
    phi = [](const StateVector& x) {
      return std::pow(x[0], 4) - x[0] * x[0] + x[1] * x[1];
    };
    const double m = 1.0 / std::sqrt(2.0);
    a = model->state({-m, 0.0});
    b = model->state({m, 0.0});
    sphere_center = model->state({-m, 0.0});
  } else {
    throw ConfigError("mp.problem must equal doublewell or quartic2");
  }

  DiscretePath path = make_line_path(a, b, nodes, 0.02);
  const SphereLinkCheck link = linking_check_sphere(*model, path, sphere_center, sphere_radius);
  rep.kv("linking.crossings", static_cast<long long>(link.crossings.size()));
  rep.check("linking_sphere", link.linked, "");

  // Barrier level on the sphere (dense angular sampling).
  double beta = std::numeric_limits<double>::infinity();
  if (model->dim() == 1) {
    for (double s : {-1.0, 1.0}) {
      StateVector p = sphere_center;
      p[0] += s * sphere_radius;
      beta = std::min(beta, phi(p));
    }
  } else {
    for (int k = 0; k < 256; ++k) {
      const double th = 2 * 3.14159265358979323846 * k / 256;
      StateVector p = sphere_center;
      p[0] += sphere_radius * std::cos(th);
      p[1] += sphere_radius * std::sin(th);
      beta = std::min(beta, phi(p));
    }
  }
  rep.kv("barrier.beta", beta);

  const MinimaxResult mm = minimax_estimate(*model, phi, path, max_iters, dt, stall);
  rep.kv("minimax.c", mm.c);
  rep.kv("minimax.iterations", static_cast<long long>(mm.records.size() - 1));
  rep.kv("minimax.stalled", mm.stalled ? "true" : "false");
  rep.kv("minimax.refinements", static_cast<long long>(mm.refinements));

  if (cfg.has("mp.expected_c")) {
    const double expect = cfg.get_double("mp.expected_c", 0.0);
    rep.check("minimax_value", std::abs(mm.c - expect) <= 1e-3,
              "c " + fmt_double(mm.c) + " expected " + fmt_double(expect));
  }

  // Lower-bound property: the estimate never dips below the sphere barrier.
  double worst_below = 0;
  for (const auto& r : mm.records) worst_below = std::max(worst_below, beta - r.c_estimate);
  rep.check("minimax_lower_bound", worst_below <= 1e-6,
            "worst below barrier " + fmt_double(worst_below));

  const auto cands = invariant_candidates(*model, phi, mm.final_path, mm.c, band, residual_tol);
  rep.kv("candidates.count", static_cast<long long>(cands.size()));
  if (!cands.empty()) {
    const auto best = std::min_element(
        cands.begin(), cands.end(),
        [](const InvariantCandidate& x, const InvariantCandidate& y) {
          return x.residual < y.residual;
        });
    rep.kv("candidates.best_residual", best->residual);
    std::string coords;
    for (int i = 0; i < best->state.dim(); ++i)
      coords += (i ? "," : "") + fmt_double(best->state[i]);
    rep.kv("candidates.best_state", coords);
  }
  rep.check("invariant_candidate_found", !cands.empty(), "");

  emit(rep, out_dir, "minimax_records.csv", minimax_csv(mm.records));
  Trajectory final_nodes;
  for (int i = 0; i < mm.final_path.size(); ++i) {
    final_nodes.times.push_back(static_cast<double>(i));
    final_nodes.states.push_back(mm.final_path.nodes[static_cast<std::size_t>(i)]);
  }
  emit(rep, out_dir, "final_path.csv", trajectory_csv(final_nodes));
}

// ---------------------------------------------------------------- resonant --

ScalarNonlinearity pick_nonlinearity(const std::string& name) {
  if (name == "2atan") return nl_arctan2();
  if (name == "tanh") return nl_tanh();
  if (name == "zero") return nl_zero();
  throw ConfigError("resonant.f must equal 2atan, tanh or zero");
}

void run_resonant(const Config& cfg, Report& rep, const std::string& out_dir, Rng& rng) {
  cfg.require_known({"seed", "resonant.modes", "resonant.mu", "resonant.f",
                     "resonant.quad_points", "g.frequencies", "g.amplitudes", "g.profile",
                     "resonant.c", "resonant.rho", "resonant.horizon", "resonant.seeds",
                     "resonant.tol", "search.enable", "search.transient",
                     "search.record_horizon", "search.eps", "search.l_max", "search.seeds"});

  const int modes = static_cast<int>(cfg.get_int("resonant.modes", 16));
  const double mu = cfg.get_double("resonant.mu", 4.0);
  const int quad = static_cast<int>(cfg.get_int("resonant.quad_points", 0));
  const SpectralModel model =
      SpectralModel::make(modes, mu, pick_nonlinearity(cfg.get_string("resonant.f", "2atan")),
                          quad);

  const auto freqs = cfg.get_list("g.frequencies", {1.0, std::sqrt(2.0)});
  const auto amps = cfg.get_list("g.amplitudes", {0.25, 0.25});
  const auto prof = cfg.get_list("g.profile", {1.0, 0.6});
  const ForcingSignal g = ForcingSignal::quasiperiodic(freqs, amps, prof);
  rep.kv("g.inf", g.inf_g);
  rep.kv("g.sup", g.sup_g);

  const auto margins = landesman_lazer_margins(model, g);
  rep.kv("margins.m1", margins.m1);
  rep.kv("margins.m2", margins.m2);
  rep.check("landesman_lazer", margins.admissible, "");
  if (!margins.admissible) return;

  std::vector<double> s_grid;
  for (int i = -2000; i <= 2000; ++i) s_grid.push_back(i);
  const PotentialFloor floor = potential_floor_check(model, s_grid);
  rep.kv("floor.kappa", floor.kappa);
  rep.kv("floor.c0", floor.c0);
  rep.check("potential_floor", floor.pass,
            "worst violation " + fmt_double(floor.worst_violation));

  Rng th_rng = rng.fork(1);
  const InvarianceThresholds th = invariance_thresholds(model, g, th_rng);
  rep.kv("thresholds.mu_plus", th.mu_plus);
  rep.kv("thresholds.eps", th.eps);
  rep.kv("thresholds.lambda", th.lambda);
  rep.kv("thresholds.C_eps", th.C_eps);
  rep.kv("thresholds.rho1", th.rho1);
  rep.kv("thresholds.c1_sampled", th.c1);
  rep.kv("thresholds.c1_bound", th.c1_bound);
  rep.kv("thresholds.residual_threshold", th.threshold);
  rep.kv("thresholds.min_margin_at_c1", th.min_margin_at_c1);

  const double c = cfg.get_double("resonant.c", 35.0);
  const double rho = cfg.get_double("resonant.rho", 5.0);
  rep.check("region_parameters", c > std::max(th.c1, th.c1_bound) && rho > th.rho1,
            "c " + fmt_double(c) + " rho " + fmt_double(rho));

  const int n_seeds = static_cast<int>(cfg.get_int("resonant.seeds", 200));
  const double horizon = cfg.get_double("resonant.horizon", 100.0);
  const double tol = cfg.get_double("resonant.tol", 1e-6);
  Rng seed_rng = rng.fork(2);
  const auto seeds = sample_region_states(model, c, rho, n_seeds, seed_rng);
  const InvariantRegionReport region =
      invariant_region_check(model, g, th, c, rho, seeds, horizon, tol);
  rep.kv("region.seeds", static_cast<long long>(seeds.size()));
  rep.kv("region.full_horizon", static_cast<long long>(region.ran_full_horizon));
  rep.kv("region.unbounded_exits", static_cast<long long>(region.left_as_unbounded));
  rep.check("invariant_region_margins", region.margin_violations == 0,
            std::to_string(region.margin_violations) + " violations");
  rep.check("decay_envelope", region.envelope_violations == 0,
            std::to_string(region.envelope_violations) + " violations");
  if (region.witness) emit(rep, out_dir, "region_witness.csv", trajectory_csv(*region.witness));

  // Geometric linking exercise: a path inside W from the origin past the
  // sphere of radius r must cross it.
  {
    ResonantFlow flow(model, g);
    const double r = 1.0;
    StateVector far = model.zero_state();
    far[model.idx_zero().front() - 1] = 3.0 * r;
    DiscretePath wpath = make_line_path(model.zero_state(), far, 31, 0.5);
    const auto link = linking_check_sphere(flow, wpath, model.zero_state(), r);
    rep.check("w_slice_linking", link.linked,
              std::to_string(link.crossings.size()) + " crossings");
  }

  if (cfg.get_bool("search.enable", false)) {
    const double transient = cfg.get_double("search.transient", 1e3);
    const double rec_horizon = cfg.get_double("search.record_horizon", 1e4);
    const double eps = cfg.get_double("search.eps", 0.05);
    const double l_max = cfg.get_double("search.l_max", 100.0);
    const int search_seeds = static_cast<int>(cfg.get_int("search.seeds", 1));

    Rng search_rng = rng.fork(3);
    auto starts = sample_region_states(model, c, rho, search_seeds, search_rng, 0.3);
    SearchOptions opts;
    opts.l_ref = l_max;
    const BoundedSolutionResult sol =
        bounded_solution_search(model, g, starts, transient, rec_horizon, opts);
    rep.kv("search.sup_norm", sol.diag.sup_norm);
    rep.kv("search.j_min", sol.diag.j_min);
    rep.kv("search.j_max", sol.diag.j_max);
    rep.kv("search.max_jump", sol.diag.max_jump);
    rep.kv("search.mean_jump", sol.diag.mean_jump);
    rep.kv("search.segments", static_cast<long long>(sol.diag.segments));
    rep.kv("search.newton_iterations", static_cast<long long>(sol.diag.newton_iterations));
    rep.kv("search.defect_eps", sol.diag.defect_eps);
    rep.check("search_locked", sol.diag.locked, "");
    rep.check("search_bounded",
              std::isfinite(sol.diag.sup_norm) && sol.diag.j_min >= -c && sol.diag.j_max <= c,
              "J range [" + fmt_double(sol.diag.j_min) + ", " + fmt_double(sol.diag.j_max) +
                  "]");

    const StateMetric vmetric = [&model](const StateVector& x, const StateVector& y) {
      StateVector d = x;
      for (int i = 0; i < x.dim(); ++i) d[i] = x[i] - y[i];
      return model.norm_v(d);
    };
    std::vector<double> l_grid;
    for (double l = 10; l <= l_max + 1e-9; l += 10) l_grid.push_back(l);
    const RecurrenceReport rec = recurrence_test(sol.record, eps, l_grid, opts.n_max, vmetric);
    rep.kv("recurrence.worst_gap", rec.worst_gap);
    rep.kv("recurrence.smallest_l", rec.smallest_passing_l);
    rep.check("recurrence", rec.pass,
              "smallest l " + fmt_double(rec.smallest_passing_l) + " at eps " + fmt_double(eps));
    emit(rep, out_dir, "recurrence.csv", rec.csv());
    emit(rep, out_dir, "bounded_record.csv", trajectory_csv(record_to_trajectory(sol.record)));
  }
}

// ---------------------------------------------------------------- elliptic --

void run_elliptic(const Config& cfg, Report& rep, const std::string& out_dir, Rng& rng) {
  cfg.require_known({"seed", "elliptic.n", "elliptic.R_max", "elliptic.grid_points",
                     "elliptic.gamma", "elliptic.b_amp", "elliptic.b_width",
                     "elliptic.trial_count", "elliptic.path_nodes", "elliptic.max_iters",
                     "elliptic.dt", "elliptic.residual", "elliptic.cone_samples",
                     "elliptic.cone_horizon"});
  EllipticModel::Params p;
  p.n = static_cast<int>(cfg.get_int("elliptic.n", 3));
  p.R_max = cfg.get_double("elliptic.R_max", 24.0);
  p.grid_points = static_cast<int>(cfg.get_int("elliptic.grid_points", 800));
  p.gamma = cfg.get_double("elliptic.gamma", 0.5);
  const double b_amp = cfg.get_double("elliptic.b_amp", 2.0);
  const double b_width = cfg.get_double("elliptic.b_width", 1.5);
  p.a_of_r = [](double) { return 1.0; };
  p.b_of_r = [b_amp, b_width](double r) {
    return b_amp * std::exp(-(r / b_width) * (r / b_width));
  };
  const EllipticModel model = EllipticModel::make(p);

  std::vector<double> s_grid;
  for (int i = -40; i <= 40; ++i) s_grid.push_back(0.5 * i);
  const ConditionReport cond = validate_conditions(model, s_grid);
  rep.kv("conditions.ratio_margin", cond.ratio_margin);
  rep.check("hypotheses", cond.pass, "");
  if (!cond.pass) return;

  PositiveSolutionOptions opts;
  opts.path_nodes = static_cast<int>(cfg.get_int("elliptic.path_nodes", 33));
  opts.max_iters = static_cast<int>(cfg.get_int("elliptic.max_iters", 400));
  opts.deform_dt = cfg.get_double("elliptic.dt", 0.1);
  opts.residual_target = cfg.get_double("elliptic.residual", 1e-6);
  opts.mp_trials = static_cast<int>(cfg.get_int("elliptic.trial_count", 800));

  Rng search_rng = rng.fork(11);
  const PositiveSolutionResult sol = positive_solution_search(model, opts, search_rng);
  rep.kv("mp.c5_hat", sol.c5_hat);
  rep.kv("mp.rho", sol.rho);
  rep.kv("mp.barrier", sol.barrier);
  rep.kv("mp.s1", sol.s1);
  rep.kv("minimax.c", sol.c_estimate);
  rep.kv("solution.residual", sol.residual);
  rep.kv("solution.J", sol.j_value);
  rep.kv("solution.newton_iters", static_cast<long long>(sol.newton_iters));
  rep.kv("solution.max_clip", sol.max_clip);
  rep.check("barrier_quarter_rho2", sol.barrier >= 0.25 * sol.rho * sol.rho - 1e-9,
            "barrier " + fmt_double(sol.barrier));
  rep.check("solution_positive", sol.positive_ok, "");
  rep.check("solution_nontrivial", sol.nontrivial_ok, "");
  rep.check("solution_residual", sol.residual_ok, fmt_double(sol.residual));
  rep.check("solution_level_band", sol.band_ok,
            "J " + fmt_double(sol.j_value) + " in [" +
                fmt_double(0.25 * sol.rho * sol.rho - 1e-3) + ", " +
                fmt_double(sol.c_estimate + 1e-3) + "]");
  emit(rep, out_dir, "u_star.csv", profile_csv(model, sol.u_star));
  emit(rep, out_dir, "minimax_records.csv", minimax_csv(sol.records));

  // Cone invariance on random nonnegative seeds.
  {
    const int count = static_cast<int>(cfg.get_int("elliptic.cone_samples", 20));
    const double horizon = cfg.get_double("elliptic.cone_horizon", 5.0);
    Rng cone_rng = rng.fork(12);
    std::vector<StateVector> seeds;
    for (int k = 0; k < count; ++k) {
      std::vector<double> u(static_cast<std::size_t>(model.grid_points()));
      const double ctr = cone_rng.uniform(0.0, model.R_max() / 2);
      const double wid = cone_rng.uniform(0.5, 2.0);
      const double amp = cone_rng.uniform(0.1, 2.0);
      for (int i = 0; i < model.grid_points(); ++i) {
        const double z = (model.r(i) - ctr) / wid;
        u[static_cast<std::size_t>(i)] = amp * std::exp(-z * z);
      }
      seeds.push_back(model.state(std::move(u)));
    }
    const ConeReport cone = cone_invariance_check(model, seeds, horizon, 1e-7);
    rep.kv("cone.min_entry", cone.min_entry);
    rep.check("cone_invariance", cone.pass, fmt_double(cone.min_entry));
  }

  // Dissipativity along a transient within the band.
  {
    StateVector u0 = sol.u_star;
    for (int i = 0; i < u0.dim(); ++i) u0[i] *= 1.3;
    const Trajectory traj = parabolic_evolve(model, u0, 2.0, 1e-3);
    double jmax = 0;
    for (const auto& s : traj.states) jmax = std::max(jmax, std::abs(energy(model, s)));
    const double c_band = jmax + 0.5;
    const DissipativityReport dis = dissipativity_check(model, traj, c_band, 1e-6);
    rep.kv("dissipativity.worst_defect", dis.worst_defect);
    rep.kv("dissipativity.R0", dis.R0);
    rep.check("dissipativity", dis.pass, fmt_double(dis.worst_defect));

    const EnergyIdentityReport e1 = energy_identity_check(model, traj);
    rep.kv("energy_identity.rel_error", e1.max_rel_error);
    rep.check("energy_identity", e1.pass, fmt_double(e1.max_rel_error));
  }

  // Stability-at-infinity table on the band |J| <= c.
  {
    const double c_band = std::max(1.0, 2.0 * std::abs(sol.c_estimate));
    std::vector<double> radii;
    for (double f : {2.0, 3.0, 5.0, 8.0, 13.0}) radii.push_back(f);
    const auto starts = band_states_at_radii(model, radii, c_band);
    if (!starts.empty()) {
      ParabolicFlow flow(model);
      const Region band = region_band(
          [&model](const StateVector& x) { return energy(model, x); }, -c_band, c_band,
          "J-band");
      std::vector<double> inner = {0.5, 1.0, 1.5};
      const StabilityTable table = stability_probe_on_starts(flow, band, inner, starts, 30.0);
      rep.kv("stability.rows", static_cast<long long>(table.rows.size()));
      rep.check("stability_monotone", table.monotone(), "");
      rep.check("stability_nonempty", !table.rows.empty(), "");
      emit(rep, out_dir, "stability_table.csv", table.csv());
      if (table.counterexample)
        emit(rep, out_dir, "stability_counterexample.csv",
             trajectory_csv(*table.counterexample));
    } else {
      rep.check("stability_nonempty", false, "no band states reachable");
    }
  }
}

// ------------------------------------------------------------ quotient-demo --

void run_quotient_demo(const Config& cfg, Report& rep, const std::string& out_dir, Rng&) {
  cfg.require_known({"seed"});
  auto unit = make_builtin("unit_speed");
  WazewskiPairSpec pair;
  pair.N = region_interval(0.0, 1.0, "N=[0,1]");
  pair.E = region_zero_set([](const StateVector& x) { return x[0] - 1.0; }, "E={1}");
  pair.description = "unit speed on [0,1], exit at the right end";

  const QuotientState q1 = quotient_evolve(*unit, pair, unit->state({0.0}), 0.5);
  rep.check("quotient_interior", !q1.collapsed() && std::abs(q1.state[0] - 0.5) < 1e-8,
            "");
  const QuotientState q2 = quotient_evolve(*unit, pair, unit->state({0.0}), 1.5);
  rep.kv("quotient.collapse_time", q2.collapse_time.value_or(-1));
  rep.check("quotient_collapse",
            q2.collapsed() && std::abs(*q2.collapse_time - 1.0) < 1e-4, "");

  // Absorbing property under composition.
  const QuotientState q3 = quotient_evolve(*unit, pair, q2, 1.5, 2.0);
  rep.check("quotient_absorbing",
            q3.collapsed() && *q3.collapse_time == *q2.collapse_time, "");

  // Starting inside E collapses immediately.
  const QuotientState q4 = quotient_evolve(*unit, pair, unit->state({1.0}), 0.7);
  rep.check("quotient_e_start", q4.collapsed() && *q4.collapse_time == 0.0, "");

  // Blow-up route: u' = u^2 with E unreachable collapses via the norm
  // threshold at the closed-form time.
  auto quad = make_builtin("quadratic");
  WazewskiPairSpec pair2;
  pair2.N = region_sublevel([](const StateVector& x) { return x[0]; }, 1e6, "N={u<=1e6}");
  pair2.E = region_sublevel([](const StateVector& x) { return x[0]; }, 0.0, "E={u<=0}");
  const QuotientState q5 = quotient_evolve(*quad, pair2, quad->state({1.0}), 2.0);
  rep.kv("quotient.blowup_collapse_time", q5.collapse_time.value_or(-1));
  rep.check("quotient_blowup_collapse",
            q5.collapsed() && std::abs(*q5.collapse_time - (1.0 - 1e-6)) < 1e-4, "");

  // Semigroup deviation on the interior branch.
  const QuotientState a1 = quotient_evolve(*unit, pair, unit->state({0.0}), 0.7);
  const QuotientState a2 = quotient_evolve(*unit, pair, a1, 0.3, 0.2);
  const QuotientState direct = quotient_evolve(*unit, pair, unit->state({0.0}), 0.9);
  const double dev = (a2.collapsed() || direct.collapsed())
                         ? 1e9
                         : std::abs(a2.state[0] - direct.state[0]);
  rep.kv("quotient.semigroup_deviation", dev);
  rep.check("quotient_semigroup", dev <= 10 * unit->policy.abs_tol, "");

  // Exit-set verification on the saddle square.
  auto saddle = make_builtin("saddle");
  WazewskiPairSpec sq;
  sq.N = region_sublevel(
      [](const StateVector& x) { return std::max(std::abs(x[0]), std::abs(x[1])); }, 1.0,
      "unit square");
  sq.E = region_zero_set([](const StateVector& x) { return std::abs(x[0]) - 1.0; },
                         "|x|=1 faces");
  std::vector<StateVector> grid;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      grid.push_back(saddle->state({-1.0 + 2.0 * i / 9, -1.0 + 2.0 * j / 9}));
  const ExitSetReport exit_rep =
      exit_set_check(*saddle, sq, grid, 30.0, 100 * saddle->policy.abs_tol);
  rep.kv("exit.samples", static_cast<long long>(exit_rep.samples_checked));
  rep.kv("exit.lipschitz", exit_rep.lipschitz_estimate);
  rep.check("exit_set_saddle", exit_rep.pass,
            std::to_string(exit_rep.violations.size()) + " violations");

  // The deliberately wrong exit set fails with a witness.
  WazewskiPairSpec wrong;
  wrong.N = region_interval(0.0, 1.0, "N=[0,1]");
  wrong.E = region_zero_set([](const StateVector& x) { return x[0]; }, "E={0}");
  const ExitSetReport wrong_rep = exit_set_check(
      *unit, wrong, {unit->state({0.25})}, 5.0, 100 * unit->policy.abs_tol);
  rep.check("exit_set_negative_control", !wrong_rep.pass && !wrong_rep.violations.empty(),
            "");
  if (!wrong_rep.violations.empty())
    emit(rep, out_dir, "exit_witness.csv",
         trajectory_csv(wrong_rep.violations.front().trajectory));
}

// ---------------------------------------------------------- stability-probe --

void run_stability_probe(const Config& cfg, Report& rep, const std::string& out_dir,
                         Rng& rng) {
  cfg.require_known({"seed", "stability.model", "stability.inner_radii",
                     "stability.start_radii", "stability.samples", "stability.horizon"});
  const std::string which = cfg.get_string("stability.model", "growth");
  const auto inner = cfg.get_list("stability.inner_radii", {0.5, 1.0, 2.0});
  const auto startr = cfg.get_list("stability.start_radii", {0.5, 1.0, 2.0, 4.0, 8.0});
  const int per = static_cast<int>(cfg.get_int("stability.samples", 10));
  const double horizon = cfg.get_double("stability.horizon", 20.0);

  auto model = make_builtin(which);
  Region all;
  all.label = "everything";
  all.margin = [](const StateVector&) { return -1.0; };
  Rng probe_rng = rng.fork(21);
  const StabilityTable table =
      stability_at_infinity_probe(*model, all, inner, startr, per, horizon, probe_rng);
  rep.check("stability_monotone", table.monotone(), "");
  long long found = 0;
  for (const auto& row : table.rows)
    if (!std::isnan(row.R)) ++found;
  rep.kv("stability.rows_with_R", found);
  if (table.counterexample) {
    rep.kv("stability.counterexample_r", table.counterexample_r);
    emit(rep, out_dir, "counterexample.csv", trajectory_csv(*table.counterexample));
  }
  emit(rep, out_dir, "stability_table.csv", table.csv());
}

}  // namespace

bool known_experiment(const std::string& name) {
  return name == "verify" || name == "mountain-pass" || name == "resonant" ||
         name == "elliptic" || name == "quotient-demo" || name == "stability-probe";
}

std::string experiment_list() {
  return "verify, mountain-pass, resonant, elliptic, quotient-demo, stability-probe";
}

Report run_experiment(const std::string& name, const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  Report rep;
  rep.kv("experiment", name);
  echo_config(rep, cfg);
  Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed", 0)));

  if (name == "verify")
    run_verify(cfg, rep, out_dir, rng);
  else if (name == "mountain-pass")
    run_mountain_pass(cfg, rep, out_dir, rng);
  else if (name == "resonant")
    run_resonant(cfg, rep, out_dir, rng);
  else if (name == "elliptic")
    run_elliptic(cfg, rep, out_dir, rng);
  else if (name == "quotient-demo")
    run_quotient_demo(cfg, rep, out_dir, rng);
  else if (name == "stability-probe")
    run_stability_probe(cfg, rep, out_dir, rng);
  else
    throw ConfigError("unknown experiment `" + name + "`; expected one of " +
                      experiment_list());

  rep.kv("checks.total", static_cast<long long>(rep.checks_total()));
  rep.kv("checks.failed", static_cast<long long>(rep.checks_failed()));
  return rep;
}

}  // namespace semiflow::cli
