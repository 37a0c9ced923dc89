#include "semiflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiflow {
namespace {

constexpr double kPi = 3.14159265358979323846;

SpaceId spectral_space_id(int modes, double mu, int quad) {
  const auto h = static_cast<SpaceId>(modes * 2654435761u) ^
                 static_cast<SpaceId>(quad * 40503u) ^
                 static_cast<SpaceId>(static_cast<long long>(mu * 4096.0));
  return 0x10000000u | (h & 0x0fffffffu);
}

thread_local std::vector<double> tl_nodes_a, tl_nodes_b;

}  // namespace

ScalarNonlinearity nl_arctan2() {
  ScalarNonlinearity n;
  n.f = [](double s) { return 2.0 * std::atan(s); };
  n.F = [](double s) { return 2.0 * s * std::atan(s) - std::log1p(s * s); };
  n.f_bar = kPi;
  n.f_under = kPi;
  n.M = kPi;
  n.name = "2atan";
  return n;
}

ScalarNonlinearity nl_tanh() {
  ScalarNonlinearity n;
  n.f = [](double s) { return std::tanh(s); };
  n.F = [](double s) {
    // log cosh without overflow
    const double a = std::abs(s);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
  };
  n.f_bar = 1;
  n.f_under = 1;
  n.M = 1;
  n.name = "tanh";
  return n;
}

ScalarNonlinearity nl_zero() {
  ScalarNonlinearity n;
  n.f = [](double) { return 0.0; };
  n.F = [](double) { return 0.0; };
  n.name = "zero";
  return n;
}

SpectralModel SpectralModel::make(int modes, double mu, ScalarNonlinearity f,
                                  int quad_points) {
  if (modes < 1) throw std::invalid_argument("SpectralModel: modes must be >= 1");
  if (quad_points <= 0) quad_points = 4 * modes + 1;
  if (quad_points < 2 * modes)
    throw std::invalid_argument("SpectralModel: quadrature order must be >= 2*modes");

  SpectralModel m;
  m.m_ = modes;
  m.mu_ = mu;
  m.f_ = std::move(f);
  m.space_ = spectral_space_id(modes, mu, quad_points);

  bool resonant = false;
  for (int k = 1; k <= modes; ++k) {
    const double lk = m.lambda(k);
    if (lk == mu) {
      m.idx_zero_.push_back(k);
      resonant = true;
    } else if (lk < mu) {
      m.idx_minus_.push_back(k);
    } else {
      m.idx_plus_.push_back(k);
    }
  }
  if (!resonant)
    throw std::invalid_argument("SpectralModel: mu must equal an eigenvalue k^2, k <= modes");

  const int q = quad_points;
  const int nsub = q + 1;
  m.nodes_.resize(q);
  m.weights_.assign(q, kPi / nsub);
  for (int i = 0; i < q; ++i) m.nodes_[i] = kPi * (i + 1) / nsub;
  m.sin_.resize(static_cast<std::size_t>(modes) * q);
  for (int k = 1; k <= modes; ++k)
    for (int i = 0; i < q; ++i)
      m.sin_[static_cast<std::size_t>(k - 1) * q + i] = std::sin(k * m.nodes_[i]);

  // The uniform sine grid gives <sin j, sin k> = (pi/2) delta_jk exactly;
  // verify to guard against a mis-sized table.
  double worst = 0;
  for (int j = 1; j <= modes; ++j) {
    for (int k = j; k <= modes; ++k) {
      double s = 0;
      for (int i = 0; i < q; ++i)
        s += m.weights_[i] * m.sin_[static_cast<std::size_t>(j - 1) * q + i] *
             m.sin_[static_cast<std::size_t>(k - 1) * q + i];
      const double expect = (j == k) ? kPi / 2 : 0.0;
      worst = std::max(worst, std::abs(s - expect) / (kPi / 2));
    }
  }
  m.ortho_err_ = worst;
  if (worst > 1e-10)
    throw std::logic_error("SpectralModel: quadrature failed the orthogonality check");
  return m;
}

double SpectralModel::mu_plus() const {
  if (idx_plus_.empty())
    throw std::invalid_argument("SpectralModel: no eigenvalue above mu (need mu+ > mu)");
  return lambda(idx_plus_.front());
}

StateVector SpectralModel::state(std::vector<double> coords) const {
  if (static_cast<int>(coords.size()) != m_)
    throw std::invalid_argument("SpectralModel: wrong coefficient count");
  return StateVector(std::move(coords), space_);
}

StateVector SpectralModel::zero_state() const {
  return StateVector(std::vector<double>(static_cast<std::size_t>(m_), 0.0), space_);
}

StateVector SpectralModel::unit_mode(int k) const {
  if (k < 1 || k > m_) throw std::invalid_argument("unit_mode: k out of range");
  auto v = std::vector<double>(static_cast<std::size_t>(m_), 0.0);
  v[static_cast<std::size_t>(k - 1)] = 1.0;
  return StateVector(std::move(v), space_);
}

void SpectralModel::synth(std::span<const double> coeffs,
                          std::span<double> values) const {
  const int q = quad_points();
  std::fill(values.begin(), values.end(), 0.0);
  for (int k = 0; k < m_; ++k) {
    const double ck = coeffs[static_cast<std::size_t>(k)];
    if (ck == 0) continue;
    const double* row = &sin_[static_cast<std::size_t>(k) * q];
    for (int i = 0; i < q; ++i) values[static_cast<std::size_t>(i)] += ck * row[i];
  }
}

double SpectralModel::quad_integral(std::span<const double> values) const {
  double s = 0;
  for (int i = 0; i < quad_points(); ++i)
    s += weights_[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
  return s;
}

double SpectralModel::norm_h(const StateVector& u) const {
  double s = 0;
  for (int k = 1; k <= m_; ++k) s += u[k - 1] * u[k - 1];
  return std::sqrt(s * kPi / 2);
}

double SpectralModel::norm_v(const StateVector& u) const {
  double s = 0;
  for (int k = 1; k <= m_; ++k) s += lambda(k) * u[k - 1] * u[k - 1];
  return std::sqrt(s * kPi / 2);
}

double SpectralModel::norm_l_h(const StateVector& u) const {
  double s = 0;
  for (int k = 1; k <= m_; ++k) {
    const double d = (lambda(k) - mu_) * u[k - 1];
    s += d * d;
  }
  return std::sqrt(s * kPi / 2);
}

StateVector project(const SpectralModel& model, const StateVector& u, Sector sector) {
  if (u.space != model.space_id() || u.dim() != model.modes())
    throw std::invalid_argument("project: state does not belong to this model");
  StateVector out = u;
  for (int k = 1; k <= model.modes(); ++k) {
    const double lk = model.lambda(k);
    const bool keep = (sector == Sector::minus && lk < model.mu()) ||
                      (sector == Sector::zero && lk == model.mu()) ||
                      (sector == Sector::plus && lk > model.mu());
    if (!keep) out[k - 1] = 0;
  }
  return out;
}

double sector_norm_v(const SpectralModel& model, const StateVector& u, Sector sector) {
  double s = 0;
  for (int k = 1; k <= model.modes(); ++k) {
    const double lk = model.lambda(k);
    const bool keep = (sector == Sector::minus && lk < model.mu()) ||
                      (sector == Sector::zero && lk == model.mu()) ||
                      (sector == Sector::plus && lk > model.mu());
    if (keep) s += lk * u[k - 1] * u[k - 1];
  }
  return std::sqrt(s * kPi / 2);
}

double energy(const SpectralModel& model, const StateVector& u) {
  if (u.space != model.space_id()) throw std::invalid_argument("energy: wrong space");
  double quad_part = 0;
  for (int k = 1; k <= model.modes(); ++k)
    quad_part += (model.lambda(k) - model.mu()) * u[k - 1] * u[k - 1];
  quad_part *= kPi / 4;

  const int q = model.quad_points();
  tl_nodes_a.resize(static_cast<std::size_t>(q));
  model.synth(u.c, tl_nodes_a);
  double f_part = 0;
  const auto& F = model.nonlinearity().F;
  for (int i = 0; i < q; ++i)
    f_part += model.quad_weights()[static_cast<std::size_t>(i)] *
              F(tl_nodes_a[static_cast<std::size_t>(i)]);
  return quad_part - f_part;
}

double ForcingSignal::time_factor(double t) const {
  if (kind == Kind::zero) return 0;
  double s = 0;
  for (std::size_t i = 0; i < freqs.size(); ++i) s += amps[i] * std::sin(freqs[i] * t);
  return s;
}

double ForcingSignal::profile_at(double x) const {
  double s = 0;
  for (std::size_t k = 0; k < profile_coeffs.size(); ++k)
    s += profile_coeffs[k] * std::sin(static_cast<double>(k + 1) * x);
  return s;
}

double ForcingSignal::sup_abs() const { return std::max(std::abs(inf_g), std::abs(sup_g)); }

ForcingSignal ForcingSignal::zero() {
  ForcingSignal g;
  g.kind = Kind::zero;
  return g;
}

ForcingSignal ForcingSignal::quasiperiodic(std::vector<double> freqs,
                                           std::vector<double> amps,
                                           std::vector<double> profile_coeffs) {
  if (freqs.size() != amps.size() || freqs.empty())
    throw std::invalid_argument("quasiperiodic forcing: freqs/amps mismatch");
  ForcingSignal g;
  g.kind = Kind::quasiperiodic;
  g.freqs = std::move(freqs);
  g.amps = std::move(amps);
  g.profile_coeffs = std::move(profile_coeffs);
  if (g.profile_coeffs.empty()) g.profile_coeffs = {1.0};

  double pmax = 0;
  for (int i = 0; i <= 4096; ++i)
    pmax = std::max(pmax, std::abs(g.profile_at(kPi * i / 4096)));
  if (pmax == 0) throw std::invalid_argument("quasiperiodic forcing: zero profile");
  for (auto& c : g.profile_coeffs) c /= pmax;

  double amp_sum = 0;
  for (double a : g.amps) amp_sum += std::abs(a);
  g.sup_g = amp_sum;
  g.inf_g = -amp_sum;
  return g;
}

ResonantFlow::ResonantFlow(const SpectralModel& model, const ForcingSignal& g,
                           HullShift shift)
    : FlowModel(model.modes(), model.space_id()), m_(model), g_(g), tau_(shift.tau) {
  profile_nodes_.resize(static_cast<std::size_t>(m_.quad_points()));
  for (int i = 0; i < m_.quad_points(); ++i)
    profile_nodes_[static_cast<std::size_t>(i)] =
        g_.profile_at(m_.quad_nodes()[static_cast<std::size_t>(i)]);
  policy.dt_max = 0.05;
  policy.abs_tol = 1e-10;
  policy.rel_tol = 1e-10;
}

void ResonantFlow::nonstiff(double t, std::span<const double> u,
                            std::span<double> du) const {
  const int q = m_.quad_points();
  tl_nodes_a.resize(static_cast<std::size_t>(q));
  m_.synth(u, tl_nodes_a);
  const auto& f = m_.nonlinearity().f;
  const double tf = g_.kind == ForcingSignal::Kind::zero ? 0 : g_.time_factor(t + tau_);
  for (int i = 0; i < q; ++i) {
    double w = f(tl_nodes_a[static_cast<std::size_t>(i)]);
    if (tf != 0) w += tf * profile_nodes_[static_cast<std::size_t>(i)];
    tl_nodes_a[static_cast<std::size_t>(i)] =
        w * m_.quad_weights()[static_cast<std::size_t>(i)];
  }
  const auto& sin_table = m_.sin_table();
  for (int k = 0; k < m_.modes(); ++k) {
    const double* row = &sin_table[static_cast<std::size_t>(k) * q];
    double s = 0;
    for (int i = 0; i < q; ++i) s += tl_nodes_a[static_cast<std::size_t>(i)] * row[i];
    du[static_cast<std::size_t>(k)] = s * 2.0 / kPi;
  }
}

void ResonantFlow::stiff_apply(std::span<const double> u, std::span<double> lu) const {
  for (int k = 1; k <= m_.modes(); ++k)
    lu[static_cast<std::size_t>(k - 1)] =
        (m_.lambda(k) - m_.mu()) * u[static_cast<std::size_t>(k - 1)];
}

void ResonantFlow::stiff_solve(double alpha, std::span<const double> b,
                               std::span<double> x) const {
  for (int k = 1; k <= m_.modes(); ++k) {
    const double d = 1.0 + alpha * (m_.lambda(k) - m_.mu());
    if (d <= 0) throw std::runtime_error("ResonantFlow: implicit step too large");
    x[static_cast<std::size_t>(k - 1)] = b[static_cast<std::size_t>(k - 1)] / d;
  }
}

void ResonantFlow::rhs(double t, std::span<const double> u, std::span<double> du) const {
  nonstiff(t, u, du);
  for (int k = 1; k <= m_.modes(); ++k)
    du[static_cast<std::size_t>(k - 1)] -=
        (m_.lambda(k) - m_.mu()) * u[static_cast<std::size_t>(k - 1)];
}

double ResonantFlow::norm(std::span<const double> u) const {
  double s = 0;
  for (int k = 1; k <= m_.modes(); ++k)
    s += m_.lambda(k) * u[static_cast<std::size_t>(k - 1)] * u[static_cast<std::size_t>(k - 1)];
  return std::sqrt(s * kPi / 2);
}

StateVector galerkin_rhs(const SpectralModel& model, const ForcingSignal& g, HullShift shift,
                         const StateVector& u, double t) {
  ResonantFlow flow(model, g, shift);
  return flow.eval_rhs(u, t);
}

LandesmanLazerMargins landesman_lazer_margins(const SpectralModel& model,
                                              const ForcingSignal& g) {
  LandesmanLazerMargins out;
  out.m1 = model.nonlinearity().f_bar + g.inf_g;
  out.m2 = model.nonlinearity().f_under - g.sup_g;
  out.admissible = out.m1 > 0 && out.m2 > 0;
  return out;
}

PotentialFloor potential_floor_check(const SpectralModel& model,
                                     const std::vector<double>& s_grid) {
  const auto& nl = model.nonlinearity();
  if (!(nl.f_bar > 0) || !(nl.f_under > 0))
    throw std::invalid_argument("potential floor: nonlinearity bounds must be positive");
  if (s_grid.size() < 2) throw std::invalid_argument("potential floor: grid too small");
  const double lo = *std::min_element(s_grid.begin(), s_grid.end());
  const double hi = *std::max_element(s_grid.begin(), s_grid.end());
  if (lo > -1e3 || hi < 1e3)
    throw std::invalid_argument("potential floor: grid must span at least [-1e3, 1e3]");

  PotentialFloor out;
  out.kappa = 0.5 * std::min(nl.f_bar, nl.f_under);

  const auto deficit = [&](double s) { return out.kappa * std::abs(s) - nl.F(s); };
  double c0 = -std::numeric_limits<double>::infinity();
  double arg = 0;
  for (double s : s_grid) {
    const double d = deficit(s);
    if (d > c0) {
      c0 = d;
      arg = s;
    }
  }
  if (!std::isfinite(c0) || arg == lo || arg == hi)
    throw std::invalid_argument("potential floor: deficit unbounded on the grid");

  // Sharpen the grid maximum to the continuum one (the deficit is smooth
  // between grid points; a coarse grid would otherwise fail its own denser
  // verification sweep).
  {
    std::vector<double> sorted = s_grid;
    std::sort(sorted.begin(), sorted.end());
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), arg);
    double a = (it == sorted.begin()) ? arg : *(it - 1);
    double b = (it + 1 == sorted.end()) ? arg : *(it + 1);
    for (int k = 0; k < 200; ++k) {
      const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
      if (deficit(m1) < deficit(m2))
        a = m1;
      else
        b = m2;
    }
    c0 = std::max(c0, deficit(0.5 * (a + b)));
  }
  out.c0 = c0;

  // Denser verification sweep.
  const int n = 4 * static_cast<int>(s_grid.size());
  double worst = 0;
  for (int i = 0; i <= n; ++i) {
    const double s = lo + (hi - lo) * i / n;
    const double viol = (out.kappa * std::abs(s) - out.c0) - nl.F(s);
    worst = std::max(worst, viol);
  }
  out.worst_violation = worst;
  out.pass = worst <= 1e-9;
  return out;
}

InvarianceThresholds invariance_thresholds(const SpectralModel& model,
                                           const ForcingSignal& g, Rng& rng, int samples) {
  InvarianceThresholds th;
  th.mu_plus = model.mu_plus();
  th.eps = (th.mu_plus - model.mu()) / (2.0 * th.mu_plus);
  th.lambda = (1.0 - th.eps) * th.mu_plus - model.mu();
  const double M = model.nonlinearity().M;
  th.C_eps = (M + g.sup_abs()) * (M + g.sup_abs()) * kPi / (4.0 * th.eps);
  th.rho1 = std::sqrt(th.C_eps / th.lambda);
  th.threshold = 3.0 * M * std::sqrt(kPi);

  // Analytic sufficient level: J >= c implies |Lv|^2 >= 2 (mu+ - mu)(J - c0 pi).
  if (M > 0) {
    std::vector<double> grid;
    for (int i = -2000; i <= 2000; ++i) grid.push_back(i);
    const PotentialFloor floor = potential_floor_check(model, grid);
    th.c1_bound =
        floor.c0 * kPi + 9.0 * M * M * kPi / (2.0 * (th.mu_plus - model.mu()));
  } else {
    th.c1_bound = 0;
  }

  // Sampled search for the smallest level whose super-level set clears the
  // threshold. Candidate levels are the sampled J values themselves (sorted),
  // so the transition is resolved at sample granularity.
  struct Pair {
    double j, l;
  };
  std::vector<Pair> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    std::vector<double> dir = rng.unit_vector(model.modes());
    const double scale = std::pow(2.0, rng.uniform(-2.0, 5.0));
    for (auto& v : dir) v *= scale;
    StateVector x = model.state(std::move(dir));
    pts.push_back({energy(model, x), model.norm_l_h(x)});
  }
  th.samples = samples;

  std::sort(pts.begin(), pts.end(), [](const Pair& a, const Pair& b) { return a.j > b.j; });
  // Walk levels downward, tracking the running min of |Lv| over J >= level.
  th.c1 = std::numeric_limits<double>::quiet_NaN();
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.j <= 0) break;
    if (p.l <= th.threshold) break;  // this sample breaks every level below p.j
    running_min = std::min(running_min, p.l);
    th.c1 = p.j;
    th.min_margin_at_c1 = running_min - th.threshold;
  }
  if (std::isnan(th.c1)) th.c1 = th.c1_bound;  // sampling found no clearing level
  return th;
}

InvariantRegionReport invariant_region_check(const SpectralModel& model,
                                             const ForcingSignal& g,
                                             const InvarianceThresholds& th, double c,
                                             double rho, const std::vector<StateVector>& seeds,
                                             double horizon, double tol, double sample_dt) {
  if (!(c > th.c1) || !(rho > th.rho1))
    throw std::invalid_argument("invariant_region_check: need c > c1 and rho > rho1");
  ResonantFlow flow(model, g);

  InvariantRegionReport rep;
  for (const auto& seed : seeds) {
    if (energy(model, seed) > c + 1e-12 ||
        sector_norm_v(model, seed, Sector::plus) > rho + 1e-12)
      throw std::invalid_argument("invariant_region_check: seed lies outside the region");

    const Trajectory traj = evolve(flow, seed, horizon, sample_dt);
    SeedOutcome oc;
    oc.status = traj.status;
    oc.end_time = traj.times.back();
    const double p0 = sector_norm_v(model, seed, Sector::plus);
    double worst_j = -std::numeric_limits<double>::infinity();
    double worst_p = worst_j, worst_env = worst_j;
    for (int i = 0; i < traj.samples(); ++i) {
      const StateVector& u = traj.states[i];
      const double t = traj.times[i];
      const double pj = energy(model, u) - c;
      const double pu = sector_norm_v(model, u, Sector::plus);
      const double decay = std::exp(-2.0 * th.lambda * t);
      const double envelope = p0 * p0 * decay + th.rho1 * th.rho1 * (1.0 - decay);
      worst_j = std::max(worst_j, pj);
      worst_p = std::max(worst_p, pu - rho);
      worst_env = std::max(worst_env, pu * pu - envelope);
    }
    oc.worst_j_margin = worst_j;
    oc.worst_p_margin = worst_p;
    oc.worst_envelope_excess = worst_env;
    const bool margin_bad = worst_j > tol || worst_p > tol;
    const bool env_bad = worst_env > tol;
    if (margin_bad) ++rep.margin_violations;
    if (env_bad) ++rep.envelope_violations;
    if ((margin_bad || env_bad) && !rep.witness) rep.witness = traj;
    if (traj.status == TrajectoryStatus::completed)
      ++rep.ran_full_horizon;
    else
      ++rep.left_as_unbounded;
    rep.seeds.push_back(oc);
  }
  rep.pass = rep.margin_violations == 0 && rep.envelope_violations == 0;
  return rep;
}

std::vector<StateVector> sample_region_states(const SpectralModel& model, double c, double rho,
                                              int count, Rng& rng, double scale) {
  if (!(c > 0)) throw std::invalid_argument("sample_region_states: c must be positive");
  std::vector<StateVector> out;
  for (int n = 0; n < count; ++n) {
    std::vector<double> coords(static_cast<std::size_t>(model.modes()));
    for (int k = 1; k <= model.modes(); ++k)
      coords[static_cast<std::size_t>(k - 1)] = rng.normal() * scale / k;
    StateVector v = model.state(std::move(coords));
    const double p = sector_norm_v(model, v, Sector::plus);
    if (p > 0.95 * rho) {
      const double shrink = 0.95 * rho / p;
      for (int k : model.idx_plus()) v[k - 1] *= shrink;
    }
    int guard = 0;
    while (energy(model, v) > 0.999 * c && guard++ < 200)
      for (int k = 0; k < model.modes(); ++k) v[k] *= 0.8;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace semiflow
