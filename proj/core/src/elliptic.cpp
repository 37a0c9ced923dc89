#include "semiflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semiflow/integrate.hpp"
#include "semiflow/report.hpp"

namespace semiflow {
namespace {

constexpr double kPi = 3.14159265358979323846;

SpaceId elliptic_space_id(int n, int N, double Rmax, double gamma) {
  const auto h = static_cast<SpaceId>(n * 97u) ^ static_cast<SpaceId>(N * 2654435761u) ^
                 static_cast<SpaceId>(static_cast<long long>(Rmax * 512.0) * 40503u) ^
                 static_cast<SpaceId>(static_cast<long long>(gamma * 4096.0));
  return 0x20000000u | (h & 0x0fffffffu);
}

// Thomas solve for (diag, lower, upper) tridiagonal systems.
void thomas(const std::vector<double>& lower, const std::vector<double>& diag,
            const std::vector<double>& upper, std::span<const double> rhs,
            std::span<double> x) {
  const int n = static_cast<int>(diag.size());
  thread_local std::vector<double> cp, dp;
  cp.assign(static_cast<std::size_t>(n), 0.0);
  dp.assign(static_cast<std::size_t>(n), 0.0);
  cp[0] = upper[0] / diag[0];
  dp[0] = rhs[0] / diag[0];
  for (int i = 1; i < n; ++i) {
    const double m = diag[static_cast<std::size_t>(i)] -
                     lower[static_cast<std::size_t>(i)] * cp[static_cast<std::size_t>(i - 1)];
    cp[static_cast<std::size_t>(i)] =
        (i + 1 < n) ? upper[static_cast<std::size_t>(i)] / m : 0.0;
    dp[static_cast<std::size_t>(i)] =
        (rhs[static_cast<std::size_t>(i)] -
         lower[static_cast<std::size_t>(i)] * dp[static_cast<std::size_t>(i - 1)]) /
        m;
  }
  x[static_cast<std::size_t>(n - 1)] = dp[static_cast<std::size_t>(n - 1)];
  for (int i = n - 2; i >= 0; --i)
    x[static_cast<std::size_t>(i)] = dp[static_cast<std::size_t>(i)] -
                                     cp[static_cast<std::size_t>(i)] *
                                         x[static_cast<std::size_t>(i + 1)];
}

}  // namespace

EllipticModel EllipticModel::make(const Params& p) {
  if (p.n < 3) throw std::invalid_argument("EllipticModel: n >= 3 required");
  if (p.grid_points < 8) throw std::invalid_argument("EllipticModel: grid too small");
  if (!(p.R_max > 0) || !(p.gamma > 0))
    throw std::invalid_argument("EllipticModel: R_max and gamma must be positive");

  EllipticModel m;
  m.n_ = p.n;
  m.N_ = p.grid_points;
  m.Rmax_ = p.R_max;
  m.h_ = p.R_max / p.grid_points;
  m.gamma_ = p.gamma;
  m.omega_ = 2.0 * std::pow(kPi, p.n / 2.0) / std::tgamma(p.n / 2.0);
  m.space_ = elliptic_space_id(p.n, p.grid_points, p.R_max, p.gamma);

  m.a_.resize(static_cast<std::size_t>(m.N_));
  m.b_.resize(static_cast<std::size_t>(m.N_));
  m.vol_.resize(static_cast<std::size_t>(m.N_));
  m.face_.resize(static_cast<std::size_t>(m.N_));
  m.a0_ = std::numeric_limits<double>::infinity();
  m.a1_ = -m.a0_;
  for (int i = 0; i < m.N_; ++i) {
    const double r = m.h_ * i;
    m.a_[static_cast<std::size_t>(i)] = p.a_of_r ? p.a_of_r(r) : 1.0;
    m.b_[static_cast<std::size_t>(i)] = p.b_of_r ? p.b_of_r(r) : 0.0;
    m.a0_ = std::min(m.a0_, m.a_[static_cast<std::size_t>(i)]);
    m.a1_ = std::max(m.a1_, m.a_[static_cast<std::size_t>(i)]);
    const double rl = std::max(0.0, (i - 0.5) * m.h_);
    const double rr = (i + 0.5) * m.h_;
    m.vol_[static_cast<std::size_t>(i)] =
        (std::pow(rr, m.n_) - std::pow(rl, m.n_)) / m.n_;
    m.face_[static_cast<std::size_t>(i)] = std::pow(rr, m.n_ - 1);
  }
  return m;
}

EllipticModel EllipticModel::canonical(int grid_points, double R_max, double gamma,
                                       double b_amp, double b_width) {
  Params p;
  p.grid_points = grid_points;
  p.R_max = R_max;
  p.gamma = gamma;
  p.a_of_r = [](double) { return 1.0; };
  p.b_of_r = [b_amp, b_width](double r) { return b_amp * std::exp(-(r / b_width) * (r / b_width)); };
  return make(p);
}

double EllipticModel::f_val(int i, double s) const {
  return b_[static_cast<std::size_t>(i)] * std::pow(std::abs(s), gamma_) * s;
}

double EllipticModel::F_val(int i, double s) const {
  return b_[static_cast<std::size_t>(i)] * std::pow(std::abs(s), gamma_ + 2.0) / (gamma_ + 2.0);
}

double EllipticModel::fprime_val(int i, double s) const {
  return b_[static_cast<std::size_t>(i)] * (gamma_ + 1.0) * std::pow(std::abs(s), gamma_);
}

StateVector EllipticModel::state(std::vector<double> coords) const {
  if (static_cast<int>(coords.size()) != N_)
    throw std::invalid_argument("EllipticModel: wrong node count");
  return StateVector(std::move(coords), space_);
}

StateVector EllipticModel::zero_state() const {
  return StateVector(std::vector<double>(static_cast<std::size_t>(N_), 0.0), space_);
}

void EllipticModel::apply_L(std::span<const double> u, std::span<double> lu) const {
  for (int i = 0; i < N_; ++i) {
    const double fl = (i > 0) ? face_[static_cast<std::size_t>(i - 1)] : 0.0;
    const double fr = face_[static_cast<std::size_t>(i)];
    const double ul = (i > 0) ? u[static_cast<std::size_t>(i - 1)] : 0.0;
    const double ur = (i + 1 < N_) ? u[static_cast<std::size_t>(i + 1)] : 0.0;  // Dirichlet end
    const double vi = vol_[static_cast<std::size_t>(i)];
    lu[static_cast<std::size_t>(i)] =
        (fl * (u[static_cast<std::size_t>(i)] - ul) - fr * (ur - u[static_cast<std::size_t>(i)])) /
            (h_ * vi) +
        a_[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
  }
}

void EllipticModel::solve_shifted(double alpha, std::span<const double> b,
                                  std::span<double> x) const {
  thread_local std::vector<double> lower, diag, upper;
  lower.assign(static_cast<std::size_t>(N_), 0.0);
  diag.assign(static_cast<std::size_t>(N_), 0.0);
  upper.assign(static_cast<std::size_t>(N_), 0.0);
  for (int i = 0; i < N_; ++i) {
    const double fl = (i > 0) ? face_[static_cast<std::size_t>(i - 1)] : 0.0;
    const double fr = face_[static_cast<std::size_t>(i)];
    const double vi = vol_[static_cast<std::size_t>(i)];
    const double scale = 1.0 / (h_ * vi);
    diag[static_cast<std::size_t>(i)] =
        1.0 + alpha * ((fl + fr) * scale + a_[static_cast<std::size_t>(i)]);
    if (i > 0) lower[static_cast<std::size_t>(i)] = -alpha * fl * scale;
    if (i + 1 < N_) upper[static_cast<std::size_t>(i)] = -alpha * fr * scale;
  }
  thomas(lower, diag, upper, b, x);
}

double EllipticModel::norm_l2(const StateVector& u) const {
  double s = 0;
  for (int i = 0; i < N_; ++i) s += u[i] * u[i] * vol_[static_cast<std::size_t>(i)];
  return std::sqrt(omega_ * s);
}

double EllipticModel::inner_l2(const StateVector& u, const StateVector& v) const {
  double s = 0;
  for (int i = 0; i < N_; ++i) s += u[i] * v[i] * vol_[static_cast<std::size_t>(i)];
  return omega_ * s;
}

double EllipticModel::norm_v(const StateVector& u) const {
  double s = 0;
  for (int i = 0; i < N_; ++i) {
    const double un = (i + 1 < N_) ? u[i + 1] : 0.0;
    const double du = (un - u[i]) / h_;
    s += face_[static_cast<std::size_t>(i)] * du * du * h_;
    s += a_[static_cast<std::size_t>(i)] * u[i] * u[i] * vol_[static_cast<std::size_t>(i)];
  }
  return std::sqrt(omega_ * s);
}

double EllipticModel::residual_norm(const StateVector& u) const {
  std::vector<double> lu(static_cast<std::size_t>(N_));
  apply_L(u.c, lu);
  double s = 0;
  for (int i = 0; i < N_; ++i) {
    const double r = lu[static_cast<std::size_t>(i)] - f_val(i, u[i]);
    s += r * r * vol_[static_cast<std::size_t>(i)];
  }
  return std::sqrt(omega_ * s);
}

double EllipticModel::max_b() const {
  double m = 0;
  for (double v : b_) m = std::max(m, v);
  return m;
}

ParabolicFlow::ParabolicFlow(const EllipticModel& model)
    : FlowModel(model.grid_points(), model.space_id()), m_(model) {
  policy.scheme = Scheme::imex_euler;
  policy.dt_max = 0.05;
  policy.abs_tol = 1e-8;
  policy.rel_tol = 1e-8;
}

void ParabolicFlow::rhs(double, std::span<const double> u, std::span<double> du) const {
  m_.apply_L(u, du);
  for (int i = 0; i < m_.grid_points(); ++i) {
    du[static_cast<std::size_t>(i)] =
        -du[static_cast<std::size_t>(i)] + m_.f_val(i, u[static_cast<std::size_t>(i)]);
  }
}

double ParabolicFlow::norm(std::span<const double> u) const {
  StateVector tmp(std::vector<double>(u.begin(), u.end()), m_.space_id());
  return m_.norm_v(tmp);
}

void ParabolicFlow::stiff_apply(std::span<const double> u, std::span<double> lu) const {
  m_.apply_L(u, lu);
}

void ParabolicFlow::nonstiff(double, std::span<const double> u, std::span<double> du) const {
  for (int i = 0; i < m_.grid_points(); ++i)
    du[static_cast<std::size_t>(i)] = m_.f_val(i, u[static_cast<std::size_t>(i)]);
}

void ParabolicFlow::stiff_solve(double alpha, std::span<const double> b,
                                std::span<double> x) const {
  m_.solve_shifted(alpha, b, x);
}

Trajectory parabolic_evolve(const EllipticModel& model, const StateVector& u, double horizon,
                            double sample_dt) {
  ParabolicFlow flow(model);
  return evolve(flow, u, horizon, sample_dt);
}

double energy(const EllipticModel& model, const StateVector& u) {
  if (u.space != model.space_id()) throw std::invalid_argument("energy: wrong space");
  const double v = model.norm_v(u);
  double fpart = 0;
  for (int i = 0; i < model.grid_points(); ++i)
    fpart += model.F_val(i, u[i]) * model.cell_volume(i);
  return 0.5 * v * v - model.omega_n() * fpart;
}

ConditionReport validate_conditions(const EllipticModel& model,
                                    const std::vector<double>& s_grid) {
  ConditionReport rep;
  rep.a_bounds_ok = model.a0() > 0 && model.a1() >= model.a0() &&
                    std::isfinite(model.a1());
  const double gamma_cap = std::min(2.0 / (model.n() - 2), 1.0);
  rep.gamma_ok = model.gamma() > 0 && model.gamma() < gamma_cap;

  const double mu = model.mu();
  double ratio_margin = 0;
  bool growth_ok = true, nonneg_ok = true;
  for (int i = 0; i < model.grid_points(); i += std::max(1, model.grid_points() / 64)) {
    for (double s : s_grid) {
      const double f = model.f_val(i, s);
      const double F = model.F_val(i, s);
      const double fp = model.fprime_val(i, s);
      const double cap = (model.gamma() + 1.0) * model.b_at(i) *
                         std::pow(std::abs(s), model.gamma());
      if (std::abs(fp) > cap + 1e-12) growth_ok = false;
      if (mu * F < -1e-12 || mu * F > f * s + 1e-9 * std::max(1.0, std::abs(f * s)))
        nonneg_ok = false;
      ratio_margin = std::max(ratio_margin, std::abs(mu * F - f * s));
    }
  }
  rep.growth_ok = growth_ok;
  rep.ratio_ok = nonneg_ok;
  rep.ratio_margin = ratio_margin;

  // Superlinear trend on the weight's support: f(r,s)/s must keep growing.
  double s_max = 0;
  for (double s : s_grid) s_max = std::max(s_max, std::abs(s));
  bool superlinear = s_max > 0;
  const double bm = model.max_b();
  if (bm <= 0) superlinear = false;
  for (int i = 0; i < model.grid_points() && superlinear; ++i) {
    if (model.b_at(i) < 0.5 * bm) continue;
    const double lo = model.f_val(i, s_max / 4) / (s_max / 4);
    const double hi = model.f_val(i, s_max) / s_max;
    if (!(hi > 1.2 * lo)) superlinear = false;
  }
  rep.superlinear_ok = superlinear;
  rep.pass = rep.a_bounds_ok && rep.gamma_ok && rep.growth_ok && rep.ratio_ok &&
             rep.superlinear_ok;
  return rep;
}

namespace {

StateVector random_bump_field(const EllipticModel& model, Rng& rng) {
  std::vector<double> u(static_cast<std::size_t>(model.grid_points()), 0.0);
  const int bumps = 1 + rng.index(3);
  for (int b = 0; b < bumps; ++b) {
    const double center = rng.uniform(0.0, 0.7 * model.R_max());
    const double width = rng.uniform(0.3, 2.5);
    const double amp = rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    for (int i = 0; i < model.grid_points(); ++i) {
      const double z = (model.r(i) - center) / width;
      u[static_cast<std::size_t>(i)] += amp * std::exp(-z * z);
    }
  }
  return model.state(std::move(u));
}

double integral_F(const EllipticModel& model, const StateVector& u) {
  double s = 0;
  for (int i = 0; i < model.grid_points(); ++i)
    s += model.F_val(i, u[i]) * model.cell_volume(i);
  return model.omega_n() * s;
}

}  // namespace

MountainPassRadius mp_radius(const EllipticModel& model, int trial_count, Rng& rng,
                             double tol) {
  MountainPassRadius out;
  out.trials = trial_count;
  const double mu = model.mu();
  double c5 = 0;
  for (int t = 0; t < trial_count; ++t) {
    StateVector u = random_bump_field(model, rng);
    const double nv = model.norm_v(u);
    if (nv < 1e-12) continue;
    c5 = std::max(c5, integral_F(model, u) / std::pow(nv, mu));
  }
  out.c5_hat = c5;
  if (c5 <= 0) {
    out.degenerate = true;
    out.rho = std::numeric_limits<double>::infinity();
    return out;
  }

  for (int round = 0; round < 3; ++round) {
    out.rho = std::pow(4.0 * out.c5_hat, -1.0 / model.gamma());
    double barrier = std::numeric_limits<double>::infinity();
    double worst_ratio = 0;
    for (int t = 0; t < trial_count; ++t) {
      StateVector u = random_bump_field(model, rng);
      const double nv = model.norm_v(u);
      if (nv < 1e-12) continue;
      const double scale = out.rho / nv;
      for (int i = 0; i < u.dim(); ++i) u[i] *= scale;
      barrier = std::min(barrier, energy(model, u));
      worst_ratio = std::max(worst_ratio, integral_F(model, u) / std::pow(out.rho, mu));
    }
    out.barrier = barrier;
    out.barrier_ok = barrier >= 0.25 * out.rho * out.rho - tol;
    if (out.barrier_ok) break;
    out.c5_hat = std::max(out.c5_hat, worst_ratio) * 1.001;  // sampling undershot c5
  }
  return out;
}

double support_radius(const EllipticModel& model, double frac) {
  const double bm = model.max_b();
  if (bm <= 0) return 0;
  double r = 0;
  for (int i = 0; i < model.grid_points(); ++i)
    if (model.b_at(i) >= frac * bm) r = model.r(i);
  return std::max(r, 2 * model.h());
}

EigenPair first_dirichlet_mode(const EllipticModel& model, double r_cut) {
  int m = 0;
  while (m < model.grid_points() && model.r(m) < r_cut) ++m;
  if (m < 3) throw std::invalid_argument("first_dirichlet_mode: sub-ball too small");

  // Pure Laplacian tridiagonal on nodes 0..m-1 with a Dirichlet end at m.
  std::vector<double> lower(static_cast<std::size_t>(m), 0.0),
      diag(static_cast<std::size_t>(m), 0.0), upper(static_cast<std::size_t>(m), 0.0);
  const double h = model.h();
  for (int i = 0; i < m; ++i) {
    const double fl = (i > 0) ? std::pow((i - 0.5) * h, model.n() - 1) : 0.0;
    const double fr = std::pow((i + 0.5) * h, model.n() - 1);
    const double vi = model.cell_volume(i);
    const double scale = 1.0 / (h * vi);
    diag[static_cast<std::size_t>(i)] = (fl + fr) * scale;
    if (i > 0) lower[static_cast<std::size_t>(i)] = -fl * scale;
    if (i + 1 < m) upper[static_cast<std::size_t>(i)] = -fr * scale;
  }

  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double z = model.r(i) / r_cut;
    x[static_cast<std::size_t>(i)] = 1.0 - z * z;
  }
  std::vector<double> y(static_cast<std::size_t>(m));
  double value = 0;
  for (int it = 0; it < 500; ++it) {
    thomas(lower, diag, upper, x, y);
    // weighted normalization
    double nrm = 0;
    for (int i = 0; i < m; ++i)
      nrm += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)] *
             model.cell_volume(i);
    nrm = std::sqrt(nrm);
    for (auto& v : y) v /= nrm;
    // Rayleigh quotient in the weighted inner product
    double num = 0, den = 0;
    for (int i = 0; i < m; ++i) {
      double ly = diag[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
      if (i > 0) ly += lower[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i - 1)];
      if (i + 1 < m) ly += upper[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + 1)];
      num += ly * y[static_cast<std::size_t>(i)] * model.cell_volume(i);
      den += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)] *
             model.cell_volume(i);
    }
    const double new_value = num / den;
    const bool done = it > 3 && std::abs(new_value - value) <= 1e-13 * std::abs(new_value);
    value = new_value;
    x = y;
    if (done) break;
  }

  EigenPair out;
  out.value = value;
  std::vector<double> full(static_cast<std::size_t>(model.grid_points()), 0.0);
  double sign = x[static_cast<std::size_t>(m / 4)] >= 0 ? 1.0 : -1.0;
  for (int i = 0; i < m; ++i) full[static_cast<std::size_t>(i)] = sign * x[static_cast<std::size_t>(i)];
  out.vec = model.state(std::move(full));
  const double nv = model.norm_v(out.vec);
  for (int i = 0; i < out.vec.dim(); ++i) out.vec[i] /= nv;
  return out;
}

double find_s1(const EllipticModel& model, const StateVector& w1) {
  double s = 1.0;
  while (s <= 1e6) {
    StateVector u = w1;
    for (int i = 0; i < u.dim(); ++i) u[i] *= s;
    if (energy(model, u) <= 0) return s;
    s *= 2.0;
  }
  throw std::runtime_error(
      "find_s1: energy never becomes nonpositive below s = 1e6; the nonlinearity is too weak "
      "on this grid");
}

ConeReport cone_invariance_check(const EllipticModel& model,
                                 const std::vector<StateVector>& nonneg_samples,
                                 double horizon, double tol) {
  ConeReport rep;
  rep.min_entry = 0;
  for (const auto& u0 : nonneg_samples) {
    for (int i = 0; i < u0.dim(); ++i)
      if (u0[i] < 0)
        throw std::invalid_argument("cone_invariance_check: sample has negative entries");
    const Trajectory traj = parabolic_evolve(model, u0, horizon,
                                             std::min(0.05, horizon / 32));
    for (const auto& s : traj.states)
      for (int i = 0; i < s.dim(); ++i) rep.min_entry = std::min(rep.min_entry, s[i]);
    if (rep.min_entry < -tol && !rep.witness) rep.witness = traj;
  }
  rep.pass = rep.min_entry >= -tol;
  return rep;
}

DissipativityReport dissipativity_check(const EllipticModel& model, const Trajectory& traj,
                                        double c, double tol) {
  DissipativityReport rep;
  const double mu = model.mu();
  rep.R0 = 2.0 * std::sqrt(mu * c / ((mu - 2.0) * model.a0()));
  for (int k = 0; k + 1 < traj.samples(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    if (dt <= 0) continue;
    const double n0 = model.norm_l2(traj.states[k]);
    const double n1 = model.norm_l2(traj.states[k + 1]);
    const double lhs = (n1 * n1 - n0 * n0) / dt;
    StateVector mid = traj.states[k];
    for (int i = 0; i < mid.dim(); ++i)
      mid[i] = 0.5 * (traj.states[k][i] + traj.states[k + 1][i]);
    const double nm = model.norm_l2(mid);
    const double jm = energy(model, mid);
    const double rhs = (mu - 2.0) * model.a0() * nm * nm - 2.0 * mu * jm;
    rep.worst_defect = std::max(rep.worst_defect, rhs - lhs);
    ++rep.samples_checked;
    if (nm >= rep.R0 && jm <= c + tol) {
      ++rep.big_norm_samples;
      rep.worst_big_norm = std::max(rep.worst_big_norm, 2.0 * mu * c - lhs);
    }
  }
  rep.pass = rep.worst_defect <= tol && rep.worst_big_norm <= tol;
  return rep;
}

EnergyIdentityReport energy_identity_check(const EllipticModel& model, const Trajectory& traj,
                                           double tol) {
  EnergyIdentityReport rep;
  double max_rhs = 0;
  std::vector<double> rhs_list, lhs_list;
  for (int k = 0; k + 1 < traj.samples(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    if (dt <= 0) continue;
    StateVector mid = traj.states[k];
    for (int i = 0; i < mid.dim(); ++i)
      mid[i] = 0.5 * (traj.states[k][i] + traj.states[k + 1][i]);
    const double res = model.residual_norm(mid);
    const double rhs = res * res;
    const double lhs =
        -(energy(model, traj.states[k + 1]) - energy(model, traj.states[k])) / dt;
    rhs_list.push_back(rhs);
    lhs_list.push_back(lhs);
    max_rhs = std::max(max_rhs, rhs);
  }
  if (max_rhs < 1e-14) {  // equilibrium record: both sides vanish
    rep.pass = true;
    return rep;
  }
  for (std::size_t k = 0; k < rhs_list.size(); ++k) {
    const double denom = std::max(rhs_list[k], 1e-8 * max_rhs);
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(lhs_list[k] - rhs_list[k]) / denom);
    ++rep.steps;
  }
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

StateVector newton_polish(const EllipticModel& model, StateVector u, double target_residual,
                          int max_iters, int* iters_used) {
  const int N = model.grid_points();
  std::vector<double> lu(static_cast<std::size_t>(N)), res(static_cast<std::size_t>(N));
  std::vector<double> lower(static_cast<std::size_t>(N)), diag(static_cast<std::size_t>(N)),
      upper(static_cast<std::size_t>(N)), delta(static_cast<std::size_t>(N));
  int it = 0;
  double rnorm = model.residual_norm(u);
  for (; it < max_iters && rnorm > target_residual; ++it) {
    model.apply_L(u.c, lu);
    for (int i = 0; i < N; ++i)
      res[static_cast<std::size_t>(i)] = lu[static_cast<std::size_t>(i)] - model.f_val(i, u[i]);

    // Jacobian L - diag(f'(u)) assembled tridiagonally.
    const double h = model.h();
    for (int i = 0; i < N; ++i) {
      const double fl = (i > 0) ? std::pow((i - 0.5) * h, model.n() - 1) : 0.0;
      const double fr = std::pow((i + 0.5) * h, model.n() - 1);
      const double scale = 1.0 / (h * model.cell_volume(i));
      diag[static_cast<std::size_t>(i)] =
          (fl + fr) * scale + model.a_at(i) - model.fprime_val(i, u[i]);
      lower[static_cast<std::size_t>(i)] = (i > 0) ? -fl * scale : 0.0;
      upper[static_cast<std::size_t>(i)] = (i + 1 < N) ? -fr * scale : 0.0;
    }
    thomas(lower, diag, upper, res, delta);

    double lam = 1.0;
    bool ok = false;
    for (int half = 0; half < 12; ++half) {
      StateVector trial = u;
      for (int i = 0; i < N; ++i) trial[i] -= lam * delta[static_cast<std::size_t>(i)];
      const double rn = model.residual_norm(trial);
      if (rn < rnorm) {
        u = std::move(trial);
        rnorm = rn;
        ok = true;
        break;
      }
      lam *= 0.5;
    }
    if (!ok) break;
  }
  if (iters_used) *iters_used = it;
  return u;
}

PositiveSolutionResult positive_solution_search(const EllipticModel& model,
                                                const PositiveSolutionOptions& opts,
                                                Rng& rng) {
  PositiveSolutionResult out;

  std::vector<double> s_grid;
  for (int i = -40; i <= 40; ++i) s_grid.push_back(i * 0.5);
  const ConditionReport cond = validate_conditions(model, s_grid);
  if (!cond.pass)
    throw std::invalid_argument("positive_solution_search: model fails its hypotheses");

  const MountainPassRadius mp = mp_radius(model, opts.mp_trials, rng);
  if (mp.degenerate)
    throw std::invalid_argument(
        "positive_solution_search: zero nonlinearity weight, no mountain-pass geometry");
  out.rho = mp.rho;
  out.barrier = mp.barrier;
  out.c5_hat = mp.c5_hat;

  const EigenPair eig = first_dirichlet_mode(model, support_radius(model));
  out.s1 = find_s1(model, eig.vec);
  StateVector top = eig.vec;
  for (int i = 0; i < top.dim(); ++i) top[i] *= out.s1;

  ParabolicFlow flow(model);
  flow.policy.abs_tol = 1e-6;  // deformation accuracy; the Newton stage sets the residual
  flow.policy.rel_tol = 1e-6;

  DiscretePath path = make_line_path(model.zero_state(), top,
                                     opts.path_nodes, out.s1 / (opts.path_nodes - 1) * 1.25);

  DeformOptions dopts;
  dopts.max_projection = &out.max_clip;
  dopts.project = [](const StateVector& x) {
    StateVector y = x;
    for (int i = 0; i < y.dim(); ++i) y[i] = std::max(0.0, y[i]);
    return y;
  };

  const Functional j_fun = [&model](const StateVector& x) { return energy(model, x); };
  MinimaxResult mm =
      minimax_estimate(flow, j_fun, path, opts.max_iters, opts.deform_dt, opts.stall_tol, dopts);
  out.c_estimate = mm.c;
  out.records = mm.records;

  // Best stationary candidate within the level band (fall back to the best
  // residual on the whole path when the band is empty).
  auto cands = invariant_candidates(flow, j_fun, mm.final_path, mm.c, opts.band,
                                    std::numeric_limits<double>::infinity());
  const InvariantCandidate* best = nullptr;
  for (const auto& cd : cands)
    if (!best || cd.residual < best->residual) best = &cd;
  StateVector start = best ? best->state
                           : mm.final_path.nodes[static_cast<std::size_t>(
                                 mm.records.back().arg_node)];

  out.u_star = newton_polish(model, start, opts.residual_target, opts.newton_max,
                             &out.newton_iters);
  for (int i = 0; i < out.u_star.dim(); ++i)
    if (out.u_star[i] < 0 && out.u_star[i] > -1e-12) out.u_star[i] = 0;

  out.residual = model.residual_norm(out.u_star);
  out.j_value = energy(model, out.u_star);
  double min_entry = 0;
  for (int i = 0; i < out.u_star.dim(); ++i) min_entry = std::min(min_entry, out.u_star[i]);
  out.positive_ok = min_entry >= -1e-10;
  out.nontrivial_ok = model.norm_v(out.u_star) > 0.5 * mp.rho;
  out.residual_ok = out.residual <= opts.residual_target;
  const double beta = 0.25 * mp.rho * mp.rho;
  out.band_ok = out.j_value >= beta - 1e-3 && out.j_value <= out.c_estimate + 1e-3;
  out.pass = out.positive_ok && out.nontrivial_ok && out.residual_ok && out.band_ok;
  return out;
}

std::vector<StateVector> band_states_at_radii(const EllipticModel& model,
                                              const std::vector<double>& radii, double c) {
  const EigenPair eig = first_dirichlet_mode(model, support_radius(model));

  // Far bump with essentially no overlap with the weight b.
  std::vector<double> far(static_cast<std::size_t>(model.grid_points()), 0.0);
  const double center = 0.7 * model.R_max(), width = model.R_max() / 12.0;
  for (int i = 0; i < model.grid_points(); ++i) {
    const double z = (model.r(i) - center) / width;
    far[static_cast<std::size_t>(i)] = std::exp(-z * z);
  }
  StateVector bump = model.state(std::move(far));
  const double bn = model.norm_v(bump);
  for (int i = 0; i < bump.dim(); ++i) bump[i] /= bn;

  const double mu = model.mu();
  auto blend = [&](double lam) {
    StateVector d = eig.vec;
    for (int i = 0; i < d.dim(); ++i) d[i] += lam * bump[i];
    const double nv = model.norm_v(d);
    for (int i = 0; i < d.dim(); ++i) d[i] /= nv;
    return d;
  };
  auto root_radius = [&](const StateVector& d) {
    // J(s d) = s^2/2 - K s^mu crosses zero at s = (2K)^{-1/(mu-2)}.
    const double K = integral_F(model, d);
    if (K <= 0) return std::numeric_limits<double>::infinity();
    return std::pow(2.0 * K, -1.0 / (mu - 2.0));
  };

  std::vector<StateVector> out;
  for (double R : radii) {
    if (R < root_radius(eig.vec)) continue;  // not reachable inside the band
    double lo = 0, hi = 1.0;
    while (root_radius(blend(hi)) < R && hi < 1e6) hi *= 2;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (root_radius(blend(mid)) < R)
        lo = mid;
      else
        hi = mid;
    }
    StateVector d = blend(hi);
    const double s = root_radius(d);
    if (!std::isfinite(s)) continue;
    for (int i = 0; i < d.dim(); ++i) d[i] *= s;
    if (std::abs(energy(model, d)) <= c) out.push_back(std::move(d));
  }
  return out;
}

std::string profile_csv(const EllipticModel& model, const StateVector& u) {
  std::string out = "r,u\n";
  for (int i = 0; i < model.grid_points(); ++i)
    out += fmt_double(model.r(i)) + ',' + fmt_double(u[i]) + '\n';
  return out;
}

}  // namespace semiflow
