#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiflow/integrate.hpp"
#include "semiflow/minimax.hpp"
#include "semiflow/model.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

/// Radial finite-volume model of u_t - lap(u) + a(r) u = f(r, u) on a ball
/// of radius R_max in R^n with a Dirichlet end. Nodes sit at r_i = i*h
/// (i = 0..N-1, the origin included); fluxes use exact cell volumes, which
/// makes the discrete operator self-adjoint in the weighted inner product
/// and the energy identity -dJ/dt = |Lu - f(u)|^2 exact in space.
class EllipticModel {
 public:
  struct Params {
    int n = 3;
    double R_max = 24.0;
    int grid_points = 800;
    std::function<double(double)> a_of_r;  // potential
    std::function<double(double)> b_of_r;  // nonlinearity weight
    double gamma = 0.5;                    // f = b(r) |s|^gamma s, mu = gamma + 2
  };

  static EllipticModel make(const Params& p);
  /// a = 1, Gaussian b(r) = b_amp * exp(-(r/b_width)^2).
  static EllipticModel canonical(int grid_points = 800, double R_max = 24.0,
                                 double gamma = 0.5, double b_amp = 2.0,
                                 double b_width = 1.5);

  int n() const { return n_; }
  int grid_points() const { return N_; }
  double h() const { return h_; }
  double R_max() const { return Rmax_; }
  double gamma() const { return gamma_; }
  double mu() const { return gamma_ + 2.0; }
  double a0() const { return a0_; }
  double a1() const { return a1_; }
  double omega_n() const { return omega_; }
  SpaceId space_id() const { return space_; }

  double r(int i) const { return h_ * i; }
  double a_at(int i) const { return a_[static_cast<std::size_t>(i)]; }
  double b_at(int i) const { return b_[static_cast<std::size_t>(i)]; }
  double cell_volume(int i) const { return vol_[static_cast<std::size_t>(i)]; }

  double f_val(int i, double s) const;
  double F_val(int i, double s) const;
  double fprime_val(int i, double s) const;

  StateVector state(std::vector<double> coords) const;
  StateVector zero_state() const;

  void apply_L(std::span<const double> u, std::span<double> lu) const;
  /// (I + alpha L) x = b by the Thomas algorithm; inverse-positive for
  /// alpha > 0.
  void solve_shifted(double alpha, std::span<const double> b, std::span<double> x) const;

  double norm_l2(const StateVector& u) const;
  double norm_v(const StateVector& u) const;
  double inner_l2(const StateVector& u, const StateVector& v) const;

  /// |L u - f(u)| in the discrete L2 norm (the stationary residual).
  double residual_norm(const StateVector& u) const;

  double max_b() const;

 private:
  int n_ = 3, N_ = 0;
  double h_ = 0, Rmax_ = 0, gamma_ = 0, a0_ = 0, a1_ = 0, omega_ = 0;
  std::vector<double> a_, b_, vol_, face_;  // face_[i] = area at r_{i+1/2}
  SpaceId space_ = 0;
  friend class ParabolicFlow;
};

/// The method-of-lines flow u' = -(L u - f(u)); stiff split exposes L for
/// the imex integrator (backward Euler by default, preserving the cone).
class ParabolicFlow : public FlowModel {
 public:
  explicit ParabolicFlow(const EllipticModel& model);

  void rhs(double t, std::span<const double> u, std::span<double> du) const override;
  double norm(std::span<const double> u) const override;
  bool has_stiff_split() const override { return true; }
  void stiff_apply(std::span<const double> u, std::span<double> lu) const override;
  void nonstiff(double t, std::span<const double> u, std::span<double> du) const override;
  void stiff_solve(double alpha, std::span<const double> b,
                   std::span<double> x) const override;

  const EllipticModel& elliptic() const { return m_; }

 private:
  const EllipticModel& m_;
};

Trajectory parabolic_evolve(const EllipticModel& model, const StateVector& u, double horizon,
                            double sample_dt = 0);

/// J(u) = 1/2 ||u||^2 - integral of F(r, u).
double energy(const EllipticModel& model, const StateVector& u);

struct ConditionReport {
  bool a_bounds_ok = false;       // 0 < a0 <= a <= a1
  bool gamma_ok = false;          // gamma < min(2/(n-2), 1)
  bool growth_ok = false;         // |f_s'| <= (gamma+1) b |s|^gamma
  bool ratio_ok = false;          // 0 <= mu F <= f s, with the equality margin below
  double ratio_margin = 0;        // worst |mu F - f s| for the canonical power f
  bool superlinear_ok = false;    // f(r, s)/s grows along |s| on the b-support
  bool pass = false;
};

ConditionReport validate_conditions(const EllipticModel& model,
                                    const std::vector<double>& s_grid);

struct MountainPassRadius {
  double c5_hat = 0;
  double rho = 0;      // (4 c5_hat)^{-1/gamma}; +inf when b == 0
  double barrier = 0;  // min J over sampled u with ||u|| = rho
  bool degenerate = false;
  bool barrier_ok = false;  // barrier >= rho^2/4 - tol
  int trials = 0;
};

MountainPassRadius mp_radius(const EllipticModel& model, int trial_count, Rng& rng,
                             double tol = 1e-9);

struct EigenPair {
  double value = 0;
  StateVector vec;  // extended by zero outside the sub-ball, V-normalized
};

/// First Dirichlet eigenpair of -lap on the sub-ball r < r_cut, computed by
/// inverse power iteration on the grid operator.
EigenPair first_dirichlet_mode(const EllipticModel& model, double r_cut);

/// Radius of the region where b is at least frac * max b; the default cut
/// at half maximum keeps the ground mode concentrated where the weight
/// actually acts (a Gaussian b never vanishes on the grid).
double support_radius(const EllipticModel& model, double frac = 0.5);

/// Doubling search for the first s with J(s * w1) <= 0; throws when no sign
/// change shows up below s = 1e6.
double find_s1(const EllipticModel& model, const StateVector& w1);

struct ConeReport {
  double min_entry = 0;
  bool pass = false;
  std::optional<Trajectory> witness;
};

ConeReport cone_invariance_check(const EllipticModel& model,
                                 const std::vector<StateVector>& nonneg_samples,
                                 double horizon, double tol);

struct DissipativityReport {
  double worst_defect = 0;       // violation of d|u|^2/dt >= (mu-2) a0 |u|^2 - 2 mu J
  double worst_big_norm = 0;     // violation of the >= 2 mu c clause past R0
  double R0 = 0;
  int samples_checked = 0;
  int big_norm_samples = 0;
  bool pass = false;
};

DissipativityReport dissipativity_check(const EllipticModel& model, const Trajectory& traj,
                                        double c, double tol);

struct EnergyIdentityReport {
  double max_rel_error = 0;
  int steps = 0;
  bool pass = false;
};

/// Compares the finite-difference -dJ/dt against the squared residual at
/// midpoint states; limited by the time discretization only.
EnergyIdentityReport energy_identity_check(const EllipticModel& model, const Trajectory& traj,
                                           double tol = 1e-2);

struct PositiveSolutionOptions {
  int path_nodes = 33;
  int max_iters = 400;
  double deform_dt = 0.1;
  double stall_tol = 1e-10;
  double band = 0.5;           // candidate level band around c
  double residual_target = 1e-6;
  int newton_max = 60;
  int mp_trials = 800;
};

struct PositiveSolutionResult {
  StateVector u_star;
  double residual = 0;
  double j_value = 0;
  double c_estimate = 0;
  double rho = 0, barrier = 0, c5_hat = 0, s1 = 0;
  std::vector<MinimaxRecord> records;
  double max_clip = 0;  // largest cone clip during deformation
  int newton_iters = 0;
  bool positive_ok = false, nontrivial_ok = false, residual_ok = false, band_ok = false;
  bool pass = false;
};

/// Mountain-pass run for the stationary problem: builds the cone path from 0
/// to s1 w1, estimates the minimax level with the cone-clipped parabolic
/// flow, then polishes the best level-band candidate with a damped Newton
/// iteration on L u = f(u).
PositiveSolutionResult positive_solution_search(const EllipticModel& model,
                                                const PositiveSolutionOptions& opts,
                                                Rng& rng);

/// Newton polish on the stationary equation from a given start.
StateVector newton_polish(const EllipticModel& model, StateVector u, double target_residual,
                          int max_iters, int* iters_used = nullptr);

/// States with J inside [-c, c] at the requested V-norm radii, built from
/// the ground mode blended with a far bump (used by the band stability
/// probe).
std::vector<StateVector> band_states_at_radii(const EllipticModel& model,
                                              const std::vector<double>& radii, double c);

std::string profile_csv(const EllipticModel& model, const StateVector& u);

}  // namespace semiflow
