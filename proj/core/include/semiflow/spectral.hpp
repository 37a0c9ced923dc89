#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semiflow/integrate.hpp"
#include "semiflow/model.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

/// Scalar nonlinearity with recorded asymptotic bounds: f_bar is the liminf
/// at +infinity, f_under the negated limsup at -infinity, M = sup |f|.
struct ScalarNonlinearity {
  std::function<double(double)> f;
  std::function<double(double)> F;  // antiderivative with F(0) = 0
  double f_bar = 0;
  double f_under = 0;
  double M = 0;
  std::string name;
};

ScalarNonlinearity nl_arctan2();  // f(s) = 2 atan s; bounds pi
ScalarNonlinearity nl_tanh();     // f(s) = tanh s; bounds 1
ScalarNonlinearity nl_zero();

/// Sine-Galerkin truncation of u_t + (A - mu) u = f(u) + g on (0, pi) with
/// Dirichlet ends: modes sin(kx), eigenvalues k^2, resonance mu equal to one
/// of them. The quadrature is the uniform sine grid, which integrates
/// products sin(jx) sin(kx) exactly (up to roundoff) for j,k <= modes.
class SpectralModel {
 public:
  static SpectralModel make(int modes, double mu, ScalarNonlinearity f, int quad_points = 0);

  int modes() const { return m_; }
  double mu() const { return mu_; }
  const ScalarNonlinearity& nonlinearity() const { return f_; }
  SpaceId space_id() const { return space_; }
  double lambda(int k) const { return static_cast<double>(k) * k; }  // k = 1..m

  const std::vector<int>& idx_minus() const { return idx_minus_; }
  const std::vector<int>& idx_zero() const { return idx_zero_; }
  const std::vector<int>& idx_plus() const { return idx_plus_; }
  double mu_plus() const;  // smallest eigenvalue above mu (throws if none)

  int quad_points() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& quad_nodes() const { return nodes_; }
  const std::vector<double>& quad_weights() const { return weights_; }
  /// sin(k x_i), k-major (row k-1 holds mode k over all nodes).
  const std::vector<double>& sin_table() const { return sin_; }

  /// Worst relative error of the discrete <sin j, sin k> table against
  /// (pi/2) delta_jk; checked to 1e-10 at construction.
  double orthogonality_error() const { return ortho_err_; }

  StateVector state(std::vector<double> coords) const;
  StateVector zero_state() const;
  StateVector unit_mode(int k) const;  // e_k

  void synth(std::span<const double> coeffs, std::span<double> values_at_nodes) const;
  double quad_integral(std::span<const double> values_at_nodes) const;

  double norm_h(const StateVector& u) const;   // L2 norm
  double norm_v(const StateVector& u) const;   // H1_0 norm
  double norm_l_h(const StateVector& u) const; // |(A - mu) u| in L2

 private:
  int m_ = 0;
  double mu_ = 0;
  ScalarNonlinearity f_;
  SpaceId space_ = 0;
  std::vector<double> nodes_, weights_, sin_;
  std::vector<int> idx_minus_, idx_zero_, idx_plus_;
  double ortho_err_ = 0;
};

enum class Sector { minus, zero, plus };

StateVector project(const SpectralModel& model, const StateVector& u, Sector sector);
double sector_norm_v(const SpectralModel& model, const StateVector& u, Sector sector);

/// J(u) = 1/2 (||u||^2 - mu |u|^2) - integral of F(u).
double energy(const SpectralModel& model, const StateVector& u);

/// Time-shifted hull point theta_tau g of the forcing.
struct HullShift {
  double tau = 0;
};

struct ForcingSignal {
  enum class Kind { zero, quasiperiodic } kind = Kind::zero;
  std::vector<double> freqs;
  std::vector<double> amps;
  std::vector<double> profile_coeffs;  // sine coefficients of the spatial profile
  double inf_g = 0, sup_g = 0;         // computed bounds over (0,pi) x R

  double time_factor(double t) const;
  double profile_at(double x) const;
  double eval(double x, double t) const { return profile_at(x) * time_factor(t); }
  double sup_abs() const;

  static ForcingSignal zero();
  /// Profile is rescaled so max |profile| = 1; amplitude bounds follow as
  /// +- sum |amps|.
  static ForcingSignal quasiperiodic(std::vector<double> freqs, std::vector<double> amps,
                                     std::vector<double> profile_coeffs);
};

/// The Galerkin system as a FlowModel: u' = -(A - mu) u + P[f(u) + g(. , t + tau)].
/// Stiff split exposes the diagonal linear part for the imex schemes; the
/// norm is the V norm.
class ResonantFlow : public FlowModel {
 public:
  ResonantFlow(const SpectralModel& model, const ForcingSignal& g, HullShift shift = {});

  void rhs(double t, std::span<const double> u, std::span<double> du) const override;
  double norm(std::span<const double> u) const override;
  bool has_stiff_split() const override { return true; }
  void stiff_apply(std::span<const double> u, std::span<double> lu) const override;
  void nonstiff(double t, std::span<const double> u, std::span<double> du) const override;
  void stiff_solve(double alpha, std::span<const double> b, std::span<double> x) const override;

  const SpectralModel& spectral() const { return m_; }
  const ForcingSignal& forcing() const { return g_; }
  double shift() const { return tau_; }

 private:
  const SpectralModel& m_;
  const ForcingSignal& g_;
  double tau_ = 0;
  std::vector<double> profile_nodes_;
};

StateVector galerkin_rhs(const SpectralModel& model, const ForcingSignal& g, HullShift shift,
                         const StateVector& u, double t);

struct LandesmanLazerMargins {
  double m1 = 0;  // f_bar + inf g
  double m2 = 0;  // f_under - sup g
  bool admissible = false;
};

LandesmanLazerMargins landesman_lazer_margins(const SpectralModel& model,
                                              const ForcingSignal& g);

struct PotentialFloor {
  double kappa = 0;  // min(f_bar, f_under) / 2
  double c0 = 0;     // max of kappa |s| - F(s) over the search grid
  double worst_violation = 0;  // on the denser verification grid
  bool pass = false;
};

/// Establishes F(s) >= kappa |s| - c0 on a dense grid; rejects nonlinearities
/// whose asymptotic bounds are not positive or whose deficit keeps growing at
/// the grid ends.
PotentialFloor potential_floor_check(const SpectralModel& model,
                                     const std::vector<double>& s_grid);

struct InvarianceThresholds {
  double mu_plus = 0;
  double eps = 0;       // (mu_plus - mu) / (2 mu_plus)
  double lambda = 0;    // (1 - eps) mu_plus - mu
  double C_eps = 0;     // (M + sup|g|)^2 |Omega| / (4 eps)
  double rho1 = 0;      // sqrt(C_eps / lambda)
  double c1 = 0;        // sampled level from which |Lv| clears the threshold
  double c1_bound = 0;  // analytic sufficient level (reported alongside)
  double threshold = 0; // 3 M |Omega|^{1/2}
  double min_margin_at_c1 = 0;  // min |Lv| - threshold over sampled v with J >= c1
  int samples = 0;
};

/// Derives the decrease/decay constants (lambda, rho1) and estimates by
/// sampling the energy level c1 above which the residual norm |Lv| clears
/// 3 M |Omega|^{1/2}.
InvarianceThresholds invariance_thresholds(const SpectralModel& model,
                                           const ForcingSignal& g, Rng& rng,
                                           int samples = 4000);

struct SeedOutcome {
  TrajectoryStatus status = TrajectoryStatus::completed;
  double end_time = 0;
  double worst_j_margin = 0;         // max over samples of J(u) - c
  double worst_p_margin = 0;         // max over samples of ||P+ u|| - rho
  double worst_envelope_excess = 0;  // max over samples of ||u+||^2 - envelope
};

struct InvariantRegionReport {
  std::vector<SeedOutcome> seeds;
  int margin_violations = 0;
  int envelope_violations = 0;
  int ran_full_horizon = 0;
  int left_as_unbounded = 0;  // norm-threshold escapes to infinity inside the region
  bool pass = false;
  std::optional<Trajectory> witness;
};

/// Verifies forward invariance of N_{c,rho} = {J <= c, ||P+ u|| <= rho} on
/// the given seeds, together with the exponential decay envelope of the
/// ||P+ u|| component. Margins are checked on every recorded sample until
/// the trajectory ends; trajectories may leave through the unbounded ends of
/// the region (norm threshold), which is counted separately, never as a
/// violation.
InvariantRegionReport invariant_region_check(const SpectralModel& model,
                                             const ForcingSignal& g,
                                             const InvarianceThresholds& th, double c,
                                             double rho, const std::vector<StateVector>& seeds,
                                             double horizon, double tol,
                                             double sample_dt = 0.05);

/// Random smooth states inside N_{c,rho} (P+ part scaled under rho, whole
/// state shrunk until J <= c).
std::vector<StateVector> sample_region_states(const SpectralModel& model, double c, double rho,
                                              int count, Rng& rng, double scale = 0.8);

}  // namespace semiflow
