#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semiflow/state.hpp"

namespace semiflow {

enum class Scheme {
  erk45,       // adaptive Dormand-Prince 5(4), explicit
  imex_cn,     // ARS(2,2,2): linear part implicit, second order
  imex_euler,  // linear part backward Euler, first order, inverse-positive
};

struct IntegratorPolicy {
  double dt_max = 0.1;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double blow_up_norm = 1e6;  // norm threshold standing in for finite escape time
  Scheme scheme = Scheme::erk45;
  double fixed_dt = 0;  // > 0 disables adaptivity and steps at exactly this size
};

/// Right-hand side of u' = F(u, t) together with the integrator policy and
/// the norm in which blow-up is declared. Immutable after construction and
/// safe to share read-only; all operations taking a model are pure.
class FlowModel {
 public:
  FlowModel(int dim, SpaceId space = 0) : dim_(dim), space_(space) {}
  virtual ~FlowModel() = default;

  int dim() const { return dim_; }
  SpaceId space_id() const { return space_; }

  virtual void rhs(double t, std::span<const double> u, std::span<double> du) const = 0;

  /// Norm used for blow-up detection and distance-based probes.
  virtual double norm(std::span<const double> u) const { return euclid_norm(u); }
  double norm(const StateVector& x) const { return norm(std::span<const double>(x.c)); }

  // Stiff splitting rhs(t,u) = -L u + N(t,u) for the imex schemes; models
  // without a stiff part run explicit only.
  virtual bool has_stiff_split() const { return false; }
  virtual void stiff_apply(std::span<const double>, std::span<double>) const;
  virtual void nonstiff(double, std::span<const double>, std::span<double>) const;
  /// Solves (I + alpha L) x = b.
  virtual void stiff_solve(double, std::span<const double>, std::span<double>) const;

  StateVector state(std::vector<double> coords) const;
  void check_state(const StateVector& x) const;

  StateVector eval_rhs(const StateVector& x, double t = 0) const;
  double rhs_norm(const StateVector& x, double t = 0) const;

  IntegratorPolicy policy;

 private:
  int dim_;
  SpaceId space_;
};

/// FlowModel around a plain callable; the toy systems and gradient flows in
/// the test/experiment suites are all built from this.
class CallbackModel : public FlowModel {
 public:
  using Rhs = std::function<void(double, std::span<const double>, std::span<double>)>;
  CallbackModel(int dim, Rhs f, SpaceId space = 0)
      : FlowModel(dim, space), f_(std::move(f)) {}

  void rhs(double t, std::span<const double> u, std::span<double> du) const override {
    f_(t, u, du);
  }

 private:
  Rhs f_;
};

/// Gradient descent flow u' = -grad(phi) built from a callable gradient.
std::unique_ptr<CallbackModel> make_gradient_flow(
    int dim, std::function<void(std::span<const double>, std::span<double>)> grad,
    SpaceId space = 0);

// Built-in systems used by the verification suites:
//   decay        u' = -u                  (1d)
//   growth       u' = u                   (1d)
//   quadratic    u' = u^2                 (1d, blows up at 1/u0)
//   unit_speed   u' = 1                   (1d)
//   saddle       (x, y)' = (x, -y)
//   hopf         r' = r(1 - r^2), theta' = 1, in cartesian coordinates
//   doublewell   gradient flow of (x^2 - 1)^2
//   quartic2     gradient flow of x^4 - x^2 + y^2
std::unique_ptr<CallbackModel> make_builtin(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace semiflow
