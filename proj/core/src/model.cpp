#include "semiflow/model.hpp"

#include <stdexcept>

namespace semiflow {

void FlowModel::stiff_apply(std::span<const double>, std::span<double>) const {
  throw std::logic_error("model has no stiff split");
}

void FlowModel::nonstiff(double, std::span<const double>, std::span<double>) const {
  throw std::logic_error("model has no stiff split");
}

void FlowModel::stiff_solve(double, std::span<const double>, std::span<double>) const {
  throw std::logic_error("model has no stiff split");
}

StateVector FlowModel::state(std::vector<double> coords) const {
  if (static_cast<int>(coords.size()) != dim_)
    throw std::invalid_argument("state: coordinate count does not match model dimension");
  return StateVector(std::move(coords), space_);
}

void FlowModel::check_state(const StateVector& x) const {
  if (x.dim() != dim_) throw std::invalid_argument("state dimension does not match model");
  if (x.space != space_) throw std::invalid_argument("state belongs to a different space");
  if (!x.finite()) throw std::invalid_argument("state has non-finite entries");
}

StateVector FlowModel::eval_rhs(const StateVector& x, double t) const {
  check_state(x);
  StateVector out = x;
  rhs(t, x.c, out.c);
  return out;
}

double FlowModel::rhs_norm(const StateVector& x, double t) const {
  return norm(eval_rhs(x, t));
}

std::unique_ptr<CallbackModel> make_gradient_flow(
    int dim, std::function<void(std::span<const double>, std::span<double>)> grad,
    SpaceId space) {
  auto f = [g = std::move(grad)](double, std::span<const double> u, std::span<double> du) {
    g(u, du);
    for (auto& v : du) v = -v;
  };
  return std::make_unique<CallbackModel>(dim, std::move(f), space);
}

std::unique_ptr<CallbackModel> make_builtin(const std::string& name) {
  if (name == "decay") {
    return std::make_unique<CallbackModel>(
        1, [](double, std::span<const double> u, std::span<double> du) { du[0] = -u[0]; });
  }
  if (name == "growth") {
    return std::make_unique<CallbackModel>(
        1, [](double, std::span<const double> u, std::span<double> du) { du[0] = u[0]; });
  }
  if (name == "quadratic") {
    return std::make_unique<CallbackModel>(
        1, [](double, std::span<const double> u, std::span<double> du) { du[0] = u[0] * u[0]; });
  }
  if (name == "unit_speed") {
    return std::make_unique<CallbackModel>(
        1, [](double, std::span<const double>, std::span<double> du) { du[0] = 1.0; });
  }
  if (name == "saddle") {
    return std::make_unique<CallbackModel>(
        2, [](double, std::span<const double> u, std::span<double> du) {
          du[0] = u[0];
          du[1] = -u[1];
        });
  }
  if (name == "hopf") {
    return std::make_unique<CallbackModel>(
        2, [](double, std::span<const double> u, std::span<double> du) {
          const double r2 = u[0] * u[0] + u[1] * u[1];
          du[0] = u[0] * (1.0 - r2) - u[1];
          du[1] = u[1] * (1.0 - r2) + u[0];
        });
  }
  if (name == "doublewell") {
    // gradient flow of (x^2-1)^2
    return std::make_unique<CallbackModel>(
        1, [](double, std::span<const double> u, std::span<double> du) {
          du[0] = -4.0 * u[0] * (u[0] * u[0] - 1.0);
        });
  }
  if (name == "quartic2") {
    // gradient flow of x^4 - x^2 + y^2
    return std::make_unique<CallbackModel>(
        2, [](double, std::span<const double> u, std::span<double> du) {
          du[0] = -(4.0 * u[0] * u[0] * u[0] - 2.0 * u[0]);
          du[1] = -2.0 * u[1];
        });
  }
  throw std::invalid_argument("unknown builtin model: " + name);
}

std::vector<std::string> builtin_names() {
  return {"decay", "growth", "quadratic", "unit_speed", "saddle", "hopf", "doublewell",
          "quartic2"};
}

}  // namespace semiflow
