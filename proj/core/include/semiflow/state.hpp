#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace semiflow {

using SpaceId = std::uint32_t;

/// Point of a finite-dimensional phase space. `space` tags the ambient
/// discretization so states from different models cannot be mixed; 0 is
/// the anonymous coordinate space used by the toy models.
struct StateVector {
  std::vector<double> c;
  SpaceId space = 0;

  StateVector() = default;
  explicit StateVector(std::vector<double> coords, SpaceId s = 0)
      : c(std::move(coords)), space(s) {}

  int dim() const { return static_cast<int>(c.size()); }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  std::span<const double> view() const { return c; }

  bool finite() const {
    for (double v : c)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline StateVector make_state(std::initializer_list<double> v, SpaceId space = 0) {
  return StateVector(std::vector<double>(v), space);
}

double euclid_norm(std::span<const double> v);
double euclid_dist(const StateVector& a, const StateVector& b);

/// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace semiflow
