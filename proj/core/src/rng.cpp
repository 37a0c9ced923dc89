#include "semiflow/rng.hpp"

#include <cmath>

namespace semiflow {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = uniform();
  if (u < 0x1.0p-60) u = 0x1.0p-60;
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double a = 6.283185307179586476925286766559 * v;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

int Rng::index(int n) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

std::vector<double> Rng::normal_vector(int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = normal();
  return v;
}

std::vector<double> Rng::unit_vector(int dim) {
  std::vector<double> v = normal_vector(dim);
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0) {
    v[0] = 1;
    return v;
  }
  for (auto& x : v) x /= n;
  return v;
}

Rng Rng::fork(std::uint64_t label) const {
  std::uint64_t x = s_[0] ^ (0x9e3779b97f4a7c15ULL * (label + 1));
  return Rng(splitmix64(x));
}

}  // namespace semiflow
