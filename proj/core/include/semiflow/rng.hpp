#pragma once

#include <cstdint>
#include <vector>

namespace semiflow {

/// Deterministic PRNG (xoshiro256**). The stream depends only on the seed,
/// not on the platform or standard library, so every artifact produced from
/// a fixed seed is byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  int index(int n);  // uniform in {0, ..., n-1}

  std::vector<double> normal_vector(int dim);
  std::vector<double> unit_vector(int dim);

  /// Independent substream; deterministic in (seed, label).
  Rng fork(std::uint64_t label) const;

 private:
  std::uint64_t s_[4];
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace semiflow
