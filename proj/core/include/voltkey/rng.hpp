#pragma once

#include <cstdint>
#include <random>

namespace voltkey {

// splitmix64 finalizer; used to derive independent sub-seeds from a base seed
// and a stream index so separate noise processes never share an engine.
uint64_t mix_seed(uint64_t base, uint64_t stream);

// Deterministic random source. mt19937_64 is fully specified by the standard
// and the derived distributions below are hand-rolled, so a given seed yields
// identical output on every platform and toolchain.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Marsaglia polar method
  double gaussian();

  // exponential with the given mean
  double exponential(double mean);

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace voltkey
