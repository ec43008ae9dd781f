#pragma once

// Seeded comparison of the sharp capacity-coupling lower bound against the
// classical transportation optimum for quadratic costs on a fixed grid, with
// random additive marginals drawn by the uniform-spacings construction.

#include <cstdint>
#include <vector>

namespace capot {

// splitmix64: tiny deterministic generator for reproducible experiments.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Stream for a counter, independent of how many draws other streams made;
  // makes parallel trials reproducible.
  static SplitMix fork(std::uint64_t seed, std::uint64_t counter) {
    SplitMix base(seed ^ (0xD1B54A32D192ED03ull * (counter + 1)));
    return SplitMix(base.next());
  }

 private:
  std::uint64_t state_;
};

// n masses that partition the unit interval at n - 1 sorted uniform variates;
// the resulting vector is a uniformly distributed probability vector.
std::vector<double> uniform_spacings(std::size_t n, SplitMix& rng);

struct Fig1Config {
  unsigned nx = 30;      // first grid: 1, 2, ..., nx
  unsigned ny = 20;      // second grid: 0, 2.2, ..., 2.2 * (ny - 1)
  unsigned trials = 100;
  std::uint64_t seed = 0;
};

struct Fig1Row {
  unsigned trial = 0;
  double capacity_min = 0.0;   // sharp lower bound over capacity couplings
  double classical_min = 0.0;  // transportation optimum over additive couplings
};

// Rows in trial order; capacity_min <= classical_min in every row because the
// additive couplings sit inside the capacity couplings. Trials run in
// parallel; the seed alone fixes every number.
std::vector<Fig1Row> run_fig1(const Fig1Config& cfg);

}  // namespace capot
