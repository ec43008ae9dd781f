#pragma once

// Shared test utilities: a reproducible counter-based RNG and random
// generators for the various capacity classes.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "capot/capacity.hpp"

namespace testutil {

// splitmix64; identical streams on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

// Random normalized monotone table: iid draws pushed up through the subset
// lattice, then rescaled so the full set carries 1.
inline capot::Capacity random_capacity(const capot::GroundSet& g, Rng& rng,
                                       int value_levels = 0) {
  const std::size_t n = g.size();
  const std::size_t full = (std::size_t{1} << n) - 1;
  for (;;) {
    std::vector<double> v(full + 1);
    for (auto& x : v) {
      x = rng.uniform();
      if (value_levels > 0)
        x = static_cast<double>(static_cast<int>(x * value_levels)) / value_levels;
    }
    v[0] = 0.0;
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t s = 0; s <= full; ++s)
        if (s & (std::size_t{1} << d))
          v[s] = std::max(v[s], v[s ^ (std::size_t{1} << d)]);
    if (v[full] < 1e-6) continue;
    for (auto& x : v) x /= v[full];
    return capot::Capacity::dense(g, std::move(v));
  }
}

inline capot::Capacity random_additive(const capot::GroundSet& g, Rng& rng) {
  std::vector<double> w(g.size());
  double total = 0.0;
  for (auto& x : w) {
    x = 0.05 + rng.uniform();
    total += x;
  }
  for (auto& x : w) x /= total;
  return capot::make_additive(g, std::move(w));
}

// Nonnegative Moebius mass on a random collection of subsets, normalized.
inline capot::Capacity random_totally_monotone(const capot::GroundSet& g, Rng& rng) {
  const std::size_t full = (std::size_t{1} << g.size()) - 1;
  for (;;) {
    std::vector<double> m(full + 1, 0.0);
    double total = 0.0;
    for (std::size_t s = 1; s <= full; ++s)
      if (rng.uniform() < 0.35) {
        m[s] = rng.uniform();
        total += m[s];
      }
    if (total < 1e-9) continue;
    for (auto& x : m) x /= total;
    capot::MobiusVector mv{g, std::move(m)};
    return capot::Capacity::dense(g, capot::zeta(mv).dense_values());
  }
}

inline std::vector<double> random_values(std::size_t n, Rng& rng, int levels = 0) {
  std::vector<double> v(n);
  for (auto& x : v) {
    x = 4.0 * rng.uniform() - 1.5;
    if (levels > 0) x = static_cast<double>(static_cast<int>(x * levels)) / levels;
  }
  return v;
}

}  // namespace testutil
