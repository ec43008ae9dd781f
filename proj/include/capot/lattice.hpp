#pragma once

// In-place zeta / Moebius transforms over the subset lattice of an n-point
// ground set, plus the superset-directed variants. All run in O(n * 2^n) by
// the usual one-dimension-at-a-time subset-sum recurrence. Tables are indexed
// by subset bits; table length must be exactly 2^n.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace capot {

inline void check_pow2(const std::vector<double>& a, int n) {
  if (n < 0 || n > 25 || a.size() != (std::size_t{1} << n))
    throw std::invalid_argument("lattice transform: table length must be 2^n, n <= 25");
}

// out[S] = sum over subsets B of S of in[B]
inline void zeta_subsets(std::vector<double>& a, int n) {
  check_pow2(a, n);
  for (int d = 0; d < n; ++d)
    for (std::size_t s = 0; s < a.size(); ++s)
      if (s >> d & 1) a[s] += a[s ^ (std::size_t{1} << d)];
}

// Inverse of zeta_subsets: recovers the Moebius coefficients.
inline void mobius_subsets(std::vector<double>& a, int n) {
  check_pow2(a, n);
  for (int d = 0; d < n; ++d)
    for (std::size_t s = 0; s < a.size(); ++s)
      if (s >> d & 1) a[s] -= a[s ^ (std::size_t{1} << d)];
}

// out[S] = sum over supersets B of S of in[B]
inline void zeta_supersets(std::vector<double>& a, int n) {
  check_pow2(a, n);
  for (int d = 0; d < n; ++d)
    for (std::size_t s = 0; s < a.size(); ++s)
      if (!(s >> d & 1)) a[s] += a[s | (std::size_t{1} << d)];
}

inline void mobius_supersets(std::vector<double>& a, int n) {
  check_pow2(a, n);
  for (int d = 0; d < n; ++d)
    for (std::size_t s = 0; s < a.size(); ++s)
      if (!(s >> d & 1)) a[s] -= a[s | (std::size_t{1} << d)];
}

// table[A] = min of f over the members of A for nonempty A; table[0] = 0.
inline std::vector<double> min_over_subset_table(const std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  if (n > 25) throw std::invalid_argument("min_over_subset_table: n <= 25");
  std::vector<double> m(std::size_t{1} << n, 0.0);
  for (std::size_t s = 1; s < m.size(); ++s) {
    const int low = std::countr_zero(s);
    const std::size_t rest = s & (s - 1);
    m[s] = rest ? std::min(f[low], m[rest]) : f[low];
  }
  return m;
}

}  // namespace capot
