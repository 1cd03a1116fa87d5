#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace hgc {

// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

// First k-subset of {1..n} in lexicographic order.
inline std::vector<int> first_combination(int k) {
  std::vector<int> c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), 1);
  return c;
}

// Advances `c` (a sorted k-subset of {1..n}) to its lexicographic successor.
// Returns false after the last subset.
inline bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i + 1) --i;
  if (i < 0) return false;
  ++c[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) {
    c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  auto c = first_combination(k);
  do {
    fn(static_cast<const std::vector<int>&>(c));
  } while (next_combination(c, n));
}

inline std::vector<std::vector<int>> all_combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  for_each_combination(n, k, [&](const std::vector<int>& c) { out.push_back(c); });
  return out;
}

}  // namespace hgc
