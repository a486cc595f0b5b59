#pragma once

#include <cstddef>

#include "topksum/types.hpp"

namespace topksum::baselines {

/// One boundary-pair candidate in the sorted enumeration: k0 entries are
/// shifted, entries (k0, k1] pool to l, the rest stay.
struct GridCandidate {
  std::size_t k0 = 0;  ///< 0 <= k0 < k
  std::size_t k1 = 0;  ///< k <= k1 <= n
  double u = 0.0;
  double l = 0.0;
  bool feasible = false;
};

/// Exhaustive exact solver: sorts descending and enumerates all (k0, k1)
/// boundary pairs, solving a 2x2 linear system for each until the feasible
/// candidate is found. O(k (n - k)) after the sort; intended as ground
/// truth for n up to ~1e4.
ProjectionSolution grid_oracle(const ProblemInstance& inst);

/// Production-style sort-based solver: full descending sort, prefix sums,
/// then one monotone sweep over boundary candidates (k0 moving down, k1
/// moving up) using the same 2x2 system as the oracle. Output identical to
/// grid_oracle.
ProjectionSolution sorted_solver(const ProblemInstance& inst);

}  // namespace topksum::baselines
