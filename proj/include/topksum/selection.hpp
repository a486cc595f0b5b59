#pragma once

#include <cstddef>
#include <span>

namespace topksum {

/// k-th largest value (k is 1-based). Expected-linear quickselect with a
/// deterministic median-of-medians fallback, so adversarial orderings stay
/// O(n). The input span is permuted in place.
double select_kth_largest(std::span<double> values, std::size_t k);

/// Sum of the k largest entries, computed by selection (no full sort).
/// Uses a compensated sum over the selected block.
double topk_sum(std::span<const double> values, std::size_t k);

}  // namespace topksum
