#include "topksum/selection.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <stdexcept>
#include <vector>

#include "topksum/types.hpp"

namespace topksum {
namespace {

// Three-way partition of [lo, hi) around `pivot`, descending:
// (> pivot)(== pivot)(< pivot). Returns the equal range.
struct EqRange {
  std::size_t lo, hi;
};

EqRange partition3(std::span<double> v, std::size_t lo, std::size_t hi,
                   double pivot) {
  std::size_t i = lo, gt = lo, lt = hi;
  while (i < lt) {
    if (v[i] > pivot) {
      std::swap(v[i++], v[gt++]);
    } else if (v[i] < pivot) {
      std::swap(v[i], v[--lt]);
    } else {
      ++i;
    }
  }
  return {gt, lt};
}

void sort_small_desc(std::span<double> v, std::size_t lo, std::size_t hi) {
  std::sort(v.begin() + lo, v.begin() + hi, std::greater<double>());
}

// Deterministic worst-case-linear select of the value with descending rank
// `want` (0-based) in v. Permutes v.
double mom_select(std::span<double> v, std::size_t want) {
  std::size_t lo = 0, hi = v.size();
  while (true) {
    std::size_t n = hi - lo;
    if (n <= 10) {
      sort_small_desc(v, lo, hi);
      return v[lo + want];
    }
    // Medians of groups of five, compacted to the front of the range.
    std::size_t nm = 0;
    for (std::size_t i = lo; i < hi; i += 5) {
      std::size_t m = std::min<std::size_t>(5, hi - i);
      std::sort(v.begin() + i, v.begin() + i + m);
      std::swap(v[lo + nm], v[i + m / 2]);
      ++nm;
    }
    double pivot = mom_select(v.subspan(lo, nm), (nm - 1) / 2);
    EqRange eq = partition3(v, lo, hi, pivot);
    if (lo + want < eq.lo) {
      hi = eq.lo;
    } else if (lo + want >= eq.hi) {
      want -= eq.hi - lo;
      lo = eq.hi;
    } else {
      return pivot;
    }
  }
}

}  // namespace

double select_kth_largest(std::span<double> v, std::size_t k) {
  if (v.empty() || k == 0 || k > v.size()) {
    throw std::invalid_argument("select_kth_largest: k out of range");
  }
  std::size_t lo = 0, hi = v.size();
  std::size_t want = k - 1;  // descending rank, relative to lo
  int budget = 2 * (static_cast<int>(std::bit_width(v.size())) + 1);
  while (true) {
    std::size_t n = hi - lo;
    if (n <= 16) {
      sort_small_desc(v, lo, hi);
      return v[lo + want];
    }
    if (budget-- <= 0) {
      return mom_select(v.subspan(lo, n), want);
    }
    double x = v[lo], y = v[lo + n / 2], z = v[hi - 1];
    double pivot = std::max(std::min(x, y), std::min(std::max(x, y), z));
    EqRange eq = partition3(v, lo, hi, pivot);
    if (lo + want < eq.lo) {
      hi = eq.lo;
    } else if (lo + want >= eq.hi) {
      want -= eq.hi - lo;
      lo = eq.hi;
    } else {
      return pivot;
    }
  }
}

double topk_sum(std::span<const double> values, std::size_t k) {
  if (values.empty() || k == 0 || k > values.size()) {
    throw std::invalid_argument("topk_sum: k out of range");
  }
  std::vector<double> buf(values.begin(), values.end());
  double kth = select_kth_largest(std::span<double>(buf), k);
  (void)kth;
  // After selection the k largest occupy buf[0..k).
  NeumaierSum s;
  for (std::size_t i = 0; i < k; ++i) s.add(buf[i]);
  return s.value();
}

}  // namespace topksum
