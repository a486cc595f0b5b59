// Test-only oracles: independent brute-force routes used to freeze expected
// values. These must stay independent of the implementation paths they
// check (no pool search, no pivot logic).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "topksum/kkt_curves.hpp"
#include "topksum/types.hpp"

namespace oracles {

inline double inf() { return std::numeric_limits<double>::infinity(); }

// Smallest l with area_gap(u, l) == 0, found by scanning the breakpoints of
// l (the data values) in ascending order and interpolating the first
// sign change. Exact on piecewise-linear input.
inline double balance_root_scan(const topksum::ProblemInstance& inst,
                                double u) {
  using topksum::area_gap;
  std::vector<double> vals;
  for (double v : inst.a) {
    if (v <= u) vals.push_back(v);
  }
  vals.push_back(u);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  double prev_l = -inf();
  double prev_g = -inf();  // g -> -inf as l -> -inf
  for (double l : vals) {
    double g = area_gap(inst, u, l);
    if (g >= 0.0) {
      if (g == 0.0) return l;
      if (!std::isfinite(prev_g)) {
        // Piece below the smallest breakpoint has slope n - k.
        double slope =
            static_cast<double>(inst.n()) - static_cast<double>(inst.k);
        if (slope <= 0.0) {
          throw std::runtime_error("balance_root_scan: degenerate low piece");
        }
        return l - g / slope;
      }
      return prev_l + (0.0 - prev_g) * (l - prev_l) / (g - prev_g);
    }
    prev_l = l;
    prev_g = g;
  }
  throw std::runtime_error("balance_root_scan: no root at or below u");
}

// Gap value via the independent balance root.
inline double gap_scan(const topksum::ProblemInstance& inst, double u) {
  return balance_root_scan(inst, u) - topksum::budget_curve(inst, u);
}

// Root of the gap by bisection on its strictly-decreasing domain. Brackets
// from just above the (k+1)-th largest value.
inline double gap_root_bisect(const topksum::ProblemInstance& inst) {
  std::vector<double> s(inst.a);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double lo = std::nextafter(s[inst.k], inf());  // just above abar_{k+1}
  double hi = std::max(s[0], inst.r / static_cast<double>(inst.k)) + 1.0;
  while (gap_scan(inst, hi) > 0.0) hi = 2.0 * hi - lo;
  for (int it = 0; it < 240; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (gap_scan(inst, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Deterministic pseudo-random stream for the property tests.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return next() % n; }
};

inline std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

// Duplicate-heavy vector: entries drawn from a small value alphabet.
inline std::vector<double> duplicate_heavy_vector(Rng& rng, std::size_t n,
                                                  std::size_t alphabet) {
  std::vector<double> levels(alphabet);
  for (auto& x : levels) x = rng.uniform();
  std::vector<double> v(n);
  for (auto& x : v) x = levels[rng.index(alphabet)];
  return v;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

}  // namespace oracles
