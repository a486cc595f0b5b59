#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace topksum {

/// Euclidean projection problem onto {x : sum of the k largest entries <= r}.
struct ProblemInstance {
  std::vector<double> a;  ///< input vector, length n >= 1
  std::size_t k = 1;      ///< 1 <= k <= n
  double r = 0.0;         ///< budget for the top-k sum

  std::size_t n() const { return a.size(); }

  /// Throws std::invalid_argument unless n >= 1, 1 <= k <= n, and all of
  /// a and r are finite.
  void validate() const;
};

/// Termination classification. Values -1/0 mark closed-form exits; 1/2/3
/// record which bound the Initialization step handed to the Pivot search.
enum class Flag : int {
  closed_form = -1,  ///< solution assembled directly from the init shortcut
  feasible = 0,      ///< input already satisfies the constraint, x = a
  pivot_upper_max = 1,  ///< pivot seeded with upper bound at max(a)
  pivot_lower = 2,      ///< pivot seeded with a lower bound only
  pivot_upper = 3,      ///< pivot seeded with upper bound at a late iterate
};

inline int flag_value(Flag f) { return static_cast<int>(f); }

struct IterationStats {
  std::size_t init_iters = 0;
  std::size_t pivot_iters = 0;
  std::size_t exact_iters = 0;
  std::size_t gsearch_passes = 0;  ///< shrink sweeps across all pool searches

  std::size_t total() const { return init_iters + pivot_iters + exact_iters; }
};

/// Solver output: projected vector plus the dual thresholds (u*, l*).
/// Entries above u* are shifted down by lambda = u* - l*, entries in
/// [l*, u*] are pooled to l*, entries below l* are untouched.
struct ProjectionSolution {
  std::vector<double> x;
  double u_star = 0.0;
  double l_star = 0.0;
  Flag flag = Flag::feasible;
  IterationStats stats;

  double lambda() const { return u_star - l_star; }
};

/// Result of checking a solution against the optimality system.
struct KktCertificate {
  double residual_area = 0.0;    ///< mismatch of shaved mass vs raised mass
  double residual_budget = 0.0;  ///< mismatch of the budget equation
  std::size_t set_violations = 0;  ///< entries disagreeing with the
                                   ///< threshold reconstruction
  double tol = 0.0;
  bool dual_order_ok = true;  ///< l* <= (k-th largest of a) <= u* within tol

  bool passed() const {
    return residual_area <= tol && residual_budget <= tol &&
           set_violations == 0 && dual_order_ok;
  }
};

/// Raised when an internal invariant fails; indicates a bug, not bad input.
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised when floating-point evaluation cannot proceed (degenerate slope,
/// non-finite intermediate).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compensated (Neumaier) accumulator; keeps long sums accurate enough for
/// certificate checks at n ~ 1e6.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

}  // namespace topksum
