#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "topksum/kkt_curves.hpp"
#include "topksum/types.hpp"

namespace topksum::eips {

/// Candidate-pool maintenance event, recorded when a pivot bound moves.
struct FilterEvent {
  enum class Kind { tighten_upper, tighten_lower };
  Kind kind = Kind::tighten_upper;
  double u_c = 0.0;
  double balance_at_uc = 0.0;  ///< meaningful for tighten_upper only
};

struct SolveOptions {
  bool use_filter = true;  ///< shrink candidate pools as the bracket tightens
  bool use_hint = true;    ///< budget-value reorder hint in the pool search
  bool hint_skip_growth = true;
  bool disable_case3_shortcut = false;  ///< test harness knob
  std::vector<FilterEvent>* event_log = nullptr;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Result of the Initialization phase: either a finished classification
/// (flags 0 / -1) or seed points for the pivot search (flags 1 / 2 / 3).
struct InitOutcome {
  Flag flag = Flag::feasible;
  std::optional<double> u_star;  ///< set for flag 0 and the snapped shortcut
  std::optional<double> l_star;  ///< set for flag 0 and both -1 shortcuts
  double u_R = kInf;
  double u_L = -kInf;
  double u_C = kNan;
  double gap_at_uR = kNan;      ///< cached gap value at u_R (flags 1, 3)
  double gap_at_uL = kNan;      ///< cached gap value at u_L (flag 2)
  double balance_at_uR = kNan;  ///< balance-curve value at u_R (flags 1, 3)
  double budget_at_uL = kNan;   ///< budget-curve value at u_L (flag 2)
  double u_prev = kNan;         ///< u^{i-1} (max(a) when the loop broke at i=1)
  double u_last = kNan;         ///< u^i, the final loop iterate
  std::size_t count_at_last = 0;  ///< |{a_i >= u_last}| from the final scan
  std::size_t count_at_prev = 0;  ///< |{a_i >= u_prev}|
  std::size_t band_at_uR = 0;     ///< |{balance_at_uR <= a_i < u_R}|
};

/// Surviving candidate pools plus the cumulative mass of elements discarded
/// above the shrinking upper bound. Owned by one solver invocation.
struct FilterState {
  std::vector<double> budget_pool;   ///< candidates for budget sums / counts
  std::vector<double> balance_pool;  ///< candidates for the balance search
  NeumaierSum carried;               ///< sum of discarded-high elements (B)
  std::size_t carried_count = 0;     ///< their count (N)
  double u_LB = kNan;                ///< auxiliary outer lower bound
  double u_RB = kNan;                ///< auxiliary outer upper bound
  std::size_t k = 1;
  double r = 0.0;
  std::span<const double> full;  ///< original vector (fallback scans)
  bool filtering = true;
  bool balance_ready = false;  ///< balance pool built (lazily for flag 2)
  std::vector<FilterEvent>* log = nullptr;

  static FilterState make(const ProblemInstance& inst, const InitOutcome& init,
                          const SolveOptions& opts = {});

  /// Discards budget candidates >= u_c into the carried mass and shrinks the
  /// balance pool to [balance_at_uc, u_c). Idempotent for repeated u_c.
  void tighten_upper(double u_c, double balance_at_uc);

  /// Drops budget candidates below u_c; the balance pool is unchanged.
  void tighten_lower(double u_c);

  void apply(const FilterEvent& ev);

  PoolContext budget_ctx() const;

  /// Budget curve evaluated through the pools; must match the full-vector
  /// evaluation for every admissible u (reconstruction invariant).
  double budget_at(double u) const;
};

struct PivotResult {
  double u_L = -kInf;
  double u_R = kInf;
  double u_C = kNan;
  bool converged = false;  ///< |gap(u_C)| <= eps was hit inside the loop
};

/// Initialization phase (requires 2 <= k <= n-1; the k = 1 / k = n closed
/// forms live in core). Walks the budget curve toward the identity line,
/// classifies the instance, and seeds the pivot bounds.
InitOutcome initialize(const ProblemInstance& inst, double eps,
                       IterationStats& stats, AreaSearchScratch& scratch,
                       const SolveOptions& opts = {});

/// Pivot phase: coarse bracketing of the gap root via a secant rule with
/// slope-equality breakpoint moves and halving repair.
PivotResult pivot_step(const ProblemInstance& inst, const InitOutcome& init,
                       FilterState& fs, double eps, IterationStats& stats,
                       AreaSearchScratch& scratch,
                       const SolveOptions& opts = {});

/// Exact phase: Newton refinement of the gap root on the bracketed piece,
/// polished past eps to the floating-point root so certificates hold.
double exact_step(const ProblemInstance& inst, double u_L, FilterState& fs,
                  double eps, IterationStats& stats,
                  AreaSearchScratch& scratch, const SolveOptions& opts = {});

/// Full solver: dispatches the closed forms, runs the three phases, and
/// assembles the projection from the final thresholds.
ProjectionSolution project(const ProblemInstance& inst, double eps = 1e-8,
                           const SolveOptions& opts = {});

}  // namespace topksum::eips
