#pragma once

#include <optional>
#include <span>
#include <vector>

#include "topksum/types.hpp"

namespace topksum {

/// One-pass probe of a vector at a query point u.
struct BreakpointQuery {
  double u = 0.0;
  std::size_t count_ge = 0;  ///< |{i : a_i >= u}|
  std::size_t count_eq = 0;  ///< |{i : a_i == u}|
  double sum_ge = 0.0;       ///< sum over {a_i >= u}
};

BreakpointQuery probe(std::span<const double> a, double u);

/// Evaluation view: either the full vector (carried mass zero) or a filtered
/// pool plus the mass of elements discarded above every admissible query
/// point. Every original element >= a query point u must be present in
/// `pool` or counted by (carried_sum, carried_count).
struct PoolContext {
  std::span<const double> pool;
  double carried_sum = 0.0;
  std::size_t carried_count = 0;
  std::size_t k = 1;
  double r = 0.0;

  static PoolContext full(const ProblemInstance& inst) {
    return {std::span<const double>(inst.a), 0.0, 0, inst.k, inst.r};
  }
};

/// Fused scan at u: excess = sum(max(a_i - u, 0)) plus breakpoint counts.
struct CurveScan {
  double excess = 0.0;
  std::size_t count_ge = 0;
  std::size_t count_eq = 0;
};

CurveScan scan_curves(const PoolContext& ctx, double u);

inline double budget_from_scan(const PoolContext& ctx, const CurveScan& s) {
  return (ctx.r - s.excess) / static_cast<double>(ctx.k);
}

/// Budget curve: the pooled level forced by the budget equation at
/// threshold u, (r - sum(max(a_i - u, 0))) / k. Piecewise linear,
/// nondecreasing, concave.
double budget_curve(const ProblemInstance& inst, double u);

struct OneSidedSlopes {
  double left = 0.0;   ///< |{a_i >= u}| / k
  double right = 0.0;  ///< |{a_i > u}| / k
};

OneSidedSlopes budget_curve_slopes(const ProblemInstance& inst, double u);

/// Area-balance residual
///   g(u, l) = sum(max(a_i - u, 0)) - sum(max(a_i - l, 0)) + k (u - l);
/// zero iff the mass shaved above u equals the mass raised to l.
/// Requires l <= u.
double area_gap(const ProblemInstance& inst, double u, double l);

struct AreaSearchResult {
  double level = 0.0;         ///< smallest l with area_gap(u, l) = 0
  std::size_t pool_size = 0;  ///< surviving candidates strictly above level
  std::size_t passes = 0;     ///< shrink sweeps executed
  std::size_t ties_at_level = 0;  ///< pool candidates exactly at the level
};

/// Reusable candidate buffer; each thread owns its own.
struct AreaSearchScratch {
  std::vector<double> buf;
};

struct CurveOptions {
  bool use_hint = true;  ///< partition candidates >= hint to the front
  bool hint_skip_growth = true;  ///< skip the growth pass when the hinted
                                 ///< seed already proves level >= hint
};

/// Sort-free evaluation of the area-balance curve at u: maintains a lower
/// bound of the level over a shrinking candidate pool. `hint` is normally
/// the budget-curve value at u and only affects speed, not the result.
/// Throws std::domain_error when |{a_i >= u}| > k (curve undefined) or when
/// no candidate lies below u.
AreaSearchResult area_curve_search(const ProblemInstance& inst, double u,
                                   std::optional<double> hint,
                                   AreaSearchScratch& scratch,
                                   IterationStats* stats = nullptr,
                                   const CurveOptions& opts = {});

/// Pool-level core: `candidates` must contain only values < u; `deficit` is
/// k - |{a_i >= u}|. Permutes `candidates` in place and never allocates.
AreaSearchResult area_curve_search_pool(std::span<double> candidates, double u,
                                        std::size_t deficit,
                                        std::optional<double> hint,
                                        const CurveOptions& opts = {},
                                        IterationStats* stats = nullptr);

/// Source-level variant: reads candidates (values < u) out of `source`
/// directly, building only the surviving pool in `scratch`. Elements of
/// `source` at or above u are ignored, so the solver's filtered pools can
/// be passed without pre-copying.
AreaSearchResult area_curve_search_source(std::span<const double> source,
                                          double u, std::size_t deficit,
                                          std::optional<double> hint,
                                          AreaSearchScratch& scratch,
                                          const CurveOptions& opts = {},
                                          IterationStats* stats = nullptr);

struct GapEval {
  double gap = 0.0;      ///< balance - budget
  double budget = 0.0;   ///< budget curve value at u
  double balance = 0.0;  ///< area-balance curve value at u
};

/// Gap between the area-balance and budget curves at u. The root of the gap
/// characterizes the projection thresholds. When `use_hint` is set the
/// budget value is passed to the balance search as its reorder hint.
GapEval curve_gap(const ProblemInstance& inst, double u, bool use_hint,
                  AreaSearchScratch& scratch, IterationStats* stats = nullptr);

/// Right derivative of the gap from the piece counts:
///   budget slope  = count_gt_u / k,
///   balance slope = -(k - count_gt_u) / (count_ge_balance - k).
/// Throws std::domain_error when the balance piece is degenerate
/// (count_ge_balance <= k with count_gt_u < k).
double gap_slope_right_from_counts(std::size_t k, std::size_t count_gt_u,
                                   std::size_t count_ge_balance);

/// Right derivative of the gap at u given the already computed balance
/// value; counts are taken in one pass over the vector.
double curve_gap_slope_right(const ProblemInstance& inst, double u,
                             double balance_at_u);

}  // namespace topksum
