#include "topksum/kkt_curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topksum {

BreakpointQuery probe(std::span<const double> a, double u) {
  BreakpointQuery q;
  q.u = u;
  double s = 0.0, c = 0.0;
  for (double v : a) {
    bool ge = v >= u;
    q.count_ge += static_cast<std::size_t>(ge);
    q.count_eq += static_cast<std::size_t>(v == u);
    double x = ge ? v : 0.0;
    double t = s + x;
    double z = t - s;
    c += (s - (t - z)) + (x - z);
    s = t;
  }
  q.sum_ge = s + c;
  return q;
}

namespace {

// Branch-free compensated add (Knuth two-sum).
inline void two_sum_add(double& s, double& c, double x) {
  double t = s + x;
  double z = t - s;
  c += (s - (t - z)) + (x - z);
  s = t;
}

}  // namespace

CurveScan scan_curves(const PoolContext& ctx, double u) {
  CurveScan out;
  // Two-lane branch-free compensated accumulation; the excess terms
  // max(v - u, 0) enter unconditionally (zeros cost nothing).
  double s0 = 0.0, c0 = 0.0, s1 = 0.0, c1 = 0.0;
  std::size_t ge = 0, eq = 0;
  const double* p = ctx.pool.data();
  const std::size_t n = ctx.pool.size();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    double x0 = p[i] - u;
    double x1 = p[i + 1] - u;
    ge += static_cast<std::size_t>(x0 >= 0.0) +
          static_cast<std::size_t>(x1 >= 0.0);
    eq += static_cast<std::size_t>(x0 == 0.0) +
          static_cast<std::size_t>(x1 == 0.0);
    two_sum_add(s0, c0, std::max(x0, 0.0));
    two_sum_add(s1, c1, std::max(x1, 0.0));
  }
  for (; i < n; ++i) {
    double x = p[i] - u;
    ge += static_cast<std::size_t>(x >= 0.0);
    eq += static_cast<std::size_t>(x == 0.0);
    two_sum_add(s0, c0, std::max(x, 0.0));
  }
  out.count_ge = ge + ctx.carried_count;
  out.count_eq = eq;
  out.excess = (s0 + s1) + (c0 + c1) +
               (ctx.carried_sum - static_cast<double>(ctx.carried_count) * u);
  return out;
}

double budget_curve(const ProblemInstance& inst, double u) {
  PoolContext ctx = PoolContext::full(inst);
  return budget_from_scan(ctx, scan_curves(ctx, u));
}

OneSidedSlopes budget_curve_slopes(const ProblemInstance& inst, double u) {
  BreakpointQuery q = probe(inst.a, u);
  double k = static_cast<double>(inst.k);
  return {static_cast<double>(q.count_ge) / k,
          static_cast<double>(q.count_ge - q.count_eq) / k};
}

double area_gap(const ProblemInstance& inst, double u, double l) {
  if (l > u) throw std::invalid_argument("area_gap: requires l <= u");
  NeumaierSum s;
  for (double v : inst.a) {
    if (v > u) s.add(v - u);
    if (v > l) s.add(l - v);
  }
  return s.value() + static_cast<double>(inst.k) * (u - l);
}

namespace {

// Shrink sweeps over pool[0, front): removes members <= rho, raising rho,
// until a full sweep changes nothing. |pool| never drops to H: with
// |pool| = H + 1, rho = sum(pool) - H u is strictly below every member
// (each member is < u), so no removal can fire.
AreaSearchResult shrink_sweeps(std::span<double> pool, std::size_t front,
                               double rho, std::size_t H,
                               IterationStats* stats) {
  std::size_t passes = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++passes;
    std::size_t i = 0;
    while (i < front) {
      if (pool[i] <= rho) {
        --front;
        std::swap(pool[i], pool[front]);
        rho += (rho - pool[front]) / static_cast<double>(front - H);
        changed = true;
      } else {
        ++i;
      }
    }
  }
  if (stats) stats->gsearch_passes += passes;
  std::size_t ties = 0;
  for (std::size_t i = front; i < pool.size(); ++i) {
    if (pool[i] == rho) ++ties;
  }
  return {rho, front, passes, ties};
}

AreaSearchResult level_of_largest_below(std::span<const double> source,
                                        double u) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t ties = 0;
  for (double v : source) {
    if (v >= u) continue;
    if (v > best) {
      best = v;
      ties = 1;
    } else if (v == best) {
      ++ties;
    }
  }
  if (ties == 0) {
    throw std::domain_error("area_curve_search: no candidate below u");
  }
  return {best, 0, 0, ties};
}

}  // namespace

AreaSearchResult area_curve_search_pool(std::span<double> b, double u,
                                        std::size_t deficit,
                                        std::optional<double> hint,
                                        const CurveOptions& opts,
                                        IterationStats* stats) {
  const std::size_t H = deficit;
  if (H == 0) return level_of_largest_below(b, u);
  if (b.size() <= H) {
    throw std::domain_error("area_curve_search: not enough candidates below u");
  }

  std::size_t front = 0;  // candidate pool is b[0, front)
  double rho = 0.0;
  std::size_t scan_from = 0;
  bool skip_growth = false;

  const bool hinted = opts.use_hint && hint && *hint < u;
  if (hinted) {
    // Move candidates >= hint to the front; they are the likeliest
    // survivors and make the growth pass cheap on unsorted input.
    std::size_t c = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[j] >= *hint) std::swap(b[j], b[c++]);
    }
    if (c > H) {
      // The front block alone is a valid seed.
      NeumaierSum s;
      for (std::size_t i = 0; i < c; ++i) s.add(b[i]);
      front = c;
      rho = (s.value() - static_cast<double>(H) * u) /
            static_cast<double>(c - H);
      scan_from = c;
      // Remaining candidates are < hint <= rho: none can join the pool.
      if (opts.hint_skip_growth && rho >= *hint) skip_growth = true;
    }
  }
  if (front == 0) {
    front = H + 1;
    NeumaierSum s;
    for (std::size_t i = 0; i < front; ++i) s.add(b[i]);
    rho = s.value() - static_cast<double>(H) * u;  // (front - H) == 1
    scan_from = front;
  }

  if (!skip_growth) {
    for (std::size_t j = scan_from; j < b.size(); ++j) {
      if (b[j] > rho) {
        std::swap(b[front], b[j]);
        ++front;
        rho += (b[front - 1] - rho) / static_cast<double>(front - H);
      }
    }
  }
  return shrink_sweeps(b, front, rho, H, stats);
}

AreaSearchResult area_curve_search_source(std::span<const double> source,
                                          double u, std::size_t deficit,
                                          std::optional<double> hint,
                                          AreaSearchScratch& scratch,
                                          const CurveOptions& opts,
                                          IterationStats* stats) {
  const std::size_t H = deficit;
  if (H == 0) return level_of_largest_below(source, u);

  // Grow-only scratch; lengths are tracked explicitly so repeated calls
  // never reinitialize the buffer.
  if (scratch.buf.size() < source.size()) scratch.buf.resize(source.size());
  double* out = scratch.buf.data();

  const bool hinted = opts.use_hint && hint && *hint < u;
  if (!hinted) {
    std::size_t w = 0;
    for (double v : source) {
      out[w] = v;
      w += static_cast<std::size_t>(v < u);
    }
    return area_curve_search_pool(std::span<double>(out, w), u, H,
                                  std::nullopt, opts, stats);
  }

  // Hinted two-pass route: only the hint block and growth survivors are
  // ever copied, so the pool stays near its final size.
  const double h = *hint;
  std::size_t w = 0;
  for (double v : source) {
    out[w] = v;
    w += static_cast<std::size_t>(v >= h && v < u);
  }
  NeumaierSum s;
  for (std::size_t i = 0; i < w; ++i) s.add(out[i]);
  const std::size_t c = w;
  double rho;
  std::size_t front;
  std::size_t extra_taken = 0;
  if (c > H) {
    front = c;
    rho =
        (s.value() - static_cast<double>(H) * u) / static_cast<double>(c - H);
    if (opts.hint_skip_growth && rho >= h) {
      // Everything outside the block is < hint <= rho: growth is a no-op.
      return shrink_sweeps(std::span<double>(out, front), front, rho, H,
                           stats);
    }
  } else {
    // Seed needs H + 1 members: extend the block with the first candidates
    // below the hint.
    std::size_t want = H + 1 - c;
    for (double v : source) {
      if (v < u && v < h) {
        out[w++] = v;
        s.add(v);
        if (++extra_taken == want) break;
      }
    }
    if (w <= H) {
      throw std::domain_error(
          "area_curve_search: not enough candidates below u");
    }
    front = H + 1;
    rho = s.value() - static_cast<double>(H) * u;
  }

  // Growth over the candidates below the hint, skipping the ones already
  // seeded (they occupy the same leading positions of the filtered view).
  std::size_t skipped = 0;
  for (double v : source) {
    if (!(v < u && v < h)) continue;
    if (skipped < extra_taken) {
      ++skipped;
      continue;
    }
    if (v > rho) {
      out[w++] = v;
      ++front;
      rho += (v - rho) / static_cast<double>(front - H);
    }
  }
  return shrink_sweeps(std::span<double>(out, w), front, rho, H, stats);
}

AreaSearchResult area_curve_search(const ProblemInstance& inst, double u,
                                   std::optional<double> hint,
                                   AreaSearchScratch& scratch,
                                   IterationStats* stats,
                                   const CurveOptions& opts) {
  BreakpointQuery q = probe(inst.a, u);
  if (q.count_ge > inst.k) {
    throw std::domain_error(
        "area_curve_search: balance curve undefined (too many entries >= u)");
  }
  return area_curve_search_source(inst.a, u, inst.k - q.count_ge, hint,
                                  scratch, opts, stats);
}

GapEval curve_gap(const ProblemInstance& inst, double u, bool use_hint,
                  AreaSearchScratch& scratch, IterationStats* stats) {
  double fr = budget_curve(inst, u);
  CurveOptions opts;
  opts.use_hint = use_hint;
  AreaSearchResult ar = area_curve_search(
      inst, u, use_hint ? std::optional<double>(fr) : std::nullopt, scratch,
      stats, opts);
  return {ar.level - fr, fr, ar.level};
}

double gap_slope_right_from_counts(std::size_t k, std::size_t count_gt_u,
                                   std::size_t count_ge_balance) {
  if (count_gt_u > k) {
    throw std::domain_error("gap slope: point below the valid domain");
  }
  double budget_slope =
      static_cast<double>(count_gt_u) / static_cast<double>(k);
  double balance_slope = 0.0;
  if (count_gt_u < k) {
    if (count_ge_balance <= k) {
      throw std::domain_error("gap slope: degenerate balance piece");
    }
    balance_slope = -static_cast<double>(k - count_gt_u) /
                    static_cast<double>(count_ge_balance - k);
  }
  return balance_slope - budget_slope;
}

double curve_gap_slope_right(const ProblemInstance& inst, double u,
                             double balance_at_u) {
  std::size_t count_gt_u = 0, count_ge_bal = 0;
  for (double v : inst.a) {
    if (v > u) ++count_gt_u;
    if (v >= balance_at_u) ++count_ge_bal;
  }
  return gap_slope_right_from_counts(inst.k, count_gt_u, count_ge_bal);
}

}  // namespace topksum
