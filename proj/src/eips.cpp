#include "topksum/eips.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topksum/core.hpp"

namespace topksum::eips {
namespace {

// Branch-free compensated add (Knuth two-sum).
inline void two_sum_add(double& s, double& c, double x) {
  double t = s + x;
  double z = t - s;
  c += (s - (t - z)) + (x - z);
  s = t;
}

double min_value_at_least(std::span<const double> a, double t) {
  double best = kInf;
  for (double v : a) {
    if (v >= t && v < best) best = v;
  }
  return best;
}

CurveOptions curve_opts(const SolveOptions& opts) {
  return {opts.use_hint, opts.hint_skip_growth};
}

// Filtered / full-vector evaluation plumbing shared by the three phases.
struct Evaluator {
  const ProblemInstance& inst;
  FilterState& fs;
  AreaSearchScratch& scratch;
  IterationStats& stats;
  const SolveOptions& opts;

  CurveScan scan(double u) const { return scan_curves(fs.budget_ctx(), u); }

  std::span<const double> balance_source() const {
    return fs.balance_ready ? std::span<const double>(fs.balance_pool)
                            : fs.full;
  }

  std::size_t last_band = 0;  ///< |{balance <= v < u}| of the last gap eval

  // Gap evaluation given a scan at u; requires scan.count_ge <= k.
  GapEval gap_from_scan(double u, const CurveScan& s) {
    double fr = budget_from_scan(fs.budget_ctx(), s);
    if (s.count_ge > fs.k) {
      throw std::domain_error("gap: balance curve undefined at query point");
    }
    AreaSearchResult ar = area_curve_search_source(
        balance_source(), u, fs.k - s.count_ge,
        opts.use_hint ? std::optional<double>(fr) : std::nullopt, scratch,
        curve_opts(opts), &stats);
    last_band = ar.pool_size + ar.ties_at_level;
    return {ar.level - fr, fr, ar.level};
  }

  GapEval gap(double u) { return gap_from_scan(u, scan(u)); }

  // Right slope of the gap using the band size recorded by the most recent
  // gap evaluation at the same point.
  double slope_right_from_last(const CurveScan& s) const {
    std::size_t count_gt_u = s.count_ge - s.count_eq;
    return gap_slope_right_from_counts(fs.k, count_gt_u,
                                       s.count_ge + last_band);
  }

  // Smallest element > t, preferring the filtered pool; falls back to the
  // full vector when the pool does not cover t.
  std::optional<double> neighbor_above(double t) const {
    double best = kInf;
    std::span<const double> src =
        fs.filtering ? std::span<const double>(fs.budget_pool) : fs.full;
    for (double v : src) {
      if (v > t && v < best) best = v;
    }
    if (!std::isfinite(best) && fs.filtering) {
      for (double v : fs.full) {
        if (v > t && v < best) best = v;
      }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
  }

  std::optional<double> neighbor_below(double t) const {
    double best = -kInf;
    std::span<const double> src =
        fs.filtering ? std::span<const double>(fs.budget_pool) : fs.full;
    for (double v : src) {
      if (v < t && v > best) best = v;
    }
    if (!std::isfinite(best) && fs.filtering) {
      for (double v : fs.full) {
        if (v < t && v > best) best = v;
      }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
  }
};

double secant_root(double x, double dx, double y, double dy) {
  return (-x * dy + y * dx) / (dx - dy);
}

// Secant point between opposite-sign bracket ends; bisection on degeneracy.
double generate_bracketed(double lo, double d_lo, double hi, double d_hi) {
  double mid = 0.5 * (lo + hi);
  if (d_lo == d_hi) return mid;
  double z = secant_root(lo, d_lo, hi, d_hi);
  double a = std::min(lo, hi), b = std::max(lo, hi);
  if (!std::isfinite(z) || z <= a || z >= b) return mid;
  return z;
}

// Secant extrapolation through two same-sign points (outer, inner); must
// move strictly outward from `inner`.
double generate_outward(double outer, double d_outer, double inner,
                        double d_inner, bool rightward) {
  double stride = std::abs(inner - outer);
  if (stride == 0.0) stride = std::max(1.0, std::abs(inner));
  double fallback = rightward ? inner + stride : inner - stride;
  if (d_outer == d_inner) return fallback;
  double z = secant_root(outer, d_outer, inner, d_inner);
  if (!std::isfinite(z)) return fallback;
  if (rightward ? z <= inner : z >= inner) return fallback;
  return z;
}

}  // namespace

FilterState FilterState::make(const ProblemInstance& inst,
                              const InitOutcome& init,
                              const SolveOptions& opts) {
  FilterState fs;
  fs.k = inst.k;
  fs.r = inst.r;
  fs.full = std::span<const double>(inst.a);
  fs.filtering = opts.use_filter;
  fs.log = opts.event_log;
  if (!fs.filtering) {
    fs.balance_ready = false;
    return fs;
  }

  const std::size_t n = inst.n();
  switch (init.flag) {
    case Flag::pivot_upper_max:
    case Flag::pivot_upper: {
      const double hi = init.u_R;
      // The final init iterate is a safe lower cutoff only when its
      // ge-count exceeded k (it then sits at or below the (k+1)-th largest
      // value, under every admissible query point). With ge-count == k the
      // iterate can sit above valid query points, so keep everything.
      const double lo = init.count_at_last > inst.k ? init.u_last : -kInf;
      const double bal = init.balance_at_uR;
      fs.budget_pool.resize(n);
      fs.balance_pool.resize(n);
      double s = 0.0, comp = 0.0;
      std::size_t cc = 0, wb = 0, wg = 0;
      for (double v : inst.a) {
        bool high = v >= hi;
        two_sum_add(s, comp, high ? v : 0.0);
        cc += static_cast<std::size_t>(high);
        fs.budget_pool[wb] = v;
        wb += static_cast<std::size_t>(!high && v >= lo);
        fs.balance_pool[wg] = v;
        wg += static_cast<std::size_t>(!high && v >= bal);
      }
      fs.budget_pool.resize(wb);
      fs.balance_pool.resize(wg);
      fs.carried.sum = s;
      fs.carried.comp = comp;
      fs.carried_count = cc;
      fs.balance_ready = true;
      break;
    }
    case Flag::pivot_lower: {
      fs.budget_pool.resize(n);
      std::size_t wb = 0;
      for (double v : inst.a) {
        fs.budget_pool[wb] = v;
        wb += static_cast<std::size_t>(v >= init.u_L);
      }
      fs.budget_pool.resize(wb);
      // No upper bound yet: the balance pool is built lazily on the first
      // upper tightening; until then searches read the full vector.
      fs.balance_ready = false;
      break;
    }
    default:
      throw std::invalid_argument("FilterState: init flag has no pivot seed");
  }
  return fs;
}

void FilterState::tighten_upper(double u_c, double balance_at_uc) {
  if (log) log->push_back({FilterEvent::Kind::tighten_upper, u_c,
                           balance_at_uc});
  if (!filtering) return;
  std::size_t w = 0;
  std::size_t cc = 0;
  double s = carried.sum, comp = carried.comp;
  for (std::size_t i = 0; i < budget_pool.size(); ++i) {
    double v = budget_pool[i];
    bool high = v >= u_c;
    two_sum_add(s, comp, high ? v : 0.0);
    cc += static_cast<std::size_t>(high);
    budget_pool[w] = v;
    w += static_cast<std::size_t>(!high);
  }
  budget_pool.resize(w);
  carried.sum = s;
  carried.comp = comp;
  carried_count += cc;
  if (!balance_ready) {
    balance_pool.resize(full.size());
    w = 0;
    for (double v : full) {
      balance_pool[w] = v;
      w += static_cast<std::size_t>(v >= balance_at_uc && v < u_c);
    }
    balance_pool.resize(w);
    balance_ready = true;
    return;
  }
  w = 0;
  for (std::size_t i = 0; i < balance_pool.size(); ++i) {
    double v = balance_pool[i];
    balance_pool[w] = v;
    w += static_cast<std::size_t>(v >= balance_at_uc && v < u_c);
  }
  balance_pool.resize(w);
}

void FilterState::tighten_lower(double u_c) {
  if (log) log->push_back({FilterEvent::Kind::tighten_lower, u_c, 0.0});
  if (!filtering) return;
  std::size_t w = 0;
  for (std::size_t i = 0; i < budget_pool.size(); ++i) {
    double v = budget_pool[i];
    budget_pool[w] = v;
    w += static_cast<std::size_t>(v >= u_c);
  }
  budget_pool.resize(w);
}

void FilterState::apply(const FilterEvent& ev) {
  if (ev.kind == FilterEvent::Kind::tighten_upper) {
    tighten_upper(ev.u_c, ev.balance_at_uc);
  } else {
    tighten_lower(ev.u_c);
  }
}

PoolContext FilterState::budget_ctx() const {
  if (!filtering) return {full, 0.0, 0, k, r};
  return {std::span<const double>(budget_pool), carried.value(), carried_count,
          k, r};
}

double FilterState::budget_at(double u) const {
  PoolContext ctx = budget_ctx();
  return budget_from_scan(ctx, scan_curves(ctx, u));
}

InitOutcome initialize(const ProblemInstance& inst, double eps,
                       IterationStats& stats, AreaSearchScratch& scratch,
                       const SolveOptions& opts) {
  inst.validate();
  if (inst.k < 2 || inst.k + 1 > inst.n()) {
    throw std::invalid_argument("initialize: requires 2 <= k <= n-1");
  }
  const std::size_t k = inst.k;
  const double kd = static_cast<double>(k);
  const PoolContext full = PoolContext::full(inst);
  const CurveOptions copts = curve_opts(opts);

  InitOutcome out;
  double u = inst.r / kd;
  double u_prev = kNan;
  CurveScan prev_scan{};
  double prev_fr = kNan;
  std::size_t iters = 0;

  for (;;) {
    ++iters;
    ++stats.init_iters;
    CurveScan s = scan_curves(full, u);
    double fr = budget_from_scan(full, s);
    if (std::abs(fr - u) <= eps * std::max(1.0, std::abs(u))) {
      out.flag = Flag::feasible;
      out.u_star = out.l_star = u;
      out.u_prev = u_prev;
      out.u_last = u;
      out.count_at_last = s.count_ge;
      return out;
    }
    if (s.count_ge == k && !opts.disable_case3_shortcut) {
      // Left slope exactly one: the k-th largest value is the snap target.
      double ak = min_value_at_least(inst.a, u);
      double fr_ak = std::min(budget_curve(inst, ak), ak);
      double g = area_gap(inst, ak, fr_ak);
      if (std::abs(g) <= eps * std::max(1.0, std::abs(ak))) {
        out.flag = Flag::closed_form;
        out.u_star = ak;
        out.l_star = fr_ak;
        out.u_prev = u_prev;
        out.u_last = u;
        out.count_at_last = s.count_ge;
        return out;
      }
    }
    if (s.count_ge >= k) {
      out.count_at_last = s.count_ge;
      break;
    }
    double m = static_cast<double>(s.count_ge);
    double u_next = (kd * fr - u * m) / (kd - m);
    u_prev = u;
    prev_scan = s;
    prev_fr = fr;
    u = u_next;
  }

  // The constraint is active. Seed the pivot from the last two iterates.
  out.u_last = u;
  if (iters == 1) {
    double a1 = *std::max_element(inst.a.begin(), inst.a.end());
    double fr1 = inst.r / kd;  // budget value at the maximum
    out.u_prev = a1;
    double g1 = area_gap(inst, a1, std::min(fr1, a1));
    if (g1 < 0.0) {
      // The root lies above max(a): every entry >= r/k pools to r/k.
      out.flag = Flag::closed_form;
      out.l_star = fr1;
      return out;
    }
    out.flag = Flag::pivot_upper_max;
    out.u_R = a1;
    BreakpointQuery q1 = probe(inst.a, a1);
    AreaSearchResult ar = area_curve_search_source(
        inst.a, a1, k - q1.count_ge, std::optional<double>(fr1), scratch,
        copts, &stats);
    out.balance_at_uR = ar.level;
    out.gap_at_uR = ar.level - fr1;
    out.u_C = out.u_R +
              out.gap_at_uR *
                  static_cast<double>(ar.pool_size + ar.ties_at_level) / kd;
  } else {
    const double up = u_prev;
    out.u_prev = up;
    double fr_p = std::min(prev_fr, up);
    AreaSearchResult ar = area_curve_search_source(
        inst.a, up, k - prev_scan.count_ge, std::optional<double>(fr_p),
        scratch, copts, &stats);
    double gap_p = ar.level - fr_p;
    double tangent =
        kd * gap_p / static_cast<double>(prev_scan.count_ge) + up;
    if (gap_p > 0.0) {
      out.flag = Flag::pivot_lower;
      out.u_L = up;
      out.gap_at_uL = gap_p;
      out.u_C = 0.5 * (up + tangent);
    } else {
      out.flag = Flag::pivot_upper;
      out.u_R = up;
      out.balance_at_uR = ar.level;
      out.gap_at_uR = gap_p;
      out.u_C = 0.5 * (up + std::max(tangent, u));
    }
  }
  return out;
}

PivotResult pivot_step(const ProblemInstance& inst, const InitOutcome& init,
                       FilterState& fs, double eps, IterationStats& stats,
                       AreaSearchScratch& scratch, const SolveOptions& opts) {
  if (init.flag != Flag::pivot_upper_max && init.flag != Flag::pivot_lower &&
      init.flag != Flag::pivot_upper) {
    throw std::invalid_argument("pivot_step: init carries no pivot seed");
  }
  Evaluator ev{inst, fs, scratch, stats, opts};
  const std::size_t k = inst.k;
  const std::size_t n = inst.n();
  const std::size_t cap = 4 * k + 64;

  double u_L = init.u_L, u_R = init.u_R, u_C = init.u_C;
  double gap_L = init.gap_at_uL, gap_R = init.gap_at_uR;
  double u_LB = kNan, gap_LB = kNan;
  double u_RB = kNan, gap_RB = kNan;
  std::size_t cge_L = std::isfinite(u_L) ? ev.scan(u_L).count_ge : n;
  std::size_t cge_R = std::isfinite(u_R) ? ev.scan(u_R).count_ge : 0;
  bool converged = false;
  std::size_t iters = 0;

  auto take_lower = [&](double u, double d, std::size_t cge) {
    if (u_R == kInf && std::isfinite(u_L)) {
      u_LB = u_L;
      gap_LB = gap_L;
      fs.u_LB = u_LB;
    }
    fs.tighten_lower(u);
    u_L = u;
    gap_L = d;
    cge_L = cge;
  };
  auto take_upper = [&](double u, double d, double balance, std::size_t cge) {
    if (u_L == -kInf && std::isfinite(u_R)) {
      u_RB = u_R;
      gap_RB = gap_R;
      fs.u_RB = u_RB;
    }
    fs.tighten_upper(u, balance);
    u_R = u;
    gap_R = d;
    cge_R = cge;
  };
  auto count_iter = [&] {
    ++iters;
    ++stats.pivot_iters;
    if (iters > cap) {
      throw internal_error("pivot_step: iteration cap exceeded (" +
                           std::to_string(cap) + ")");
    }
  };

  for (;;) {
    // Halving repair: pull u_C back above the (k+1)-th largest value.
    CurveScan s = ev.scan(u_C);
    int halvings = 0;
    while (s.count_ge > k) {
      if (!std::isfinite(u_R)) {
        throw internal_error("pivot_step: halving repair without upper bound");
      }
      u_C = 0.5 * (u_C + u_R);
      s = ev.scan(u_C);
      if (++halvings > 4096) {
        throw internal_error("pivot_step: halving repair stalled");
      }
    }

    GapEval g = ev.gap_from_scan(u_C, s);
    double d = g.gap;
    if (std::abs(d) <= eps) {
      u_L = u_C;
      gap_L = d;
      converged = true;
      count_iter();
      break;
    }

    if (std::isfinite(u_L) && s.count_ge == cge_L) {
      // No breakpoint of the budget curve inside (u_L, u_C).
      if (d > 0.0) {
        take_lower(u_C, d, s.count_ge);
        std::optional<double> nb = ev.neighbor_above(u_C);
        if (!nb || *nb >= u_R) {
          count_iter();
          break;  // final piece reaches the upper bound
        }
        u_C = *nb;  // re-test at the piece boundary
        continue;
      }
      count_iter();
      break;  // root inside (u_L, u_C] on one budget piece
    }
    if (s.count_ge == cge_R) {
      // No breakpoint inside (u_C, u_R).
      if (d < 0.0) {
        take_upper(u_C, d, g.balance, s.count_ge);
        std::optional<double> nb = ev.neighbor_below(u_C);
        if (!nb || *nb <= u_L) {
          count_iter();
          break;
        }
        u_C = *nb;
        continue;
      }
      take_lower(u_C, d, s.count_ge);
      count_iter();
      break;  // root inside [u_C, u_R) on one budget piece
    }

    if (u_R == kInf) {
      if (d < 0.0) {
        take_upper(u_C, d, g.balance, s.count_ge);
      } else {
        take_lower(u_C, d, s.count_ge);
      }
    } else if (u_L == -kInf) {
      if (d > 0.0) {
        take_lower(u_C, d, s.count_ge);
      } else {
        take_upper(u_C, d, g.balance, s.count_ge);
      }
    } else {
      if (d < 0.0) {
        take_upper(u_C, d, g.balance, s.count_ge);
      } else {
        take_lower(u_C, d, s.count_ge);
      }
    }

    if (u_R == kInf) {
      u_C = generate_outward(u_LB, gap_LB, u_L, gap_L, /*rightward=*/true);
    } else if (u_L == -kInf) {
      u_C = generate_outward(u_RB, gap_RB, u_R, gap_R, /*rightward=*/false);
    } else {
      u_C = generate_bracketed(u_L, gap_L, u_R, gap_R);
    }
    count_iter();
  }
  return {u_L, u_R, u_C, converged};
}

double exact_step(const ProblemInstance& inst, double u_L, FilterState& fs,
                  double eps, IterationStats& stats,
                  AreaSearchScratch& scratch, const SolveOptions& opts) {
  Evaluator ev{inst, fs, scratch, stats, opts};
  double u = u_L;
  CurveScan s = ev.scan(u);
  if (s.count_ge > inst.k) {
    throw std::domain_error("exact_step: start point below the valid domain");
  }
  GapEval g = ev.gap_from_scan(u, s);
  const std::size_t cap = inst.n() + 8;
  std::size_t it = 0;

  auto settled = [&](const GapEval& e, double at) {
    double scale = std::max({1.0, std::abs(e.budget), std::abs(e.balance),
                             std::abs(at)});
    return std::abs(e.gap) <=
           64.0 * std::numeric_limits<double>::epsilon() * scale;
  };

  // Newton on the piecewise-linear gap. Iterates until the floating-point
  // root, not just |gap| <= eps: the assembled certificate needs the extra
  // digits when the dual bands are wide.
  auto bail = [&](const char* what) {
    if (std::abs(g.gap) <= eps) return true;
    throw numeric_error(std::string("exact_step: ") + what);
  };
  for (;;) {
    if (settled(g, u)) break;
    if (it >= cap) {
      if (bail("iteration cap exceeded")) break;
    }
    double slope = 0.0;
    try {
      slope = ev.slope_right_from_last(s);
    } catch (const std::domain_error&) {
      if (bail("degenerate piece with |gap| > eps")) break;
    }
    if (!(slope < 0.0)) {
      if (bail("non-decreasing gap piece")) break;
    }
    double u_next = u - g.gap / slope;
    if (!std::isfinite(u_next) || u_next == u) {
      if (bail("stalled update")) break;
    }
    CurveScan s2 = ev.scan(u_next);
    if (s2.count_ge > inst.k) {
      // Stepped below the valid domain (possible only from a negative-gap
      // start); keep the current point if it already meets the contract.
      if (bail("update left the valid domain")) break;
    }
    GapEval g2 = ev.gap_from_scan(u_next, s2);
    ++stats.exact_iters;
    ++it;
    if (std::abs(g2.gap) >= std::abs(g.gap) && std::abs(g.gap) <= eps) {
      break;  // floating-point floor; current point meets the contract
    }
    u = u_next;
    g = g2;
    s = s2;
  }
  return u;
}

ProjectionSolution project(const ProblemInstance& inst, double eps,
                           const SolveOptions& opts) {
  inst.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("project: eps must be positive and finite");
  }
  if (inst.k == 1) return project_k1(inst);
  if (inst.k == inst.n()) return project_kn(inst);

  ProjectionSolution sol;
  AreaSearchScratch scratch;
  InitOutcome init = initialize(inst, eps, sol.stats, scratch, opts);
  sol.flag = init.flag;

  if (init.flag == Flag::feasible) {
    sol.x = inst.a;
    sol.u_star = sol.l_star = *init.u_star;
    return sol;
  }
  if (init.flag == Flag::closed_form) {
    double u, l;
    if (init.u_star) {
      u = *init.u_star;
      l = *init.l_star;
    } else {
      // Root above max(a): level r/k, with the balancing upper threshold
      // recovered from one excess pass.
      l = *init.l_star;
      NeumaierSum excess;
      for (double v : inst.a) {
        if (v > l) excess.add(v - l);
      }
      u = l + excess.value() / static_cast<double>(inst.k);
    }
    sol.u_star = u;
    sol.l_star = l;
    sol.x = assemble_from_thresholds(inst.a, u, l);
    return sol;
  }

  FilterState fs = FilterState::make(inst, init, opts);
  PivotResult pv = pivot_step(inst, init, fs, eps, sol.stats, scratch, opts);
  double root = exact_step(inst, pv.u_L, fs, eps, sol.stats, scratch, opts);

  // Classification at the converged root: one fused pass for the ge-count,
  // the snap value, and the excess at the root.
  std::size_t count_ge = 0;
  double snap = kInf;
  NeumaierSum excess_at_root;
  for (double v : inst.a) {
    if (v >= root) {
      ++count_ge;
      if (v < snap) snap = v;
      excess_at_root.add(v - root);
    }
  }
  double u, l;
  if (count_ge >= inst.k) {
    // Root on the flat balance piece: the upper threshold snaps to the
    // k-th largest value.
    u = snap;
    NeumaierSum excess;
    for (double v : inst.a) {
      if (v > u) excess.add(v - u);
    }
    l = (inst.r - excess.value()) / static_cast<double>(inst.k);
  } else {
    u = root;
    l = (inst.r - excess_at_root.value()) / static_cast<double>(inst.k);
  }
  if (l > u) l = u;
  sol.u_star = u;
  sol.l_star = l;
  sol.x = assemble_from_thresholds(inst.a, u, l);
  return sol;
}

}  // namespace topksum::eips
