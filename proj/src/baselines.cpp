#include "topksum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "topksum/core.hpp"

namespace topksum::baselines {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SortedView {
  std::vector<double> v;       // descending
  std::vector<double> prefix;  // prefix[i] = sum of the i largest
  std::size_t k = 0;
  double r = 0.0;

  std::size_t n() const { return v.size(); }
  double at(std::size_t pos) const {  // 1-based with sentinels
    if (pos == 0) return kInf;
    if (pos > v.size()) return -kInf;
    return v[pos - 1];
  }
  double topk() const { return prefix[k]; }
};

SortedView make_view(const ProblemInstance& inst) {
  SortedView sv;
  sv.v = inst.a;
  sv.k = inst.k;
  sv.r = inst.r;
  std::sort(sv.v.begin(), sv.v.end(), std::greater<double>());
  sv.prefix.resize(sv.v.size() + 1);
  NeumaierSum s;
  sv.prefix[0] = 0.0;
  for (std::size_t i = 0; i < sv.v.size(); ++i) {
    s.add(sv.v[i]);
    sv.prefix[i + 1] = s.value();
  }
  return sv;
}

// Solve the boundary system for the pair (k0, k1):
//   budget: sum_{i<=k0} v_i - k0 u + k l = r
//   area:   (k - k0) u + (k1 - k) l = sum_{k0 < i <= k1} v_i
GridCandidate solve_candidate(const SortedView& sv, std::size_t k0,
                              std::size_t k1) {
  GridCandidate c;
  c.k0 = k0;
  c.k1 = k1;
  const double b1 = sv.r - sv.prefix[k0];
  const double b2 = sv.prefix[k1] - sv.prefix[k0];
  const double a11 = -static_cast<double>(k0);
  const double a12 = static_cast<double>(sv.k);
  const double a21 = static_cast<double>(sv.k - k0);
  const double a22 = static_cast<double>(k1 - sv.k);
  const double det = a11 * a22 - a12 * a21;
  double scale = std::max(1.0, std::abs(sv.at(1)));
  if (std::abs(det) < 1e-14 * scale) {
    c.feasible = false;
    c.u = c.l = 0.0;
    return c;
  }
  c.u = (b1 * a22 - b2 * a12) / det;
  c.l = (a11 * b2 - a21 * b1) / det;
  return c;
}

// Zero iff the candidate satisfies the boundary inequalities exactly:
// v_{k0} > u >= v_{k0+1}, v_{k1} >= l > v_{k1+1}, l <= v_k <= u.
double candidate_violation(const SortedView& sv, const GridCandidate& c) {
  double viol = 0.0;
  auto bump = [&viol](double x) { viol = std::max(viol, x); };
  bump(c.u - sv.at(c.k0));        // need v_{k0} > u
  bump(sv.at(c.k0 + 1) - c.u);    // need u >= v_{k0+1}
  bump(c.l - sv.at(c.k1));        // need v_{k1} >= l
  bump(sv.at(c.k1 + 1) - c.l);    // need l > v_{k1+1}
  bump(c.l - sv.at(sv.k));        // need l <= v_k
  bump(sv.at(sv.k) - c.u);        // need v_k <= u
  bump(c.l - c.u);                // need l <= u
  return viol;
}

ProjectionSolution feasible_solution(const ProblemInstance& inst,
                                     const SortedView& sv) {
  ProjectionSolution sol;
  sol.x = inst.a;
  sol.flag = Flag::feasible;
  sol.u_star = sol.l_star = sv.at(sv.k);
  return sol;
}

ProjectionSolution assemble(const ProblemInstance& inst,
                            const GridCandidate& c) {
  ProjectionSolution sol;
  sol.u_star = c.u;
  sol.l_star = std::min(c.l, c.u);
  sol.flag = Flag::closed_form;
  sol.x = assemble_from_thresholds(inst.a, sol.u_star, sol.l_star);
  return sol;
}

}  // namespace

ProjectionSolution grid_oracle(const ProblemInstance& inst) {
  inst.validate();
  SortedView sv = make_view(inst);
  if (sv.topk() <= inst.r) return feasible_solution(inst, sv);

  GridCandidate best;
  double best_viol = kInf;
  for (std::size_t k0 = 0; k0 < inst.k; ++k0) {
    for (std::size_t k1 = inst.k; k1 <= inst.n(); ++k1) {
      GridCandidate c = solve_candidate(sv, k0, k1);
      double viol = candidate_violation(sv, c);
      if (viol <= 0.0) {
        c.feasible = true;
        return assemble(inst, c);
      }
      if (viol < best_viol) {
        best_viol = viol;
        best = c;
      }
    }
  }
  // Exact feasibility can be defeated by rounding when a threshold ties a
  // data value; accept the least-violating candidate if the slack is noise.
  double scale = std::max(1.0, std::abs(sv.at(1)));
  if (best_viol <= 1e-9 * scale) {
    best.feasible = true;
    return assemble(inst, best);
  }
  throw internal_error("grid_oracle: no feasible boundary pair found");
}

ProjectionSolution sorted_solver(const ProblemInstance& inst) {
  inst.validate();
  SortedView sv = make_view(inst);
  if (sv.topk() <= inst.r) return feasible_solution(inst, sv);

  const std::size_t n = inst.n();
  const std::size_t k = inst.k;
  const double kd = static_cast<double>(k);
  const double scale = std::max(1.0, std::abs(sv.at(1)));

  // Area residual of the budget-feasible pair at threshold u with c = |{v >
  // u}|: positive above the crossing, negative below.
  auto count_ge_level = [&](double l) {
    // |{v_i >= l}| by binary search on the descending array.
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (sv.v[mid] >= l) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  };
  auto area_residual = [&](double u, std::size_t c) {
    double fr = (sv.r - (sv.prefix[c] - static_cast<double>(c) * u)) / kd;
    std::size_t q = count_ge_level(fr);
    double shaved = (kd - static_cast<double>(c)) * u -
                    (sv.prefix[k] - sv.prefix[c]);
    double raised = 0.0;
    if (q > k) {
      raised = (sv.prefix[q] - sv.prefix[k]) -
               static_cast<double>(q - k) * fr;
    }
    return shaved - raised;
  };

  GridCandidate best;
  double best_viol = kInf;
  auto try_range = [&](std::size_t k0, double l_lo, double l_hi)
      -> std::optional<GridCandidate> {
    // Candidate pooled levels lie in [l_lo, l_hi]; convert to a k1 range.
    std::size_t q_hi = count_ge_level(l_lo);  // largest k1 candidate
    std::size_t q_lo = count_ge_level(l_hi);  // smallest k1 candidate
    std::size_t from = std::max(k, q_lo > 2 ? q_lo - 2 : 0);
    std::size_t to = std::min(n, q_hi + 2);
    for (std::size_t k1 = from; k1 <= to; ++k1) {
      GridCandidate c = solve_candidate(sv, k0, k1);
      double viol = candidate_violation(sv, c);
      if (viol <= 0.0) {
        c.feasible = true;
        return c;
      }
      if (viol < best_viol) {
        best_viol = viol;
        best = c;
      }
    }
    return std::nullopt;
  };

  // Head piece: the crossing can sit at or above the maximum (k0 = 0).
  if (area_residual(sv.at(1), 0) <= 0.0) {
    double l = sv.r / kd;
    if (auto c = try_range(0, l, l)) return assemble(inst, *c);
  }

  // Sweep distinct values downward; k0 follows the strict-count boundary
  // and the pooled-level window moves monotonically up in index.
  double prev_v = kInf;
  double prev_fr = sv.r / kd;  // budget value at +inf side of the sweep
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (sv.v[pos] == prev_v) continue;  // only piece boundaries
    const double v = sv.v[pos];
    const std::size_t c = pos;  // |{values > v}|
    if (c >= k) break;          // candidates below the k-th value are invalid
    double fr_v =
        (sv.r - (sv.prefix[c] - static_cast<double>(c) * v)) / kd;
    double res = area_residual(v, c);
    if (res <= 1e-12 * scale * static_cast<double>(n)) {
      // Root inside [v, prev_v): resolve the pooled boundary around the
      // budget window of this piece.
      if (auto cand = try_range(c, fr_v, prev_fr)) {
        return assemble(inst, *cand);
      }
    }
    prev_v = v;
    prev_fr = fr_v;
  }

  if (best_viol <= 1e-9 * scale) {
    best.feasible = true;
    return assemble(inst, best);
  }
  throw internal_error("sorted_solver: no feasible boundary pair found");
}

}  // namespace topksum::baselines
