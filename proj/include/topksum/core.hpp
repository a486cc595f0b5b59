#pragma once

#include <span>
#include <vector>

#include "topksum/types.hpp"

namespace topksum {

/// Closed-form projection for k = 1: x = min(a, r) elementwise.
ProjectionSolution project_k1(const ProblemInstance& inst);

/// Closed-form projection for k = n: uniform shift of a when sum(a) > r.
ProjectionSolution project_kn(const ProblemInstance& inst);

/// Builds x from the dual thresholds: entries above `upper` are shifted
/// down by (upper - lower), entries in [lower, upper] pool to `lower`,
/// entries below `lower` stay.
std::vector<double> assemble_from_thresholds(std::span<const double> a,
                                             double upper, double lower);

/// Checks a solution against the optimality system at absolute tolerance
/// `tol`:
///   area:    sum_{i<=k} max(u - abar_i, 0) == sum_{j>k} max(abar_j - l, 0)
///   budget:  sum_i max(a_i - u, 0) + l*k  == min(topk_sum(a), r)
/// plus the entrywise threshold reconstruction of x and l <= abar_k <= u.
/// When the solution reports lambda ~ 0 (feasible input), the reported
/// thresholds are immaterial; the checker substitutes the canonical pair
/// (abar_k, abar_k) before evaluating residuals. Uses one selection to
/// obtain abar_k; this checker is not the sort-free hot path.
KktCertificate verify_kkt(const ProblemInstance& inst,
                          const ProjectionSolution& sol, double tol);

/// Certificate tolerance the solver contract promises for accuracy `eps`:
/// max(eps, 1e-8) scaled by the instance magnitude.
double default_cert_tol(const ProblemInstance& inst, double eps);

}  // namespace topksum
