#include "topksum/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topksum/selection.hpp"

namespace topksum {

void ProblemInstance::validate() const {
  if (a.empty()) throw std::invalid_argument("instance: empty vector");
  if (k < 1 || k > a.size()) {
    throw std::invalid_argument("instance: k out of range [1, n]");
  }
  if (!std::isfinite(r)) throw std::invalid_argument("instance: r not finite");
  for (double v : a) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("instance: non-finite entry");
    }
  }
}

std::vector<double> assemble_from_thresholds(std::span<const double> a,
                                             double upper, double lower) {
  std::vector<double> x(a.size());
  const double shift = upper - lower;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = a[i];
    if (v > upper) {
      x[i] = v - shift;
    } else if (v >= lower) {
      x[i] = lower;
    } else {
      x[i] = v;
    }
  }
  return x;
}

ProjectionSolution project_k1(const ProblemInstance& inst) {
  inst.validate();
  if (inst.k != 1) throw std::invalid_argument("project_k1: k != 1");
  ProjectionSolution sol;
  double maxv = *std::max_element(inst.a.begin(), inst.a.end());
  if (maxv <= inst.r) {
    sol.x = inst.a;
    sol.flag = Flag::feasible;
    sol.u_star = sol.l_star = inst.r;
    return sol;
  }
  sol.flag = Flag::closed_form;
  sol.l_star = inst.r;
  NeumaierSum excess;
  sol.x.resize(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    double v = inst.a[i];
    if (v > inst.r) excess.add(v - inst.r);
    sol.x[i] = std::min(v, inst.r);
  }
  sol.u_star = inst.r + excess.value();
  return sol;
}

ProjectionSolution project_kn(const ProblemInstance& inst) {
  inst.validate();
  if (inst.k != inst.n()) throw std::invalid_argument("project_kn: k != n");
  ProjectionSolution sol;
  NeumaierSum total;
  double minv = inst.a[0];
  for (double v : inst.a) {
    total.add(v);
    minv = std::min(minv, v);
  }
  double s = total.value();
  if (s <= inst.r) {
    sol.x = inst.a;
    sol.flag = Flag::feasible;
    sol.u_star = sol.l_star = minv;
    return sol;
  }
  const double shift = (inst.r - s) / static_cast<double>(inst.n());
  sol.x.resize(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) sol.x[i] = inst.a[i] + shift;
  sol.flag = Flag::closed_form;
  sol.u_star = minv;
  sol.l_star = minv + shift;
  return sol;
}

double default_cert_tol(const ProblemInstance& inst, double eps) {
  double scale = 1.0;
  for (double v : inst.a) scale = std::max(scale, std::abs(v));
  return std::max(eps, 1e-8) * scale;
}

KktCertificate verify_kkt(const ProblemInstance& inst,
                          const ProjectionSolution& sol, double tol) {
  inst.validate();
  if (sol.x.size() != inst.n()) {
    throw std::invalid_argument("verify_kkt: solution length mismatch");
  }
  const std::size_t n = inst.n();
  const std::size_t k = inst.k;

  // One selection for the k-th largest; the partitioned copy also gives the
  // top-k block for the sorted sums.
  std::vector<double> part(inst.a);
  double abar_k = select_kth_largest(std::span<double>(part), k);

  double u = sol.u_star;
  double l = sol.l_star;
  if (sol.lambda() <= tol) {
    // Feasible-input solutions carry an arbitrary common threshold; the
    // canonical dual pair for lambda = 0 is (abar_k, abar_k).
    u = l = abar_k;
  }

  KktCertificate cert;
  cert.tol = tol;

  NeumaierSum topk, area_top, area_rest, budget_excess;
  for (std::size_t i = 0; i < k; ++i) {
    topk.add(part[i]);
    if (u > part[i]) area_top.add(u - part[i]);
  }
  for (std::size_t i = k; i < n; ++i) {
    if (part[i] > l) area_rest.add(part[i] - l);
  }
  for (double v : inst.a) {
    if (v > u) budget_excess.add(v - u);
  }
  double tk = topk.value();
  cert.residual_area = std::abs(area_top.value() - area_rest.value());
  cert.residual_budget = std::abs(budget_excess.value() +
                                  l * static_cast<double>(k) -
                                  std::min(tk, inst.r));

  std::vector<double> expect = assemble_from_thresholds(inst.a, u, l);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(sol.x[i] - expect[i]) > tol) ++cert.set_violations;
  }
  cert.dual_order_ok = (l <= abar_k + tol) && (abar_k <= u + tol);
  return cert;
}

}  // namespace topksum
