#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "topksum/core.hpp"
#include "topksum/selection.hpp"

using namespace topksum;

namespace {
ProblemInstance make(std::vector<double> a, std::size_t k, double r) {
  return ProblemInstance{std::move(a), k, r};
}
}  // namespace

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(make({}, 1, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make({1.0}, 0, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make({1.0}, 2, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make({1.0}, 1, std::nan("")).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(make({1.0, oracles::inf()}, 1, 0.0).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(make({1.0}, 1, -5.0).validate());
}

TEST_CASE("project_k1 examples") {
  auto s1 = project_k1(make({3, 1, 2}, 1, 2.0));
  CHECK(s1.x == std::vector<double>{2, 1, 2});
  CHECK(s1.flag == Flag::closed_form);
  CHECK(verify_kkt(make({3, 1, 2}, 1, 2.0), s1, 1e-10).passed());

  auto s2 = project_k1(make({0, 0}, 1, 1.0));
  CHECK(s2.x == std::vector<double>{0, 0});
  CHECK(s2.flag == Flag::feasible);
  CHECK(verify_kkt(make({0, 0}, 1, 1.0), s2, 1e-10).passed());

  auto s3 = project_k1(make({5}, 1, -1.0));
  CHECK(s3.x == std::vector<double>{-1});
  CHECK(verify_kkt(make({5}, 1, -1.0), s3, 1e-10).passed());
}

TEST_CASE("project_kn examples") {
  auto s1 = project_kn(make({1, 2, 3}, 3, 3.0));
  CHECK(oracles::max_abs_diff(s1.x, {0, 1, 2}) < 1e-12);
  CHECK(verify_kkt(make({1, 2, 3}, 3, 3.0), s1, 1e-10).passed());

  auto s2 = project_kn(make({1, 2, 3}, 3, 10.0));
  CHECK(s2.x == std::vector<double>{1, 2, 3});
  CHECK(s2.flag == Flag::feasible);
  CHECK(verify_kkt(make({1, 2, 3}, 3, 10.0), s2, 1e-10).passed());

  auto s3 = project_kn(make({4, 4}, 2, 4.0));
  CHECK(oracles::max_abs_diff(s3.x, {2, 2}) < 1e-12);
  CHECK(verify_kkt(make({4, 4}, 2, 4.0), s3, 1e-10).passed());
}

TEST_CASE("verify_kkt accepts the known optimum") {
  // Grid-enumeration on this instance gives (u*, l*) = (3, 2).
  ProblemInstance inst = make({4, 3, 1}, 2, 5.0);
  ProjectionSolution sol;
  sol.x = {3, 2, 1};
  sol.u_star = 3.0;
  sol.l_star = 2.0;
  auto cert = verify_kkt(inst, sol, 1e-8);
  CHECK(cert.residual_area <= 1e-12);
  CHECK(cert.residual_budget <= 1e-12);
  CHECK(cert.set_violations == 0);
  CHECK(cert.passed());
}

TEST_CASE("verify_kkt: feasible input has zero residuals") {
  ProblemInstance inst = make({4, 3, 1}, 2, 9.0);  // top-2 sum is 7 < 9
  ProjectionSolution sol;
  sol.x = inst.a;
  sol.u_star = sol.l_star = 4.5;  // arbitrary common threshold
  auto cert = verify_kkt(inst, sol, 1e-8);
  CHECK(cert.residual_area == 0.0);
  CHECK(cert.residual_budget == 0.0);
  CHECK(cert.passed());
}

TEST_CASE("verify_kkt rejects a perturbed solution") {
  ProblemInstance inst = make({4, 3, 1}, 2, 5.0);
  ProjectionSolution sol;
  sol.x = {3, 2 + 1e-3, 1};
  sol.u_star = 3.0;
  sol.l_star = 2.0;
  auto cert = verify_kkt(inst, sol, 1e-8);
  CHECK((cert.set_violations >= 1 ||
         std::max(cert.residual_area, cert.residual_budget) > 1e-8));
  CHECK_FALSE(cert.passed());
}

TEST_CASE("verify_kkt rejects infeasible claims of feasibility") {
  ProblemInstance inst = make({4, 3, 1}, 2, 5.0);
  ProjectionSolution sol;
  sol.x = inst.a;  // claims x = a although top-2 sum is 7 > 5
  sol.u_star = sol.l_star = 3.0;
  auto cert = verify_kkt(inst, sol, 1e-8);
  CHECK_FALSE(cert.passed());
}

TEST_CASE("verify_kkt length mismatch") {
  ProblemInstance inst = make({4, 3, 1}, 2, 5.0);
  ProjectionSolution sol;
  sol.x = {1, 2};
  CHECK_THROWS_AS(verify_kkt(inst, sol, 1e-8), std::invalid_argument);
}
