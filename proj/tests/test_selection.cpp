#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "topksum/selection.hpp"

using namespace topksum;

TEST_CASE("topk_sum on hand examples") {
  CHECK(topk_sum(std::vector<double>{3, 1, 2}, 2) == doctest::Approx(5.0));
  CHECK(topk_sum(std::vector<double>{5, 4, 4, 0}, 2) == doctest::Approx(9.0));
  std::vector<double> same(17, 2.5);
  CHECK(topk_sum(same, 7) == doctest::Approx(2.5 * 7));
}

TEST_CASE("topk_sum rejects k out of range") {
  std::vector<double> a{1, 2, 3};
  CHECK_THROWS_AS(topk_sum(a, 0), std::invalid_argument);
  CHECK_THROWS_AS(topk_sum(a, 4), std::invalid_argument);
  CHECK_THROWS_AS(topk_sum(std::vector<double>{}, 1), std::invalid_argument);
}

TEST_CASE("selection matches sorting on random and adversarial input") {
  oracles::Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.index(300);
    std::vector<double> v;
    switch (trial % 4) {
      case 0:
        v = oracles::random_vector(rng, n);
        break;
      case 1:
        v = oracles::duplicate_heavy_vector(rng, n, 1 + rng.index(4));
        break;
      case 2: {  // sorted ascending (adversarial for naive pivots)
        v = oracles::random_vector(rng, n);
        std::sort(v.begin(), v.end());
        break;
      }
      default: {  // sorted descending
        v = oracles::random_vector(rng, n);
        std::sort(v.begin(), v.end(), std::greater<double>());
        break;
      }
    }
    std::size_t k = 1 + rng.index(n);
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    std::vector<double> buf(v);
    CHECK(select_kth_largest(std::span<double>(buf), k) == sorted[k - 1]);
    double expect = 0.0;
    for (std::size_t i = 0; i < k; ++i) expect += sorted[i];
    CHECK(topk_sum(v, k) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("median-of-medians path engages on large duplicated input") {
  // Force many equal elements and a big n so the fallback path runs at
  // least once through its recursion.
  std::vector<double> v(50000, 1.0);
  for (std::size_t i = 0; i < v.size(); i += 7) v[i] = 2.0;
  CHECK(topk_sum(v, 3) == doctest::Approx(6.0));
  std::vector<double> buf(v);
  CHECK(select_kth_largest(std::span<double>(buf), v.size()) == 1.0);
}
