// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helmdg/basis.hpp"
#include "helmdg/quadrature.hpp"

using namespace helmdg;

namespace {

double edge_monomial_oracle(int k) { return 1.0 / (k + 1); }

}  // namespace

TEST_CASE("edge rule integrates monomials exactly up to its order") {
  for (int order = 0; order <= 12; ++order) {
    EdgeRule rule = edge_rule(order);
    CHECK(rule.exactness >= order);
    for (int k = 0; k <= rule.exactness; ++k) {
      double sum = 0.0;
      for (size_t q = 0; q < rule.points.size(); ++q) {
        sum += rule.weights[q] * std::pow(rule.points[q], k);
      }
      CHECK(sum == doctest::Approx(edge_monomial_oracle(k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("edge rule points lie in [0,1] with positive weights") {
  for (int order = 0; order <= 12; ++order) {
    EdgeRule rule = edge_rule(order);
    double wsum = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      CHECK(rule.points[q] > 0.0);
      CHECK(rule.points[q] < 1.0);
      CHECK(rule.weights[q] > 0.0);
      wsum += rule.weights[q];
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("triangle rule matches the closed-form monomial integrals") {
  // Oracle: integral over the reference triangle of x^a y^b equals
  // a! b! / (a + b + 2)!.
  for (int order = 0; order <= 10; ++order) {
    TriangleRule rule = triangle_rule(order);
    CHECK(rule.exactness >= order);
    for (int a = 0; a + 0 <= rule.exactness; ++a) {
      for (int b = 0; a + b <= rule.exactness; ++b) {
        double sum = 0.0;
        for (size_t q = 0; q < rule.points.size(); ++q) {
          sum += rule.weights[q] * std::pow(rule.points[q].x(), a) *
                 std::pow(rule.points[q].y(), b);
        }
        double oracle = reference_monomial_integral(a, b);
        CHECK(sum == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("triangle rule has positive weights and interior points") {
  for (int order = 0; order <= 10; ++order) {
    TriangleRule rule = triangle_rule(order);
    double wsum = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      CHECK(p.x() >= 0.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.x() + p.y() <= 1.0 + 1e-15);
      CHECK(rule.weights[q] > 0.0);
      wsum += rule.weights[q];
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("low order falls back to the centroid rule") {
  TriangleRule rule = triangle_rule(1);
  REQUIRE(rule.points.size() == 1);
  CHECK(rule.points[0].x() == doctest::Approx(1.0 / 3.0));
  CHECK(rule.points[0].y() == doctest::Approx(1.0 / 3.0));
  CHECK(rule.weights[0] == doctest::Approx(0.5));
}

// reference_monomial_integral is the oracle for every quadrature test above,
// so pin a few values computed by hand.
TEST_CASE("monomial integral table spot checks") {
  CHECK(reference_monomial_integral(0, 0) == doctest::Approx(0.5));
  CHECK(reference_monomial_integral(1, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(reference_monomial_integral(0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(reference_monomial_integral(1, 1) == doctest::Approx(1.0 / 24.0));
  CHECK(reference_monomial_integral(2, 0) == doctest::Approx(1.0 / 12.0));
  CHECK(reference_monomial_integral(2, 1) == doctest::Approx(1.0 / 60.0));
}
