#include <cmath>

#include "bartsens/evalue.hpp"
#include "doctest.h"

using namespace bartsens;

TEST_CASE("evalue formula") {
  CHECK(evalue(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(evalue(4.0) == doctest::Approx(4.0 + std::sqrt(12.0)).epsilon(1e-15));
  CHECK(evalue(4.0) == doctest::Approx(7.4641).epsilon(1e-4));
  // JetBlue-style mean observed risk ratio 4.96.
  CHECK(evalue(4.96) == doctest::Approx(4.96 + std::sqrt(4.96 * 3.96)).epsilon(1e-12));
  CHECK(evalue(4.96) == doctest::Approx(9.392).epsilon(1e-3));

  bool inverted = false;
  CHECK(evalue(0.25, &inverted) == doctest::Approx(evalue(4.0)).epsilon(1e-12));
  CHECK(inverted);
  CHECK_THROWS(evalue(0.0));
}

TEST_CASE("evalue dominates the risk ratio") {
  for (double rr : {1.0, 1.5, 2.0, 4.0, 10.0, 100.0}) {
    CHECK(evalue(rr) >= rr);
    if (rr > 1.0) CHECK(evalue(rr) > rr);
  }
}

TEST_CASE("bound threshold") {
  CHECK(bound_threshold(4.0, 1.0) == doctest::Approx(evalue(4.0)).epsilon(1e-14));
  CHECK(bound_threshold(5.0, 5.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bound_threshold(10.0, 2.0) == doctest::Approx((10.0 + std::sqrt(80.0)) / 2.0)
                                          .epsilon(1e-14));
  CHECK(bound_threshold(10.0, 2.0) == doctest::Approx(9.472).epsilon(1e-3));
  CHECK_THROWS(bound_threshold(2.0, 3.0));

  // Decreasing in rr_true on [1, rr_obs].
  double prev = bound_threshold(8.0, 1.0);
  for (double t = 1.5; t <= 8.0; t += 0.5) {
    const double cur = bound_threshold(8.0, t);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("comparison table") {
  ReducedFormDraws draws;
  draws.n = 2;
  draws.mean_pB1 = {0.2, 0.4};
  draws.mean_pB0 = {0.1, 0.1};
  draws.mean_pG = {0.5, 0.5};
  const std::vector<double> tau{1.8, 3.5};
  const auto rows = compare(draws, tau);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rr_obs == doctest::Approx(2.0));
  CHECK(rows[0].evalue == doctest::Approx(evalue(2.0)));
  CHECK(rows[1].tau_mean == doctest::Approx(3.5));

  ReducedFormDraws empty;
  empty.n = 0;
  CHECK(compare(empty, {}).empty());
}
