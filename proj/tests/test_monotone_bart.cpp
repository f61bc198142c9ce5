#include <array>
#include <cmath>
#include <vector>

#include "bartsens/math.hpp"
#include "bartsens/monotone_bart.hpp"
#include "doctest.h"

using namespace bartsens;

TEST_CASE("R cell probabilities: symmetry, limits, arithmetic") {
  // p0 = p1 = 1/2: each admissible cell gets 1/3.
  const auto symmetric = r_cell_probabilities(0.5, 0.5);
  for (double c : symmetric) CHECK(c == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // p1 -> 1 forces (R0,R1) = (0,1).
  const auto limit = r_cell_probabilities(0.4, 1.0 - 1e-13);
  CHECK(limit[2] == doctest::Approx(1.0).epsilon(1e-9));

  // Direct normalization arithmetic at p0=0.3, p1=0.6:
  // cells proportional to (0.28, 0.12, 0.42), total 0.82.
  const auto cells = r_cell_probabilities(0.3, 0.6);
  CHECK(cells[0] == doctest::Approx(0.28 / 0.82).epsilon(1e-12));
  CHECK(cells[1] == doctest::Approx(0.12 / 0.82).epsilon(1e-12));
  CHECK(cells[2] == doctest::Approx(0.42 / 0.82).epsilon(1e-12));
}

TEST_CASE("sample_R empirical frequencies match the cells") {
  const double h0 = norm_quantile(0.3), h1 = norm_quantile(0.6);
  Rng rng(2024);
  std::array<int, 3> counts{0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto [r0, r1] = sample_R(h0, h1, rng);
    CHECK(!(r0 == 1 && r1 == 1));
    if (r0 == 0 && r1 == 0) ++counts[0];
    else if (r0 == 1) ++counts[1];
    else ++counts[2];
  }
  const auto cells = r_cell_probabilities(0.3, 0.6);
  for (int c = 0; c < 3; ++c) {
    const double freq = static_cast<double>(counts[c]) / n;
    CHECK(std::abs(freq - cells[c]) < 0.01);
  }
}

TEST_CASE("augmentation integrates back to the outcome likelihood") {
  // Three observations covering both arms and both outcomes; exact
  // enumeration over all (R0,R1) configurations must reproduce the
  // unaugmented likelihood to 1e-12.
  const std::vector<std::int8_t> G{1, 0, 0};
  const std::vector<std::int8_t> B{1, 0, 1};
  const std::vector<double> h0{0.3, -0.4, 0.8};
  const std::vector<double> h1{-0.2, 0.9, 0.1};

  double total = 0.0;
  std::vector<std::int8_t> R0(3), R1(3);
  for (int mask = 0; mask < 64; ++mask) {
    for (int i = 0; i < 3; ++i) {
      R0[i] = static_cast<std::int8_t>((mask >> (2 * i)) & 1);
      R1[i] = static_cast<std::int8_t>((mask >> (2 * i + 1)) & 1);
    }
    total += augmented_likelihood(G, B, R0, R1, h0, h1);
  }
  // The G=1 row's R pair is vacuous, so the sum overcounts by 4.
  total /= 4.0;
  const double direct = outcome_likelihood(G, B, h0, h1);
  CHECK(total == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("monotone fit input validation") {
  Matrix x(4, 1);
  for (int i = 0; i < 4; ++i) x(i, 0) = i;
  BartConfig cfg;
  cfg.tree_count = 5;
  cfg.burn_in = 2;
  cfg.kept_draws = 2;
  cfg.cutpoint_count = 4;

  // No G=1 rows: h1 unidentified in-arm.
  const std::vector<std::int8_t> all_zero{0, 0, 0, 0};
  const std::vector<std::int8_t> b{0, 1, 0, 1};
  CHECK_THROWS(fit_monotone(x, all_zero, b, cfg, Matrix{}, 1));

  const std::vector<std::int8_t> bad{0, 2, 0, 1};
  CHECK_THROWS(fit_monotone(x, bad, b, cfg, Matrix{}, 1));
}
