#include <cmath>
#include <vector>

#include "bartsens/nelder_mead.hpp"
#include "doctest.h"

using namespace bartsens;

TEST_CASE("quadratic bowl minimized to tolerance") {
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 2.0 * (x[1] + 0.5) * (x[1] + 0.5) +
           0.5 * (x[2] - 2.0) * (x[2] - 2.0);
  };
  const NelderMeadResult r = nelder_mead(f, {0.0, 0.0, 0.0});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
  CHECK(r.x[2] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("rosenbrock valley") {
  auto f = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NelderMeadOptions opt;
  opt.max_iterations = 5000;
  const NelderMeadResult r = nelder_mead(f, {-1.2, 1.0}, opt);
  CHECK(r.value < 1e-10);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("restarting at the solution does not move it") {
  auto f = [](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; };
  const NelderMeadResult first = nelder_mead(f, {3.0, -4.0});
  const NelderMeadResult again = nelder_mead(f, first.x);
  CHECK(again.value <= first.value + 1e-12);
}

TEST_CASE("iteration budget flags non-convergence") {
  auto f = [](const std::vector<double>& x) { return std::abs(x[0] - 9.0); };
  NelderMeadOptions opt;
  opt.max_iterations = 3;
  const NelderMeadResult r = nelder_mead(f, {-50.0}, opt);
  CHECK_FALSE(r.converged);
}
