#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "bartsens/math.hpp"
#include "bartsens/reduced_form.hpp"
#include "doctest.h"

using namespace bartsens;

namespace {

ObservationSet synthetic_set(int n, std::uint64_t seed) {
  Rng rng(seed);
  ObservationSet data;
  data.X = Matrix(n, 2);
  data.covariate_names = {"x1", "x2"};
  data.G.resize(n);
  data.B.resize(n);
  for (int i = 0; i < n; ++i) {
    data.X(i, 0) = 2.0 * rng.uniform() - 1.0;
    data.X(i, 1) = 2.0 * rng.uniform() - 1.0;
    data.G[i] = rng.uniform() < norm_cdf(0.5 * data.X(i, 1)) ? 1 : 0;
    const double p1 = norm_cdf(0.7 * data.X(i, 0) - 0.4);
    const double p0 = p1 * norm_cdf(0.5);
    data.B[i] = rng.uniform() < (data.G[i] ? p1 : p0) ? 1 : 0;
  }
  return data;
}

BartConfig small_bart() {
  BartConfig cfg;
  cfg.tree_count = 25;
  cfg.burn_in = 150;
  cfg.kept_draws = 200;
  cfg.cutpoint_count = 50;
  cfg.stored_draw_stride = 2;
  return cfg;
}

}  // namespace

TEST_CASE("cell probabilities arithmetic and completeness") {
  const CellProbabilities c = cell_probabilities(0.5, 0.4, 0.2);
  CHECK(c.b1g1 == doctest::Approx(0.2));
  CHECK(c.b1g0 == doctest::Approx(0.1));
  CHECK(c.b0g1 == doctest::Approx(0.3));
  const double b0g0 = (1.0 - 0.5) * (1.0 - 0.2);
  CHECK(c.b1g1 + c.b1g0 + c.b0g1 + b0g0 == doctest::Approx(1.0).epsilon(1e-12));

  // pB1 = pB0: the joint factorizes.
  const CellProbabilities f = cell_probabilities(0.3, 0.25, 0.25);
  CHECK(f.b1g1 / 0.3 == doctest::Approx(f.b1g0 / 0.7).epsilon(1e-12));
}

TEST_CASE("reduced-form fit aligns draws and respects monotonicity") {
  const ObservationSet data = synthetic_set(600, 99);
  ReducedFormConfig cfg;
  cfg.bart = small_bart();
  cfg.monitor_count = 5;
  cfg.seed = 31;
  const ReducedFormDraws draws = fit_reduced_form(data, cfg);

  CHECK(draws.n == 600);
  CHECK(draws.kept_draws == 200);
  CHECK(draws.stored_draws == 100);
  CHECK(draws.draw_pG.size() == draws.draw_pB1.size());
  CHECK(draws.draw_pB0.size() == draws.draw_pB1.size());
  CHECK(static_cast<int>(draws.monitor_rows.size()) == 5);
  CHECK(draws.monitor_pG.size() == static_cast<std::size_t>(200) * 5);

  for (std::size_t k = 0; k < draws.draw_pG.size(); ++k) {
    CHECK(draws.draw_pG[k] > 0.0);
    CHECK(draws.draw_pG[k] < 1.0);
    CHECK(draws.draw_pB1[k] >= draws.draw_pB0[k]);
    // Cells plus the complement sum to one for every draw.
    const double pg = draws.draw_pG[k], p1 = draws.draw_pB1[k], p0 = draws.draw_pB0[k];
    const double total = pg * p1 + (1 - pg) * p0 + pg * (1 - p1) + (1 - pg) * (1 - p0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Per-draw observed risk ratio at least one under monotonicity.
  for (int d = 0; d < draws.stored_draws; ++d)
    for (int i = 0; i < draws.n; i += 97)
      CHECK(draws.pB1(d, i) / draws.pB0(d, i) >= 1.0);
}

TEST_CASE("all-treated dataset warns and pushes pG toward one") {
  int warnings = 0;
  set_warning_handler([&](std::string_view) { ++warnings; });
  ObservationSet data = synthetic_set(300, 5);
  for (auto& g : data.G) g = 1;
  ReducedFormConfig cfg;
  cfg.bart = small_bart();
  cfg.monitor_count = 0;
  const ReducedFormDraws draws = fit_reduced_form(data, cfg);
  CHECK(warnings >= 1);
  double mean_pg = 0.0;
  for (double p : draws.mean_pG) mean_pg += p;
  CHECK(mean_pg / draws.n > 0.9);
  set_warning_handler({});
}

TEST_CASE("artifact round-trip and version rejection") {
  const ObservationSet data = synthetic_set(150, 7);
  ReducedFormConfig cfg;
  cfg.bart = small_bart();
  cfg.bart.burn_in = 30;
  cfg.bart.kept_draws = 40;
  cfg.monitor_count = 3;
  cfg.seed = 77;
  const ReducedFormDraws draws = fit_reduced_form(data, cfg);

  const std::string path =
      (std::filesystem::temp_directory_path() / "bartsens_artifact_test.bin").string();
  save_reduced_form(draws, path);
  const ReducedFormDraws loaded = load_reduced_form(path);
  CHECK(loaded.n == draws.n);
  CHECK(loaded.seed == draws.seed);
  CHECK(loaded.stored_draws == draws.stored_draws);
  CHECK(loaded.mean_pB1 == draws.mean_pB1);
  CHECK(loaded.draw_pB0 == draws.draw_pB0);
  CHECK(loaded.monitor_rows == draws.monitor_rows);
  CHECK(loaded.config_json == draws.config_json);

  // Corrupt the version field (bytes 8..11) and expect a message.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t bad = 999;
    f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
  }
  CHECK_THROWS_WITH_AS(load_reduced_form(path), doctest::Contains("version"),
                       std::runtime_error);

  // Corrupt the magic and expect rejection.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
  }
  CHECK_THROWS_WITH_AS(load_reduced_form(path), doctest::Contains("not a reduced-form"),
                       std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS(load_reduced_form(path));
}
