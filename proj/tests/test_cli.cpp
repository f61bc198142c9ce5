// End-to-end runs of the command-line driver against a small synthetic CSV.
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bartsens/math.hpp"
#include "bartsens/rng.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(BARTSENS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

struct Workspace {
  fs::path dir;
  fs::path csv;
  fs::path config;

  Workspace() {
    dir = fs::temp_directory_path() / ("bartsens_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    csv = dir / "data.csv";
    config = dir / "config.json";

    bartsens::Rng rng(404);
    std::ofstream out(csv);
    out << "firm,G,B,x1,x2\n";
    for (int i = 0; i < 300; ++i) {
      const double x1 = 2.0 * rng.uniform() - 1.0;
      const double x2 = 2.0 * rng.uniform() - 1.0;
      const int g = rng.uniform() < bartsens::norm_cdf(0.5 * x2) ? 1 : 0;
      const double p1 = bartsens::norm_cdf(x1 - 0.3);
      const double p0 = p1 * bartsens::norm_cdf(0.6);
      const int b = rng.uniform() < (g ? p1 : p0) ? 1 : 0;
      out << "f" << i << "," << g << "," << b << "," << x1 << "," << x2 << "\n";
    }
    out.close();

    std::ofstream cfg(config);
    cfg << R"({
  "data": {"path": ")" << csv.string() << R"(", "treatment": "G", "outcome": "B", "label": "firm"},
  "bart": {"trees": 20, "burn_in": 60, "kept_draws": 120, "cutpoints": 40, "monitor_count": 4},
  "densities": [
    {"kind": "gaussian", "mean": 0.0, "sd": 0.5},
    {"kind": "sharkfin", "q": 0.25, "s": 0.5}
  ],
  "projection": {"mode": "per-draw", "subsample_draws": 30},
  "subgroup": {"max_depth": 2, "min_leaf": 30, "response": "tau"},
  "seed": 11,
  "output_dir": ")" << (dir / "out").string() << R"("
})";
  }

  ~Workspace() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("cli pipeline: fit, project without refit, evalue, subgroup, diagnose") {
  Workspace ws;
  const std::string base = "--config " + ws.config.string();

  REQUIRE(run("fit " + base) == 0);
  const fs::path artifact = ws.dir / "out" / "reduced_form.bin";
  REQUIRE(fs::exists(artifact));
  const std::string artifact_before = slurp(artifact);

  REQUIRE(run("project " + base) == 0);
  const fs::path sens = ws.dir / "out" / "sensitivity.csv";
  REQUIRE(fs::exists(sens));
  const std::string table = slurp(sens);
  CHECK(table.find("gaussian") != std::string::npos);
  CHECK(table.find("sharkfin") != std::string::npos);
  CHECK(table.find("acrr_mean") != std::string::npos);
  // Two density rows, no refit: the artifact bytes are untouched.
  CHECK(slurp(artifact) == artifact_before);

  REQUIRE(run("evalue " + base) == 0);
  const std::string ev = slurp(ws.dir / "out" / "evalue.csv");
  CHECK(ev.find("rr_obs") != std::string::npos);
  CHECK(ev.find("evalue") != std::string::npos);

  REQUIRE(run("subgroup " + base) == 0);
  CHECK(fs::exists(ws.dir / "out" / "subgroup_tree.txt"));
  CHECK(fs::exists(ws.dir / "out" / "subgroup_tree.json"));
  CHECK(fs::exists(ws.dir / "out" / "subgroup_difference.csv"));

  REQUIRE(run("diagnose " + base + " --traces") == 0);
  const std::string diag = slurp(ws.dir / "out" / "diagnostics.csv");
  CHECK(diag.find("n_eff_ratio") != std::string::npos);
  CHECK(diag.find("geweke_z") != std::string::npos);
  CHECK(fs::exists(ws.dir / "out" / "trace_pB0.csv"));
  CHECK(fs::exists(ws.dir / "out" / "acf_pB0.csv"));
}

TEST_CASE("cli determinism: identical config and seed give identical bytes") {
  Workspace ws;
  const fs::path out_a = ws.dir / "a";
  const fs::path out_b = ws.dir / "b";
  const std::string base = "--config " + ws.config.string();
  REQUIRE(run("fit " + base + " --output-dir " + out_a.string()) == 0);
  REQUIRE(run("project " + base + " --output-dir " + out_a.string()) == 0);
  REQUIRE(run("fit " + base + " --output-dir " + out_b.string()) == 0);
  REQUIRE(run("project " + base + " --output-dir " + out_b.string()) == 0);
  CHECK(slurp(out_a / "sensitivity.csv") == slurp(out_b / "sensitivity.csv"));

  // A different seed produces different numbers.
  const fs::path out_c = ws.dir / "c";
  REQUIRE(run("fit " + base + " --output-dir " + out_c.string() + " --seed 12") == 0);
  REQUIRE(run("project " + base + " --output-dir " + out_c.string() + " --seed 12") == 0);
  CHECK(slurp(out_a / "sensitivity.csv") != slurp(out_c / "sensitivity.csv"));
}

TEST_CASE("cli rejects a version-mismatched artifact with a message") {
  Workspace ws;
  const std::string base = "--config " + ws.config.string();
  REQUIRE(run("fit " + base) == 0);
  const fs::path artifact = ws.dir / "out" / "reduced_form.bin";
  {
    std::fstream f(artifact, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const unsigned bad = 77;
    f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
  }
  CHECK(run("project " + base) != 0);
}

TEST_CASE("cli simulate writes the recovery table schema") {
  Workspace ws;
  // Tiny run: the schema is the point here, not the estimate quality.
  REQUIRE(run("simulate --table bivariate --n 800 --gamma 1 --rho 0.25 --config " +
              ws.config.string() + " --seed 3") == 0);
  const std::string table = slurp(ws.dir / "out" / "bivariate_recovery.csv");
  CHECK(table.find("acrr_true,acrr_est,icrr_cor,icrr_rmse") != std::string::npos);

  REQUIRE(run("simulate --table nonlinear --n 800 --mu 0 --sigma 1 --config " +
              ws.config.string() + " --seed 3") == 0);
  const std::string nl = slurp(ws.dir / "out" / "nonlinear_recovery.csv");
  CHECK(nl.find("acrr_true") != std::string::npos);
  CHECK(nl.find("gaussian(0,1)") != std::string::npos);
}
