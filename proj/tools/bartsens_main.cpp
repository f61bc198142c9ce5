// Command-line driver: fit | project | evalue | simulate | subgroup | diagnose.
// All randomness flows from one master seed recorded in every output header;
// identical config + seed reproduce byte-identical result CSVs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bartsens/dataset.hpp"
#include "bartsens/diagnostics.hpp"
#include "bartsens/evalue.hpp"
#include "bartsens/monotone_bart.hpp"
#include "bartsens/projection.hpp"
#include "bartsens/reduced_form.hpp"
#include "bartsens/simulation.hpp"
#include "bartsens/subgroup.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
  std::string data_path;
  bartsens::CsvSchema schema;
  bartsens::BartConfig bart;
  int monitor_count = 1000;
  std::vector<bartsens::ConfounderDensity> densities;
  bartsens::SolverOptions solver;
  bartsens::ProjectionMode mode = bartsens::ProjectionMode::PerDraw;
  int subsample_draws = 500;
  int subgroup_max_depth = 3;
  int subgroup_min_leaf = 0;  // 0: max(50, n/100)
  std::string subgroup_response = "tau";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json j = json::parse(in);
  RunConfig cfg;
  if (j.contains("data")) {
    const json& d = j["data"];
    cfg.data_path = d.value("path", "");
    cfg.schema.treatment = d.value("treatment", "G");
    cfg.schema.outcome = d.value("outcome", "B");
    cfg.schema.label = d.value("label", "");
    if (d.contains("covariates"))
      cfg.schema.covariates = d["covariates"].get<std::vector<std::string>>();
  }
  if (j.contains("bart")) {
    const json& b = j["bart"];
    cfg.bart.tree_count = b.value("trees", cfg.bart.tree_count);
    cfg.bart.burn_in = b.value("burn_in", cfg.bart.burn_in);
    cfg.bart.kept_draws = b.value("kept_draws", cfg.bart.kept_draws);
    cfg.bart.cutpoint_count = b.value("cutpoints", cfg.bart.cutpoint_count);
    cfg.bart.leaf_scale_k = b.value("k", cfg.bart.leaf_scale_k);
    cfg.bart.split_base = b.value("split_base", cfg.bart.split_base);
    cfg.bart.split_power = b.value("split_power", cfg.bart.split_power);
    cfg.bart.min_leaf_obs = b.value("min_leaf_obs", cfg.bart.min_leaf_obs);
    cfg.bart.stored_draw_stride = b.value("stored_draw_stride", cfg.bart.stored_draw_stride);
    cfg.monitor_count = b.value("monitor_count", cfg.monitor_count);
  }
  if (j.contains("densities")) {
    for (const json& d : j["densities"])
      cfg.densities.push_back(bartsens::ConfounderDensity::parse(d.dump()));
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    const std::string mode = p.value("mode", "per-draw");
    if (mode == "per-draw") cfg.mode = bartsens::ProjectionMode::PerDraw;
    else if (mode == "mean-only") cfg.mode = bartsens::ProjectionMode::MeanOnly;
    else throw std::runtime_error("projection.mode must be 'per-draw' or 'mean-only'");
    cfg.subsample_draws = p.value("subsample_draws", cfg.subsample_draws);
    cfg.solver.quadrature_nodes = p.value("quadrature_nodes", cfg.solver.quadrature_nodes);
    cfg.solver.max_restarts = p.value("max_restarts", cfg.solver.max_restarts);
    cfg.solver.max_iterations = p.value("max_iterations", cfg.solver.max_iterations);
  }
  if (j.contains("subgroup")) {
    const json& s = j["subgroup"];
    cfg.subgroup_max_depth = s.value("max_depth", cfg.subgroup_max_depth);
    cfg.subgroup_min_leaf = s.value("min_leaf", cfg.subgroup_min_leaf);
    cfg.subgroup_response = s.value("response", cfg.subgroup_response);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

std::string artifact_path(const RunConfig& cfg) { return cfg.output_dir + "/reduced_form.bin"; }

bartsens::SensitivitySpec make_spec(const RunConfig& cfg) {
  bartsens::SensitivitySpec spec;
  spec.densities = cfg.densities;
  spec.solver = cfg.solver;
  spec.mode = cfg.mode;
  spec.subsample_draws = cfg.subsample_draws;
  spec.seed = cfg.seed;
  spec.threads = cfg.threads;
  return spec;
}

int cmd_fit(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw std::runtime_error("fit: config has no data.path");
  const bartsens::ObservationSet data = bartsens::ingest_csv(cfg.data_path, cfg.schema);
  std::cout << "ingested " << data.n() << " rows, " << data.X.cols << " covariates";
  if (data.imputed_count > 0) std::cout << " (" << data.imputed_count << " cells imputed)";
  std::cout << "\n";

  bartsens::ReducedFormConfig rf;
  rf.bart = cfg.bart;
  rf.monitor_count = cfg.monitor_count;
  rf.seed = cfg.seed;
  const bartsens::ReducedFormDraws draws = bartsens::fit_reduced_form(data, rf);
  bartsens::save_reduced_form(draws, artifact_path(cfg));
  std::cout << "wrote " << artifact_path(cfg) << " (kept " << draws.kept_draws << " draws, "
            << draws.stored_draws << " stored)\n";
  return 0;
}

int cmd_project(const RunConfig& cfg, const std::string& artifact, bool per_obs) {
  if (cfg.densities.empty()) throw std::runtime_error("project: config lists no densities");
  const bartsens::ReducedFormDraws draws = bartsens::load_reduced_form(artifact);
  const std::vector<bartsens::DensityPosterior> posteriors =
      bartsens::project_posterior(draws, make_spec(cfg));
  bartsens::write_sensitivity_csv(cfg.output_dir + "/sensitivity.csv", posteriors, cfg.seed);
  std::cout << "wrote " << cfg.output_dir << "/sensitivity.csv (" << posteriors.size()
            << " densities)\n";
  if (per_obs) {
    for (std::size_t k = 0; k < posteriors.size(); ++k) {
      std::vector<std::vector<std::string>> rows;
      for (int i = 0; i < draws.n; ++i) {
        rows.push_back({std::to_string(i), bartsens::format_double(posteriors[k].tau_mean_by_obs[i]),
                        bartsens::format_double(posteriors[k].delta_mean_by_obs[i]),
                        bartsens::format_double(posteriors[k].pdo0_mean_by_obs[i])});
      }
      const std::string path =
          cfg.output_dir + "/per_obs_density" + std::to_string(k) + ".csv";
      bartsens::write_csv(path, {"obs", "tau_mean", "delta_mean", "pdo0_mean"}, rows,
                          {"seed=" + std::to_string(cfg.seed),
                           "density=" + posteriors[k].label});
      std::cout << "wrote " << path << "\n";
    }
  }
  return 0;
}

int cmd_evalue(const RunConfig& cfg, const std::string& artifact, int density_index) {
  const bartsens::ReducedFormDraws draws = bartsens::load_reduced_form(artifact);
  std::vector<double> tau_means;
  if (!cfg.densities.empty()) {
    bartsens::SensitivitySpec spec = make_spec(cfg);
    if (density_index < 0 || density_index >= static_cast<int>(spec.densities.size()))
      throw std::runtime_error("evalue: density index out of range");
    spec.densities = {spec.densities[density_index]};
    tau_means = bartsens::project_posterior(draws, spec)[0].tau_mean_by_obs;
  }
  const std::vector<bartsens::EvalueRow> rows = bartsens::compare(draws, tau_means);
  bartsens::write_evalue_csv(cfg.output_dir + "/evalue.csv", rows, cfg.seed);
  std::cout << "wrote " << cfg.output_dir << "/evalue.csv (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_simulate_bivariate(const RunConfig& cfg, double gamma, double rho, int n) {
  bartsens::BivariateProbitConfig dgp;
  dgp.n = n;
  dgp.gamma = gamma;
  dgp.rho = rho;
  const bartsens::ConfounderDensity assumed =
      bartsens::ConfounderDensity::gaussian(0.0, bartsens::implied_confounder_sd(rho));
  const bartsens::RecoveryReport report =
      bartsens::bivariate_recovery_experiment(dgp, cfg.bart, assumed, cfg.seed, cfg.solver);
  std::vector<std::vector<std::string>> rows{{
      bartsens::format_double(gamma), bartsens::format_double(rho), std::to_string(n),
      bartsens::format_double(report.acrr_true), bartsens::format_double(report.acrr_est),
      bartsens::format_double(report.icrr_correlation),
      bartsens::format_double(report.icrr_rmse), std::to_string(cfg.seed)}};
  bartsens::write_csv(cfg.output_dir + "/bivariate_recovery.csv",
                      {"gamma", "rho", "n", "acrr_true", "acrr_est", "icrr_cor", "icrr_rmse",
                       "seed"},
                      rows, {"seed=" + std::to_string(cfg.seed)});
  std::cout << "wrote " << cfg.output_dir << "/bivariate_recovery.csv\n";
  return 0;
}

int cmd_simulate_nonlinear(const RunConfig& cfg, double mu, double sigma, int n,
                           const std::string& assumed_json, double laplace_scale) {
  bartsens::NonlinearDGPConfig dgp;
  dgp.n = n;
  dgp.confounder_mean = mu;
  dgp.confounder_sd = sigma;
  const bartsens::ConfounderDensity d_true = bartsens::ConfounderDensity::gaussian(mu, sigma);

  bartsens::QuadratureRule assumed_rule;
  std::string assumed_label;
  if (laplace_scale > 0.0) {
    assumed_rule = bartsens::laplace_rule(mu, laplace_scale);
    assumed_label = "laplace(" + bartsens::format_double(mu) + "," +
                    bartsens::format_double(laplace_scale) + ")";
  } else if (!assumed_json.empty()) {
    const bartsens::ConfounderDensity d = bartsens::ConfounderDensity::parse(assumed_json);
    assumed_rule = bartsens::quadrature(d, cfg.solver.quadrature_nodes);
    assumed_label = d.label();
  } else {
    assumed_rule = bartsens::quadrature(d_true, cfg.solver.quadrature_nodes);
    assumed_label = d_true.label();
  }

  const bartsens::RecoveryReport report = bartsens::nonlinear_recovery_experiment(
      dgp, cfg.bart, assumed_rule, d_true, cfg.seed, cfg.solver);
  std::vector<std::vector<std::string>> rows{{
      d_true.label(), assumed_label, std::to_string(n),
      bartsens::format_double(report.acrr_true), bartsens::format_double(report.acrr_est),
      bartsens::format_double(report.icrr_correlation),
      bartsens::format_double(report.icrr_rmse), std::to_string(cfg.seed)}};
  bartsens::write_csv(cfg.output_dir + "/nonlinear_recovery.csv",
                      {"true_f", "assumed_f", "n", "acrr_true", "acrr_est", "icrr_cor",
                       "icrr_rmse", "seed"},
                      rows, {"seed=" + std::to_string(cfg.seed)});
  std::cout << "wrote " << cfg.output_dir << "/nonlinear_recovery.csv\n";
  return 0;
}

int cmd_subgroup(const RunConfig& cfg, const std::string& artifact, int density_index) {
  if (cfg.data_path.empty()) throw std::runtime_error("subgroup: config has no data.path");
  if (cfg.densities.empty()) throw std::runtime_error("subgroup: config lists no densities");
  const bartsens::ObservationSet data = bartsens::ingest_csv(cfg.data_path, cfg.schema);
  const bartsens::ReducedFormDraws draws = bartsens::load_reduced_form(artifact);
  if (data.n() != draws.n)
    throw std::runtime_error("subgroup: dataset and artifact row counts differ");

  bartsens::SensitivitySpec spec = make_spec(cfg);
  if (density_index < 0 || density_index >= static_cast<int>(spec.densities.size()))
    throw std::runtime_error("subgroup: density index out of range");
  spec.densities = {spec.densities[density_index]};
  spec.keep_draw_matrix = true;
  const bartsens::DensityPosterior post = bartsens::project_posterior(draws, spec)[0];

  const std::vector<double>* response = &post.tau_mean_by_obs;
  const std::vector<double>* draw_matrix = &post.tau_by_draw;
  if (cfg.subgroup_response == "delta") {
    response = &post.delta_mean_by_obs;
    draw_matrix = &post.delta_by_draw_by_obs;
  } else if (cfg.subgroup_response == "pdo0") {
    response = &post.pdo0_mean_by_obs;
    draw_matrix = &post.pdo0_by_draw_by_obs;
  } else if (cfg.subgroup_response != "tau") {
    throw std::runtime_error("subgroup: response must be tau, delta, or pdo0");
  }

  const int min_leaf = cfg.subgroup_min_leaf > 0
                           ? cfg.subgroup_min_leaf
                           : std::max(50, data.n() / 100);
  const bartsens::CartTree tree =
      bartsens::fit_cart(data.X, *response, cfg.subgroup_max_depth, min_leaf);

  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream txt(cfg.output_dir + "/subgroup_tree.txt");
    txt << bartsens::render_tree(tree, data.covariate_names);
    std::ofstream js(cfg.output_dir + "/subgroup_tree.json");
    js << bartsens::tree_to_json(tree, data.covariate_names) << "\n";
  }

  const bartsens::SubgroupDifference diff = bartsens::subgroup_difference(
      tree, *draw_matrix, post.projected_draws, draws.n);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t d = 0; d < diff.per_draw.size(); ++d)
    rows.push_back({std::to_string(d), bartsens::format_double(diff.per_draw[d])});
  bartsens::write_csv(cfg.output_dir + "/subgroup_difference.csv", {"draw", "difference"}, rows,
                      {"seed=" + std::to_string(cfg.seed), "density=" + post.label,
                       "response=" + cfg.subgroup_response,
                       diff.single_leaf ? "single_leaf=1" : "single_leaf=0"});
  std::cout << "wrote " << cfg.output_dir << "/subgroup_tree.{txt,json} and "
            << cfg.output_dir << "/subgroup_difference.csv\n";
  return 0;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& artifact, bool traces) {
  const bartsens::ReducedFormDraws draws = bartsens::load_reduced_form(artifact);
  if (draws.monitor_rows.empty())
    throw std::runtime_error("diagnose: artifact carries no monitored chains");
  const int m = static_cast<int>(draws.monitor_rows.size());
  const int len = draws.kept_draws;

  auto chain_of = [&](const std::vector<double>& block, int col) {
    std::vector<double> chain(len);
    for (int t = 0; t < len; ++t) chain[t] = block[static_cast<std::size_t>(t) * m + col];
    return chain;
  };

  std::vector<std::vector<std::string>> rows;
  const char* names[3] = {"pG", "pB1", "pB0"};
  const std::vector<double>* blocks[3] = {&draws.monitor_pG, &draws.monitor_pB1,
                                          &draws.monitor_pB0};
  for (int c = 0; c < m; ++c) {
    for (int q = 0; q < 3; ++q) {
      const std::vector<double> chain = chain_of(*blocks[q], c);
      const bartsens::ChainDiagnostics diag = bartsens::diagnose_chain(
          std::string(names[q]) + "[" + std::to_string(draws.monitor_rows[c]) + "]", chain);
      rows.push_back({diag.quantity, bartsens::format_double(diag.n_eff_ratio),
                      bartsens::format_double(diag.geweke_z),
                      bartsens::format_double(diag.geweke_prob),
                      diag.defined ? "1" : "0"});
    }
  }
  bartsens::write_csv(cfg.output_dir + "/diagnostics.csv",
                      {"quantity", "n_eff_ratio", "geweke_z", "geweke_prob", "defined"}, rows,
                      {"seed=" + std::to_string(draws.seed)});
  std::cout << "wrote " << cfg.output_dir << "/diagnostics.csv (" << rows.size() << " chains)\n";

  if (traces) {
    // Trace and autocorrelation export for the first monitored observation.
    std::vector<std::vector<std::string>> trace_rows;
    const std::vector<double> chain = chain_of(draws.monitor_pB0, 0);
    for (int t = 0; t < len; ++t)
      trace_rows.push_back({std::to_string(t), bartsens::format_double(chain[t])});
    bartsens::write_csv(cfg.output_dir + "/trace_pB0.csv", {"iteration", "value"}, trace_rows,
                        {"obs=" + std::to_string(draws.monitor_rows[0])});

    const double m0 = bartsens::mean(chain);
    double c0 = 0.0;
    for (double x : chain) c0 += (x - m0) * (x - m0);
    std::vector<std::vector<std::string>> acf_rows;
    for (int lag = 0; lag <= std::min(100, len - 1); ++lag) {
      double acc = 0.0;
      for (int i = 0; i + lag < len; ++i) acc += (chain[i] - m0) * (chain[i + lag] - m0);
      acf_rows.push_back({std::to_string(lag), bartsens::format_double(c0 > 0 ? acc / c0 : 0.0)});
    }
    bartsens::write_csv(cfg.output_dir + "/acf_pB0.csv", {"lag", "autocorrelation"}, acf_rows,
                        {"obs=" + std::to_string(draws.monitor_rows[0])});
    std::cout << "wrote trace_pB0.csv and acf_pB0.csv\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Machine-learning sensitivity analysis for binary treatment/outcome causal "
               "inference under unmeasured confounding"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
  std::optional<std::string> output_override;
  std::optional<int> draws_override;
  std::optional<std::string> mode_override;
  app.add_option("--config", config_path, "JSON run configuration")->required(false);
  app.add_option("--seed", seed_override, "master seed override");
  app.add_option("--threads", threads_override, "worker threads for projection");
  app.add_option("--output-dir", output_override, "output directory override");
  app.add_option("--draws", draws_override, "posterior draws to project (per-draw mode)");
  app.add_option("--mode", mode_override, "projection mode: per-draw | mean-only");

  auto* fit = app.add_subcommand("fit", "fit the reduced-form models and write the artifact");
  auto* project =
      app.add_subcommand("project", "project a fitted artifact through the density sweep");
  std::string artifact_override;
  bool per_obs = false;
  project->add_option("--artifact", artifact_override, "reduced-form artifact path");
  project->add_flag("--per-obs", per_obs, "also write per-observation posterior means");

  auto* evalue_cmd = app.add_subcommand("evalue", "E-value comparison table");
  int density_index = 0;
  evalue_cmd->add_option("--artifact", artifact_override, "reduced-form artifact path");
  evalue_cmd->add_option("--density", density_index, "density index for the tau column");

  auto* simulate = app.add_subcommand("simulate", "run a validation experiment");
  std::string table = "bivariate";
  double gamma = 1.0, rho = 0.25, mu = 0.0, sigma = 1.0, laplace_scale = 0.0;
  int sim_n = 25000;
  std::string assumed_json;
  simulate->add_option("--table", table, "bivariate | nonlinear");
  simulate->add_option("--gamma", gamma, "inducement shift (bivariate)");
  simulate->add_option("--rho", rho, "latent correlation (bivariate)");
  simulate->add_option("--mu", mu, "confounder mean (nonlinear)");
  simulate->add_option("--sigma", sigma, "confounder sd (nonlinear)");
  simulate->add_option("--n", sim_n, "sample size");
  simulate->add_option("--assumed", assumed_json, "assumed-f JSON (nonlinear)");
  simulate->add_option("--laplace-scale", laplace_scale,
                       "assume Laplace(mu, scale) instead (nonlinear mis-specification)");

  auto* subgroup_cmd = app.add_subcommand("subgroup", "CART posterior summarization");
  subgroup_cmd->add_option("--artifact", artifact_override, "reduced-form artifact path");
  subgroup_cmd->add_option("--density", density_index, "density index");

  auto* diagnose = app.add_subcommand("diagnose", "MCMC convergence diagnostics");
  bool traces = false;
  diagnose->add_option("--artifact", artifact_override, "reduced-form artifact path");
  diagnose->add_flag("--traces", traces, "also export trace and autocorrelation CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (threads_override) cfg.threads = *threads_override;
    if (output_override) cfg.output_dir = *output_override;
    if (draws_override) cfg.subsample_draws = *draws_override;
    if (mode_override) {
      if (*mode_override == "per-draw") cfg.mode = bartsens::ProjectionMode::PerDraw;
      else if (*mode_override == "mean-only") cfg.mode = bartsens::ProjectionMode::MeanOnly;
      else throw std::runtime_error("--mode must be per-draw or mean-only");
    }
    const std::string artifact =
        artifact_override.empty() ? artifact_path(cfg) : artifact_override;

    if (*fit) return cmd_fit(cfg);
    if (*project) return cmd_project(cfg, artifact, per_obs);
    if (*evalue_cmd) return cmd_evalue(cfg, artifact, density_index);
    if (*simulate) {
      if (table == "bivariate") return cmd_simulate_bivariate(cfg, gamma, rho, sim_n);
      if (table == "nonlinear")
        return cmd_simulate_nonlinear(cfg, mu, sigma, sim_n, assumed_json, laplace_scale);
      throw std::runtime_error("simulate: --table must be bivariate or nonlinear");
    }
    if (*subgroup_cmd) return cmd_subgroup(cfg, artifact, density_index);
    if (*diagnose) return cmd_diagnose(cfg, artifact, traces);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
