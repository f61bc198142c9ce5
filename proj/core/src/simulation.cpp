#include "bartsens/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "bartsens/math.hpp"
#include "bartsens/monotone_bart.hpp"

namespace bartsens {

BivariateProbitSample gen_bivariate_probit(const BivariateProbitConfig& config, Rng& rng) {
  if (config.n <= 0) throw std::invalid_argument("gen_bivariate_probit: n must be positive");
  if (!(std::abs(config.rho) < 1.0))
    throw std::invalid_argument("gen_bivariate_probit: |rho| must be < 1");
  if (config.gamma < 0.0)
    throw std::invalid_argument("gen_bivariate_probit: gamma must be >= 0");

  BivariateProbitSample out;
  out.data.X = Matrix(config.n, config.covariate_count);
  out.data.G.resize(config.n);
  out.data.B.resize(config.n);
  out.true_tau.resize(config.n);
  out.data.covariate_names.resize(config.covariate_count);
  for (int j = 0; j < config.covariate_count; ++j)
    out.data.covariate_names[j] = "x" + std::to_string(j + 1);

  const double rho_c = std::sqrt(1.0 - config.rho * config.rho);
  for (int i = 0; i < config.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < config.covariate_count; ++j) {
      const double x = 2.0 * rng.uniform() - 1.0;
      out.data.X(i, j) = x;
      s += x;
    }
    const double mean_g = config.beta0 + config.beta1 * s;
    const double mean_b = config.alpha0 + config.alpha1 * s;
    const double zg = rng.normal();
    const double zb = config.rho * zg + rho_c * rng.normal();
    const int g = (mean_g + zg >= 0.0) ? 1 : 0;
    const int b = (mean_b + zb >= -config.gamma * g) ? 1 : 0;
    out.data.G[i] = static_cast<std::int8_t>(g);
    out.data.B[i] = static_cast<std::int8_t>(b);
    out.true_tau[i] =
        norm_cdf(config.gamma + mean_b) / norm_cdf(mean_b);
  }
  return out;
}

double implied_confounder_sd(double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("implied_confounder_sd: rho must lie in (0,1)");
  return std::sqrt(rho / (1.0 - rho));
}

NonlinearSample gen_nonlinear(const NonlinearDGPConfig& config, Rng& rng) {
  if (config.n <= 0) throw std::invalid_argument("gen_nonlinear: n must be positive");
  if (!(config.confounder_sd > 0.0))
    throw std::invalid_argument("gen_nonlinear: confounder sd must be > 0");
  if (config.covariate_count < 6)
    throw std::invalid_argument("gen_nonlinear: needs at least 6 covariates (actives 1,2,5,6)");

  NonlinearSample out;
  out.data.X = Matrix(config.n, config.covariate_count);
  out.data.G.resize(config.n);
  out.data.B.resize(config.n);
  out.true_b0.resize(config.n);
  out.true_b1.resize(config.n);
  out.true_g.resize(config.n);
  out.data.covariate_names.resize(config.covariate_count);
  for (int j = 0; j < config.covariate_count; ++j)
    out.data.covariate_names[j] = "x" + std::to_string(j + 1);

  for (int i = 0; i < config.n; ++i) {
    for (int j = 0; j < config.covariate_count; ++j)
      out.data.X(i, j) = 2.0 * rng.uniform() - 1.0;
    const double x1 = out.data.X(i, 0);
    const double x2 = out.data.X(i, 1);
    const double x5 = out.data.X(i, 4);
    const double x6 = out.data.X(i, 5);
    const double b0 = x5 + x1 * std::sin(2.0 * x6) - 1.75;
    const double b1 = b0 + 1.5;
    const double g = 0.5 * b0 + x2 + 0.25;
    out.true_b0[i] = b0;
    out.true_b1[i] = b1;
    out.true_g[i] = g;

    const double u = config.confounder_mean + config.confounder_sd * rng.normal();
    const int gi = rng.uniform() < norm_cdf(g + u) ? 1 : 0;
    const double pb = norm_cdf((gi == 1 ? b1 : b0) + u);
    out.data.G[i] = static_cast<std::int8_t>(gi);
    out.data.B[i] = static_cast<std::int8_t>(rng.uniform() < pb ? 1 : 0);
  }
  return out;
}

OracleEstimands oracle_estimands(std::span<const double> true_b0, std::span<const double> true_b1,
                                 const QuadratureRule& rule) {
  if (true_b0.size() != true_b1.size())
    throw std::invalid_argument("oracle_estimands: length mismatch");
  OracleEstimands out;
  out.tau.resize(true_b0.size());
  out.delta.resize(true_b0.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < true_b0.size(); ++i) {
    const double p0 = marginal_single(rule, true_b0[i]);
    const double p1 = marginal_single(rule, true_b1[i]);
    out.tau[i] = p1 / p0;
    out.delta[i] = p1 - p0;
    acc += out.tau[i];
  }
  out.acrr = acc / static_cast<double>(true_b0.size());
  return out;
}

OracleEstimands oracle_estimands(std::span<const double> true_b0, std::span<const double> true_b1,
                                 const ConfounderDensity& d_true) {
  return oracle_estimands(true_b0, true_b1, quadrature(d_true, 64));
}

QuadratureRule laplace_rule(double location, double scale, int nodes_per_side) {
  if (!(scale > 0.0)) throw std::invalid_argument("laplace_rule: scale must be > 0");
  // The density has a kink at the location, so each side gets its own panel;
  // +-40 scales leaves < 1e-17 of mass outside.
  QuadratureRule out;
  const double reach = 40.0 * scale;
  auto pdf = [&](double u) { return std::exp(-std::abs(u - location) / scale) / (2.0 * scale); };
  for (const auto& panel : {gauss_legendre(nodes_per_side, location - reach, location),
                            gauss_legendre(nodes_per_side, location, location + reach)}) {
    for (std::size_t k = 0; k < panel.size(); ++k) {
      out.nodes.push_back(panel.nodes[k]);
      out.weights.push_back(panel.weights[k] * pdf(panel.nodes[k]));
    }
  }
  return out;
}

namespace {

RecoveryReport project_and_score(const ObservationSet& data, const BartConfig& fit,
                                 const QuadratureRule& assumed_rule,
                                 std::span<const double> true_tau, double acrr_true,
                                 std::uint64_t seed, const SolverOptions& solver) {
  ReducedFormConfig rf;
  rf.bart = fit;
  rf.monitor_count = 0;
  rf.seed = seed;
  const ReducedFormDraws draws = fit_reduced_form(data, rf);

  // Mean-only projection: solve once per observation at the posterior-mean
  // probabilities.
  const int n = draws.n;
  std::vector<double> tau_hat(n);
  int nonconverged = 0;
  for (int i = 0; i < n; ++i) {
    const CellProbabilities cells =
        cell_probabilities(draws.mean_pG[i], draws.mean_pB1[i], draws.mean_pB0[i]);
    const StructuralSolution s =
        solve_structural({cells.b1g1, cells.b1g0, cells.b0g1}, assumed_rule, solver,
                         mix_seed(seed, static_cast<std::uint64_t>(i)));
    if (!s.converged) ++nonconverged;
    tau_hat[i] = s.tau;
  }

  RecoveryReport report;
  report.acrr_true = acrr_true;
  report.acrr_est = mean(tau_hat);
  report.icrr_correlation = correlation(tau_hat, true_tau);
  double mse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = tau_hat[i] - true_tau[i];
    mse += e * e;
  }
  report.icrr_rmse = std::sqrt(mse / n);
  report.nonconverged_fraction = static_cast<double>(nonconverged) / n;
  return report;
}

}  // namespace

RecoveryReport bivariate_recovery_experiment(const BivariateProbitConfig& dgp,
                                             const BartConfig& fit,
                                             const ConfounderDensity& d_assumed,
                                             std::uint64_t seed, const SolverOptions& solver) {
  Rng rng(mix_seed(seed, 0xB1));
  const BivariateProbitSample sample = gen_bivariate_probit(dgp, rng);
  const QuadratureRule rule = quadrature(d_assumed, solver.quadrature_nodes);
  return project_and_score(sample.data, fit, rule, sample.true_tau, mean(sample.true_tau),
                           mix_seed(seed, 0xF1), solver);
}

RecoveryReport nonlinear_recovery_experiment(const NonlinearDGPConfig& dgp, const BartConfig& fit,
                                             const QuadratureRule& assumed_rule,
                                             const ConfounderDensity& d_true, std::uint64_t seed,
                                             const SolverOptions& solver) {
  Rng rng(mix_seed(seed, 0xB2));
  const NonlinearSample sample = gen_nonlinear(dgp, rng);
  const OracleEstimands truth = oracle_estimands(sample.true_b0, sample.true_b1, d_true);
  return project_and_score(sample.data, fit, assumed_rule, truth.tau, truth.acrr,
                           mix_seed(seed, 0xF2), solver);
}

double bivariate_normal_upper_orthant(double a, double b, double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::invalid_argument("bivariate_normal_upper_orthant: |rho| must be < 1");
  // Integrate Pr(Z2 >= b | Z1 = z) phi(z) over z >= a on a wide panel.
  const double rho_c = std::sqrt(1.0 - rho * rho);
  const double hi = std::max(a, 0.0) + 10.0;
  const QuadratureRule panel = gauss_legendre(256, a, hi);
  double acc = 0.0;
  for (std::size_t k = 0; k < panel.size(); ++k) {
    const double z = panel.nodes[k];
    acc += panel.weights[k] * norm_pdf(z) * norm_cdf((rho * z - b) / rho_c);
  }
  return acc;
}

}  // namespace bartsens
