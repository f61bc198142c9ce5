#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bartsens/dataset.hpp"
#include "bartsens/densities.hpp"
#include "bartsens/probit_bart.hpp"
#include "bartsens/projection.hpp"

namespace bartsens {

/// Linear DGP with correlated latent utilities: the treatment utility has
/// mean beta0 + beta1 * sum(x), the outcome utility mean alpha0 + alpha1 *
/// sum(x), unit variances and correlation rho; G = 1{Z_g >= 0} and
/// B = 1{Z_b >= -gamma G}. gamma shifts the bankruptcy threshold for
/// treated rows, so the true per-row risk ratio is
/// Phi(gamma + alpha0 + alpha1 s) / Phi(alpha0 + alpha1 s).
struct BivariateProbitConfig {
  int n = 25000;
  int covariate_count = 5;  // iid Uniform(-1, 1)
  double beta0 = 0.0;
  double beta1 = -0.2;
  double alpha0 = -0.5;
  // Outcome slope chosen so the sample-average true risk ratio is 2.91 /
  // 5.37 / 8.39 at gamma = 1 / 1.75 / 2.5.
  double alpha1 = -0.7;
  double rho = 0.25;
  double gamma = 1.0;
};

struct BivariateProbitSample {
  ObservationSet data;
  std::vector<double> true_tau;  // per row, analytic
};

BivariateProbitSample gen_bivariate_probit(const BivariateProbitConfig& config, Rng& rng);

/// Implied sd of the confounder density reproducing the bivariate probit:
/// sqrt(rho / (1 - rho)).
double implied_confounder_sd(double rho);

/// Nonlinear DGP: b0 = x5 + x1 sin(2 x6) - 1.75, b1 = b0 + 1.5,
/// g = 0.5 b0 + x2 + 0.25, u ~ N(mu, sd^2); covariates Uniform(-1,1) with
/// extra noise coordinates that never enter the functions. Indices here are
/// 1-based over a 10-column matrix by default (actives 1, 2, 5, 6).
struct NonlinearDGPConfig {
  int n = 25000;
  int covariate_count = 10;
  double confounder_mean = 0.0;
  double confounder_sd = 1.0;
};

struct NonlinearSample {
  ObservationSet data;
  std::vector<double> true_b0, true_b1, true_g;  // per row
};

NonlinearSample gen_nonlinear(const NonlinearDGPConfig& config, Rng& rng);

struct OracleEstimands {
  std::vector<double> tau;
  std::vector<double> delta;
  double acrr = 0.0;
};

/// Ground-truth estimands by quadrature of the true structural levels
/// against the generating density.
OracleEstimands oracle_estimands(std::span<const double> true_b0, std::span<const double> true_b1,
                                 const ConfounderDensity& d_true);
OracleEstimands oracle_estimands(std::span<const double> true_b0, std::span<const double> true_b1,
                                 const QuadratureRule& rule);

/// Quadrature rule for a Laplace(location, scale) assumed-f. Only used to
/// probe mis-specification of f; not part of the density config surface.
QuadratureRule laplace_rule(double location, double scale, int nodes_per_side = 128);

struct RecoveryReport {
  double acrr_true = 0.0;
  double acrr_est = 0.0;
  double icrr_correlation = 0.0;
  double icrr_rmse = 0.0;
  double nonconverged_fraction = 0.0;
};

/// Full-pipeline recovery on the bivariate probit DGP: fit the reduced form
/// (monotone outcome + treatment model), project the posterior-mean
/// probabilities through the assumed density, and compare to the analytic
/// per-row truth.
RecoveryReport bivariate_recovery_experiment(const BivariateProbitConfig& dgp,
                                             const BartConfig& fit,
                                             const ConfounderDensity& d_assumed,
                                             std::uint64_t seed,
                                             const SolverOptions& solver = {});

/// Same pipeline on the nonlinear DGP with an arbitrary assumed-f rule
/// (Gaussian, sharkfin, mixture, or Laplace).
RecoveryReport nonlinear_recovery_experiment(const NonlinearDGPConfig& dgp, const BartConfig& fit,
                                             const QuadratureRule& assumed_rule,
                                             const ConfounderDensity& d_true, std::uint64_t seed,
                                             const SolverOptions& solver = {});

/// Pr(Z1 >= a, Z2 >= b) for standard bivariate normal with correlation rho,
/// by one-dimensional quadrature. Used as the cell-frequency oracle for the
/// generator.
double bivariate_normal_upper_orthant(double a, double b, double rho);

}  // namespace bartsens
