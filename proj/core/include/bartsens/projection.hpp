#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bartsens/densities.hpp"
#include "bartsens/reduced_form.hpp"

namespace bartsens {

/// Observed joint cells (Pr(B=1,G=1), Pr(B=1,G=0), Pr(B=0,G=1)) that the
/// structural parameters must reproduce under the chosen f(u).
struct CellTargets {
  double b1g1 = 0.0;
  double b1g0 = 0.0;
  double b0g1 = 0.0;
};

/// Probit-scale squared residual between target cells and model cells: the
/// model cells are the marginal-pair integrals of (g, b1, b0) against f.
/// Targets at exactly 0 or 1 are clamped to [1e-12, 1-1e-12] with a warning.
double objective(double b0, double b1, double g, const CellTargets& targets,
                 const QuadratureRule& rule);

struct SolverOptions {
  int quadrature_nodes = 64;
  double simplex_tolerance = 1e-8;
  double objective_tolerance = 1e-12;
  int max_iterations = 2000;
  int max_restarts = 3;
};

struct Estimands {
  double p_do0 = 0.0;
  double p_do1 = 0.0;
  double tau = 1.0;
  double delta = 0.0;
  bool tau_overflow = false;  // p_do0 underflowed; tau is +inf
};

/// Intervention probabilities and causal contrasts for given structural
/// outcome levels (requires b1 >= b0, so tau >= 1 and delta >= 0).
Estimands estimands(double b0, double b1, const QuadratureRule& rule);

struct StructuralSolution {
  double b0 = 0.0;
  double b1 = 0.0;
  double g = 0.0;
  double p_do0 = 0.0;
  double p_do1 = 0.0;
  double tau = 1.0;
  double delta = 0.0;
  bool converged = false;
  bool tau_overflow = false;
  double objective_value = 0.0;
};

/// Nelder-Mead over (b0, delta, g) with b1 = b0 + delta^2, so the constraint
/// b1 >= b0 holds by parameterization. Starts from init = (b0, b1, g) when
/// given, else from the no-confounding closed form; up to max_restarts
/// deterministic jittered restarts on non-convergence (jitter keyed by
/// jitter_key so parallel schedules cannot change results). Non-converged
/// entries are flagged but still carry the best point found.
StructuralSolution solve_structural(const CellTargets& targets, const QuadratureRule& rule,
                                    const SolverOptions& options = {},
                                    std::uint64_t jitter_key = 0,
                                    std::optional<std::array<double, 3>> init = {});

struct AggregateSummary {
  double acrr = 0.0;           // mean tau over the subset
  double mean_delta = 0.0;
  double acrr_treated = 0.0;   // mean tau over subset rows with G=1 (NaN if none)
  double acrr_controls = 0.0;  // mean tau over subset rows with G=0 (NaN if none)
};

/// Plain means over the subset rows; throws on an empty subset.
AggregateSummary aggregate(std::span<const StructuralSolution> solutions,
                           std::span<const std::int8_t> G, std::span<const int> subset);

enum class ProjectionMode { PerDraw, MeanOnly };

struct SensitivitySpec {
  std::vector<ConfounderDensity> densities;
  SolverOptions solver;
  ProjectionMode mode = ProjectionMode::PerDraw;
  int subsample_draws = 500;  // per-draw mode: posterior draws to project
  std::uint64_t seed = 1;     // subsample selection
  int threads = 1;
  bool keep_draw_matrix = false;  // retain per-draw per-observation estimands
};

/// Posterior of the causal summaries under one density.
struct DensityPosterior {
  std::string label;
  double acrr_mean = 0.0, acrr_lo = 0.0, acrr_hi = 0.0;
  double delta_mean = 0.0, delta_lo = 0.0, delta_hi = 0.0;
  double nonconverged_fraction = 0.0;
  std::vector<double> tau_mean_by_obs;
  std::vector<double> delta_mean_by_obs;
  std::vector<double> pdo0_mean_by_obs;
  std::vector<double> acrr_by_draw;
  std::vector<double> delta_by_draw;
  // Only filled when keep_draw_matrix is set: draws x n, draw-major.
  std::vector<double> tau_by_draw;
  std::vector<double> delta_by_draw_by_obs;
  std::vector<double> pdo0_by_draw_by_obs;
  int projected_draws = 0;
};

/// Project reduced-form draws through each density of the spec. Per-draw
/// mode solves for a deterministic random subsample of the stored posterior
/// draws; mean-only mode solves once at the posterior-mean probabilities.
/// Intervals are 2.5%/97.5% empirical quantiles over projected draws
/// (degenerate at the point estimate in mean-only mode).
std::vector<DensityPosterior> project_posterior(const ReducedFormDraws& draws,
                                                const SensitivitySpec& spec);

/// CSV rows for the sensitivity table: density label, ACRR mean and
/// interval, risk-difference mean and interval, non-convergence fraction.
void write_sensitivity_csv(const std::string& path,
                           const std::vector<DensityPosterior>& posteriors,
                           std::uint64_t seed);

}  // namespace bartsens
