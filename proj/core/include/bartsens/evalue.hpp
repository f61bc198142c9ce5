#pragma once

#include <span>
#include <string>
#include <vector>

#include "bartsens/reduced_form.hpp"

namespace bartsens {

/// E-value for an observed risk ratio: rr + sqrt(rr (rr - 1)), the minimum
/// confounding strength (risk-ratio scale, with both treatment and outcome)
/// needed to fully explain the association. Ratios below one are inverted
/// first; the flag records the flip.
double evalue(double rr_obs, bool* inverted = nullptr);

/// Confounding-strength bound for explaining rr_obs down to rr_true:
/// (rr_obs + sqrt(rr_obs (rr_obs - rr_true))) / rr_true. Requires
/// 1 <= rr_true <= rr_obs.
double bound_threshold(double rr_obs, double rr_true);

struct EvalueRow {
  int obs = 0;
  std::string label;
  double rr_obs = 0.0;
  double evalue = 0.0;
  double tau_mean = 0.0;
  bool inverted = false;
};

/// Per-observation comparison table: observed risk ratio from the posterior
/// means, its E-value, and the model-based tau posterior mean (aligned by
/// observation).
std::vector<EvalueRow> compare(const ReducedFormDraws& draws,
                               std::span<const double> tau_mean_by_obs);

void write_evalue_csv(const std::string& path, const std::vector<EvalueRow>& rows,
                      std::uint64_t seed);

}  // namespace bartsens
