#pragma once

#include <span>
#include <string>
#include <vector>

namespace bartsens {

struct EssResult {
  double n_eff = 0.0;
  bool defined = true;  // false for a constant chain
};

/// Effective sample size n / (1 + 2 sum rho_t), autocorrelations summed with
/// initial-positive-sequence truncation (stop before the first negative
/// adjacent pair). Requires length >= 100.
EssResult ess(std::span<const double> chain);

struct GewekeResult {
  double z = 0.0;
  double prob = 0.5;    // Phi(z)
  bool defined = true;  // false when a segment has zero batch-mean variance
};

/// Mean-equality z between the first and last chain segments, segment-mean
/// variances estimated by batch means with 20 batches per segment. Requires
/// length >= 100.
GewekeResult geweke(std::span<const double> chain, double first_frac = 0.1,
                    double last_frac = 0.5);

struct ChainDiagnostics {
  std::string quantity;
  double n_eff_ratio = 0.0;  // n_eff / chain length
  double geweke_z = 0.0;
  double geweke_prob = 0.0;
  bool defined = true;
};

ChainDiagnostics diagnose_chain(std::string quantity, std::span<const double> chain);

}  // namespace bartsens
