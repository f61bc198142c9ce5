#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bartsens/dataset.hpp"
#include "bartsens/monotone_bart.hpp"
#include "bartsens/probit_bart.hpp"

namespace bartsens {

struct ReducedFormConfig {
  BartConfig bart;
  int monitor_count = 1000;  // rows with full kept-length chains for diagnostics
  std::uint64_t seed = 1;
};

/// Aligned posterior draws of the treatment probability Pr(G=1|x) and the
/// monotone outcome pair (Pr(B=1|G=1,x), Pr(B=1|G=0,x)). Draw d of each
/// quantity comes from iteration d of its chain after burn-in. This is the
/// modular boundary: projection re-reads this artifact without refitting.
struct ReducedFormDraws {
  int n = 0;
  int kept_draws = 0;
  int stored_draws = 0;
  int stride = 1;
  std::uint64_t seed = 0;
  std::string config_json;
  std::string created;  // wall-clock stamp; excluded from result CSVs

  std::vector<std::int8_t> G, B;
  std::vector<std::string> labels;  // optional row labels

  std::vector<double> mean_pG, mean_pB1, mean_pB0;  // length n, over all kept draws
  std::vector<double> draw_pG, draw_pB1, draw_pB0;  // stored_draws x n, draw-major

  std::vector<int> monitor_rows;
  std::vector<double> monitor_pG, monitor_pB1, monitor_pB0;  // kept_draws x monitor count

  double pG(int d, int i) const { return draw_pG[static_cast<std::size_t>(d) * n + i]; }
  double pB1(int d, int i) const { return draw_pB1[static_cast<std::size_t>(d) * n + i]; }
  double pB0(int d, int i) const { return draw_pB0[static_cast<std::size_t>(d) * n + i]; }
};

/// Independent chains for the treatment and outcome models, seeded from one
/// master seed; draws are assembled index-aligned.
ReducedFormDraws fit_reduced_form(const ObservationSet& data, const ReducedFormConfig& config);

/// Joint cells from one reduced-form triple:
///   Pr(B=1,G=1) = pG * pB1,  Pr(B=1,G=0) = (1-pG) * pB0,
///   Pr(B=0,G=1) = pG * (1-pB1).
struct CellProbabilities {
  double b1g1 = 0.0;
  double b1g0 = 0.0;
  double b0g1 = 0.0;
};
CellProbabilities cell_probabilities(double pG, double pB1, double pB0);

/// Versioned binary artifact (magic bytes + version header). Loading rejects
/// unknown magic or version with a message.
void save_reduced_form(const ReducedFormDraws& draws, const std::string& path);
ReducedFormDraws load_reduced_form(const std::string& path);

}  // namespace bartsens
