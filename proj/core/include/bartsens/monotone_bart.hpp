#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

#include "bartsens/probit_bart.hpp"

namespace bartsens {

/// Chained-outcome sampler enforcing Pr(B=1|G=1,x) >= Pr(B=1|G=0,x) for all x
/// via the parameterization
///   Pr(B=1|G=1,x) = Phi(h1(x)),
///   Pr(B=1|G=0,x) = Phi(h0(x)) Phi(h1(x)),
/// with binary latents (R0, R1) in the G=0 arm so that both h0 and h1 are
/// updated by standard probit BART steps.

/// Probabilities of the three admissible (R0,R1) cells -- (0,0), (1,0),
/// (0,1) -- given B=0, G=0, with p0 = Phi(h0 fit), p1 = Phi(h1 fit).
std::array<double, 3> r_cell_probabilities(double p0, double p1);

/// Draw (R0, R1) for a B=0, G=0 observation.
std::pair<int, int> sample_R(double h0_fit, double h1_fit, Rng& rng);

/// Outcome-model likelihood of the observed (B, G) given fits.
double outcome_likelihood(std::span<const std::int8_t> G, std::span<const std::int8_t> B,
                          std::span<const double> h0_fit, std::span<const double> h1_fit);

/// Augmented likelihood for one complete (R0, R1) configuration; zero when
/// the configuration is inconsistent with the data (B != R0 R1 in the G=0
/// arm).
double augmented_likelihood(std::span<const std::int8_t> G, std::span<const std::int8_t> B,
                            std::span<const std::int8_t> R0, std::span<const std::int8_t> R1,
                            std::span<const double> h0_fit, std::span<const double> h1_fit);

struct MonotoneFitDraws {
  ProbitFitDraws pB1;  // Pr(B=1|G=1,x)
  ProbitFitDraws pB0;  // Pr(B=1|G=0,x); pB0 <= pB1 draw by draw, row by row
};

/// Fit the monotone outcome model. Per sweep: (i) refresh (R0,R1) for all
/// B=0,G=0 rows from the current fits, (ii) probit BART step for h1 against
/// {B_i : G_i=1} plus the current-sweep {R1_i : G_i=0}, (iii) probit BART
/// step for h0 against {R0_i : G_i=0} on the G=0 rows only. h0 trains on the
/// G=0 arm but predicts everywhere; its cutpoint grid is built from all
/// rows. Throws when the G=1 arm is empty (h1 unidentified in-arm); warns
/// when the G=0 arm is empty, in which case the step reduces to plain probit
/// BART on h1.
MonotoneFitDraws fit_monotone(const Matrix& X, std::span<const std::int8_t> G,
                              std::span<const std::int8_t> B, const BartConfig& config,
                              const Matrix& predict_rows, std::uint64_t seed,
                              std::span<const int> monitor_rows = {});

}  // namespace bartsens
