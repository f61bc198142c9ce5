#include "bartsens/monotone_bart.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bartsens/math.hpp"

namespace bartsens {

std::array<double, 3> r_cell_probabilities(double p0, double p1) {
  // Cells (0,0), (1,0), (0,1); the (1,1) cell is excluded because B = R0 R1
  // would then be 1.
  const double c00 = (1.0 - p0) * (1.0 - p1);
  const double c10 = p0 * (1.0 - p1);
  const double c01 = (1.0 - p0) * p1;
  const double total = c00 + c10 + c01;
  return {c00 / total, c10 / total, c01 / total};
}

std::pair<int, int> sample_R(double h0_fit, double h1_fit, Rng& rng) {
  const auto cells = r_cell_probabilities(norm_cdf(h0_fit), norm_cdf(h1_fit));
  const double u = rng.uniform();
  if (u < cells[0]) return {0, 0};
  if (u < cells[0] + cells[1]) return {1, 0};
  return {0, 1};
}

double outcome_likelihood(std::span<const std::int8_t> G, std::span<const std::int8_t> B,
                          std::span<const double> h0_fit, std::span<const double> h1_fit) {
  double lik = 1.0;
  for (std::size_t i = 0; i < G.size(); ++i) {
    const double p1 = norm_cdf(h1_fit[i]);
    if (G[i] == 1) {
      lik *= B[i] ? p1 : 1.0 - p1;
    } else {
      const double p = norm_cdf(h0_fit[i]) * p1;
      lik *= B[i] ? p : 1.0 - p;
    }
  }
  return lik;
}

double augmented_likelihood(std::span<const std::int8_t> G, std::span<const std::int8_t> B,
                            std::span<const std::int8_t> R0, std::span<const std::int8_t> R1,
                            std::span<const double> h0_fit, std::span<const double> h1_fit) {
  double lik = 1.0;
  for (std::size_t i = 0; i < G.size(); ++i) {
    const double p1 = norm_cdf(h1_fit[i]);
    if (G[i] == 1) {
      lik *= B[i] ? p1 : 1.0 - p1;
      continue;
    }
    if (B[i] != static_cast<std::int8_t>(R0[i] * R1[i])) return 0.0;
    const double p0 = norm_cdf(h0_fit[i]);
    lik *= (R1[i] ? p1 : 1.0 - p1) * (R0[i] ? p0 : 1.0 - p0);
  }
  return lik;
}

MonotoneFitDraws fit_monotone(const Matrix& X, std::span<const std::int8_t> G,
                              std::span<const std::int8_t> B, const BartConfig& config,
                              const Matrix& predict_rows, std::uint64_t seed,
                              std::span<const int> monitor_rows) {
  config.validate();
  const int n = X.rows;
  if (n == 0) throw std::invalid_argument("fit_monotone: empty covariate matrix");
  if (static_cast<int>(G.size()) != n || static_cast<int>(B.size()) != n)
    throw std::invalid_argument("fit_monotone: G/B length mismatch");
  for (int i = 0; i < n; ++i) {
    if ((G[i] != 0 && G[i] != 1) || (B[i] != 0 && B[i] != 1))
      throw std::invalid_argument("fit_monotone: G and B must be 0/1");
  }

  std::vector<int> g0_rows;
  int n1 = 0;
  for (int i = 0; i < n; ++i) {
    if (G[i] == 0) g0_rows.push_back(i);
    else ++n1;
  }
  if (n1 == 0)
    throw std::invalid_argument(
        "fit_monotone: no G=1 observations; Pr(B=1|G=1,x) is unidentified in-arm");
  if (g0_rows.empty())
    emit_warning("fit_monotone: no G=0 observations; h0 follows its prior");

  const int n0 = static_cast<int>(g0_rows.size());
  const Matrix X0 = X.select_rows(g0_rows);

  // The h0 grid spans all rows so that predictions at G=1 covariate values
  // route through cutpoints covering their range.
  CutpointGrid grid = build_cutpoints(X, config.cutpoint_count);

  double b_mean = 0.0;
  for (int i = 0; i < n; ++i) b_mean += B[i];
  b_mean /= static_cast<double>(n);
  const double offset1 =
      norm_quantile(std::clamp(b_mean, 1.0 / (n + 1.0), n / (n + 1.0)));

  ProbitBartSampler h1(X, grid, config, offset1, mix_seed(seed, 11),
                       predict_rows.rows > 0 ? predict_rows : Matrix{});
  ProbitBartSampler h0(X0, grid, config, 0.0, mix_seed(seed, 12),
                       predict_rows.rows > 0 ? predict_rows : X);
  Rng r_rng(mix_seed(seed, 13));

  const int pred_n = h1.pred_rows();

  // Responses; R0 = R1 = B on the G=0 arm is feasible by construction.
  std::vector<std::int8_t> y1(G.size());
  std::vector<std::int8_t> y0(n0);
  for (int i = 0; i < n; ++i) y1[i] = B[i];
  for (int k = 0; k < n0; ++k) y0[k] = B[g0_rows[k]];

  MonotoneFitDraws out;
  auto init_draws = [&](ProbitFitDraws& d) {
    d.row_count = pred_n;
    d.kept_draws = config.kept_draws;
    d.stride = config.stored_draw_stride;
    d.stored_draws = (config.kept_draws + d.stride - 1) / d.stride;
    d.mean_prob.assign(pred_n, 0.0);
    d.draw_prob.assign(static_cast<std::size_t>(d.stored_draws) * pred_n, 0.0);
    d.monitor_rows.assign(monitor_rows.begin(), monitor_rows.end());
    d.monitor_prob.assign(static_cast<std::size_t>(config.kept_draws) * d.monitor_rows.size(),
                          0.0);
  };
  init_draws(out.pB1);
  init_draws(out.pB0);

  auto one_sweep = [&] {
    // (i) refresh the latent pair where it is not pinned by the data
    std::span<const double> f1 = h1.train_fit();
    std::span<const double> f0 = h0.train_fit();
    for (int k = 0; k < n0; ++k) {
      const int i = g0_rows[k];
      if (B[i] == 1) {
        y0[k] = 1;
        y1[i] = 1;
        continue;
      }
      auto [r0, r1] = sample_R(f0[k], f1[i], r_rng);
      y0[k] = static_cast<std::int8_t>(r0);
      y1[i] = static_cast<std::int8_t>(r1);
    }
    // (ii) then (iii)
    h1.sweep(y1);
    h0.sweep(y0);
  };

  for (int it = 0; it < config.burn_in; ++it) one_sweep();

  int stored = 0;
  for (int it = 0; it < config.kept_draws; ++it) {
    one_sweep();
    std::span<const double> f1 = h1.pred_fit();
    std::span<const double> f0 = h0.pred_fit();
    const bool store = (it % out.pB1.stride == 0);
    double* slot1 = store ? out.pB1.draw_prob.data() + static_cast<std::size_t>(stored) * pred_n
                          : nullptr;
    double* slot0 = store ? out.pB0.draw_prob.data() + static_cast<std::size_t>(stored) * pred_n
                          : nullptr;
    for (int i = 0; i < pred_n; ++i) {
      const double p1 = norm_cdf(f1[i]);
      const double p0 = norm_cdf(f0[i]) * p1;
      out.pB1.mean_prob[i] += p1;
      out.pB0.mean_prob[i] += p0;
      if (store) {
        slot1[i] = p1;
        slot0[i] = p0;
      }
    }
    if (store) ++stored;
    for (std::size_t m = 0; m < out.pB1.monitor_rows.size(); ++m) {
      const int row = out.pB1.monitor_rows[m];
      const double p1 = norm_cdf(f1[row]);
      const std::size_t at = static_cast<std::size_t>(it) * out.pB1.monitor_rows.size() + m;
      out.pB1.monitor_prob[at] = p1;
      out.pB0.monitor_prob[at] = norm_cdf(f0[row]) * p1;
    }
  }
  out.pB1.stored_draws = stored;
  out.pB0.stored_draws = stored;
  const double denom = static_cast<double>(config.kept_draws);
  for (double& p : out.pB1.mean_prob) p /= denom;
  for (double& p : out.pB0.mean_prob) p /= denom;
  return out;
}

}  // namespace bartsens
