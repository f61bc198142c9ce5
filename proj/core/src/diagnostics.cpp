#include "bartsens/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bartsens/math.hpp"

namespace bartsens {

EssResult ess(std::span<const double> chain) {
  const int n = static_cast<int>(chain.size());
  if (n < 100) throw std::invalid_argument("ess: chain length must be >= 100");
  const double m = mean(chain);
  double c0 = 0.0;
  for (double x : chain) c0 += (x - m) * (x - m);
  c0 /= n;
  // Constant chains leave only accumulation dust in c0.
  if (c0 <= 1e-24 * (1.0 + m * m)) return {0.0, false};

  auto autocov = [&](int lag) {
    double acc = 0.0;
    for (int i = 0; i + lag < n; ++i) acc += (chain[i] - m) * (chain[i + lag] - m);
    return acc / n;
  };

  // Sum adjacent-lag pairs while they stay positive (Geyer's initial
  // positive sequence), starting from (rho_1 + rho_2).
  double rho_sum = 0.0;
  for (int lag = 1; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / c0;
    if (pair <= 0.0) break;
    rho_sum += pair;
  }
  const double iact = 1.0 + 2.0 * rho_sum;
  return {static_cast<double>(n) / iact, true};
}

namespace {

// Variance of a segment mean by batch means.
bool batch_mean_variance(std::span<const double> segment, int batches, double& out) {
  const int len = static_cast<int>(segment.size());
  const int batch_len = len / batches;
  if (batch_len < 1) return false;
  std::vector<double> bm(batches);
  for (int b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (int i = 0; i < batch_len; ++i) acc += segment[b * batch_len + i];
    bm[b] = acc / batch_len;
  }
  const double v = variance(bm) * batches / (batches - 1.0);
  if (v == 0.0) return false;
  out = v / batches;
  return true;
}

}  // namespace

GewekeResult geweke(std::span<const double> chain, double first_frac, double last_frac) {
  const int n = static_cast<int>(chain.size());
  if (n < 100) throw std::invalid_argument("geweke: chain length must be >= 100");
  if (!(first_frac > 0.0 && last_frac > 0.0 && first_frac + last_frac <= 1.0))
    throw std::invalid_argument("geweke: segment fractions out of range");

  const int n_first = static_cast<int>(first_frac * n);
  const int n_last = static_cast<int>(last_frac * n);
  std::span<const double> first = chain.subspan(0, n_first);
  std::span<const double> last = chain.subspan(n - n_last, n_last);

  double v_first = 0.0, v_last = 0.0;
  GewekeResult out;
  if (!batch_mean_variance(first, 20, v_first) || !batch_mean_variance(last, 20, v_last)) {
    out.defined = false;
    return out;
  }
  out.z = (mean(first) - mean(last)) / std::sqrt(v_first + v_last);
  out.prob = norm_cdf(out.z);
  return out;
}

ChainDiagnostics diagnose_chain(std::string quantity, std::span<const double> chain) {
  ChainDiagnostics out;
  out.quantity = std::move(quantity);
  const EssResult e = ess(chain);
  const GewekeResult g = geweke(chain);
  out.defined = e.defined && g.defined;
  out.n_eff_ratio = e.defined ? e.n_eff / static_cast<double>(chain.size()) : 0.0;
  out.geweke_z = g.z;
  out.geweke_prob = g.prob;
  return out;
}

}  // namespace bartsens
