#include "bartsens/evalue.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bartsens/dataset.hpp"

namespace bartsens {

double evalue(double rr_obs, bool* inverted) {
  if (!(rr_obs > 0.0)) throw std::domain_error("evalue: risk ratio must be positive");
  bool flipped = false;
  if (rr_obs < 1.0) {
    rr_obs = 1.0 / rr_obs;
    flipped = true;
  }
  if (inverted) *inverted = flipped;
  return rr_obs + std::sqrt(rr_obs * (rr_obs - 1.0));
}

double bound_threshold(double rr_obs, double rr_true) {
  if (!(rr_true >= 1.0)) throw std::domain_error("bound_threshold: rr_true must be >= 1");
  if (rr_true > rr_obs)
    throw std::domain_error("bound_threshold: rr_true must not exceed rr_obs");
  return (rr_obs + std::sqrt(rr_obs * (rr_obs - rr_true))) / rr_true;
}

std::vector<EvalueRow> compare(const ReducedFormDraws& draws,
                               std::span<const double> tau_mean_by_obs) {
  if (!tau_mean_by_obs.empty() && static_cast<int>(tau_mean_by_obs.size()) != draws.n)
    throw std::invalid_argument("evalue compare: tau vector length must match draws");
  std::vector<EvalueRow> rows;
  rows.reserve(draws.n);
  for (int i = 0; i < draws.n; ++i) {
    EvalueRow row;
    row.obs = i;
    if (!draws.labels.empty()) row.label = draws.labels[i];
    row.rr_obs = draws.mean_pB1[i] / draws.mean_pB0[i];
    row.evalue = evalue(row.rr_obs, &row.inverted);
    row.tau_mean = tau_mean_by_obs.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : tau_mean_by_obs[i];
    rows.push_back(row);
  }
  return rows;
}

void write_evalue_csv(const std::string& path, const std::vector<EvalueRow>& rows,
                      std::uint64_t seed) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.obs), r.label, format_double(r.rr_obs),
                     format_double(r.evalue), format_double(r.tau_mean),
                     r.inverted ? "1" : "0"});
  }
  write_csv(path, {"obs", "label", "rr_obs", "evalue", "tau_mean", "inverted"}, cells,
            {"seed=" + std::to_string(seed)});
}

}  // namespace bartsens
