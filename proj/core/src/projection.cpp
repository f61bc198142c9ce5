#include "bartsens/projection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "bartsens/dataset.hpp"
#include "bartsens/nelder_mead.hpp"

namespace bartsens {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p, bool& clamped) {
  if (p < kProbFloor) {
    clamped = true;
    return kProbFloor;
  }
  if (p > 1.0 - kProbFloor) {
    clamped = true;
    return 1.0 - kProbFloor;
  }
  return p;
}

struct ProbitTargets {
  double z11, z10, z01;  // probit-scale targets for the three cells
};

ProbitTargets probit_targets(const CellTargets& targets) {
  bool clamped = false;
  ProbitTargets z{norm_quantile(clamp_prob(targets.b1g1, clamped)),
                  norm_quantile(clamp_prob(targets.b1g0, clamped)),
                  norm_quantile(clamp_prob(targets.b0g1, clamped))};
  if (clamped)
    emit_warning("projection: target cell probability clamped to [1e-12, 1-1e-12]");
  return z;
}

double objective_impl(double b0, double b1, double g, const ProbitTargets& z,
                      const QuadratureRule& rule) {
  const double m11 = marginal_pair(rule, g, b1, PairMode::BothPositive);
  const double m10 = marginal_pair(rule, g, b0, PairMode::FirstComplement);
  const double m01 = marginal_pair(rule, g, b1, PairMode::SecondComplement);
  bool ignored = false;
  const double r1 = z.z11 - norm_quantile(clamp_prob(m11, ignored));
  const double r2 = z.z10 - norm_quantile(clamp_prob(m10, ignored));
  const double r3 = z.z01 - norm_quantile(clamp_prob(m01, ignored));
  return r1 * r1 + r2 * r2 + r3 * r3;
}

// Observed conditionals implied by the cells, for the no-confounding start.
void observed_conditionals(const CellTargets& t, double& pG, double& pB1, double& pB0) {
  bool ignored = false;
  pG = clamp_prob(t.b1g1 + t.b0g1, ignored);
  pB1 = clamp_prob(t.b1g1 / pG, ignored);
  pB0 = clamp_prob(t.b1g0 / std::max(1.0 - pG, kProbFloor), ignored);
}

}  // namespace

double objective(double b0, double b1, double g, const CellTargets& targets,
                 const QuadratureRule& rule) {
  return objective_impl(b0, b1, g, probit_targets(targets), rule);
}

Estimands estimands(double b0, double b1, const QuadratureRule& rule) {
  if (b1 < b0) throw std::invalid_argument("estimands: requires b1 >= b0");
  Estimands e;
  e.p_do0 = marginal_single(rule, b0);
  e.p_do1 = marginal_single(rule, b1);
  e.delta = e.p_do1 - e.p_do0;
  if (e.p_do0 < 1e-300) {
    e.tau = std::numeric_limits<double>::infinity();
    e.tau_overflow = true;
  } else {
    e.tau = e.p_do1 / e.p_do0;
  }
  return e;
}

StructuralSolution solve_structural(const CellTargets& targets, const QuadratureRule& rule,
                                    const SolverOptions& options, std::uint64_t jitter_key,
                                    std::optional<std::array<double, 3>> init) {
  const ProbitTargets z = probit_targets(targets);
  double z_b0, z_b1, z_g;
  if (init) {
    z_b0 = (*init)[0];
    z_b1 = (*init)[1];
    z_g = (*init)[2];
  } else {
    double pG, pB1, pB0;
    observed_conditionals(targets, pG, pB1, pB0);
    z_b0 = norm_quantile(pB0);
    z_b1 = norm_quantile(pB1);
    z_g = norm_quantile(pG);
  }

  auto f = [&](const std::vector<double>& x) {
    const double b0 = x[0];
    const double b1 = b0 + x[1] * x[1];
    return objective_impl(b0, b1, x[2], z, rule);
  };

  NelderMeadOptions nm;
  nm.simplex_tolerance = options.simplex_tolerance;
  nm.objective_tolerance = options.objective_tolerance;
  nm.max_iterations = options.max_iterations;
  nm.initial_step = 0.25;

  const std::vector<double> base_start{z_b0, std::sqrt(std::max(z_b1 - z_b0, 0.0)), z_g};
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    std::vector<double> start = base_start;
    if (attempt > 0) {
      Rng jitter(mix_seed(jitter_key, static_cast<std::uint64_t>(attempt)));
      for (double& v : start) v += 0.5 * (jitter.uniform() - 0.5) * attempt;
    }
    NelderMeadResult r = nelder_mead(f, start, nm);
    if (r.value < best.value || (r.converged && !best.converged)) best = r;
    if (best.converged) break;
  }

  StructuralSolution s;
  s.b0 = best.x[0];
  s.b1 = best.x[0] + best.x[1] * best.x[1];
  s.g = best.x[2];
  s.converged = best.converged;
  s.objective_value = best.value;
  const Estimands e = estimands(s.b0, s.b1, rule);
  s.p_do0 = e.p_do0;
  s.p_do1 = e.p_do1;
  s.tau = e.tau;
  s.delta = e.delta;
  s.tau_overflow = e.tau_overflow;
  return s;
}

AggregateSummary aggregate(std::span<const StructuralSolution> solutions,
                           std::span<const std::int8_t> G, std::span<const int> subset) {
  if (subset.empty()) throw std::invalid_argument("aggregate: empty subset");
  AggregateSummary out;
  double tau_all = 0.0, delta_all = 0.0, tau_t = 0.0, tau_c = 0.0;
  int n_t = 0, n_c = 0;
  for (int i : subset) {
    tau_all += solutions[i].tau;
    delta_all += solutions[i].delta;
    if (G[i] == 1) {
      tau_t += solutions[i].tau;
      ++n_t;
    } else {
      tau_c += solutions[i].tau;
      ++n_c;
    }
  }
  const double n = static_cast<double>(subset.size());
  out.acrr = tau_all / n;
  out.mean_delta = delta_all / n;
  out.acrr_treated = n_t > 0 ? tau_t / n_t : std::numeric_limits<double>::quiet_NaN();
  out.acrr_controls = n_c > 0 ? tau_c / n_c : std::numeric_limits<double>::quiet_NaN();
  return out;
}

namespace {

// Deterministic slot-parallel map over [0, count).
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2 * threads) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<DensityPosterior> project_posterior(const ReducedFormDraws& draws,
                                                const SensitivitySpec& spec) {
  if (spec.densities.empty())
    throw std::invalid_argument("project_posterior: sensitivity spec lists no densities");
  const int n = draws.n;

  // Subsample of stored draws, fixed across densities.
  std::vector<int> draw_ids;
  if (spec.mode == ProjectionMode::PerDraw) {
    const int want = std::min(spec.subsample_draws, draws.stored_draws);
    std::vector<int> all(draws.stored_draws);
    std::iota(all.begin(), all.end(), 0);
    Rng rng(mix_seed(spec.seed, 0xD0));
    for (int k = 0; k < want; ++k) {
      const int j = k + rng.uniform_int(draws.stored_draws - k);
      std::swap(all[k], all[j]);
    }
    draw_ids.assign(all.begin(), all.begin() + want);
    std::sort(draw_ids.begin(), draw_ids.end());
  }

  std::vector<DensityPosterior> result;
  for (std::size_t di = 0; di < spec.densities.size(); ++di) {
    const ConfounderDensity& density = spec.densities[di];
    const QuadratureRule rule = quadrature(density, spec.solver.quadrature_nodes);

    DensityPosterior post;
    post.label = density.label();
    post.tau_mean_by_obs.assign(n, 0.0);
    post.delta_mean_by_obs.assign(n, 0.0);
    post.pdo0_mean_by_obs.assign(n, 0.0);

    const int n_draws = spec.mode == ProjectionMode::PerDraw
                            ? static_cast<int>(draw_ids.size())
                            : 1;
    post.projected_draws = n_draws;
    post.acrr_by_draw.assign(n_draws, 0.0);
    post.delta_by_draw.assign(n_draws, 0.0);
    if (spec.keep_draw_matrix) {
      post.tau_by_draw.assign(static_cast<std::size_t>(n_draws) * n, 0.0);
      post.delta_by_draw_by_obs.assign(static_cast<std::size_t>(n_draws) * n, 0.0);
      post.pdo0_by_draw_by_obs.assign(static_cast<std::size_t>(n_draws) * n, 0.0);
    }

    std::atomic<long long> nonconverged{0};
    for (int d = 0; d < n_draws; ++d) {
      std::vector<double> tau_row(n), delta_row(n), pdo0_row(n);
      parallel_for(n, spec.threads, [&](int i) {
        double pG, pB1, pB0;
        if (spec.mode == ProjectionMode::PerDraw) {
          const int draw = draw_ids[d];
          pG = draws.pG(draw, i);
          pB1 = draws.pB1(draw, i);
          pB0 = draws.pB0(draw, i);
        } else {
          pG = draws.mean_pG[i];
          pB1 = draws.mean_pB1[i];
          pB0 = draws.mean_pB0[i];
        }
        const CellProbabilities cells = cell_probabilities(pG, pB1, pB0);
        const CellTargets targets{cells.b1g1, cells.b1g0, cells.b0g1};
        const StructuralSolution s = solve_structural(
            targets, rule, spec.solver,
            mix_seed(spec.seed, (static_cast<std::uint64_t>(d) << 32) | static_cast<std::uint32_t>(i)));
        if (!s.converged) nonconverged.fetch_add(1);
        tau_row[i] = s.tau;
        delta_row[i] = s.delta;
        pdo0_row[i] = s.p_do0;
      });
      double tau_acc = 0.0, delta_acc = 0.0;
      for (int i = 0; i < n; ++i) {
        tau_acc += tau_row[i];
        delta_acc += delta_row[i];
        post.tau_mean_by_obs[i] += tau_row[i];
        post.delta_mean_by_obs[i] += delta_row[i];
        post.pdo0_mean_by_obs[i] += pdo0_row[i];
      }
      post.acrr_by_draw[d] = tau_acc / n;
      post.delta_by_draw[d] = delta_acc / n;
      if (spec.keep_draw_matrix) {
        std::copy(tau_row.begin(), tau_row.end(),
                  post.tau_by_draw.begin() + static_cast<std::size_t>(d) * n);
        std::copy(delta_row.begin(), delta_row.end(),
                  post.delta_by_draw_by_obs.begin() + static_cast<std::size_t>(d) * n);
        std::copy(pdo0_row.begin(), pdo0_row.end(),
                  post.pdo0_by_draw_by_obs.begin() + static_cast<std::size_t>(d) * n);
      }
    }

    for (int i = 0; i < n; ++i) {
      post.tau_mean_by_obs[i] /= n_draws;
      post.delta_mean_by_obs[i] /= n_draws;
      post.pdo0_mean_by_obs[i] /= n_draws;
    }
    post.acrr_mean = mean(post.acrr_by_draw);
    post.delta_mean = mean(post.delta_by_draw);
    post.acrr_lo = quantile(post.acrr_by_draw, 0.025);
    post.acrr_hi = quantile(post.acrr_by_draw, 0.975);
    post.delta_lo = quantile(post.delta_by_draw, 0.025);
    post.delta_hi = quantile(post.delta_by_draw, 0.975);
    post.nonconverged_fraction =
        static_cast<double>(nonconverged.load()) / (static_cast<double>(n_draws) * n);
    result.push_back(std::move(post));
  }
  return result;
}

void write_sensitivity_csv(const std::string& path,
                           const std::vector<DensityPosterior>& posteriors,
                           std::uint64_t seed) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : posteriors) {
    rows.push_back({p.label, format_double(p.acrr_mean), format_double(p.acrr_lo),
                    format_double(p.acrr_hi), format_double(p.delta_mean),
                    format_double(p.delta_lo), format_double(p.delta_hi),
                    format_double(p.nonconverged_fraction)});
  }
  write_csv(path,
            {"density", "acrr_mean", "acrr_q025", "acrr_q975", "delta_mean", "delta_q025",
             "delta_q975", "nonconverged_fraction"},
            rows, {"seed=" + std::to_string(seed)});
}

}  // namespace bartsens
