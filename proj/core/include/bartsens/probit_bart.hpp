#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "bartsens/matrix.hpp"
#include "bartsens/rng.hpp"

namespace bartsens {

/// Warnings from fit routines (constant responses, empty arms, ...) go
/// through this handler; the default writes to stderr.
void set_warning_handler(std::function<void(std::string_view)> handler);
void emit_warning(std::string_view message);

struct BartConfig {
  int tree_count = 100;
  double split_base = 0.95;    // prior probability of splitting the root
  double split_power = 2.0;    // depth penalty exponent
  double leaf_scale_k = 2.0;   // leaf prior sd is 0.5 / (k sqrt(tree_count))
  int cutpoint_count = 1000;
  int burn_in = 2000;
  int kept_draws = 2000;
  int min_leaf_obs = 5;
  int stored_draw_stride = 1;  // materialize every stride-th kept draw
  double init_fit = 0.0;       // starting value of the sum-of-trees fit

  double leaf_sd() const;
  void validate() const;  // throws std::invalid_argument on range violations
};

/// Per-variable candidate split values, spaced uniformly over the observed
/// range. Constant columns keep a single degenerate cutpoint and are never
/// proposed for splits.
struct CutpointGrid {
  std::vector<std::vector<double>> cuts;
  std::vector<int> splittable;  // variable indices with at least one usable cutpoint
};

CutpointGrid build_cutpoints(const Matrix& X, int n_cut);

struct TreeNode {
  int var = -1;
  int cut = -1;  // index into CutpointGrid.cuts[var]
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool is_leaf() const { return left < 0; }
};

/// Binary regression tree over cutpoint-grid split rules. Node slots are
/// recycled through a free list so indices stay stable across moves.
class DecisionTree {
 public:
  DecisionTree();

  const TreeNode& node(int idx) const { return nodes_[idx]; }
  TreeNode& node(int idx) { return nodes_[idx]; }
  int root() const { return 0; }

  int leaf_count() const;
  int internal_count() const;
  int depth_of(int idx) const;

  std::vector<int> leaves() const;
  std::vector<int> internal_nodes() const;
  std::vector<int> nog_nodes() const;  // internal nodes whose children are both leaves

  /// Ties route left: x[var] <= cut value goes to the left child.
  int route(std::span<const double> row, const CutpointGrid& grid) const;
  double evaluate(std::span<const double> row, const CutpointGrid& grid) const;

  void grow(int leaf, int var, int cut);
  void prune(int nog);
  void change(int internal, int var, int cut);

  /// Leaves of the subtree rooted at idx.
  void collect_leaves(int idx, std::vector<int>& out) const;

 private:
  int allocate();
  std::vector<TreeNode> nodes_;
  std::vector<int> parent_;
  std::vector<int> free_;
};

/// Log prior probability of the tree topology: split probability at depth d
/// is split_base * (1 + d)^(-split_power).
double log_tree_prior(const DecisionTree& tree, const BartConfig& config);

/// Albert-Chib latent draw: Z_i ~ N(fit_i, 1) truncated to (0, inf) when
/// y_i = 1 and to (-inf, 0] when y_i = 0.
std::vector<double> sample_latent(std::span<const std::int8_t> y, std::span<const double> fit,
                                  Rng& rng);

struct TreeUpdateOptions {
  double p_grow = 0.25;
  double p_prune = 0.25;  // remainder is CHANGE
  bool flatten_likelihood = false;  // calibration hook: explore the prior alone
};

/// One Metropolis-Hastings structural move on a single tree against residual
/// targets (latent response minus the fit of all other trees), using the
/// closed-form marginal likelihood of the conjugate N(0, leaf_sd^2) leaf
/// prior with unit noise. Rejected proposals leave tree and assignment
/// untouched. Returns whether the proposal was accepted.
bool update_tree(DecisionTree& tree, std::vector<int>& leaf_assignment, const Matrix& X,
                 std::span<const double> residuals, const CutpointGrid& grid,
                 const BartConfig& config, Rng& rng, const TreeUpdateOptions& options = {});

/// Conjugate draw of every leaf value given residual targets.
void draw_leaf_values(DecisionTree& tree, std::span<const int> leaf_assignment,
                      std::span<const double> residuals, double leaf_sd, Rng& rng);

/// Posterior draws of Pr(y=1 | x) = Phi(offset + t(x)) at requested rows.
struct ProbitFitDraws {
  int row_count = 0;
  int kept_draws = 0;    // total kept iterations
  int stored_draws = 0;  // draws materialized in draw_prob
  int stride = 1;
  std::vector<double> mean_prob;  // posterior mean over all kept draws
  std::vector<double> draw_prob;  // stored_draws x row_count, draw-major

  double prob(int stored_draw, int row) const {
    return draw_prob[static_cast<std::size_t>(stored_draw) * row_count + row];
  }

  // Full kept-length chains for a monitored subset of rows, for MCMC
  // diagnostics; empty unless monitor rows were requested.
  std::vector<int> monitor_rows;
  std::vector<double> monitor_prob;  // kept_draws x monitor_rows.size()
  double monitored(int draw, int m) const {
    return monitor_prob[static_cast<std::size_t>(draw) * monitor_rows.size() + m];
  }
};

/// One probit BART Markov chain. The response vector is passed to each sweep
/// so callers may re-augment it between sweeps (as the monotone sampler
/// does). Tracks fits at the training rows and, optionally, at a separate
/// set of prediction rows.
class ProbitBartSampler {
 public:
  ProbitBartSampler(Matrix X_train, const CutpointGrid& grid, const BartConfig& config,
                    double offset, std::uint64_t seed, Matrix X_pred = {});
  ~ProbitBartSampler();
  ProbitBartSampler(ProbitBartSampler&&) noexcept;
  ProbitBartSampler& operator=(ProbitBartSampler&&) noexcept;

  void sweep(std::span<const std::int8_t> y);

  std::span<const double> train_fit() const;  // offset + t(x) at training rows
  std::span<const double> pred_fit() const;   // offset + t(x) at prediction rows
  double offset() const;
  int train_rows() const;
  int pred_rows() const;
  double acceptance_rate() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Full probit BART fit: Gibbs cycle of latent draw plus per-tree moves and
/// conjugate leaf draws; draws kept after burn-in. Emits a warning when the
/// response is constant. Predictions are reported at predict_rows, or at the
/// training rows when predict_rows is empty.
ProbitFitDraws fit_probit_bart(const Matrix& X, std::span<const std::int8_t> y,
                               const BartConfig& config, const Matrix& predict_rows,
                               std::uint64_t seed, std::span<const int> monitor_rows = {});

}  // namespace bartsens
