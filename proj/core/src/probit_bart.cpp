#include "bartsens/probit_bart.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "bartsens/math.hpp"

namespace bartsens {

namespace {

std::function<void(std::string_view)>& warning_handler() {
  static std::function<void(std::string_view)> handler = [](std::string_view msg) {
    std::cerr << "[bartsens warning] " << msg << "\n";
  };
  return handler;
}

std::mutex warning_mutex;

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  warning_handler() = std::move(handler);
}

void emit_warning(std::string_view message) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  if (warning_handler()) warning_handler()(message);
}

double BartConfig::leaf_sd() const { return 0.5 / (leaf_scale_k * std::sqrt(tree_count)); }

void BartConfig::validate() const {
  if (tree_count < 1) throw std::invalid_argument("BartConfig: tree_count must be >= 1");
  if (!(split_base > 0.0 && split_base < 1.0))
    throw std::invalid_argument("BartConfig: split_base must lie in (0,1)");
  if (split_power < 0.0) throw std::invalid_argument("BartConfig: split_power must be >= 0");
  if (!(leaf_scale_k > 0.0)) throw std::invalid_argument("BartConfig: leaf_scale_k must be > 0");
  if (cutpoint_count < 1) throw std::invalid_argument("BartConfig: cutpoint_count must be >= 1");
  if (burn_in < 0 || kept_draws < 1)
    throw std::invalid_argument("BartConfig: draw counts out of range");
  if (min_leaf_obs < 1) throw std::invalid_argument("BartConfig: min_leaf_obs must be >= 1");
  if (stored_draw_stride < 1)
    throw std::invalid_argument("BartConfig: stored_draw_stride must be >= 1");
}

CutpointGrid build_cutpoints(const Matrix& X, int n_cut) {
  if (X.rows == 0 || X.cols == 0) throw std::invalid_argument("build_cutpoints: empty matrix");
  if (n_cut < 1) throw std::invalid_argument("build_cutpoints: n_cut must be >= 1");
  CutpointGrid grid;
  grid.cuts.resize(X.cols);
  for (int j = 0; j < X.cols; ++j) {
    double lo = X(0, j), hi = X(0, j);
    for (int i = 1; i < X.rows; ++i) {
      lo = std::min(lo, X(i, j));
      hi = std::max(hi, X(i, j));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("build_cutpoints: non-finite covariate entries");
    if (hi <= lo) {
      grid.cuts[j] = {lo};  // degenerate; excluded from split proposals
      continue;
    }
    grid.cuts[j].resize(n_cut);
    for (int k = 0; k < n_cut; ++k)
      grid.cuts[j][k] = lo + (hi - lo) * (k + 1) / static_cast<double>(n_cut + 1);
    grid.splittable.push_back(j);
  }
  return grid;
}

DecisionTree::DecisionTree() {
  nodes_.push_back(TreeNode{});
  parent_.push_back(-1);
}

int DecisionTree::allocate() {
  if (!free_.empty()) {
    int idx = free_.back();
    free_.pop_back();
    nodes_[idx] = TreeNode{};
    parent_[idx] = -1;
    return idx;
  }
  nodes_.push_back(TreeNode{});
  parent_.push_back(-1);
  return static_cast<int>(nodes_.size()) - 1;
}

int DecisionTree::leaf_count() const {
  std::vector<int> l = leaves();
  return static_cast<int>(l.size());
}

int DecisionTree::internal_count() const {
  std::vector<int> v = internal_nodes();
  return static_cast<int>(v.size());
}

int DecisionTree::depth_of(int idx) const {
  int d = 0;
  while (parent_[idx] >= 0) {
    idx = parent_[idx];
    ++d;
  }
  return d;
}

void DecisionTree::collect_leaves(int idx, std::vector<int>& out) const {
  const TreeNode& nd = nodes_[idx];
  if (nd.is_leaf()) {
    out.push_back(idx);
    return;
  }
  collect_leaves(nd.left, out);
  collect_leaves(nd.right, out);
}

std::vector<int> DecisionTree::leaves() const {
  std::vector<int> out;
  collect_leaves(root(), out);
  return out;
}

std::vector<int> DecisionTree::internal_nodes() const {
  std::vector<int> out, stack{root()};
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    const TreeNode& nd = nodes_[idx];
    if (!nd.is_leaf()) {
      out.push_back(idx);
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  return out;
}

std::vector<int> DecisionTree::nog_nodes() const {
  std::vector<int> out;
  for (int idx : internal_nodes()) {
    const TreeNode& nd = nodes_[idx];
    if (nodes_[nd.left].is_leaf() && nodes_[nd.right].is_leaf()) out.push_back(idx);
  }
  return out;
}

int DecisionTree::route(std::span<const double> row, const CutpointGrid& grid) const {
  int idx = root();
  while (!nodes_[idx].is_leaf()) {
    const TreeNode& nd = nodes_[idx];
    idx = row[nd.var] <= grid.cuts[nd.var][nd.cut] ? nd.left : nd.right;
  }
  return idx;
}

double DecisionTree::evaluate(std::span<const double> row, const CutpointGrid& grid) const {
  return nodes_[route(row, grid)].value;
}

void DecisionTree::grow(int leaf, int var, int cut) {
  int l = allocate();
  int r = allocate();
  nodes_[leaf].var = var;
  nodes_[leaf].cut = cut;
  nodes_[leaf].left = l;
  nodes_[leaf].right = r;
  nodes_[leaf].value = 0.0;
  parent_[l] = leaf;
  parent_[r] = leaf;
}

void DecisionTree::prune(int nog) {
  TreeNode& nd = nodes_[nog];
  free_.push_back(nd.left);
  free_.push_back(nd.right);
  nd = TreeNode{};
}

void DecisionTree::change(int internal, int var, int cut) {
  nodes_[internal].var = var;
  nodes_[internal].cut = cut;
}

double log_tree_prior(const DecisionTree& tree, const BartConfig& config) {
  auto p_split = [&](int depth) {
    return config.split_base * std::pow(1.0 + depth, -config.split_power);
  };
  double acc = 0.0;
  for (int idx : tree.internal_nodes()) acc += std::log(p_split(tree.depth_of(idx)));
  for (int idx : tree.leaves()) acc += std::log(1.0 - p_split(tree.depth_of(idx)));
  return acc;
}

std::vector<double> sample_latent(std::span<const std::int8_t> y, std::span<const double> fit,
                                  Rng& rng) {
  if (y.size() != fit.size()) throw std::invalid_argument("sample_latent: length mismatch");
  std::vector<double> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    z[i] = y[i] ? truncated_normal_above(rng, fit[i], 0.0)
                : truncated_normal_below(rng, fit[i], 0.0);
  }
  return z;
}

namespace {

// Log marginal likelihood of one leaf, dropping terms that cancel across any
// fixed partition of the same rows.
double leaf_log_marginal(double n, double sum, double sigma2) {
  double denom = 1.0 + n * sigma2;
  return -0.5 * std::log(denom) + 0.5 * sigma2 * sum * sum / denom;
}

struct LeafStats {
  double count = 0.0;
  double sum = 0.0;
};

}  // namespace

bool update_tree(DecisionTree& tree, std::vector<int>& leaf_assignment, const Matrix& X,
                 std::span<const double> residuals, const CutpointGrid& grid,
                 const BartConfig& config, Rng& rng, const TreeUpdateOptions& options) {
  const int n = X.rows;
  const double sigma2 = config.leaf_sd() * config.leaf_sd();
  const bool flat = options.flatten_likelihood;
  auto p_split = [&](int depth) {
    return config.split_base * std::pow(1.0 + depth, -config.split_power);
  };

  const double u_move = rng.uniform();
  if (u_move < options.p_grow) {
    // GROW
    if (grid.splittable.empty()) return false;
    std::vector<int> leaves = tree.leaves();
    int leaf = leaves[rng.uniform_int(static_cast<int>(leaves.size()))];
    int var = grid.splittable[rng.uniform_int(static_cast<int>(grid.splittable.size()))];
    int cut = rng.uniform_int(static_cast<int>(grid.cuts[var].size()));
    const double cut_value = grid.cuts[var][cut];

    LeafStats left, right;
    for (int i = 0; i < n; ++i) {
      if (leaf_assignment[i] != leaf) continue;
      if (X(i, var) <= cut_value) {
        left.count += 1.0;
        left.sum += residuals[i];
      } else {
        right.count += 1.0;
        right.sum += residuals[i];
      }
    }
    if (left.count < config.min_leaf_obs || right.count < config.min_leaf_obs) return false;

    double log_lik = 0.0;
    if (!flat) {
      log_lik = leaf_log_marginal(left.count, left.sum, sigma2) +
                leaf_log_marginal(right.count, right.sum, sigma2) -
                leaf_log_marginal(left.count + right.count, left.sum + right.sum, sigma2);
    }
    const int depth = tree.depth_of(leaf);
    const double log_prior = std::log(p_split(depth)) + 2.0 * std::log(1.0 - p_split(depth + 1)) -
                             std::log(1.0 - p_split(depth));

    // A grown leaf becomes a no-grandchild node; its parent stops being one
    // if it was.
    int nog_after = static_cast<int>(tree.nog_nodes().size()) + 1;
    for (int nog : tree.nog_nodes()) {
      const TreeNode& nd = tree.node(nog);
      if (nd.left == leaf || nd.right == leaf) {
        --nog_after;
        break;
      }
    }
    // The new rule's prior mass 1/(vars * cuts) cancels against the
    // proposal's rule choice, so neither appears here.
    const double log_proposal =
        std::log(options.p_prune) - std::log(static_cast<double>(nog_after)) -
        (std::log(options.p_grow) - std::log(static_cast<double>(leaves.size())));

    if (std::log(rng.uniform_open()) >= log_lik + log_prior + log_proposal) return false;

    tree.grow(leaf, var, cut);
    const TreeNode& grown = tree.node(leaf);
    for (int i = 0; i < n; ++i) {
      if (leaf_assignment[i] != leaf) continue;
      leaf_assignment[i] = X(i, var) <= cut_value ? grown.left : grown.right;
    }
    return true;
  }

  if (u_move < options.p_grow + options.p_prune) {
    // PRUNE
    std::vector<int> nogs = tree.nog_nodes();
    if (nogs.empty()) return false;
    int target = nogs[rng.uniform_int(static_cast<int>(nogs.size()))];
    const TreeNode& nd = tree.node(target);
    const int left = nd.left, right = nd.right;

    LeafStats ls, rs;
    for (int i = 0; i < n; ++i) {
      if (leaf_assignment[i] == left) {
        ls.count += 1.0;
        ls.sum += residuals[i];
      } else if (leaf_assignment[i] == right) {
        rs.count += 1.0;
        rs.sum += residuals[i];
      }
    }

    double log_lik = 0.0;
    if (!flat) {
      log_lik = leaf_log_marginal(ls.count + rs.count, ls.sum + rs.sum, sigma2) -
                leaf_log_marginal(ls.count, ls.sum, sigma2) -
                leaf_log_marginal(rs.count, rs.sum, sigma2);
    }
    const int depth = tree.depth_of(target);
    const double log_prior = std::log(1.0 - p_split(depth)) - std::log(p_split(depth)) -
                             2.0 * std::log(1.0 - p_split(depth + 1));
    const int leaves_after = tree.leaf_count() - 1;
    const double log_proposal =
        (std::log(options.p_grow) - std::log(static_cast<double>(leaves_after))) -
        (std::log(options.p_prune) - std::log(static_cast<double>(nogs.size())));

    if (std::log(rng.uniform_open()) >= log_lik + log_prior + log_proposal) return false;

    tree.prune(target);
    for (int i = 0; i < n; ++i) {
      if (leaf_assignment[i] == left || leaf_assignment[i] == right) leaf_assignment[i] = target;
    }
    return true;
  }

  // CHANGE
  std::vector<int> internals = tree.internal_nodes();
  if (internals.empty() || grid.splittable.empty()) return false;
  int target = internals[rng.uniform_int(static_cast<int>(internals.size()))];
  int new_var = grid.splittable[rng.uniform_int(static_cast<int>(grid.splittable.size()))];
  int new_cut = rng.uniform_int(static_cast<int>(grid.cuts[new_var].size()));
  const int old_var = tree.node(target).var;
  const int old_cut = tree.node(target).cut;

  std::vector<int> subtree_leaves;
  tree.collect_leaves(target, subtree_leaves);
  std::vector<char> in_subtree;
  {
    int max_idx = 0;
    for (int l : subtree_leaves) max_idx = std::max(max_idx, l);
    in_subtree.assign(max_idx + 1, 0);
    for (int l : subtree_leaves) in_subtree[l] = 1;
  }

  // Route affected rows under the proposed rule without mutating the tree.
  tree.change(target, new_var, new_cut);
  std::vector<LeafStats> old_stats(in_subtree.size()), new_stats(in_subtree.size());
  std::vector<std::pair<int, int>> reassigned;  // (row, proposed leaf)
  for (int i = 0; i < n; ++i) {
    const int leaf = leaf_assignment[i];
    if (leaf >= static_cast<int>(in_subtree.size()) || !in_subtree[leaf]) continue;
    old_stats[leaf].count += 1.0;
    old_stats[leaf].sum += residuals[i];
    int routed = target;
    while (!tree.node(routed).is_leaf()) {
      const TreeNode& t = tree.node(routed);
      routed = X(i, t.var) <= grid.cuts[t.var][t.cut] ? t.left : t.right;
    }
    new_stats[routed].count += 1.0;
    new_stats[routed].sum += residuals[i];
    reassigned.emplace_back(i, routed);
  }
  tree.change(target, old_var, old_cut);  // restore until accepted

  for (int l : subtree_leaves) {
    if (new_stats[l].count < config.min_leaf_obs) return false;
  }

  double log_lik = 0.0;
  if (!flat) {
    for (int l : subtree_leaves) {
      log_lik += leaf_log_marginal(new_stats[l].count, new_stats[l].sum, sigma2) -
                 leaf_log_marginal(old_stats[l].count, old_stats[l].sum, sigma2);
    }
  }
  // Rule prior and rule proposal cancel exactly, leaving the likelihood
  // ratio alone.
  if (std::log(rng.uniform_open()) >= log_lik) return false;

  tree.change(target, new_var, new_cut);
  for (const auto& [row, leaf] : reassigned) leaf_assignment[row] = leaf;
  return true;
}

void draw_leaf_values(DecisionTree& tree, std::span<const int> leaf_assignment,
                      std::span<const double> residuals, double leaf_sd, Rng& rng) {
  const double sigma2 = leaf_sd * leaf_sd;
  std::vector<int> leaves = tree.leaves();
  int max_idx = 0;
  for (int l : leaves) max_idx = std::max(max_idx, l);
  std::vector<LeafStats> stats(max_idx + 1);
  for (std::size_t i = 0; i < leaf_assignment.size(); ++i) {
    stats[leaf_assignment[i]].count += 1.0;
    stats[leaf_assignment[i]].sum += residuals[i];
  }
  for (int l : leaves) {
    const double denom = 1.0 + stats[l].count * sigma2;
    const double post_mean = sigma2 * stats[l].sum / denom;
    const double post_sd = std::sqrt(sigma2 / denom);
    tree.node(l).value = post_mean + post_sd * rng.normal();
  }
}

struct ProbitBartSampler::Impl {
  Matrix x_train;
  Matrix x_pred;
  CutpointGrid grid;
  BartConfig config;
  double offset = 0.0;
  Rng rng;
  bool pred_is_train = false;

  struct TreeState {
    DecisionTree tree;
    std::vector<int> assign_train;
    std::vector<int> assign_pred;
  };
  std::vector<TreeState> trees;
  std::vector<double> fit_train;
  std::vector<double> fit_pred;
  std::vector<double> residual;
  long long proposals = 0;
  long long accepts = 0;

  Impl(Matrix xt, const CutpointGrid& g, const BartConfig& cfg, double off, std::uint64_t seed,
       Matrix xp)
      : x_train(std::move(xt)), x_pred(std::move(xp)), grid(g), config(cfg), offset(off),
        rng(seed) {
    config.validate();
    pred_is_train = (x_pred.rows == 0);
    trees.resize(config.tree_count);
    const double init_leaf = config.init_fit / config.tree_count;
    for (auto& t : trees) {
      t.tree.node(t.tree.root()).value = init_leaf;
      t.assign_train.assign(x_train.rows, t.tree.root());
      if (!pred_is_train) t.assign_pred.assign(x_pred.rows, t.tree.root());
    }
    fit_train.assign(x_train.rows, offset + config.init_fit);
    if (!pred_is_train) fit_pred.assign(x_pred.rows, offset + config.init_fit);
    residual.assign(x_train.rows, 0.0);
  }

  void sweep(std::span<const std::int8_t> y) {
    const int n = x_train.rows;
    if (static_cast<int>(y.size()) != n)
      throw std::invalid_argument("ProbitBartSampler::sweep: response length mismatch");

    std::vector<double> z;
    if (n > 0) z = sample_latent(y, fit_train, rng);

    for (auto& t : trees) {
      for (int i = 0; i < n; ++i) {
        fit_train[i] -= t.tree.node(t.assign_train[i]).value;
        residual[i] = z[i] - fit_train[i];
      }
      if (!pred_is_train) {
        for (int i = 0; i < x_pred.rows; ++i)
          fit_pred[i] -= t.tree.node(t.assign_pred[i]).value;
      }

      ++proposals;
      bool accepted = update_tree(t.tree, t.assign_train, x_train, residual, grid, config, rng);
      if (accepted) {
        ++accepts;
        if (!pred_is_train) {
          for (int i = 0; i < x_pred.rows; ++i)
            t.assign_pred[i] = t.tree.route(x_pred.row(i), grid);
        }
      }

      draw_leaf_values(t.tree, t.assign_train, residual, config.leaf_sd(), rng);

      for (int i = 0; i < n; ++i) fit_train[i] += t.tree.node(t.assign_train[i]).value;
      if (!pred_is_train) {
        for (int i = 0; i < x_pred.rows; ++i)
          fit_pred[i] += t.tree.node(t.assign_pred[i]).value;
      }
    }
  }
};

ProbitBartSampler::ProbitBartSampler(Matrix X_train, const CutpointGrid& grid,
                                     const BartConfig& config, double offset, std::uint64_t seed,
                                     Matrix X_pred)
    : impl_(std::make_unique<Impl>(std::move(X_train), grid, config, offset, seed,
                                   std::move(X_pred))) {}

ProbitBartSampler::~ProbitBartSampler() = default;
ProbitBartSampler::ProbitBartSampler(ProbitBartSampler&&) noexcept = default;
ProbitBartSampler& ProbitBartSampler::operator=(ProbitBartSampler&&) noexcept = default;

void ProbitBartSampler::sweep(std::span<const std::int8_t> y) { impl_->sweep(y); }

std::span<const double> ProbitBartSampler::train_fit() const { return impl_->fit_train; }

std::span<const double> ProbitBartSampler::pred_fit() const {
  return impl_->pred_is_train ? std::span<const double>(impl_->fit_train)
                              : std::span<const double>(impl_->fit_pred);
}

double ProbitBartSampler::offset() const { return impl_->offset; }
int ProbitBartSampler::train_rows() const { return impl_->x_train.rows; }
int ProbitBartSampler::pred_rows() const {
  return impl_->pred_is_train ? impl_->x_train.rows : impl_->x_pred.rows;
}

double ProbitBartSampler::acceptance_rate() const {
  return impl_->proposals == 0
             ? 0.0
             : static_cast<double>(impl_->accepts) / static_cast<double>(impl_->proposals);
}

ProbitFitDraws fit_probit_bart(const Matrix& X, std::span<const std::int8_t> y,
                               const BartConfig& config, const Matrix& predict_rows,
                               std::uint64_t seed, std::span<const int> monitor_rows) {
  config.validate();
  if (X.rows == 0) throw std::invalid_argument("fit_probit_bart: empty covariate matrix");
  if (static_cast<int>(y.size()) != X.rows)
    throw std::invalid_argument("fit_probit_bart: response length mismatch");
  double y_mean = 0.0;
  for (std::int8_t v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("fit_probit_bart: response must be 0/1");
    y_mean += v;
  }
  y_mean /= static_cast<double>(y.size());
  if (y_mean == 0.0 || y_mean == 1.0)
    emit_warning("fit_probit_bart: response is constant; fit proceeds");

  const double n = static_cast<double>(y.size());
  const double offset = norm_quantile(std::clamp(y_mean, 1.0 / (n + 1.0), n / (n + 1.0)));

  CutpointGrid grid = build_cutpoints(X, config.cutpoint_count);
  ProbitBartSampler sampler(X, grid, config, offset, seed, predict_rows);

  ProbitFitDraws draws;
  draws.row_count = sampler.pred_rows();
  draws.kept_draws = config.kept_draws;
  draws.stride = config.stored_draw_stride;
  draws.stored_draws = (config.kept_draws + draws.stride - 1) / draws.stride;
  draws.mean_prob.assign(draws.row_count, 0.0);
  draws.draw_prob.assign(static_cast<std::size_t>(draws.stored_draws) * draws.row_count, 0.0);
  draws.monitor_rows.assign(monitor_rows.begin(), monitor_rows.end());
  draws.monitor_prob.assign(
      static_cast<std::size_t>(config.kept_draws) * draws.monitor_rows.size(), 0.0);

  for (int it = 0; it < config.burn_in; ++it) sampler.sweep(y);
  int stored = 0;
  for (int it = 0; it < config.kept_draws; ++it) {
    sampler.sweep(y);
    std::span<const double> fit = sampler.pred_fit();
    const bool store = (it % draws.stride == 0);
    double* slot = store ? draws.draw_prob.data() + static_cast<std::size_t>(stored) * draws.row_count
                         : nullptr;
    for (int i = 0; i < draws.row_count; ++i) {
      const double p = norm_cdf(fit[i]);
      draws.mean_prob[i] += p;
      if (store) slot[i] = p;
    }
    if (store) ++stored;
    for (std::size_t m = 0; m < draws.monitor_rows.size(); ++m) {
      draws.monitor_prob[static_cast<std::size_t>(it) * draws.monitor_rows.size() + m] =
          norm_cdf(fit[draws.monitor_rows[m]]);
    }
  }
  draws.stored_draws = stored;
  for (double& p : draws.mean_prob) p /= static_cast<double>(config.kept_draws);
  return draws;
}

}  // namespace bartsens
