#pragma once

#include <span>
#include <string>
#include <vector>

#include "bartsens/matrix.hpp"

namespace bartsens {

/// Depth-limited regression tree used purely as a posterior summarization
/// device: it is fit once to per-observation posterior means and then used
/// to name subgroups; inference happens on the posterior draws, never on the
/// tree itself.
struct CartNode {
  int var = -1;          // internal nodes
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<int> members;  // leaves: observation indices
  double leaf_mean = 0.0;
};

struct CartTree {
  std::vector<CartNode> nodes;
  int max_depth = 0;
  int min_leaf = 0;

  int root() const { return 0; }
  std::vector<int> leaf_ids() const;
  int route(std::span<const double> row) const;
  double sse() const;  // total within-leaf sum of squared errors at fit time
  double fitted_sse = 0.0;
};

/// Greedy best-first CART: repeatedly split the leaf offering the largest
/// SSE reduction, thresholds at observed midpoints, until depth / size
/// limits bind or no split reduces SSE. n < 2*min_leaf yields a single leaf.
CartTree fit_cart(const Matrix& X, std::span<const double> y, int max_depth, int min_leaf);

/// Exhaustive-search reference for depth <= 2: minimal SSE over all trees of
/// the form root split + optional child splits with the same candidate set
/// and min_leaf rule. Test oracle; O(candidates^2).
double best_depth2_sse(const Matrix& X, std::span<const double> y, int min_leaf);

struct SubgroupDifference {
  int max_leaf = -1;  // designated once from the point-estimate fit
  int min_leaf = -1;
  std::vector<double> per_draw;  // one difference per posterior draw
  bool single_leaf = false;      // tree had one leaf; output empty
};

/// Difference of within-leaf means between the largest- and smallest-mean
/// leaves, per posterior draw. Leaf membership and designation are fixed
/// from the tree; draw_values is draws x n (draw-major).
SubgroupDifference subgroup_difference(const CartTree& tree, std::span<const double> draw_values,
                                       int draws, int n);

/// Indented one-node-per-line rendering.
std::string render_tree(const CartTree& tree, std::span<const std::string> covariate_names);

/// Machine-readable nested structure (JSON text).
std::string tree_to_json(const CartTree& tree, std::span<const std::string> covariate_names);

}  // namespace bartsens
