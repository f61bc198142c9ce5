#include "bartsens/subgroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bartsens {

namespace {

double subset_sse(std::span<const double> y, std::span<const int> idx) {
  if (idx.empty()) return 0.0;
  double m = 0.0;
  for (int i : idx) m += y[i];
  m /= static_cast<double>(idx.size());
  double acc = 0.0;
  for (int i : idx) acc += (y[i] - m) * (y[i] - m);
  return acc;
}

double subset_mean(std::span<const double> y, std::span<const int> idx) {
  double m = 0.0;
  for (int i : idx) m += y[i];
  return m / static_cast<double>(idx.size());
}

struct BestSplit {
  int var = -1;
  double threshold = 0.0;
  double sse_after = std::numeric_limits<double>::infinity();
  std::vector<int> left, right;
  bool found = false;
};

// Candidate thresholds are midpoints of consecutive distinct observed values
// within the node.
BestSplit best_split(const Matrix& X, std::span<const double> y, std::span<const int> idx,
                     int min_leaf) {
  BestSplit best;
  const int m = static_cast<int>(idx.size());
  if (m < 2 * min_leaf) return best;
  std::vector<int> order(idx.begin(), idx.end());
  for (int var = 0; var < X.cols; ++var) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return X(a, var) < X(b, var); });
    // Prefix sums over the sorted order give O(1) SSE at each cut.
    double total = 0.0, total_sq = 0.0;
    for (int i : order) {
      total += y[i];
      total_sq += y[i] * y[i];
    }
    double left_sum = 0.0, left_sq = 0.0;
    for (int k = 0; k + 1 < m; ++k) {
      left_sum += y[order[k]];
      left_sq += y[order[k]] * y[order[k]];
      const double xv = X(order[k], var);
      const double xn = X(order[k + 1], var);
      if (xn <= xv) continue;  // not a distinct-value boundary
      const int n_left = k + 1;
      const int n_right = m - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const double right_sum = total - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left_sum * left_sum / n_left) +
                         (right_sq - right_sum * right_sum / n_right);
      if (sse < best.sse_after) {
        best.sse_after = sse;
        best.var = var;
        best.threshold = 0.5 * (xv + xn);
        best.found = true;
        best.left.assign(order.begin(), order.begin() + n_left);
        best.right.assign(order.begin() + n_left, order.end());
      }
    }
  }
  return best;
}

}  // namespace

std::vector<int> CartTree::leaf_ids() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i].left < 0) out.push_back(i);
  return out;
}

int CartTree::route(std::span<const double> row) const {
  int idx = root();
  while (nodes[idx].left >= 0)
    idx = row[nodes[idx].var] <= nodes[idx].threshold ? nodes[idx].left : nodes[idx].right;
  return idx;
}

double CartTree::sse() const { return fitted_sse; }

CartTree fit_cart(const Matrix& X, std::span<const double> y, int max_depth, int min_leaf) {
  if (max_depth < 1) throw std::invalid_argument("fit_cart: max_depth must be >= 1");
  if (min_leaf < 1) throw std::invalid_argument("fit_cart: min_leaf must be >= 1");
  if (static_cast<int>(y.size()) != X.rows)
    throw std::invalid_argument("fit_cart: response length mismatch");

  CartTree tree;
  tree.max_depth = max_depth;
  tree.min_leaf = min_leaf;
  CartNode rootn;
  rootn.members.resize(X.rows);
  for (int i = 0; i < X.rows; ++i) rootn.members[i] = i;
  rootn.leaf_mean = X.rows > 0 ? subset_mean(y, rootn.members) : 0.0;
  tree.nodes.push_back(std::move(rootn));

  struct Candidate {
    int node;
    int depth;
    double gain;
    BestSplit split;
  };
  auto cmp = [](const Candidate& a, const Candidate& b) { return a.gain < b.gain; };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(cmp)> frontier(cmp);

  auto consider = [&](int node, int depth) {
    if (depth >= max_depth) return;
    BestSplit sp = best_split(X, y, tree.nodes[node].members, min_leaf);
    if (!sp.found) return;
    const double gain = subset_sse(y, tree.nodes[node].members) - sp.sse_after;
    if (gain <= 0.0) return;
    frontier.push({node, depth, gain, std::move(sp)});
  };
  consider(0, 0);

  while (!frontier.empty()) {
    Candidate c = frontier.top();
    frontier.pop();
    CartNode& parent = tree.nodes[c.node];
    if (parent.left >= 0) continue;  // already split (stale candidate)
    const int li = static_cast<int>(tree.nodes.size());
    const int ri = li + 1;
    CartNode left, right;
    left.members = std::move(c.split.left);
    right.members = std::move(c.split.right);
    left.leaf_mean = subset_mean(y, left.members);
    right.leaf_mean = subset_mean(y, right.members);
    parent.var = c.split.var;
    parent.threshold = c.split.threshold;
    parent.left = li;
    parent.right = ri;
    parent.members.clear();
    tree.nodes.push_back(std::move(left));
    tree.nodes.push_back(std::move(right));
    consider(li, c.depth + 1);
    consider(ri, c.depth + 1);
  }

  double sse = 0.0;
  for (int l : tree.leaf_ids()) sse += subset_sse(y, tree.nodes[l].members);
  tree.fitted_sse = sse;
  return tree;
}

double best_depth2_sse(const Matrix& X, std::span<const double> y, int min_leaf) {
  std::vector<int> all(X.rows);
  for (int i = 0; i < X.rows; ++i) all[i] = i;

  // SSE of the best single split of a subset (or its own SSE when nothing
  // admissible), by scanning every midpoint candidate.
  auto best_child_sse = [&](std::span<const int> idx) {
    const BestSplit sp = best_split(X, y, idx, min_leaf);
    const double unsplit = subset_sse(y, idx);
    return sp.found ? std::min(sp.sse_after, unsplit) : unsplit;
  };

  double best = subset_sse(y, all);  // depth-0 tree
  std::vector<int> order(all);
  for (int var = 0; var < X.cols; ++var) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return X(a, var) < X(b, var); });
    for (int k = 0; k + 1 < X.rows; ++k) {
      if (X(order[k + 1], var) <= X(order[k], var)) continue;
      const int n_left = k + 1;
      if (n_left < min_leaf || X.rows - n_left < min_leaf) continue;
      std::span<const int> left(order.data(), static_cast<std::size_t>(n_left));
      std::span<const int> right(order.data() + n_left,
                                 static_cast<std::size_t>(X.rows - n_left));
      best = std::min(best, best_child_sse(left) + best_child_sse(right));
    }
  }
  return best;
}

SubgroupDifference subgroup_difference(const CartTree& tree, std::span<const double> draw_values,
                                       int draws, int n) {
  if (static_cast<std::size_t>(draws) * n != draw_values.size())
    throw std::invalid_argument("subgroup_difference: draw matrix shape mismatch");
  SubgroupDifference out;
  const std::vector<int> leaves = tree.leaf_ids();
  if (leaves.size() < 2) {
    out.single_leaf = true;
    return out;
  }
  out.max_leaf = leaves[0];
  out.min_leaf = leaves[0];
  for (int l : leaves) {
    if (tree.nodes[l].leaf_mean > tree.nodes[out.max_leaf].leaf_mean) out.max_leaf = l;
    if (tree.nodes[l].leaf_mean < tree.nodes[out.min_leaf].leaf_mean) out.min_leaf = l;
  }
  const auto& hi = tree.nodes[out.max_leaf].members;
  const auto& lo = tree.nodes[out.min_leaf].members;
  out.per_draw.resize(draws);
  for (int d = 0; d < draws; ++d) {
    const double* row = draw_values.data() + static_cast<std::size_t>(d) * n;
    double mh = 0.0, ml = 0.0;
    for (int i : hi) mh += row[i];
    for (int i : lo) ml += row[i];
    out.per_draw[d] = mh / hi.size() - ml / lo.size();
  }
  return out;
}

namespace {

void render_node(const CartTree& tree, int idx, int indent,
                 std::span<const std::string> names, std::ostringstream& os) {
  const CartNode& nd = tree.nodes[idx];
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (nd.left < 0) {
    os << pad << "leaf: mean=" << nd.leaf_mean << " n=" << nd.members.size() << "\n";
    return;
  }
  const std::string var_name =
      nd.var < static_cast<int>(names.size()) ? names[nd.var] : "x" + std::to_string(nd.var + 1);
  os << pad << var_name << " <= " << nd.threshold << "\n";
  render_node(tree, nd.left, indent + 1, names, os);
  os << pad << var_name << " > " << nd.threshold << "\n";
  render_node(tree, nd.right, indent + 1, names, os);
}

nlohmann::json node_to_json(const CartTree& tree, int idx,
                            std::span<const std::string> names) {
  const CartNode& nd = tree.nodes[idx];
  nlohmann::json j;
  if (nd.left < 0) {
    j["mean"] = nd.leaf_mean;
    j["n"] = nd.members.size();
    return j;
  }
  j["var"] = nd.var < static_cast<int>(names.size()) ? names[nd.var]
                                                     : "x" + std::to_string(nd.var + 1);
  j["threshold"] = nd.threshold;
  j["left"] = node_to_json(tree, nd.left, names);
  j["right"] = node_to_json(tree, nd.right, names);
  return j;
}

}  // namespace

std::string render_tree(const CartTree& tree, std::span<const std::string> covariate_names) {
  std::ostringstream os;
  os.precision(6);
  render_node(tree, tree.root(), 0, covariate_names, os);
  return os.str();
}

std::string tree_to_json(const CartTree& tree, std::span<const std::string> covariate_names) {
  return node_to_json(tree, tree.root(), covariate_names).dump(2);
}

}  // namespace bartsens
