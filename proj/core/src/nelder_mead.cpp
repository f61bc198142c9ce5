#include "bartsens/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bartsens {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start,
                             const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

  std::vector<std::vector<double>> vertex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) vertex[i + 1][i] += options.initial_step;
  std::vector<double> value(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) value[i] = f(vertex[i]);

  std::vector<std::size_t> order(dim + 1);
  auto sort_vertices = [&] {
    for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  };

  auto diameter = [&]() {
    double d = 0.0;
    for (std::size_t i = 1; i <= dim; ++i)
      for (std::size_t c = 0; c < dim; ++c)
        d = std::max(d, std::abs(vertex[order[i]][c] - vertex[order[0]][c]));
    return d;
  };

  NelderMeadResult result;
  std::vector<double> centroid(dim), candidate(dim);
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    sort_vertices();
    if (value[order[0]] < options.objective_tolerance ||
        diameter() < options.simplex_tolerance) {
      result.converged = true;
      break;
    }

    const std::size_t best = order[0];
    const std::size_t second_worst = order[dim - 1];
    const std::size_t worst = order[dim];

    for (std::size_t c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < dim; ++i) acc += vertex[order[i]][c];
      centroid[c] = acc / static_cast<double>(dim);
    }

    auto blend = [&](double coef) {
      for (std::size_t c = 0; c < dim; ++c)
        candidate[c] = centroid[c] + coef * (centroid[c] - vertex[worst][c]);
      return f(candidate);
    };

    double f_reflect = blend(1.0);
    if (f_reflect < value[best]) {
      std::vector<double> reflected = candidate;
      double f_expand = blend(2.0);
      if (f_expand < f_reflect) {
        vertex[worst] = candidate;
        value[worst] = f_expand;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflect;
      }
    } else if (f_reflect < value[second_worst]) {
      vertex[worst] = candidate;
      value[worst] = f_reflect;
    } else {
      double f_contract = blend(f_reflect < value[worst] ? 0.5 : -0.5);
      if (f_contract < std::min(f_reflect, value[worst])) {
        vertex[worst] = candidate;
        value[worst] = f_contract;
      } else {
        for (std::size_t i = 1; i <= dim; ++i) {
          std::size_t v = order[i];
          for (std::size_t c = 0; c < dim; ++c)
            vertex[v][c] = vertex[best][c] + 0.5 * (vertex[v][c] - vertex[best][c]);
          value[v] = f(vertex[v]);
        }
      }
    }
  }

  sort_vertices();
  result.x = vertex[order[0]];
  result.value = value[order[0]];
  result.iterations = iter;
  if (value[order[0]] < options.objective_tolerance || diameter() < options.simplex_tolerance)
    result.converged = true;
  return result;
}

}  // namespace bartsens
