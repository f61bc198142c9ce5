#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bartsens {

/// Standard normal pdf, cdf and quantile. The cdf is erfc-based so both
/// tails keep full relative accuracy; the quantile is accurate to machine
/// precision after one Halley refinement.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);  // requires p in (0,1)

/// Nodes and weights of a one-dimensional quadrature rule. When the rule
/// represents integration against a probability density, the weights sum
/// to one (up to the rule's own accuracy).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& h) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * h(nodes[k]);
    return acc;
  }
};

/// Gauss-Hermite rule for weight exp(-x^2) on the real line; nodes ascending,
/// weights sum to sqrt(pi).
QuadratureRule gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1]; nodes ascending, weights sum to 2.
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // denominator n
double correlation(std::span<const double> a, std::span<const double> b);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double p);

}  // namespace bartsens
