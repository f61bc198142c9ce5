#pragma once

#include <string>
#include <vector>

#include "bartsens/math.hpp"

namespace bartsens {

enum class DensityKind { Gaussian, Sharkfin, Mixture };

struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

/// The sensitivity parameter f(u): the analyst-chosen marginal density of the
/// latent confounder U. Three families are supported:
///   - Gaussian(mean, sd)
///   - Sharkfin(q, s): unimodal at zero with Gaussian tails; q = Pr(U < 0)
///     controls the skew, s scales the negative lobe.
///   - Mixture of Gaussians with weights summing to one.
class ConfounderDensity {
 public:
  static ConfounderDensity gaussian(double mean, double sd);
  static ConfounderDensity sharkfin(double q, double s);
  static ConfounderDensity mixture(std::vector<MixtureComponent> components);

  /// Parse a density from a JSON object such as
  ///   {"kind":"gaussian","mean":0,"sd":1}
  ///   {"kind":"sharkfin","q":0.25,"s":0.5}
  ///   {"kind":"mixture","components":[{"weight":w,"mean":m,"sd":s}, ...]}
  static ConfounderDensity parse(const std::string& json_text);

  DensityKind kind() const { return kind_; }
  double gaussian_mean() const { return mean_; }
  double gaussian_sd() const { return sd_; }
  double sharkfin_q() const { return q_; }
  double sharkfin_s() const { return s_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  double pdf(double u) const;
  Moments moments() const;

  std::string label() const;       // short human-readable tag for CSV output
  std::string to_json() const;     // round-trips through parse()

 private:
  ConfounderDensity() = default;

  DensityKind kind_ = DensityKind::Gaussian;
  double mean_ = 0.0, sd_ = 1.0;   // Gaussian
  double q_ = 0.5, s_ = 1.0;       // Sharkfin
  std::vector<MixtureComponent> components_;
};

/// Gaussian sd below this threshold is treated as a point mass at the mean.
inline constexpr double kPointMassSd = 1e-6;

/// Build a rule with sum(w_k h(u_k)) ~ integral of h against d, for smooth
/// bounded h. node_count is the per-component request: Gauss-Hermite for each
/// Gaussian component, two half-domain Gauss-Legendre panels for the
/// sharkfin. Rejects node_count < 16.
QuadratureRule quadrature(const ConfounderDensity& d, int node_count);

/// The two marginalizing integrals used throughout. The rule overloads are
/// the hot path; the density overloads build a default 64-node rule.
double marginal_single(const QuadratureRule& rule, double a);  // int Phi(a+u) f(u) du
double marginal_single(const ConfounderDensity& d, double a);

enum class PairMode {
  BothPositive,      // int Phi(a+u)    Phi(b+u)    f(u) du
  FirstComplement,   // int (1-Phi(a+u)) Phi(b+u)   f(u) du
  SecondComplement,  // int Phi(a+u)   (1-Phi(b+u)) f(u) du
};

double marginal_pair(const QuadratureRule& rule, double a, double b, PairMode mode);
double marginal_pair(const ConfounderDensity& d, double a, double b, PairMode mode);

}  // namespace bartsens
