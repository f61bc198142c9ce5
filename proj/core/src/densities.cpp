#include "bartsens/densities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bartsens {

namespace {

double gaussian_pdf(double u, double mean, double sd) {
  double z = (u - mean) / sd;
  return norm_pdf(z) / sd;
}

void append_gaussian_rule(QuadratureRule& out, double mean, double sd, double mass, int n) {
  if (sd < kPointMassSd) {
    out.nodes.push_back(mean);
    out.weights.push_back(mass);
    return;
  }
  QuadratureRule gh = gauss_hermite(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (std::size_t k = 0; k < gh.size(); ++k) {
    out.nodes.push_back(mean + std::numbers::sqrt2 * sd * gh.nodes[k]);
    out.weights.push_back(mass * inv_sqrt_pi * gh.weights[k]);
  }
}

void sort_and_merge(QuadratureRule& rule) {
  std::vector<std::size_t> order(rule.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rule.nodes[a] < rule.nodes[b]; });
  QuadratureRule merged;
  merged.nodes.reserve(rule.size());
  merged.weights.reserve(rule.size());
  for (std::size_t i : order) {
    if (!merged.nodes.empty() && rule.nodes[i] == merged.nodes.back()) {
      merged.weights.back() += rule.weights[i];
    } else {
      merged.nodes.push_back(rule.nodes[i]);
      merged.weights.push_back(rule.weights[i]);
    }
  }
  rule = std::move(merged);
}

}  // namespace

ConfounderDensity ConfounderDensity::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian density: sd must be > 0");
  ConfounderDensity d;
  d.kind_ = DensityKind::Gaussian;
  d.mean_ = mean;
  d.sd_ = sd;
  return d;
}

ConfounderDensity ConfounderDensity::sharkfin(double q, double s) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("sharkfin density: q must lie in (0,1)");
  if (!(s > 0.0)) throw std::invalid_argument("sharkfin density: s must be > 0");
  ConfounderDensity d;
  d.kind_ = DensityKind::Sharkfin;
  d.q_ = q;
  d.s_ = s;
  return d;
}

ConfounderDensity ConfounderDensity::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw std::invalid_argument("mixture density: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.weight < 0.0) throw std::invalid_argument("mixture density: negative weight");
    if (!(c.sd > 0.0)) throw std::invalid_argument("mixture density: component sd must be > 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("mixture density: weights must sum to 1");
  ConfounderDensity d;
  d.kind_ = DensityKind::Mixture;
  d.components_ = std::move(components);
  return d;
}

ConfounderDensity ConfounderDensity::parse(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    return gaussian(j.value("mean", 0.0), j.at("sd").get<double>());
  }
  if (kind == "sharkfin") {
    return sharkfin(j.at("q").get<double>(), j.at("s").get<double>());
  }
  if (kind == "mixture") {
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
      comps.push_back({c.at("weight").get<double>(), c.at("mean").get<double>(),
                       c.at("sd").get<double>()});
    }
    return mixture(std::move(comps));
  }
  throw std::invalid_argument("density config: unknown kind '" + kind + "'");
}

double ConfounderDensity::pdf(double u) const {
  switch (kind_) {
    case DensityKind::Gaussian:
      return gaussian_pdf(u, mean_, sd_);
    case DensityKind::Sharkfin:
      // 2q phi(u; 0, s) on the negative side; the positive side rescales the
      // argument by q/(1-q), giving a half-normal lobe of mass 1-q.
      if (u <= 0.0) return 2.0 * q_ * gaussian_pdf(u, 0.0, s_);
      return 2.0 * q_ * gaussian_pdf(u * q_ / (1.0 - q_), 0.0, s_);
    case DensityKind::Mixture: {
      double acc = 0.0;
      for (const auto& c : components_) acc += c.weight * gaussian_pdf(u, c.mean, c.sd);
      return acc;
    }
  }
  return 0.0;
}

Moments ConfounderDensity::moments() const {
  switch (kind_) {
    case DensityKind::Gaussian:
      return {mean_, sd_};
    case DensityKind::Sharkfin: {
      // Negative lobe: half-normal with sd s and mass q; positive lobe:
      // half-normal with sd s(1-q)/q and mass 1-q.
      const double half_mean = std::sqrt(2.0 / std::numbers::pi);
      const double s_pos = s_ * (1.0 - q_) / q_;
      double m = half_mean * (-q_ * s_ + (1.0 - q_) * s_pos);
      double m2 = q_ * s_ * s_ + (1.0 - q_) * s_pos * s_pos;
      return {m, std::sqrt(m2 - m * m)};
    }
    case DensityKind::Mixture: {
      double m = 0.0, m2 = 0.0;
      for (const auto& c : components_) {
        m += c.weight * c.mean;
        m2 += c.weight * (c.sd * c.sd + c.mean * c.mean);
      }
      return {m, std::sqrt(m2 - m * m)};
    }
  }
  return {};
}

std::string ConfounderDensity::label() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind_) {
    case DensityKind::Gaussian:
      os << "gaussian(" << mean_ << "," << sd_ << ")";
      break;
    case DensityKind::Sharkfin:
      os << "sharkfin(q=" << q_ << ",s=" << s_ << ")";
      break;
    case DensityKind::Mixture:
      os << "mixture[" << components_.size() << "]";
      break;
  }
  return os.str();
}

std::string ConfounderDensity::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case DensityKind::Gaussian:
      j = {{"kind", "gaussian"}, {"mean", mean_}, {"sd", sd_}};
      break;
    case DensityKind::Sharkfin:
      j = {{"kind", "sharkfin"}, {"q", q_}, {"s", s_}};
      break;
    case DensityKind::Mixture: {
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : components_)
        comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"sd", c.sd}});
      j = {{"kind", "mixture"}, {"components", comps}};
      break;
    }
  }
  return j.dump();
}

QuadratureRule quadrature(const ConfounderDensity& d, int node_count) {
  if (node_count < 16) throw std::invalid_argument("quadrature: node_count must be >= 16");
  QuadratureRule rule;
  switch (d.kind()) {
    case DensityKind::Gaussian:
      append_gaussian_rule(rule, d.gaussian_mean(), d.gaussian_sd(), 1.0, node_count);
      break;
    case DensityKind::Sharkfin: {
      // Each lobe is analytic, so a Gauss-Legendre panel per half converges
      // fast; the 12-sd cutoff leaves < 1e-31 of mass outside.
      const double q = d.sharkfin_q();
      const double s_neg = d.sharkfin_s();
      const double s_pos = s_neg * (1.0 - q) / q;
      QuadratureRule neg = gauss_legendre(node_count, -12.0 * s_neg, 0.0);
      QuadratureRule pos = gauss_legendre(node_count, 0.0, 12.0 * s_pos);
      for (std::size_t k = 0; k < neg.size(); ++k) {
        rule.nodes.push_back(neg.nodes[k]);
        rule.weights.push_back(neg.weights[k] * d.pdf(neg.nodes[k]));
      }
      for (std::size_t k = 0; k < pos.size(); ++k) {
        rule.nodes.push_back(pos.nodes[k]);
        rule.weights.push_back(pos.weights[k] * d.pdf(pos.nodes[k]));
      }
      break;
    }
    case DensityKind::Mixture:
      for (const auto& c : d.components())
        append_gaussian_rule(rule, c.mean, c.sd, c.weight, node_count);
      sort_and_merge(rule);
      break;
  }
  return rule;
}

double marginal_single(const QuadratureRule& rule, double a) {
  return rule.integrate([a](double u) { return norm_cdf(a + u); });
}

double marginal_single(const ConfounderDensity& d, double a) {
  return marginal_single(quadrature(d, 64), a);
}

double marginal_pair(const QuadratureRule& rule, double a, double b, PairMode mode) {
  switch (mode) {
    case PairMode::BothPositive:
      return rule.integrate([=](double u) { return norm_cdf(a + u) * norm_cdf(b + u); });
    case PairMode::FirstComplement:
      return rule.integrate([=](double u) { return (1.0 - norm_cdf(a + u)) * norm_cdf(b + u); });
    case PairMode::SecondComplement:
      return rule.integrate([=](double u) { return norm_cdf(a + u) * (1.0 - norm_cdf(b + u)); });
  }
  return 0.0;
}

double marginal_pair(const ConfounderDensity& d, double a, double b, PairMode mode) {
  return marginal_pair(quadrature(d, 64), a, b, mode);
}

}  // namespace bartsens
