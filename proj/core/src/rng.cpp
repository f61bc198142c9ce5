#include "bartsens/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bartsens {

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Multiply-shift; bias is < n / 2^64, irrelevant for the n used here.
  return static_cast<int>(
      (static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n)) >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Rng Rng::fork(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Standardized draw Z ~ N(0,1) | Z > a.
double std_truncated_above(Rng& rng, double a) {
  if (a < 0.45) {
    // Plain rejection; acceptance probability is Phi(-a) >= 0.33.
    for (;;) {
      double z = rng.normal();
      if (z > a) return z;
    }
  }
  // Robert (1995) shifted-exponential rejection for deep truncation.
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    double z = a + rng.exponential() / lambda;
    double d = z - lambda;
    if (std::log(rng.uniform_open()) <= -0.5 * d * d) return z;
  }
}

}  // namespace

double truncated_normal_above(Rng& rng, double mean, double lower) {
  return mean + std_truncated_above(rng, lower - mean);
}

double truncated_normal_below(Rng& rng, double mean, double upper) {
  return mean - std_truncated_above(rng, mean - upper);
}

}  // namespace bartsens
