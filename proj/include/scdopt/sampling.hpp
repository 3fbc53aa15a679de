#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "scdopt/linalg.hpp"

namespace scdopt {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a stream index.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Additive-recurrence (R_d) low-discrepancy sequence in [0,1)^dim with a seed-dependent offset.
class LowDiscrepancy {
 public:
  explicit LowDiscrepancy(std::size_t dim, std::uint64_t seed = kDefaultSeed)
      : alpha_(dim), state_(dim) {
    // phi_d is the unique positive root of x^(d+1) = x + 1.
    double phi = 2.0;
    for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dim + 1));
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < dim; ++i) {
      alpha_[i] = std::fmod(std::pow(1.0 / phi, static_cast<double>(i + 1)), 1.0);
      s = splitmix64(s);
      state_[i] = static_cast<double>(s >> 11) * 0x1.0p-53;
    }
  }

  std::size_t dim() const noexcept { return alpha_.size(); }

  Vec next() {
    Vec out(static_cast<Eigen::Index>(alpha_.size()));
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      state_[i] += alpha_[i];
      if (state_[i] >= 1.0) state_[i] -= 1.0;
      out(static_cast<Eigen::Index>(i)) = state_[i];
    }
    return out;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> state_;
};

/// Points x with r_inner < |x - center| <= r_outer, directions uniform on the sphere.
class ShellSampler {
 public:
  ShellSampler(std::size_t dim, std::uint64_t seed) : dim_(dim), gen_(dim + 1, seed) {}

  Vec next(const Vec& center, double r_inner, double r_outer) {
    const auto n = static_cast<Eigen::Index>(dim_);
    for (;;) {
      const Vec u = gen_.next();
      Vec dir = 2.0 * u.head(n).array() - 1.0;
      const double len = dir.norm();
      if (len > 1.0 || len < 1e-3) continue;
      dir /= len;
      // Uniform in radius keeps every sub-shell populated even in higher dimensions.
      const double rho = r_outer - (r_outer - r_inner) * u(n);
      return center + rho * dir;
    }
  }

 private:
  std::size_t dim_;
  LowDiscrepancy gen_;
};

/// Point uniformly spread over the box [lower, upper].
inline Vec box_point(LowDiscrepancy& gen, const Vec& lower, const Vec& upper) {
  const Vec u = gen.next();
  return lower.array() + u.array() * (upper - lower).array();
}

}  // namespace scdopt
