#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace sae {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + b + (a << 6) + (a >> 2));
  return splitmix64(s);
}

}  // namespace detail

// xoshiro256** seeded through SplitMix64.  A stream is identified by its
// key; derive(k1, k2) yields an independent stream keyed on
// (key, k1, k2), so per-model and per-purpose substreams are fixed by the
// master seed alone and never depend on consumption order.
//
// All variate code below is self-contained (no std::distribution), so a
// seed pins the exact draw sequence across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {
    std::uint64_t s = key_;
    for (auto& w : state_) w = detail::splitmix64(s);
  }

  Rng derive(std::uint64_t k1, std::uint64_t k2 = 0) const {
    return Rng(detail::mix_key(detail::mix_key(key_, k1 + 1), k2 + 1));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  double normal(double mu, double sigma) {
    if (sigma < 0.0) throw std::domain_error("Rng::normal: sigma must be >= 0");
    if (sigma == 0.0) return mu;
    return mu + sigma * normal();
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the boost step for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  /// Beta(a, b) from two gamma variates, clamped into the open unit interval.
  double beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::domain_error("Rng::beta: parameters must be positive");
    const double x = gamma(a);
    const double y = gamma(b);
    double p = x / (x + y);
    if (!(p > 0.0)) p = std::numeric_limits<double>::min();
    if (!(p < 1.0)) p = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return p;
  }

  /// One categorical draw; weights are normalized internally.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::domain_error("Rng::categorical: negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("Rng::categorical: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) last_positive = i;
      acc += weights[i];
      if (u < acc && weights[i] > 0.0) return i;
    }
    return last_positive;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

// Cumulative-weight table for repeated categorical draws from the same
// distribution (e.g. 10^4 draws over 10^4 grid masses).
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> weights) {
    cum_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::domain_error("CategoricalTable: negative weight");
      acc += w;
      cum_.push_back(acc);
    }
    if (cum_.empty() || !(acc > 0.0))
      throw std::domain_error("CategoricalTable: weights sum to zero");
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    return std::min(i, cum_.size() - 1);
  }

 private:
  std::vector<double> cum_;
};

}  // namespace sae
