#pragma once

// Seedable random streams and the exact samplers consumed by the Gibbs sweep.
//
// Every sampler here is written against RandomStream only, so a chain is a
// pure function of (seed, config, data) on any platform that provides IEEE
// doubles and a conforming libm.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"

namespace hrlsgs {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t v) noexcept {
  std::uint64_t s = v;
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256** stream keyed by a master seed and a substream selector.
///
/// Identical (seed, stream_id) pairs replay identical sequences. Distinct
/// stream ids land on unrelated points of the 2^256 - 1 cycle.
class RandomStream {
 public:
  using state_type = std::array<std::uint64_t, 4>;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = detail::mix64(seed) ^ detail::mix64(stream_id + 0x632BE59BD9B4E019ULL);
    for (auto& w : s_) w = detail::splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  const state_type& state() const noexcept { return s_; }
  void set_state(const state_type& s) noexcept { s_ = s; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  state_type s_{};
};

/// Step kinds that own disjoint substream families.
enum class StreamKind : std::uint64_t {
  counts = 1,
  x = 2,
  z1 = 3,
  z2 = 4,
  observation = 5,
  channel = 6,
  oracle = 7,
  test = 8,
};

/// Substream selector for (kind, major, minor), e.g. (z1, sweep, block).
constexpr std::uint64_t substream_id(StreamKind kind, std::uint64_t major, std::uint64_t minor = 0) noexcept {
  std::uint64_t h = detail::mix64(static_cast<std::uint64_t>(kind));
  h = detail::mix64(h ^ major);
  h = detail::mix64(h ^ (minor + 0x9E3779B97F4A7C15ULL));
  return h;
}

/// Density proportional to t^(shape-1) exp(-rate t).
struct GammaParams {
  double shape;
  double rate;

  bool valid() const noexcept {
    return std::isfinite(shape) && std::isfinite(rate) && shape > 0 && rate > 0;
  }
};

/// Density proportional to t^(-shape-1) exp(-scale / t).
struct InvGammaParams {
  double shape;
  double scale;

  bool valid() const noexcept {
    return std::isfinite(shape) && std::isfinite(scale) && shape > 0 && scale > 0;
  }
};

inline double draw_std_normal(RandomStream& rs) noexcept {
  // Marsaglia polar; the second variate is discarded so the stream carries no cache.
  for (;;) {
    const double u = 2.0 * rs.uniform() - 1.0;
    const double v = 2.0 * rs.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s < 1.0 && s > 0.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

inline void fill_std_normal(RandomStream& rs, std::span<double> out) noexcept {
  std::size_t i = 0;
  while (i < out.size()) {
    const double u = 2.0 * rs.uniform() - 1.0;
    const double v = 2.0 * rs.uniform() - 1.0;
    const double s = u * u + v * v;
    if (!(s < 1.0 && s > 0.0)) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    out[i++] = u * f;
    if (i < out.size()) out[i++] = v * f;
  }
}

inline std::vector<double> draw_std_normal_vec(RandomStream& rs, std::size_t len) {
  if (len == 0) throw ParameterError("draw_std_normal_vec: length must be at least 1");
  std::vector<double> out(len);
  fill_std_normal(rs, out);
  return out;
}

namespace detail {

// Marsaglia & Tsang (2000), unit rate, shape >= 1.
inline double gamma_unit_mt(RandomStream& rs, double shape) noexcept {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = draw_std_normal(rs);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rs.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double gamma_unit(RandomStream& rs, double shape) noexcept {
  if (shape >= 1.0) return gamma_unit_mt(rs, shape);
  // Boost: G(a) = G(a + 1) U^(1/a), evaluated in log space.
  const double g = gamma_unit_mt(rs, shape + 1.0);
  const double logv = std::log(g) + std::log(rs.uniform()) / shape;
  return std::max(std::exp(logv), std::numeric_limits<double>::min());
}

}  // namespace detail

/// Gamma draw, rate parameterization.
inline double draw_gamma(RandomStream& rs, GammaParams p) {
  if (!p.valid()) {
    throw ParameterError("draw_gamma: need shape > 0 and rate > 0, got shape=" + std::to_string(p.shape) +
                         " rate=" + std::to_string(p.rate));
  }
  return std::max(detail::gamma_unit(rs, p.shape) / p.rate, std::numeric_limits<double>::min());
}

/// Inverse-gamma draw, scale parameterization; same law as 1 / Gamma(shape, rate = scale).
inline double draw_invgamma(RandomStream& rs, InvGammaParams p) {
  if (!p.valid()) {
    throw ParameterError("draw_invgamma: need shape > 0 and scale > 0, got shape=" + std::to_string(p.shape) +
                         " scale=" + std::to_string(p.scale));
  }
  return p.scale / detail::gamma_unit(rs, p.shape);
}

namespace detail {

// Inversion by sequential search; used when n * p is small. Requires p <= 0.5.
inline std::uint64_t binomial_inversion(RandomStream& rs, std::uint64_t n, double p) noexcept {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = (static_cast<double>(n) + 1.0) * s;
  for (;;) {
    double r = std::pow(q, static_cast<double>(n));
    double u = rs.uniform();
    std::uint64_t x = 0;
    bool ok = true;
    while (u > r) {
      u -= r;
      ++x;
      if (x > n) {
        ok = false;  // rounding ran off the support; redraw
        break;
      }
      r *= (a / static_cast<double>(x) - s);
    }
    if (ok) return x;
  }
}

// Hormann (1993) BTRS transformed rejection. Requires p <= 0.5 and n p >= 10.
inline std::uint64_t binomial_btrs(RandomStream& rs, std::uint64_t n, double p) noexcept {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double spq = std::sqrt(nd * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const double m = std::floor((nd + 1.0) * p);
  const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
  for (;;) {
    const double u = rs.uniform() - 0.5;
    double v = rs.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (k < 0.0 || k > nd) continue;
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) + (k - m) * lpq) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace detail

inline std::uint64_t draw_binomial(RandomStream& rs, std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("draw_binomial: p must lie in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flip = p > 0.5;
  const double pp = flip ? 1.0 - p : p;
  const std::uint64_t k = static_cast<double>(n) * pp < 10.0 ? detail::binomial_inversion(rs, n, pp)
                                                             : detail::binomial_btrs(rs, n, pp);
  return flip ? n - k : k;
}

/// Multinomial partition of `total` over nonnegative weights (need not be
/// normalized) by sequential conditional binomials. `emit(j, count)` is called
/// for every index with a positive count, in increasing j. Weights are trusted.
template <class Emit>
void multinomial_partition(RandomStream& rs, std::uint64_t total, std::span<const double> weights, Emit&& emit) {
  double remaining_mass = 0.0;
  for (double w : weights) remaining_mass += w;
  std::uint64_t remaining = total;
  for (std::size_t j = 0; j < weights.size() && remaining > 0; ++j) {
    const double w = weights[j];
    if (w <= 0.0) continue;
    std::uint64_t k;
    if (j + 1 == weights.size() || w >= remaining_mass) {
      k = remaining;
    } else {
      k = draw_binomial(rs, remaining, std::min(1.0, w / remaining_mass));
    }
    remaining_mass -= w;
    if (k) {
      emit(j, k);
      remaining -= k;
    }
  }
  if (remaining > 0) {
    // Floating-point leftovers: hand them to the last positive weight.
    for (std::size_t j = weights.size(); j-- > 0;) {
      if (weights[j] > 0.0) {
        emit(j, remaining);
        break;
      }
    }
  }
}

inline std::vector<std::uint64_t> draw_multinomial(RandomStream& rs, std::uint64_t total, std::span<const double> probs) {
  if (probs.empty()) throw ParameterError("draw_multinomial: probability vector is empty");
  double sum = 0.0;
  std::vector<std::size_t> negative;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] >= 0.0) || !std::isfinite(probs[j])) negative.push_back(j);
    sum += probs[j];
  }
  if (!negative.empty()) {
    throw ParameterError("draw_multinomial: invalid probability at index " + detail::join_indices(negative));
  }
  std::vector<std::uint64_t> counts(probs.size(), 0);
  if (total == 0) return counts;
  if (!(sum > 0.0)) throw ParameterError("draw_multinomial: all-zero probabilities with positive total");
  multinomial_partition(rs, total, probs, [&](std::size_t j, std::uint64_t k) { counts[j] += k; });
  return counts;
}

/// Poisson draw; inversion for small means, Hormann's PTRS otherwise.
inline std::uint64_t draw_poisson(RandomStream& rs, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ParameterError("draw_poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    double prod = rs.uniform();
    std::uint64_t k = 0;
    while (prod > limit) {
      prod *= rs.uniform();
      ++k;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rs.uniform() - 0.5;
    const double v = rs.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace hrlsgs
