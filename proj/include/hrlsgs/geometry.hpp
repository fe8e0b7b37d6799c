#pragma once

// Separable Bregman generators and their mirror-map calculus.
//
//   HalfSquaredNorm  h(x) = 1/2 |x|^2          -> Euclidean divergence
//   NegEntropy       h(x) = sum x log x - x    -> generalized KL
//   BurgEntropy      h(x) = -sum log x         -> Itakura-Saito
//
// Hessians are diagonal for all three and are returned as vectors.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"

namespace hrlsgs {

enum class MirrorKind { BurgEntropy, NegEntropy, HalfSquaredNorm };
enum class DivergenceKind { Euclidean, KL, ItakuraSaito };

/// Entries at or below this bound are treated as having left the positive orthant.
inline constexpr double kDomainFloor = 1e-300;

struct MirrorMap {
  MirrorKind kind = MirrorKind::BurgEntropy;

  bool positive_domain() const noexcept { return kind != MirrorKind::HalfSquaredNorm; }
};

constexpr MirrorMap mirror_for(DivergenceKind d) noexcept {
  switch (d) {
    case DivergenceKind::Euclidean:
      return {MirrorKind::HalfSquaredNorm};
    case DivergenceKind::KL:
      return {MirrorKind::NegEntropy};
    case DivergenceKind::ItakuraSaito:
      return {MirrorKind::BurgEntropy};
  }
  return {};
}

inline const char* to_string(MirrorKind k) noexcept {
  switch (k) {
    case MirrorKind::BurgEntropy:
      return "burg";
    case MirrorKind::NegEntropy:
      return "negentropy";
    case MirrorKind::HalfSquaredNorm:
      return "half_squared_norm";
  }
  return "?";
}

namespace detail {

inline void check_domain(MirrorMap map, std::span<const double> z, const char* where) {
  std::vector<std::size_t> bad;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const bool ok = std::isfinite(z[j]) && (!map.positive_domain() || z[j] > kDomainFloor);
    if (!ok) bad.push_back(j);
  }
  if (!bad.empty()) {
    throw DomainError(std::string(where) + ": argument outside the " + to_string(map.kind) +
                          " domain at index " + join_indices(bad),
                      bad);
  }
}

inline void check_same_length(std::span<const double> a, std::span<const double> b, const char* where) {
  if (a.size() != b.size()) throw ParameterError(std::string(where) + ": length mismatch");
}

}  // namespace detail

/// Generator value h(x).
inline double generator(MirrorMap map, std::span<const double> x) {
  detail::check_domain(map, x, "generator");
  double acc = 0.0;
  switch (map.kind) {
    case MirrorKind::BurgEntropy:
      for (double v : x) acc -= std::log(v);
      break;
    case MirrorKind::NegEntropy:
      for (double v : x) acc += v * std::log(v) - v;
      break;
    case MirrorKind::HalfSquaredNorm:
      for (double v : x) acc += 0.5 * v * v;
      break;
  }
  return acc;
}

inline std::vector<double> mirror_grad(MirrorMap map, std::span<const double> z) {
  detail::check_domain(map, z, "mirror_grad");
  std::vector<double> g(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    switch (map.kind) {
      case MirrorKind::BurgEntropy:
        g[j] = -1.0 / z[j];
        break;
      case MirrorKind::NegEntropy:
        g[j] = std::log(z[j]);
        break;
      case MirrorKind::HalfSquaredNorm:
        g[j] = z[j];
        break;
    }
  }
  return g;
}

inline std::vector<double> mirror_hess_diag(MirrorMap map, std::span<const double> z) {
  detail::check_domain(map, z, "mirror_hess_diag");
  std::vector<double> h(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    switch (map.kind) {
      case MirrorKind::BurgEntropy:
        h[j] = 1.0 / (z[j] * z[j]);
        break;
      case MirrorKind::NegEntropy:
        h[j] = 1.0 / z[j];
        break;
      case MirrorKind::HalfSquaredNorm:
        h[j] = 1.0;
        break;
    }
  }
  return h;
}

/// Legendre inverse of mirror_grad. Burg requires theta < 0 componentwise.
inline std::vector<double> mirror_grad_inverse(MirrorMap map, std::span<const double> theta) {
  std::vector<std::size_t> bad;
  std::vector<double> z(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double t = theta[j];
    if (!std::isfinite(t)) {
      bad.push_back(j);
      continue;
    }
    switch (map.kind) {
      case MirrorKind::BurgEntropy:
        if (t >= 0.0) bad.push_back(j);
        else z[j] = -1.0 / t;
        break;
      case MirrorKind::NegEntropy:
        z[j] = std::exp(t);
        if (!(z[j] > kDomainFloor)) bad.push_back(j);
        break;
      case MirrorKind::HalfSquaredNorm:
        z[j] = t;
        break;
    }
  }
  if (!bad.empty()) {
    throw RangeError(std::string("mirror_grad_inverse: argument outside the range of the ") + to_string(map.kind) +
                         " gradient at index " + detail::join_indices(bad),
                     bad);
  }
  return z;
}

/// Closed-form Bregman divergence d_h(x, z).
inline double bregman_div(DivergenceKind kind, std::span<const double> x, std::span<const double> z) {
  detail::check_same_length(x, z, "bregman_div");
  const MirrorMap map = mirror_for(kind);
  detail::check_domain(map, x, "bregman_div");
  detail::check_domain(map, z, "bregman_div");
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    switch (kind) {
      case DivergenceKind::Euclidean: {
        const double d = x[j] - z[j];
        acc += 0.5 * d * d;
        break;
      }
      case DivergenceKind::KL:
        acc += x[j] * std::log(x[j] / z[j]) - x[j] + z[j];
        break;
      case DivergenceKind::ItakuraSaito: {
        const double r = x[j] / z[j];
        acc += r - std::log(r) - 1.0;
        break;
      }
    }
  }
  // Rounding can leave tiny negatives for nearly equal arguments.
  return acc < 0.0 ? 0.0 : acc;
}

}  // namespace hrlsgs
