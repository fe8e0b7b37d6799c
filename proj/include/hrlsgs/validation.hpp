#pragma once

// Brute-force oracles for the sampler's mathematics. Everything here is
// written against the augmented joint density directly and shares no code
// paths with the samplers' closed-form parameterizations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"
#include "hrlsgs/geometry.hpp"
#include "hrlsgs/operators.hpp"
#include "hrlsgs/priors.hpp"
#include "hrlsgs/rng.hpp"
#include "hrlsgs/sampler.hpp"
#include "hrlsgs/stats.hpp"

namespace hrlsgs::validation {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

/// Small dense problem for exhaustive enumeration. H is row-major m x n.
struct EnumerationCase {
  std::size_t m = 1;
  std::size_t n = 1;
  std::vector<std::uint64_t> y;
  std::vector<double> x;
  std::vector<double> h;
  double alpha = 1.0;

  double rate(std::size_t i, std::size_t j) const { return alpha * h[i * n + j] * x[j]; }
};

namespace detail {

/// log of the Poisson pmf; rate 0 is a point mass at 0.
inline double log_poisson_pmf(std::uint64_t k, double rate) {
  if (rate == 0.0) return k == 0 ? 0.0 : kNegInf;
  const double kd = static_cast<double>(k);
  return kd * std::log(rate) - rate - std::lgamma(kd + 1.0);
}

inline double binom(std::uint64_t a, std::uint64_t b) {
  double r = 1.0;
  for (std::uint64_t k = 1; k <= b; ++k) r = r * static_cast<double>(a - b + k) / static_cast<double>(k);
  return r;
}

/// Streaming log-sum-exp accumulator.
struct LogSum {
  double max = kNegInf;
  double scaled = 0.0;

  void add(double v) {
    if (v == kNegInf) return;
    if (v <= max) {
      scaled += std::exp(v - max);
    } else {
      scaled = scaled * std::exp(max - v) + 1.0;
      max = v;
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + std::log(scaled); }
};

/// All compositions of `total` into `parts` nonnegative parts, lexicographic order.
inline std::vector<std::vector<std::uint64_t>> compositions(std::uint64_t total, std::size_t parts) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur(parts, 0);
  auto rec = [&](auto&& self, std::size_t k, std::uint64_t left) -> void {
    if (k + 1 == parts) {
      cur[k] = left;
      out.push_back(cur);
      return;
    }
    for (std::uint64_t v = 0; v <= left; ++v) {
      cur[k] = v;
      self(self, k + 1, left - v);
    }
  };
  rec(rec, 0, total);
  return out;
}

inline double log_gamma_density(double v, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(v) - rate * v;
}

inline double log_invgamma_density(double v, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(v) - scale / v;
}

}  // namespace detail

inline std::uint64_t enumeration_size(const EnumerationCase& c) {
  double size = 1.0;
  for (auto yi : c.y) size *= detail::binom(yi + c.n - 1, c.n - 1);
  return size > 1e18 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(size);
}

inline void validate_case(const EnumerationCase& c) {
  if (c.m == 0 || c.n == 0) throw ParameterError("EnumerationCase: empty dimensions");
  if (c.y.size() != c.m || c.x.size() != c.n || c.h.size() != c.m * c.n) {
    throw ParameterError("EnumerationCase: inconsistent sizes");
  }
  if (!(c.alpha > 0.0)) throw ParameterError("EnumerationCase: alpha must be positive");
  for (double v : c.x) {
    if (!(v > 0.0)) throw ParameterError("EnumerationCase: x must be positive");
  }
  for (double v : c.h) {
    if (!(v >= 0.0)) throw ParameterError("EnumerationCase: H must be nonnegative");
  }
}

/// log p(y | x) for y_i ~ Poisson(alpha h_i^T x); -inf when a zero rate meets a positive count.
inline double poisson_loglik(const EnumerationCase& c) {
  validate_case(c);
  double ll = 0.0;
  for (std::size_t i = 0; i < c.m; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < c.n; ++j) r += c.rate(i, j);
    const double term = detail::log_poisson_pmf(c.y[i], r);
    if (term == kNegInf) return kNegInf;
    ll += term;
  }
  return ll;
}

/// log sum over all count matrices n with row sums y of prod_ij Poisson(n_ij; alpha h_ij x_j).
/// The joint over rows is enumerated directly (no per-row factorization).
inline double enumerate_augmented_marginal(const EnumerationCase& c) {
  validate_case(c);
  if (enumeration_size(c) > kEnumerationLimit) {
    throw ParameterError("enumerate_augmented_marginal: enumeration size exceeds 10^6");
  }
  std::vector<std::vector<std::vector<std::uint64_t>>> per_row(c.m);
  for (std::size_t i = 0; i < c.m; ++i) per_row[i] = detail::compositions(c.y[i], c.n);

  detail::LogSum acc;
  std::vector<std::size_t> pick(c.m, 0);
  for (;;) {
    double lp = 0.0;
    for (std::size_t i = 0; i < c.m && lp != kNegInf; ++i) {
      const auto& row = per_row[i][pick[i]];
      for (std::size_t j = 0; j < c.n; ++j) {
        const double t = detail::log_poisson_pmf(row[j], c.rate(i, j));
        if (t == kNegInf) {
          lp = kNegInf;
          break;
        }
        lp += t;
      }
    }
    acc.add(lp);
    std::size_t i = 0;
    while (i < c.m && ++pick[i] == per_row[i].size()) pick[i++] = 0;
    if (i == c.m) break;
  }
  return acc.value();
}

/// Random case with m <= 2, n <= 3, y_i <= 5; rows with y_i > 0 have positive mass.
inline EnumerationCase random_case(RandomStream& rs) {
  EnumerationCase c;
  c.m = 1 + static_cast<std::size_t>(rs.uniform() * 2.0);
  c.n = 1 + static_cast<std::size_t>(rs.uniform() * 3.0);
  c.alpha = 0.25 + 3.75 * rs.uniform();
  c.x.resize(c.n);
  for (double& v : c.x) v = 0.05 + 4.95 * rs.uniform();
  c.h.resize(c.m * c.n);
  for (double& v : c.h) v = rs.uniform() < 0.2 ? 0.0 : rs.uniform();
  c.y.resize(c.m);
  for (std::size_t i = 0; i < c.m; ++i) {
    c.y[i] = static_cast<std::uint64_t>(rs.uniform() * 6.0);
    if (c.y[i] > 0) {
      bool any = false;
      for (std::size_t j = 0; j < c.n; ++j) any = any || c.h[i * c.n + j] > 0.0;
      if (!any) c.h[i * c.n] = 0.5;
    }
  }
  return c;
}

enum class Block { CountsRow, X, Z1, Z2 };

/// Unnormalized log of the conditional of `which` at `point`, read off the
/// triply augmented joint
///   log pi = sum_ij [n_ij log(alpha h_ij x_j) - alpha h_ij x_j - log n_ij!]
///            - beta g(z1) - d_IS(z1, z2)/rho + phi(z1) - d_IS(x, z2)/rho + phi(z2),
/// phi(z) = -sum log z, with every other block frozen at `state`. For CountsRow,
/// `point` is row `row` of the latent count matrix (length n, integer valued)
/// and only that row's terms are kept; for the other blocks the counts enter
/// through their column sums state.s.
inline double conditional_logdensity(Block which, const ChainState& state, const PoissonModel& model,
                                     const ScorePrior& prior, double rho, std::span<const double> point,
                                     std::size_t row = 0) {
  const std::size_t n = model.n();
  if (point.size() != n) throw ParameterError("conditional_logdensity: point has wrong length");

  if (which == Block::CountsRow) {
    if (row >= model.m()) throw ParameterError("conditional_logdensity: row out of range");
    OperatorRow r;
    model.op->row_into(row, r);
    std::vector<double> h(n, 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) h[r.indices[k]] = r.weights[k];
    double total = 0.0, lp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = point[j];
      if (v < 0.0 || v != std::floor(v)) {
        throw DomainError("conditional_logdensity: counts must be nonnegative integers", {j});
      }
      total += v;
      const double rate = model.alpha * h[j] * state.x[j];
      lp -= rate;
      if (v == 0.0) continue;
      if (rate == 0.0) lp = kNegInf;
      else lp += v * std::log(rate) - std::lgamma(v + 1.0);
    }
    if (total != static_cast<double>(model.y[row])) {
      throw DomainError("conditional_logdensity: counts violate the coherence constraint for row " +
                        std::to_string(row));
    }
    return lp;
  }

  std::vector<std::size_t> bad;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(point[j] > 0.0)) bad.push_back(j);
  }
  if (!bad.empty()) throw DomainError("conditional_logdensity: point outside the positive orthant", bad);

  std::span<const double> x = state.x, z1 = state.z1, z2 = state.z2;
  if (which == Block::X) x = point;
  if (which == Block::Z1) z1 = point;
  if (which == Block::Z2) z2 = point;

  const auto& cs = model.op->col_sums();
  double lp = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    lp += static_cast<double>(state.s[j]) * std::log(x[j]) - model.alpha * cs[j] * x[j];
  }
  if (which == Block::Z1 && prior.beta() != 0.0) {
    const auto g = prior.potential(z1);
    if (!g) throw ParameterError("conditional_logdensity: prior has no closed-form potential");
    lp -= prior.beta() * *g;
  }
  lp -= bregman_div(DivergenceKind::ItakuraSaito, z1, z2) / rho;
  lp -= bregman_div(DivergenceKind::ItakuraSaito, x, z2) / rho;
  for (std::size_t j = 0; j < n; ++j) lp -= std::log(z1[j]) + std::log(z2[j]);
  return lp;
}

struct OracleResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Exactness battery: enumerated augmented marginal vs direct likelihood.
inline OracleResult oracle_exact_augmentation(std::uint64_t seed, std::size_t cases = 100, double tol = 1e-12) {
  RandomStream rs(seed, substream_id(StreamKind::oracle, 1, 0));
  double worst = 0.0;
  for (std::size_t k = 0; k < cases; ++k) {
    const EnumerationCase c = random_case(rs);
    const double a = enumerate_augmented_marginal(c), b = poisson_loglik(c);
    const double rel = std::fabs(a - b) / std::max(1.0, std::fabs(b));
    worst = std::max(worst, rel);
  }
  return {"exact_augmentation", worst <= tol,
          std::to_string(cases) + " cases, worst relative log error " + format_double(worst)};
}

/// Frozen single-pixel state used by the conditional checks.
struct FrozenConditional {
  PoissonModel model;
  ChainState state;
  double rho;
};

inline FrozenConditional frozen_pixel(std::uint64_t s, double z1, double z2, double rho, double alpha = 1.0) {
  FrozenConditional f{PoissonModel{{s}, alpha, std::make_shared<IdentityOperator>(1)}, ChainState{{1.0}, {s}, {z1}, {z2}},
                      rho};
  return f;
}

/// Log-density differences of the joint conditionals vs the closed-form families.
inline OracleResult oracle_conditional_densities(std::uint64_t seed, double tol = 1e-10) {
  RandomStream rs(seed, substream_id(StreamKind::oracle, 2, 0));
  const FlatPrior flat;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double rho = 0.02 + 1.5 * rs.uniform();
    const auto s = static_cast<std::uint64_t>(rs.uniform() * 30.0);
    const double z1 = 0.1 + 5.0 * rs.uniform(), z2 = 0.1 + 5.0 * rs.uniform(), x = 0.1 + 5.0 * rs.uniform();
    const double alpha = 0.5 + 40.0 * rs.uniform();
    FrozenConditional f = frozen_pixel(s, z1, z2, rho, alpha);
    f.state.x = {x};
    const double a = 0.1 + 5.0 * rs.uniform(), b = 0.1 + 5.0 * rs.uniform();
    auto diff = [&](Block blk) {
      const double pa = conditional_logdensity(blk, f.state, f.model, flat, rho, std::vector<double>{a});
      const double pb = conditional_logdensity(blk, f.state, f.model, flat, rho, std::vector<double>{b});
      return pa - pb;
    };
    const double gx = detail::log_gamma_density(a, s + 1.0 / rho + 1.0, alpha + 1.0 / (rho * z2)) -
                      detail::log_gamma_density(b, s + 1.0 / rho + 1.0, alpha + 1.0 / (rho * z2));
    const double gz2 = detail::log_invgamma_density(a, 2.0 / rho, (x + z1) / rho) -
                       detail::log_invgamma_density(b, 2.0 / rho, (x + z1) / rho);
    const double gz1 = detail::log_gamma_density(a, 1.0 / rho, 1.0 / (rho * z2)) -
                       detail::log_gamma_density(b, 1.0 / rho, 1.0 / (rho * z2));
    for (auto [got, want] : {std::pair{diff(Block::X), gx}, {diff(Block::Z2), gz2}, {diff(Block::Z1), gz1}}) {
      worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
    }
  }
  // Counts row against the multinomial pmf.
  auto op = SparseOperator::from_dense(1, 3, std::vector<double>{0.5, 1.0, 2.0});
  PoissonModel model{{6}, 1.7, op};
  ChainState st{{0.3, 1.1, 0.7}, {0, 0, 0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  const std::vector<double> w{0.5 * 0.3, 1.0 * 1.1, 2.0 * 0.7};
  const double wsum = w[0] + w[1] + w[2];
  auto multinomial_logpmf = [&](const std::vector<double>& k) {
    double v = std::lgamma(7.0);
    for (int j = 0; j < 3; ++j) v += k[j] * std::log(w[j] / wsum) - std::lgamma(k[j] + 1.0);
    return v;
  };
  const std::vector<double> ka{1, 2, 3}, kb{4, 0, 2};
  const double got = conditional_logdensity(Block::CountsRow, st, model, flat, 1.0, ka) -
                     conditional_logdensity(Block::CountsRow, st, model, flat, 1.0, kb);
  const double want = multinomial_logpmf(ka) - multinomial_logpmf(kb);
  worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
  return {"conditional_logdensity", worst <= tol, "worst relative difference " + format_double(worst)};
}

/// Goodness of fit of the three closed-form samplers on frozen states.
inline std::vector<OracleResult> oracle_sampler_gof(std::uint64_t seed, std::size_t draws = 100'000,
                                                    double p_min = 1e-3) {
  std::vector<OracleResult> out;
  const double rho = 0.25;
  const std::size_t n = draws;
  {
    // x | s, z2 on n identical pixels: one step_x call yields n iid draws.
    auto op = std::make_shared<IdentityOperator>(n);
    PoissonModel model{std::vector<std::uint64_t>(n, 0), 2.0, op};
    std::vector<std::uint64_t> s(n, 7);
    std::vector<double> z2(n, 1.5);
    const auto x = step_x(model, s, z2, rho, SweepKey{seed, 11});
    const double shape = 7.0 + 1.0 / rho + 1.0, rate = 2.0 + 1.0 / (rho * 1.5);
    const auto r = stats::ks_one_sample(x, [&](double v) { return stats::gamma_cdf(shape, rate, v); });
    out.push_back({"gof_x_gamma", r.p_value > p_min, "KS D=" + format_double(r.statistic) + " p=" + format_double(r.p_value)});
  }
  {
    std::vector<double> x(n, 0.8), z1(n, 2.3);
    const auto z2 = step_z2(x, z1, rho, SweepKey{seed, 12});
    const double shape = 2.0 / rho, scale = (0.8 + 2.3) / rho;
    const auto r = stats::ks_one_sample(z2, [&](double v) { return stats::invgamma_cdf(shape, scale, v); });
    out.push_back({"gof_z2_invgamma", r.p_value > p_min, "KS D=" + format_double(r.statistic) + " p=" + format_double(r.p_value)});
  }
  {
    // Counts: many rows sharing one multinomial; chi-square on the full outcome table.
    const std::uint64_t y = 4;
    const std::vector<double> hrow{0.5, 1.0, 2.0}, x{0.3, 1.1, 0.7};
    const auto comps = detail::compositions(y, 3);
    std::vector<double> observed(comps.size(), 0.0), probs(comps.size());
    double wsum = 0.0;
    for (int j = 0; j < 3; ++j) wsum += hrow[j] * x[j];
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double lp = std::lgamma(y + 1.0);
      for (int j = 0; j < 3; ++j) {
        const double k = static_cast<double>(comps[c][j]);
        lp += k * std::log(hrow[j] * x[j] / wsum) - std::lgamma(k + 1.0);
      }
      probs[c] = std::exp(lp);
    }
    auto op = SparseOperator::from_dense(1, 3, hrow);
    PoissonModel model{{y}, 1.0, op};
    for (std::size_t d = 0; d < n; ++d) {
      const auto s = step_counts(model, x, SweepKey{seed, 1'000'000 + d});
      const auto it = std::find(comps.begin(), comps.end(), s);
      observed[static_cast<std::size_t>(it - comps.begin())] += 1.0;
    }
    const auto r = stats::chi_square_gof(observed, probs);
    out.push_back({"gof_counts_multinomial", r.p_value > p_min,
                   "chi2=" + format_double(r.statistic) + " p=" + format_double(r.p_value)});
  }
  return out;
}

/// Central finite differences of U = -log p(z1 | z2) against grad_potential_u.
inline double grad_u_fd_error(const ScorePrior& prior, std::span<const double> z1, std::span<const double> z2,
                              double rho, double step = 1e-6) {
  const std::size_t n = z1.size();
  PoissonModel model{std::vector<std::uint64_t>(n, 0), 1.0, std::make_shared<IdentityOperator>(n)};
  ChainState st{std::vector<double>(n, 1.0), std::vector<std::uint64_t>(n, 0), {z1.begin(), z1.end()},
                {z2.begin(), z2.end()}};
  const auto g = grad_potential_u(z1, z2, prior, rho);
  std::vector<double> p(z1.begin(), z1.end());
  double worst = 0.0, scale = 0.0;
  for (double v : g) scale = std::max(scale, std::fabs(v));
  for (std::size_t j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, z1[j]);
    p[j] = z1[j] + h;
    const double up = -conditional_logdensity(Block::Z1, st, model, prior, rho, p);
    p[j] = z1[j] - h;
    const double dn = -conditional_logdensity(Block::Z1, st, model, prior, rho, p);
    p[j] = z1[j];
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst, std::fabs(fd - g[j]) / std::max({1.0, std::fabs(g[j]), 1e-3 * scale}));
  }
  return worst;
}

inline OracleResult oracle_grad_u(std::uint64_t seed, double tol = 1e-5) {
  RandomStream rs(seed, substream_id(StreamKind::oracle, 4, 0));
  const std::size_t h = 6, w = 6, n = h * w;
  const FlatPrior flat;
  const TikhonovPrior tik(std::vector<double>{0.5}, 2.0);
  const SmoothedTVPrior tv(h, w, SmoothedTVParams{0.1, 1.5});
  const RedPrior red(std::make_shared<GaussianDenoiser>(h, w, 1.0), 0.8);
  const ScorePrior* priors[] = {&flat, &tik, &tv, &red};
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> z1(n), z2(n);
    for (double& v : z1) v = 0.2 + 2.0 * rs.uniform();
    for (double& v : z2) v = 0.2 + 2.0 * rs.uniform();
    const double rho = 0.05 + rs.uniform();
    for (const ScorePrior* p : priors) worst = std::max(worst, grad_u_fd_error(*p, z1, z2, rho));
  }
  return {"grad_u_finite_difference", worst <= tol,
          "100 points over flat/tikhonov/tv/red, worst relative error " + format_double(worst)};
}

inline OracleResult oracle_convergence_constants() {
  struct Case {
    double eps, C, beta, rho, L, m, M, rho_max;
  };
  const Case cases[] = {
      {0.5, 1.0, 1.0, 0.5, 0.0, 1.0625, 2.0, 1.0},
      {0.5, 1.0, 3.0, 0.25, 0.0625, 3.0, 3.0 * 1.0625 + 3.0, 1.0},
      {0.5, 1.0, 2.0, 0.25, 1.0, 3.0 + 2.0 * (0.0625 - 1.0), 2.0 * 2.0 + 3.0, 1.0 / 2.875},
  };
  double worst = 0.0;
  for (const Case& c : cases) {
    const auto k = check_convergence_constants(c.eps, c.C, c.beta, c.rho, c.L);
    worst = std::max({worst, std::fabs(k.m - c.m), std::fabs(k.M - c.M), std::fabs(k.rho_max - c.rho_max)});
  }
  std::size_t violations = 0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      for (int r = 0; r < 10; ++r) {
        const double eps = 0.1 + 0.09 * a, beta = 0.1 + 0.5 * b, L = 0.2 * r;
        for (double rho : {0.01, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0}) {
          const auto k = check_convergence_constants(eps, 1.0, beta, rho, L);
          if (rho < k.rho_max && rho <= 1.0 && !(k.m > 0.0)) ++violations;
        }
      }
    }
  }
  return {"convergence_constants", worst <= 1e-12 && violations == 0,
          "worked examples max error " + format_double(worst) + ", grid violations " + std::to_string(violations)};
}

/// The full battery as run by the `oracle` subcommand.
inline std::vector<OracleResult> run_oracle_battery(std::uint64_t seed, std::size_t gof_draws = 100'000) {
  std::vector<OracleResult> out;
  out.push_back(oracle_exact_augmentation(seed));
  out.push_back(oracle_conditional_densities(seed));
  for (auto& r : oracle_sampler_gof(seed, gof_draws)) out.push_back(std::move(r));
  out.push_back(oracle_grad_u(seed));
  out.push_back(oracle_convergence_constants());
  return out;
}

}  // namespace hrlsgs::validation
