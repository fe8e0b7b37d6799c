#pragma once

// Split Gibbs sampler for Poisson inverse problems with a double
// Itakura-Saito splitting. One sweep, in fixed order:
//
//   counts  n_i | x, y_i     ~ Multinomial(y_i, h_ij x_j / sum_k h_ik x_k)
//   x       x_j | s_j, z2_j  ~ Gamma(s_j + 1/rho + 1, alpha colsum_j + 1/(rho z2_j))
//   z1      one or more mirror-Langevin steps on U(z1) with the Burg mirror map
//   z2      z2_j | x_j, z1_j ~ InvGamma(2/rho, (x_j + z1_j)/rho)
//
// Latent counts are never stored as an m x n array: x only needs the column
// sums s_j = sum_i n_ij, which are regenerated every sweep.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"
#include "hrlsgs/geometry.hpp"
#include "hrlsgs/operators.hpp"
#include "hrlsgs/parallel.hpp"
#include "hrlsgs/priors.hpp"
#include "hrlsgs/rng.hpp"

namespace hrlsgs {

/// y_i ~ Poisson(alpha h_i^T x).
struct PoissonModel {
  std::vector<std::uint64_t> y;
  double alpha = 1.0;
  std::shared_ptr<const ForwardOperator> op;

  std::size_t n() const noexcept { return op->cols(); }
  std::size_t m() const noexcept { return op->rows(); }

  void validate() const {
    if (!op) throw ModelError("PoissonModel: missing forward operator");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ModelError("PoissonModel: alpha must be positive");
    if (y.size() != op->rows()) {
      throw ModelError("PoissonModel: " + std::to_string(y.size()) + " counts for " + std::to_string(op->rows()) +
                       " operator rows");
    }
    OperatorRow r;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == 0) continue;
      op->row_into(i, r);
      if (r.empty()) throw ModelError("PoissonModel: row " + std::to_string(i) + " is empty but y_i > 0");
    }
  }
};

struct SamplerConfig {
  double rho = 0.1;
  double gamma_step = 1e-3;
  unsigned inner_steps = 1;
  std::uint64_t n_mc = 1000;
  std::uint64_t n_bi = 500;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;
  double theta_guard = 1e-10;
  unsigned threads = 1;
  std::size_t block_size = 1024;
  std::size_t trace_pixel = 0;

  bool operator==(const SamplerConfig&) const = default;

  void validate() const {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("SamplerConfig: rho must be positive");
    if (!(gamma_step > 0.0) || !std::isfinite(gamma_step)) throw ParameterError("SamplerConfig: gamma must be positive");
    if (inner_steps == 0) throw ParameterError("SamplerConfig: inner_steps must be >= 1");
    if (n_mc == 0) throw ParameterError("SamplerConfig: n_mc must be >= 1");
    if (n_bi >= n_mc) throw ParameterError("SamplerConfig: need n_bi < n_mc");
    if (thin == 0) throw ParameterError("SamplerConfig: thin must be >= 1");
    if (!(theta_guard > 0.0)) throw ParameterError("SamplerConfig: theta_guard must be positive");
    if (block_size == 0) throw ParameterError("SamplerConfig: block_size must be >= 1");
  }
};

/// Mutable state of one sweep; s holds the column sums of the latent counts.
struct ChainState {
  std::vector<double> x;
  std::vector<std::uint64_t> s;
  std::vector<double> z1;
  std::vector<double> z2;

  bool valid() const noexcept {
    const std::size_t n = x.size();
    if (s.size() != n || z1.size() != n || z2.size() != n) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(x[j] > 0.0) || !(z1[j] > 0.0) || !(z2[j] > 0.0)) return false;
    }
    return true;
  }
};

/// Post-burn-in samples kept every `thin` sweeps, row-major (sample, pixel).
struct ThinnedSamples {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t count() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> sample(std::size_t k) const noexcept { return {data.data() + k * dim, dim}; }
  void push(std::span<const double> v) { data.insert(data.end(), v.begin(), v.end()); }
};

/// Running mean and second central moment of x plus the thinned store.
struct PosteriorSummary {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;
  ThinnedSamples thinned;

  explicit PosteriorSummary(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0), thinned{n, {}} {}

  void accumulate(std::span<const double> x) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - mean[j];
      mean[j] += d * inv;
      m2[j] += d * (x[j] - mean[j]);
    }
  }

  std::vector<double> variance() const {
    std::vector<double> v(mean.size(), 0.0);
    if (count < 2) return v;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::max(0.0, m2[j] / static_cast<double>(count - 1));
    return v;
  }

  std::vector<double> stddev() const {
    auto v = variance();
    for (double& e : v) e = std::sqrt(e);
    return v;
  }
};

/// Per-sweep scalar traces and mirror-guard counters.
struct DiagnosticsBundle {
  std::vector<double> potential_trace;  // U(z1) after each sweep
  std::vector<double> mean_x_trace;
  std::vector<double> pixel_trace;      // x at SamplerConfig::trace_pixel
  std::uint64_t guard_hits = 0;
  std::uint64_t component_steps = 0;
  bool potential_includes_prior = true;

  double guard_rate() const noexcept {
    return component_steps == 0 ? 0.0 : static_cast<double>(guard_hits) / static_cast<double>(component_steps);
  }
};

/// Keys the random streams of one step of one sweep. Each block of rows or
/// components draws from its own substream, so results do not depend on the
/// thread count.
struct SweepKey {
  std::uint64_t seed = 0;
  std::uint64_t sweep = 0;
};

inline RandomStream block_stream(SweepKey key, StreamKind kind, std::uint64_t block) {
  return RandomStream(key.seed, substream_id(kind, key.sweep, block));
}

namespace detail {

inline std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

}  // namespace detail

/// Multinomial step; returns the column sums of the fresh latent counts.
inline std::vector<std::uint64_t> step_counts(const PoissonModel& model, std::span<const double> x, SweepKey key,
                                              unsigned threads = 1, std::size_t block = 1024) {
  const ForwardOperator& op = *model.op;
  const std::size_t m = op.rows(), n = op.cols();
  if (x.size() != n) throw ParameterError("step_counts: x has wrong length");
  const std::size_t nblocks = detail::block_count(m, block);
  const bool shared = threads <= 1 || nblocks <= 1;
  std::vector<std::uint64_t> s(n, 0);
  std::vector<std::vector<std::uint64_t>> partial(shared ? 0 : nblocks);

  parallel_for_blocks(nblocks, threads, [&](std::size_t b) {
    std::vector<std::uint64_t>& acc = shared ? s : (partial[b] = std::vector<std::uint64_t>(n, 0));
    RandomStream rs = block_stream(key, StreamKind::counts, b);
    OperatorRow row;
    std::vector<double> w;
    const std::size_t hi = std::min(m, (b + 1) * block);
    for (std::size_t i = b * block; i < hi; ++i) {
      const std::uint64_t yi = model.y[i];
      if (yi == 0) continue;
      op.row_into(i, row);
      w.resize(row.size());
      double total = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        w[k] = row.weights[k] * x[row.indices[k]];
        total += w[k];
      }
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw ModelError("step_counts: row " + std::to_string(i) + " has zero intensity but y_i = " +
                         std::to_string(yi));
      }
      multinomial_partition(rs, yi, w, [&](std::size_t k, std::uint64_t c) { acc[row.indices[k]] += c; });
    }
  });
  if (!shared) {
    for (const auto& p : partial) {
      if (p.empty()) continue;
      for (std::size_t j = 0; j < n; ++j) s[j] += p[j];
    }
  }
  return s;
}

/// Gamma step for x; shape s_j + 1/rho + 1, rate alpha colsum_j + 1/(rho z2_j).
inline std::vector<double> step_x(const PoissonModel& model, std::span<const std::uint64_t> s,
                                  std::span<const double> z2, double rho, SweepKey key, unsigned threads = 1,
                                  std::size_t block = 1024) {
  const std::vector<double>& cs = model.op->col_sums();
  const std::size_t n = cs.size();
  if (s.size() != n || z2.size() != n) throw ParameterError("step_x: length mismatch");
  std::vector<double> x(n);
  parallel_for_blocks(detail::block_count(n, block), threads, [&](std::size_t b) {
    RandomStream rs = block_stream(key, StreamKind::x, b);
    const std::size_t hi = std::min(n, (b + 1) * block);
    for (std::size_t j = b * block; j < hi; ++j) {
      const GammaParams p{static_cast<double>(s[j]) + 1.0 / rho + 1.0, model.alpha * cs[j] + 1.0 / (rho * z2[j])};
      x[j] = draw_gamma(rs, p);
    }
  });
  return x;
}

/// Inverse-gamma step for z2; shape 2/rho, scale (x_j + z1_j)/rho.
inline std::vector<double> step_z2(std::span<const double> x, std::span<const double> z1, double rho, SweepKey key,
                                   unsigned threads = 1, std::size_t block = 1024) {
  const std::size_t n = x.size();
  if (z1.size() != n) throw ParameterError("step_z2: length mismatch");
  std::vector<double> z2(n);
  parallel_for_blocks(detail::block_count(n, block), threads, [&](std::size_t b) {
    RandomStream rs = block_stream(key, StreamKind::z2, b);
    const std::size_t hi = std::min(n, (b + 1) * block);
    for (std::size_t j = b * block; j < hi; ++j) {
      z2[j] = draw_invgamma(rs, InvGammaParams{2.0 / rho, (x[j] + z1[j]) / rho});
    }
  });
  return z2;
}

/// U(z1) = beta g(z1) + sum log z1 + (1/rho) sum (z1/z2 - log z1). Returns the
/// value without the g term when the prior has no closed-form potential.
inline double potential_u(std::span<const double> z1, std::span<const double> z2, const ScorePrior& prior, double rho,
                          bool* includes_prior = nullptr) {
  double acc = 0.0;
  for (std::size_t j = 0; j < z1.size(); ++j) {
    const double lz = std::log(z1[j]);
    acc += lz + (z1[j] / z2[j] - lz) / rho;
  }
  std::optional<double> g;
  if (prior.beta() != 0.0) g = prior.potential(z1);
  else g = 0.0;
  if (includes_prior) *includes_prior = g.has_value();
  return acc + (g ? prior.beta() * *g : 0.0);
}

/// grad U(z1) = beta grad g(z1) + 1/(rho z2) + (1 - 1/rho)/z1.
inline std::vector<double> grad_potential_u(std::span<const double> z1, std::span<const double> z2,
                                            const ScorePrior& prior, double rho) {
  const std::size_t n = z1.size();
  std::vector<double> g(n, 0.0);
  if (prior.beta() != 0.0) {
    prior.score_into(z1, g);
    ScorePrior::check_finite(g, "prior score");
  }
  const double beta = prior.beta();
  for (std::size_t j = 0; j < n; ++j) g[j] = beta * g[j] + 1.0 / (rho * z2[j]) + (1.0 - 1.0 / rho) / z1[j];
  return g;
}

struct Z1StepResult {
  std::vector<double> z1;
  std::uint64_t guard_hits = 0;
  std::uint64_t component_steps = 0;
};

/// Mirror-Langevin update(s) of z1 with the Burg mirror map:
///   theta = grad phi(z1) - gamma grad U(z1) + sqrt(2 gamma hess phi(z1)) eps
///   z1'   = (grad phi)^-1(theta)
/// Components with theta_j >= -theta_guard are clamped to -theta_guard and counted.
inline Z1StepResult step_z1_hrlmc(std::span<const double> z1, std::span<const double> z2, const ScorePrior& prior,
                                  const SamplerConfig& cfg, SweepKey key) {
  constexpr MirrorMap burg{MirrorKind::BurgEntropy};
  const std::size_t n = z1.size();
  if (z2.size() != n) throw ParameterError("step_z1_hrlmc: length mismatch");
  Z1StepResult res;
  res.z1.assign(z1.begin(), z1.end());
  const double gamma = cfg.gamma_step;
  const double noise = std::sqrt(2.0 * gamma);
  const std::size_t block = cfg.block_size;
  const std::size_t nblocks = detail::block_count(n, block);
  std::vector<std::uint64_t> hits(nblocks);
  for (unsigned inner = 0; inner < cfg.inner_steps; ++inner) {
    const std::vector<double> grad_u = grad_potential_u(res.z1, z2, prior, cfg.rho);
    std::vector<double> theta = mirror_grad(burg, res.z1);
    const std::vector<double> hess = mirror_hess_diag(burg, res.z1);
    std::fill(hits.begin(), hits.end(), 0);
    parallel_for_blocks(nblocks, cfg.threads, [&](std::size_t b) {
      RandomStream rs(key.seed, substream_id(StreamKind::z1, key.sweep, (std::uint64_t{inner} << 32) | b));
      const std::size_t lo = b * block, hi = std::min(n, lo + block);
      std::span<double> theta_block(theta.data() + lo, hi - lo);
      std::vector<double> e(hi - lo);
      fill_std_normal(rs, e);
      for (std::size_t j = lo; j < hi; ++j) {
        double t = theta[j] - gamma * grad_u[j] + noise * std::sqrt(hess[j]) * e[j - lo];
        if (!(t < -cfg.theta_guard)) {
          if (std::isnan(t)) {
            throw NumericalError("step_z1_hrlmc: NaN in mirror update at index " + std::to_string(j), {j});
          }
          t = -cfg.theta_guard;
          ++hits[b];
        }
        theta_block[j - lo] = t;
      }
    });
    res.z1 = mirror_grad_inverse(burg, theta);
    for (auto h : hits) res.guard_hits += h;
    res.component_steps += n;
  }
  return res;
}

/// Constant start max(mean(y) / (alpha mean(colsum)), 1e-3) for x, z1, z2.
inline ChainState default_init(const PoissonModel& model) {
  const std::size_t n = model.n();
  const auto& cs = model.op->col_sums();
  double ysum = 0.0;
  for (auto v : model.y) ysum += static_cast<double>(v);
  const double ymean = model.y.empty() ? 0.0 : ysum / static_cast<double>(model.y.size());
  const double csmean = std::accumulate(cs.begin(), cs.end(), 0.0) / static_cast<double>(n);
  double v = csmean > 0.0 ? ymean / (model.alpha * csmean) : 0.0;
  if (!(v > 1e-3) || !std::isfinite(v)) v = 1e-3;
  return ChainState{std::vector<double>(n, v), std::vector<std::uint64_t>(n, 0), std::vector<double>(n, v),
                    std::vector<double>(n, v)};
}

/// Prior used during burn-in and during sampling (they may differ in strength).
struct PriorSchedule {
  const ScorePrior* burn_in;
  const ScorePrior* sampling;

  PriorSchedule(const ScorePrior& p) : burn_in(&p), sampling(&p) {}  // NOLINT(implicit)
  PriorSchedule(const ScorePrior& bi, const ScorePrior& s) : burn_in(&bi), sampling(&s) {}

  const ScorePrior& at(std::uint64_t sweep, std::uint64_t n_bi) const noexcept {
    return sweep < n_bi ? *burn_in : *sampling;
  }
};

struct ChainResult {
  PosteriorSummary summary;
  DiagnosticsBundle diagnostics;
  ChainState final_state;
};

namespace detail {

[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& where) {
  const std::string msg = where + ": " + e.what();
  switch (e.exit_code()) {
    case ExitCode::model:
      throw ModelError(msg);
    case ExitCode::config:
      throw ParameterError(msg);
    default:
      throw NumericalError(msg);
  }
}

inline constexpr char kCheckpointMagic[8] = {'H', 'R', 'L', 'S', 'G', 'S', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

inline void put_f64s(std::ostream& os, std::span<const double> v) {
  put_u64(os, v.size());
  for (double d : v) put_u64(os, std::bit_cast<std::uint64_t>(d));
}

inline std::vector<double> get_f64s(std::istream& is, std::uint64_t limit) {
  const std::uint64_t n = get_u64(is);
  if (n > limit) throw ConfigError("checkpoint: implausible vector length");
  std::vector<double> v(n);
  for (double& d : v) d = std::bit_cast<double>(get_u64(is));
  return v;
}

}  // namespace detail

/// Drives the sweeps of one chain; can be checkpointed and resumed mid-run.
class ChainRunner {
 public:
  ChainRunner(const PoissonModel& model, PriorSchedule priors, SamplerConfig cfg,
              std::optional<ChainState> init = std::nullopt)
      : model_(&model), priors_(priors), cfg_(cfg) {
    cfg_.validate();
    model.validate();
    state_ = init ? std::move(*init) : default_init(model);
    if (state_.x.size() != model.n() || !state_.valid()) {
      throw ParameterError("ChainRunner: initial state violates positivity or size constraints");
    }
    summary_ = PosteriorSummary(model.n());
    if (cfg_.trace_pixel >= model.n()) cfg_.trace_pixel = 0;
  }

  std::uint64_t sweep() const noexcept { return sweep_; }
  bool done() const noexcept { return sweep_ >= cfg_.n_mc; }
  const ChainState& state() const noexcept { return state_; }
  const PosteriorSummary& summary() const noexcept { return summary_; }
  const DiagnosticsBundle& diagnostics() const noexcept { return diag_; }
  const SamplerConfig& config() const noexcept { return cfg_; }

  void run() { run_until(cfg_.n_mc); }

  void run_until(std::uint64_t stop) {
    stop = std::min(stop, cfg_.n_mc);
    while (sweep_ < stop) step();
  }

  /// One full sweep: counts, x, z1, z2.
  void step() {
    const SweepKey key{cfg_.seed, sweep_};
    const ScorePrior& prior = priors_.at(sweep_, cfg_.n_bi);
    const std::string at = "sweep " + std::to_string(sweep_);
    try {
      state_.s = step_counts(*model_, state_.x, key, cfg_.threads, cfg_.block_size);
    } catch (const Error& e) {
      detail::rethrow_with_context(e, at + ", counts step");
    }
    try {
      state_.x = step_x(*model_, state_.s, state_.z2, cfg_.rho, key, cfg_.threads, cfg_.block_size);
    } catch (const Error& e) {
      detail::rethrow_with_context(e, at + ", x step");
    }
    try {
      Z1StepResult r = step_z1_hrlmc(state_.z1, state_.z2, prior, cfg_, key);
      state_.z1 = std::move(r.z1);
      diag_.guard_hits += r.guard_hits;
      diag_.component_steps += r.component_steps;
    } catch (const Error& e) {
      detail::rethrow_with_context(e, at + ", z1 step");
    }
    try {
      state_.z2 = step_z2(state_.x, state_.z1, cfg_.rho, key, cfg_.threads, cfg_.block_size);
    } catch (const Error& e) {
      detail::rethrow_with_context(e, at + ", z2 step");
    }

    bool with_prior = true;
    diag_.potential_trace.push_back(potential_u(state_.z1, state_.z2, prior, cfg_.rho, &with_prior));
    diag_.potential_includes_prior = diag_.potential_includes_prior && with_prior;
    diag_.mean_x_trace.push_back(std::accumulate(state_.x.begin(), state_.x.end(), 0.0) /
                                 static_cast<double>(state_.x.size()));
    diag_.pixel_trace.push_back(state_.x[cfg_.trace_pixel]);

    if (sweep_ >= cfg_.n_bi) {
      summary_.accumulate(state_.x);
      if ((sweep_ - cfg_.n_bi) % cfg_.thin == 0) summary_.thinned.push(state_.x);
    }
    ++sweep_;
  }

  ChainResult result() const { return {summary_, diag_, state_}; }

  /// Versioned binary dump of the chain: state, sweep index, stream key,
  /// running summary and traces. Streams are counter-based, so (seed, sweep)
  /// is the complete stream state.
  void save_checkpoint(std::ostream& os) const {
    os.write(detail::kCheckpointMagic, 8);
    detail::put_u64(os, detail::kCheckpointVersion);
    detail::put_u64(os, cfg_.seed);
    detail::put_u64(os, sweep_);
    detail::put_f64s(os, state_.x);
    detail::put_u64(os, state_.s.size());
    for (auto v : state_.s) detail::put_u64(os, v);
    detail::put_f64s(os, state_.z1);
    detail::put_f64s(os, state_.z2);
    detail::put_u64(os, summary_.count);
    detail::put_f64s(os, summary_.mean);
    detail::put_f64s(os, summary_.m2);
    detail::put_f64s(os, summary_.thinned.data);
    detail::put_f64s(os, diag_.potential_trace);
    detail::put_f64s(os, diag_.mean_x_trace);
    detail::put_f64s(os, diag_.pixel_trace);
    detail::put_u64(os, diag_.guard_hits);
    detail::put_u64(os, diag_.component_steps);
    detail::put_u64(os, diag_.potential_includes_prior ? 1 : 0);
    if (!os) throw NumericalError("checkpoint: write failed");
  }

  /// Rebuild a runner from a checkpoint; model, priors and config must match the saved run.
  static ChainRunner resume(std::istream& is, const PoissonModel& model, PriorSchedule priors, SamplerConfig cfg) {
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, detail::kCheckpointMagic)) {
      throw ConfigError("checkpoint: bad magic header");
    }
    if (detail::get_u64(is) != detail::kCheckpointVersion) throw ConfigError("checkpoint: unsupported version");
    if (detail::get_u64(is) != cfg.seed) throw ConfigError("checkpoint: seed does not match configuration");
    const std::uint64_t sweep = detail::get_u64(is);
    const std::uint64_t n = model.n();
    const std::uint64_t limit = std::uint64_t{1} << 40;
    ChainState st;
    st.x = detail::get_f64s(is, n);
    const std::uint64_t ns = detail::get_u64(is);
    if (ns != n) throw ConfigError("checkpoint: state size does not match model");
    st.s.resize(ns);
    for (auto& v : st.s) v = detail::get_u64(is);
    st.z1 = detail::get_f64s(is, n);
    st.z2 = detail::get_f64s(is, n);
    ChainRunner r(model, priors, cfg, std::move(st));
    r.sweep_ = sweep;
    r.summary_.count = detail::get_u64(is);
    r.summary_.mean = detail::get_f64s(is, n);
    r.summary_.m2 = detail::get_f64s(is, n);
    r.summary_.thinned.data = detail::get_f64s(is, limit);
    r.diag_.potential_trace = detail::get_f64s(is, limit);
    r.diag_.mean_x_trace = detail::get_f64s(is, limit);
    r.diag_.pixel_trace = detail::get_f64s(is, limit);
    r.diag_.guard_hits = detail::get_u64(is);
    r.diag_.component_steps = detail::get_u64(is);
    r.diag_.potential_includes_prior = detail::get_u64(is) != 0;
    if (r.summary_.mean.size() != n || r.summary_.m2.size() != n) throw ConfigError("checkpoint: summary size mismatch");
    return r;
  }

 private:
  const PoissonModel* model_;
  PriorSchedule priors_;
  SamplerConfig cfg_;
  ChainState state_;
  PosteriorSummary summary_;
  DiagnosticsBundle diag_;
  std::uint64_t sweep_ = 0;
};

/// Run all N_MC sweeps; the summary covers sweeps N_bi .. N_MC - 1 (0-based).
inline ChainResult run_chain(const PoissonModel& model, PriorSchedule priors, const SamplerConfig& cfg,
                             std::optional<ChainState> init = std::nullopt) {
  ChainRunner runner(model, priors, cfg, std::move(init));
  runner.run();
  return runner.result();
}

}  // namespace hrlsgs
