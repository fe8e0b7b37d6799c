#pragma once

// Desk-scale experiment harness: configuration, synthetic data, one chain per
// image channel, and artifact emission.

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "hrlsgs/diagnostics.hpp"
#include "hrlsgs/errors.hpp"
#include "hrlsgs/image_io.hpp"
#include "hrlsgs/operators.hpp"
#include "hrlsgs/priors.hpp"
#include "hrlsgs/rng.hpp"
#include "hrlsgs/sampler.hpp"

namespace hrlsgs {

inline constexpr int kSummarySchemaVersion = 1;

enum class Task { Denoise, Deblur, Tomography };
enum class PriorKind { Flat, Tikhonov, TV, Red };

inline const char* to_string(Task t) noexcept {
  switch (t) {
    case Task::Denoise: return "denoise";
    case Task::Deblur: return "deblur";
    case Task::Tomography: return "tomography";
  }
  return "?";
}

inline const char* to_string(PriorKind p) noexcept {
  switch (p) {
    case PriorKind::Flat: return "flat";
    case PriorKind::Tikhonov: return "tikhonov";
    case PriorKind::TV: return "tv";
    case PriorKind::Red: return "red";
  }
  return "?";
}

struct ExperimentConfig {
  Task task = Task::Denoise;
  std::string image;  // empty: synthetic phantom
  std::size_t phantom_size = 64;
  double alpha = 40.0;

  std::size_t kernel_size = 25;
  double kernel_sigma = 1.6;
  Boundary boundary = Boundary::Periodic;
  std::size_t angles = 60;
  std::size_t detectors = 0;  // 0: ceil(width sqrt 2)
  double detector_spacing = 1.0;

  PriorKind prior = PriorKind::TV;
  double beta = 1.0;
  std::optional<double> beta_burnin;
  double tv_epsilon = 0.01;
  double tikhonov_center = 0.5;
  std::string red_denoiser = "gaussian";  // gaussian | external
  double red_strength = 1.0;
  std::optional<double> red_strength_burnin;
  std::string external_command;
  double external_lipschitz = 1.0;
  std::uint64_t external_timeout_ms = 60000;

  SamplerConfig sampler{};
  std::size_t acf_max_lag = 100;
  std::size_t calibration_levels = 21;
  std::string out = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace detail

/// Set one key from its textual value; unknown keys are configuration errors.
inline void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_real;
  using detail::parse_uint;
  const std::string v(value);
  auto size = [&](std::size_t& dst) { dst = static_cast<std::size_t>(parse_uint(key, value)); };
  SamplerConfig& s = c.sampler;
  if (key == "task") {
    if (v == "denoise") c.task = Task::Denoise;
    else if (v == "deblur") c.task = Task::Deblur;
    else if (v == "tomography") c.task = Task::Tomography;
    else throw ConfigError("config: unknown task '" + v + "'");
  } else if (key == "image") {
    c.image = v;
  } else if (key == "phantom_size") {
    size(c.phantom_size);
  } else if (key == "alpha") {
    c.alpha = parse_real(key, value);
  } else if (key == "kernel_size") {
    size(c.kernel_size);
  } else if (key == "kernel_sigma") {
    c.kernel_sigma = parse_real(key, value);
  } else if (key == "boundary") {
    if (v == "periodic") c.boundary = Boundary::Periodic;
    else if (v == "zero") c.boundary = Boundary::ZeroPad;
    else throw ConfigError("config: boundary must be periodic or zero");
  } else if (key == "angles") {
    size(c.angles);
  } else if (key == "detectors") {
    size(c.detectors);
  } else if (key == "detector_spacing") {
    c.detector_spacing = parse_real(key, value);
  } else if (key == "prior") {
    if (v == "flat") c.prior = PriorKind::Flat;
    else if (v == "tikhonov") c.prior = PriorKind::Tikhonov;
    else if (v == "tv") c.prior = PriorKind::TV;
    else if (v == "red") c.prior = PriorKind::Red;
    else throw ConfigError("config: unknown prior '" + v + "'");
  } else if (key == "beta") {
    c.beta = parse_real(key, value);
  } else if (key == "beta_burnin") {
    c.beta_burnin = parse_real(key, value);
  } else if (key == "tv_epsilon") {
    c.tv_epsilon = parse_real(key, value);
  } else if (key == "tikhonov_center") {
    c.tikhonov_center = parse_real(key, value);
  } else if (key == "red_denoiser") {
    if (v != "gaussian" && v != "external") throw ConfigError("config: red_denoiser must be gaussian or external");
    c.red_denoiser = v;
  } else if (key == "red_strength") {
    c.red_strength = parse_real(key, value);
  } else if (key == "red_strength_burnin") {
    c.red_strength_burnin = parse_real(key, value);
  } else if (key == "external_command") {
    c.external_command = v;
  } else if (key == "external_lipschitz") {
    c.external_lipschitz = parse_real(key, value);
  } else if (key == "external_timeout_ms") {
    c.external_timeout_ms = parse_uint(key, value);
  } else if (key == "rho") {
    s.rho = parse_real(key, value);
  } else if (key == "gamma") {
    s.gamma_step = parse_real(key, value);
  } else if (key == "inner_steps") {
    s.inner_steps = static_cast<unsigned>(parse_uint(key, value));
  } else if (key == "n_mc") {
    s.n_mc = parse_uint(key, value);
  } else if (key == "n_bi") {
    s.n_bi = parse_uint(key, value);
  } else if (key == "thin") {
    s.thin = parse_uint(key, value);
  } else if (key == "seed") {
    s.seed = parse_uint(key, value);
  } else if (key == "theta_guard") {
    s.theta_guard = parse_real(key, value);
  } else if (key == "threads") {
    s.threads = static_cast<unsigned>(parse_uint(key, value));
  } else if (key == "block_size") {
    size(s.block_size);
  } else if (key == "acf_max_lag") {
    size(c.acf_max_lag);
  } else if (key == "calibration_levels") {
    size(c.calibration_levels);
  } else if (key == "out") {
    c.out = v;
  } else {
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
  }
}

/// Apply a `key=value` override.
inline void apply_override(ExperimentConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set_config_value(c, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// `key = value` lines; `#` starts a comment; later keys win.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {}) {
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      apply_override(base, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Canonical text of every key; parse_config(to_text(c)) == c.
inline std::string to_text(const ExperimentConfig& c) {
  using detail::fmt;
  const SamplerConfig& s = c.sampler;
  std::ostringstream os;
  os << "task = " << to_string(c.task) << "\n";
  if (!c.image.empty()) os << "image = " << c.image << "\n";
  os << "phantom_size = " << c.phantom_size << "\n"
     << "alpha = " << fmt(c.alpha) << "\n"
     << "kernel_size = " << c.kernel_size << "\n"
     << "kernel_sigma = " << fmt(c.kernel_sigma) << "\n"
     << "boundary = " << (c.boundary == Boundary::Periodic ? "periodic" : "zero") << "\n"
     << "angles = " << c.angles << "\n"
     << "detectors = " << c.detectors << "\n"
     << "detector_spacing = " << fmt(c.detector_spacing) << "\n"
     << "prior = " << to_string(c.prior) << "\n"
     << "beta = " << fmt(c.beta) << "\n";
  if (c.beta_burnin) os << "beta_burnin = " << fmt(*c.beta_burnin) << "\n";
  os << "tv_epsilon = " << fmt(c.tv_epsilon) << "\n"
     << "tikhonov_center = " << fmt(c.tikhonov_center) << "\n"
     << "red_denoiser = " << c.red_denoiser << "\n"
     << "red_strength = " << fmt(c.red_strength) << "\n";
  if (c.red_strength_burnin) os << "red_strength_burnin = " << fmt(*c.red_strength_burnin) << "\n";
  if (!c.external_command.empty()) os << "external_command = " << c.external_command << "\n";
  os << "external_lipschitz = " << fmt(c.external_lipschitz) << "\n"
     << "external_timeout_ms = " << c.external_timeout_ms << "\n"
     << "rho = " << fmt(s.rho) << "\n"
     << "gamma = " << fmt(s.gamma_step) << "\n"
     << "inner_steps = " << s.inner_steps << "\n"
     << "n_mc = " << s.n_mc << "\n"
     << "n_bi = " << s.n_bi << "\n"
     << "thin = " << s.thin << "\n"
     << "seed = " << s.seed << "\n"
     << "theta_guard = " << fmt(s.theta_guard) << "\n"
     << "threads = " << s.threads << "\n"
     << "block_size = " << s.block_size << "\n"
     << "acf_max_lag = " << c.acf_max_lag << "\n"
     << "calibration_levels = " << c.calibration_levels << "\n"
     << "out = " << c.out << "\n";
  return os.str();
}

inline std::uint64_t thinned_count(const SamplerConfig& s) {
  return s.n_mc <= s.n_bi ? 0 : (s.n_mc - s.n_bi + s.thin - 1) / s.thin;
}

inline void validate(const ExperimentConfig& c) {
  c.sampler.validate();
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw ConfigError("config: alpha must be positive");
  if (c.image.empty() && c.phantom_size < 32) throw ConfigError("config: phantom_size must be >= 32");
  if (!c.image.empty() && !std::filesystem::exists(c.image)) throw ConfigError("config: image not found: " + c.image);
  if (c.task == Task::Deblur) {
    if (c.kernel_size % 2 == 0) throw ConfigError("config: kernel_size must be odd");
    if (!(c.kernel_sigma > 0.0)) throw ConfigError("config: kernel_sigma must be positive");
  }
  if (c.task == Task::Tomography) {
    if (c.angles == 0) throw ConfigError("config: angles must be >= 1");
    if (!(c.detector_spacing > 0.0)) throw ConfigError("config: detector_spacing must be positive");
  }
  if (!(c.beta >= 0.0) || (c.beta_burnin && !(*c.beta_burnin >= 0.0))) throw ConfigError("config: beta must be >= 0");
  if (c.prior == PriorKind::TV && !(c.tv_epsilon > 0.0)) throw ConfigError("config: tv_epsilon must be positive");
  if (c.prior == PriorKind::Red) {
    if (!(c.red_strength > 0.0) || (c.red_strength_burnin && !(*c.red_strength_burnin > 0.0))) {
      throw ConfigError("config: red_strength must be positive");
    }
    if (c.red_denoiser == "external" && c.external_command.empty()) {
      throw ConfigError("config: external denoiser needs external_command");
    }
  }
  if (thinned_count(c.sampler) < kMinCoverageSamples) {
    throw ConfigError("config: (n_mc - n_bi)/thin must leave at least 50 thinned samples");
  }
  if (c.acf_max_lag == 0) throw ConfigError("config: acf_max_lag must be >= 1");
  if (c.calibration_levels < 2) throw ConfigError("config: calibration_levels must be >= 2");
  if (c.out.empty()) throw ConfigError("config: out must be set");
}

/// Modified Shepp-Logan phantom (Toft's contrast values), in [0, 1] with background 0.
inline ImageBuffer shepp_logan_phantom(std::size_t size) {
  if (size < 32) throw ParameterError("shepp_logan_phantom: size must be >= 32");
  struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
  };
  static constexpr Ellipse kEllipses[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},         {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},     {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},        {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  ImageBuffer img(size, size, 1);
  const double n = static_cast<double>(size);
  for (std::size_t r = 0; r < size; ++r) {
    const double y = (n - 2.0 * static_cast<double>(r) - 1.0) / n;
    for (std::size_t c = 0; c < size; ++c) {
      const double x = (2.0 * static_cast<double>(c) + 1.0 - n) / n;
      double v = 0.0;
      for (const Ellipse& e : kEllipses) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = x - e.x0, dy = y - e.y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double w = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

/// FNV-1a over the IEEE-754 bit patterns of the samples, in order.
inline std::uint64_t image_checksum(std::span<const double> v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double d : v) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

/// y_i ~ Poisson(alpha (H x)_i), drawn in row order from `rs`.
inline std::vector<std::uint64_t> generate_observation(std::span<const double> x_true, const ForwardOperator& op,
                                                       double alpha, RandomStream& rs) {
  if (!(alpha > 0.0)) throw ParameterError("generate_observation: alpha must be positive");
  for (double v : x_true) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("generate_observation: image must be finite and >= 0");
  }
  const std::vector<double> hx = op.apply(x_true);
  std::vector<std::uint64_t> y(hx.size());
  for (std::size_t i = 0; i < hx.size(); ++i) y[i] = draw_poisson(rs, alpha * hx[i]);
  return y;
}

/// Seed of the chain (and observation) for one image channel.
inline std::uint64_t channel_seed(std::uint64_t seed, std::size_t channel) {
  return RandomStream(seed, substream_id(StreamKind::channel, channel, 0)).next_u64();
}

/// Observation of each channel, drawn from that channel's own stream.
inline std::vector<std::vector<std::uint64_t>> generate_observation(const ImageBuffer& x_true, const ForwardOperator& op,
                                                                    double alpha, std::uint64_t seed) {
  std::vector<std::vector<std::uint64_t>> y;
  for (std::size_t c = 0; c < x_true.channels; ++c) {
    RandomStream rs(channel_seed(seed, c), substream_id(StreamKind::observation, 0, 0));
    y.push_back(generate_observation(x_true.channel(c), op, alpha, rs));
  }
  return y;
}

inline ImageBuffer load_image(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".raw") return read_raw_float(path);
  return read_pnm(path);
}

inline ImageBuffer experiment_truth(const ExperimentConfig& c) {
  return c.image.empty() ? shepp_logan_phantom(c.phantom_size) : load_image(c.image);
}

inline std::shared_ptr<const ForwardOperator> build_operator(const ExperimentConfig& c, std::size_t height,
                                                             std::size_t width) {
  switch (c.task) {
    case Task::Denoise:
      return std::make_shared<IdentityOperator>(height * width);
    case Task::Deblur:
      return std::make_shared<ConvolutionOperator>(gaussian_kernel(c.kernel_size, c.kernel_sigma), height, width,
                                                   c.boundary);
    case Task::Tomography: {
      ProjectorGeometry g{height, width, ProjectorGeometry::uniform_angles(c.angles), c.detectors, c.detector_spacing};
      return build_projector(std::move(g));
    }
  }
  throw ConfigError("unknown task");
}

/// Burn-in and sampling priors of one experiment; owns the objects.
struct PriorPair {
  std::unique_ptr<ScorePrior> burn_in;
  std::unique_ptr<ScorePrior> sampling;
  PriorSchedule schedule() const { return PriorSchedule(*burn_in, *sampling); }
};

inline std::unique_ptr<ScorePrior> make_prior(const ExperimentConfig& c, std::size_t height, std::size_t width,
                                              double beta, double strength) {
  switch (c.prior) {
    case PriorKind::Flat:
      return std::make_unique<FlatPrior>();
    case PriorKind::Tikhonov:
      return std::make_unique<TikhonovPrior>(std::vector<double>{c.tikhonov_center}, beta);
    case PriorKind::TV:
      return std::make_unique<SmoothedTVPrior>(height, width, SmoothedTVParams{c.tv_epsilon, beta});
    case PriorKind::Red: {
      std::shared_ptr<const Denoiser> d;
      if (c.red_denoiser == "external") {
        d = std::make_shared<ExternalDenoiser>(c.external_command, height, width, strength, c.external_lipschitz,
                                               std::chrono::milliseconds(c.external_timeout_ms));
      } else {
        d = std::make_shared<GaussianDenoiser>(height, width, strength);
      }
      return std::make_unique<RedPrior>(std::move(d), beta);
    }
  }
  throw ConfigError("unknown prior");
}

inline PriorPair make_priors(const ExperimentConfig& c, std::size_t height, std::size_t width) {
  PriorPair p;
  p.sampling = make_prior(c, height, width, c.beta, c.red_strength);
  p.burn_in = make_prior(c, height, width, c.beta_burnin.value_or(c.beta), c.red_strength_burnin.value_or(c.red_strength));
  return p;
}

struct ChannelOutcome {
  std::vector<std::uint64_t> y;
  ChainResult chain;
  std::vector<double> stddev;
  std::vector<double> coverage;
  CalibrationCurve calibration;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> observation_psnr_db;
};

/// Observation and chain for channel `c` of the truth image.
inline ChannelOutcome run_channel(const ExperimentConfig& cfg, const std::shared_ptr<const ForwardOperator>& op,
                                  const ImageBuffer& truth, std::size_t c) {
  const ForwardOperator& op_ref = *op;
  ChannelOutcome out;
  const std::uint64_t seed = channel_seed(cfg.sampler.seed, c);
  RandomStream obs(seed, substream_id(StreamKind::observation, 0, 0));
  out.y = generate_observation(truth.channel(c), op_ref, cfg.alpha, obs);

  PoissonModel model{out.y, cfg.alpha, op};
  const PriorPair priors = make_priors(cfg, truth.height, truth.width);
  SamplerConfig sc = cfg.sampler;
  sc.seed = seed;
  sc.trace_pixel = (truth.height / 2) * truth.width + truth.width / 2;
  out.chain = run_chain(model, priors.schedule(), sc);

  const auto tc = truth.channel(c);
  out.stddev = out.chain.summary.stddev();
  out.coverage = coverage_map(out.chain.summary.thinned, tc);
  out.calibration = calibration_from_levels(out.coverage, level_grid(cfg.calibration_levels));
  out.psnr_db = psnr(tc, out.chain.summary.mean, 1.0);
  out.ssim = ssim(tc, out.chain.summary.mean, {truth.height, truth.width}, 1.0);
  if (op_ref.rows() == op_ref.cols()) {
    std::vector<double> naive(out.y.size());
    for (std::size_t i = 0; i < naive.size(); ++i) naive[i] = static_cast<double>(out.y[i]) / cfg.alpha;
    out.observation_psnr_db = psnr(tc, naive, 1.0);
  }
  return out;
}

struct ExperimentResult {
  MetricsReport metrics;
  std::optional<double> observation_psnr_db;
  std::uint64_t guard_hits = 0;
  std::uint64_t component_steps = 0;
  std::vector<std::string> artifacts;

  double guard_rate() const noexcept {
    return component_steps == 0 ? 0.0 : static_cast<double>(guard_hits) / static_cast<double>(component_steps);
  }
};

namespace detail {

inline std::string channel_file(const std::string& stem, std::size_t c, const std::string& ext) {
  return stem + "_c" + std::to_string(c) + ext;
}

inline std::vector<double> safe_acf(std::span<const double> trace, std::size_t max_lag) {
  if (trace.size() < 3) return {};
  try {
    return acf(trace, std::min(max_lag, trace.size() - 2));
  } catch (const NumericalError&) {
    return {};
  }
}

inline std::string csv_value(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

inline nlohmann::json json_number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

/// Run every channel and write the artifacts into cfg.out.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  using detail::fmt;
  validate(cfg);
  const ImageBuffer truth = experiment_truth(cfg);
  const auto op = build_operator(cfg, truth.height, truth.width);
  const fs::path out(cfg.out);
  fs::create_directories(out);

  ExperimentResult res;
  std::vector<ChannelOutcome> ch;
  for (std::size_t c = 0; c < truth.channels; ++c) ch.push_back(run_channel(cfg, op, truth, c));

  const std::size_t n = truth.pixels();
  ImageBuffer mean(truth.height, truth.width, truth.channels), sd = mean, cov = mean;
  double se_sum = 0.0;
  bool observed_all = true;
  double obs_se_sum = 0.0;
  for (std::size_t c = 0; c < truth.channels; ++c) {
    const auto& o = ch[c];
    std::copy(o.chain.summary.mean.begin(), o.chain.summary.mean.end(), mean.channel(c).begin());
    std::copy(o.stddev.begin(), o.stddev.end(), sd.channel(c).begin());
    std::copy(o.coverage.begin(), o.coverage.end(), cov.channel(c).begin());
    res.metrics.psnr_per_channel.push_back(o.psnr_db);
    res.metrics.ssim_per_channel.push_back(o.ssim);
    res.guard_hits += o.chain.diagnostics.guard_hits;
    res.component_steps += o.chain.diagnostics.component_steps;
    for (std::size_t j = 0; j < n; ++j) se_sum += std::pow(o.chain.summary.mean[j] - truth.channel(c)[j], 2);
    if (o.observation_psnr_db) {
      for (std::size_t j = 0; j < n; ++j) {
        obs_se_sum += std::pow(static_cast<double>(o.y[j]) / cfg.alpha - truth.channel(c)[j], 2);
      }
    } else {
      observed_all = false;
    }
  }
  const double total = static_cast<double>(n * truth.channels);
  res.metrics.psnr_db = se_sum == 0.0 ? INFINITY : 10.0 * std::log10(total / se_sum);
  double ssim_sum = 0.0;
  for (double v : res.metrics.ssim_per_channel) ssim_sum += v;
  res.metrics.ssim = ssim_sum / static_cast<double>(truth.channels);
  if (observed_all) res.observation_psnr_db = obs_se_sum == 0.0 ? INFINITY : 10.0 * std::log10(total / obs_se_sum);

  auto note = [&](const std::string& name) { res.artifacts.push_back(name); };
  const std::string ext = truth.channels == 3 ? ".ppm" : ".pgm";
  write_pnm(out / ("posterior_mean" + ext), mean);
  note("posterior_mean" + ext);
  {
    double sd_peak = 0.0;
    for (double v : sd.data) sd_peak = std::max(sd_peak, v);
    write_pnm(out / ("posterior_std" + ext), sd, sd_peak > 0.0 ? sd_peak : 1.0);
    note("posterior_std" + ext);
  }
  write_pnm(out / ("coverage" + ext), cov);
  note("coverage" + ext);
  write_pnm(out / ("truth" + ext), truth);
  note("truth" + ext);
  if (observed_all) {
    ImageBuffer obs(truth.height, truth.width, truth.channels);
    for (std::size_t c = 0; c < truth.channels; ++c) {
      for (std::size_t j = 0; j < n; ++j) obs.channel(c)[j] = static_cast<double>(ch[c].y[j]) / cfg.alpha;
    }
    write_pnm(out / ("observation" + ext), obs);
    note("observation" + ext);
  }
  for (std::size_t c = 0; c < truth.channels; ++c) {
    const auto raw = [&](const std::string& stem, std::span<const double> v) {
      const std::string f = detail::channel_file(stem, c, ".raw");
      write_raw_float(out / f, truth.height, truth.width, v);
      note(f);
    };
    raw("posterior_mean", mean.channel(c));
    raw("posterior_std", sd.channel(c));
    raw("coverage", cov.channel(c));
    raw("truth", truth.channel(c));
    if (observed_all) {
      std::vector<double> obs(n);
      for (std::size_t j = 0; j < n; ++j) obs[j] = static_cast<double>(ch[c].y[j]) / cfg.alpha;
      raw("observation", obs);
    }
  }

  {
    std::ofstream os(out / "calibration.csv");
    os << "channel,target,achieved\n";
    for (std::size_t c = 0; c < truth.channels; ++c) {
      const auto& cc = ch[c].calibration;
      for (std::size_t k = 0; k < cc.targets.size(); ++k) os << c << "," << fmt(cc.targets[k]) << "," << fmt(cc.achieved[k]) << "\n";
    }
    note("calibration.csv");
  }
  {
    std::ofstream os(out / "acf.csv");
    os << "channel,lag,potential,pixel,mean_x\n";
    for (std::size_t c = 0; c < truth.channels; ++c) {
      const auto& d = ch[c].chain.diagnostics;
      const auto tail = [&](const std::vector<double>& t) {
        return std::span<const double>(t).subspan(std::min<std::size_t>(cfg.sampler.n_bi, t.size()));
      };
      const auto a = detail::safe_acf(tail(d.potential_trace), cfg.acf_max_lag);
      const auto b = detail::safe_acf(tail(d.pixel_trace), cfg.acf_max_lag);
      const auto m = detail::safe_acf(tail(d.mean_x_trace), cfg.acf_max_lag);
      const std::size_t lags = std::max({a.size(), b.size(), m.size()});
      auto cell = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? fmt(v[k]) : std::string{}; };
      for (std::size_t k = 0; k < lags; ++k) {
        os << c << "," << k << "," << cell(a, k) << "," << cell(b, k) << "," << cell(m, k) << "\n";
      }
    }
    note("acf.csv");
  }
  {
    std::ofstream os(out / "traces.csv");
    os << "channel,sweep,potential,mean_x,pixel\n";
    for (std::size_t c = 0; c < truth.channels; ++c) {
      const auto& d = ch[c].chain.diagnostics;
      for (std::size_t t = 0; t < d.potential_trace.size(); ++t) {
        os << c << "," << t << "," << fmt(d.potential_trace[t]) << "," << fmt(d.mean_x_trace[t]) << ","
           << fmt(d.pixel_trace[t]) << "\n";
      }
    }
    note("traces.csv");
  }
  {
    std::ofstream os(out / "metrics.csv");
    os << "task,prior,alpha,beta,rho,gamma,n_mc,n_bi,seed,psnr_db,ssim,lpips,observation_psnr_db,guard_rate\n";
    os << to_string(cfg.task) << "," << to_string(cfg.prior) << "," << fmt(cfg.alpha) << "," << fmt(cfg.beta) << ","
       << fmt(cfg.sampler.rho) << "," << fmt(cfg.sampler.gamma_step) << "," << cfg.sampler.n_mc << ","
       << cfg.sampler.n_bi << "," << cfg.sampler.seed << "," << fmt(res.metrics.psnr_db) << ","
       << fmt(res.metrics.ssim) << ",," << detail::csv_value(res.observation_psnr_db) << "," << fmt(res.guard_rate())
       << "\n";
    note("metrics.csv");
  }
  {
    std::ofstream os(out / "config.cfg");
    os << to_text(cfg);
    note("config.cfg");
  }
  {
    using nlohmann::json;
    json per_channel = json::array();
    for (std::size_t c = 0; c < truth.channels; ++c) {
      const auto& o = ch[c];
      json cal = json::array();
      for (std::size_t k = 0; k < o.calibration.targets.size(); ++k) {
        cal.push_back({o.calibration.targets[k], o.calibration.achieved[k]});
      }
      per_channel.push_back({{"channel", c},
                             {"psnr_db", detail::json_number(o.psnr_db)},
                             {"ssim", o.ssim},
                             {"observation_psnr_db", o.observation_psnr_db ? detail::json_number(*o.observation_psnr_db) : json(nullptr)},
                             {"guard_hits", o.chain.diagnostics.guard_hits},
                             {"component_steps", o.chain.diagnostics.component_steps},
                             {"potential_includes_prior", o.chain.diagnostics.potential_includes_prior},
                             {"thinned_samples", o.chain.summary.thinned.count()},
                             {"calibration", cal}});
    }
    note("summary.json");
    json j = {{"schema_version", kSummarySchemaVersion},
              {"task", to_string(cfg.task)},
              {"operator", op->describe()},
              {"prior", to_string(cfg.prior)},
              {"image", {{"height", truth.height}, {"width", truth.width}, {"channels", truth.channels}}},
              {"sampler",
               {{"rho", cfg.sampler.rho},
                {"gamma", cfg.sampler.gamma_step},
                {"inner_steps", cfg.sampler.inner_steps},
                {"n_mc", cfg.sampler.n_mc},
                {"n_bi", cfg.sampler.n_bi},
                {"thin", cfg.sampler.thin},
                {"seed", cfg.sampler.seed},
                {"theta_guard", cfg.sampler.theta_guard}}},
              {"metrics",
               {{"psnr_db", detail::json_number(res.metrics.psnr_db)},
                {"ssim", res.metrics.ssim},
                {"lpips", nullptr},
                {"observation_psnr_db",
                 res.observation_psnr_db ? detail::json_number(*res.observation_psnr_db) : json(nullptr)},
                {"guard_rate", res.guard_rate()}}},
              {"channels", per_channel},
              {"artifacts", res.artifacts}};
    if (const auto* p = dynamic_cast<const ProjectorOperator*>(op.get())) j["dropped_rays"] = p->dropped().size();
    std::ofstream os(out / "summary.json");
    os << j.dump(2) << "\n";
  }
  return res;
}

/// PSNR/SSIM of the stored posterior mean against the stored truth in `dir`.
inline MetricsReport recompute_metrics(const std::filesystem::path& dir) {
  MetricsReport rep;
  double se = 0.0, total = 0.0;
  for (std::size_t c = 0;; ++c) {
    const auto tp = dir / detail::channel_file("truth", c, ".raw");
    const auto mp = dir / detail::channel_file("posterior_mean", c, ".raw");
    if (!std::filesystem::exists(tp) || !std::filesystem::exists(mp)) {
      if (c == 0) throw ConfigError("metrics: no truth_c0.raw / posterior_mean_c0.raw in " + dir.string());
      break;
    }
    const ImageBuffer t = read_raw_float(tp), m = read_raw_float(mp);
    if (t.height != m.height || t.width != m.width) throw ConfigError("metrics: truth and estimate shapes differ");
    rep.psnr_per_channel.push_back(psnr(t.data, m.data, 1.0));
    rep.ssim_per_channel.push_back(ssim(t.data, m.data, {t.height, t.width}, 1.0));
    for (std::size_t j = 0; j < t.data.size(); ++j) se += (t.data[j] - m.data[j]) * (t.data[j] - m.data[j]);
    total += static_cast<double>(t.data.size());
  }
  rep.psnr_db = se == 0.0 ? INFINITY : 10.0 * std::log10(total / se);
  double s = 0.0;
  for (double v : rep.ssim_per_channel) s += v;
  rep.ssim = s / static_cast<double>(rep.ssim_per_channel.size());
  return rep;
}

}  // namespace hrlsgs
