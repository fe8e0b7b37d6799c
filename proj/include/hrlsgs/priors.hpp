#pragma once

// Score-based priors: g(x) and its gradient, without the regularization
// weight. The weight beta is stored on the prior but applied once, when the
// mirror-Langevin potential is assembled.

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hrlsgs/errors.hpp"
#include "hrlsgs/image_io.hpp"
#include "hrlsgs/operators.hpp"

namespace hrlsgs {

class ScorePrior {
 public:
  ScorePrior(double beta, std::string descriptor) : beta_(beta), descriptor_(std::move(descriptor)) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("prior weight beta must be finite and >= 0");
  }
  virtual ~ScorePrior() = default;

  double beta() const noexcept { return beta_; }
  const std::string& descriptor() const noexcept { return descriptor_; }

  /// Unweighted gradient of g written into `out`. No validation.
  virtual void score_into(std::span<const double> x, std::span<double> out) const = 0;

  /// Unweighted potential g(x) when it has a closed form.
  virtual std::optional<double> potential(std::span<const double> x) const = 0;

  /// Validated gradient of g: x must be strictly positive, output must be finite.
  std::vector<double> score(std::span<const double> x) const {
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!(x[j] > 0.0) || !std::isfinite(x[j])) bad.push_back(j);
    }
    if (!bad.empty()) {
      throw DomainError("score: nonpositive input at index " + detail::join_indices(bad), bad);
    }
    std::vector<double> out(x.size());
    score_into(x, out);
    check_finite(out, "score");
    return out;
  }

  static void check_finite(std::span<const double> v, const char* where) {
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!std::isfinite(v[j])) bad.push_back(j);
    }
    if (!bad.empty()) {
      throw NumericalError(std::string(where) + ": non-finite value at index " + detail::join_indices(bad),
                           bad);
    }
  }

 private:
  double beta_;
  std::string descriptor_;
};

class FlatPrior final : public ScorePrior {
 public:
  FlatPrior() : ScorePrior(0.0, "flat") {}
  void score_into(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
  std::optional<double> potential(std::span<const double>) const override { return 0.0; }
};

/// g(x) = 1/2 |x - c|^2.
class TikhonovPrior final : public ScorePrior {
 public:
  TikhonovPrior(std::vector<double> center, double beta)
      : ScorePrior(beta, "tikhonov"), center_(std::move(center)) {}

  void score_into(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - c(j);
  }
  std::optional<double> potential(std::span<const double> x) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += 0.5 * (x[j] - c(j)) * (x[j] - c(j));
    return acc;
  }

 private:
  // A single-entry center broadcasts.
  double c(std::size_t j) const noexcept { return center_.size() == 1 ? center_[0] : center_[j]; }
  std::vector<double> center_;
};

struct SmoothedTVParams {
  double epsilon = 1e-2;
  double beta = 1.0;
};

/// g(x) = sum_p sqrt(dh_p^2 + dv_p^2 + eps^2) with periodic forward differences.
class SmoothedTVPrior final : public ScorePrior {
 public:
  SmoothedTVPrior(std::size_t height, std::size_t width, SmoothedTVParams p)
      : ScorePrior(p.beta, "smoothed_tv"), height_(height), width_(width), eps_(p.epsilon) {
    if (!(eps_ > 0.0)) throw ParameterError("smoothed TV: epsilon must be positive");
    if (height == 0 || width == 0) throw ParameterError("smoothed TV: empty image");
  }

  double epsilon() const noexcept { return eps_; }

  void score_into(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t H = height_, W = width_;
    const double e2 = eps_ * eps_;
    for (std::size_t r = 0; r < H; ++r) {
      const std::size_t rd = (r + 1 == H) ? 0 : r + 1;
      for (std::size_t c = 0; c < W; ++c) {
        const std::size_t cr = (c + 1 == W) ? 0 : c + 1;
        const std::size_t p = r * W + c;
        const double dh = x[r * W + cr] - x[p];
        const double dv = x[rd * W + c] - x[p];
        const double inv = 1.0 / std::sqrt(dh * dh + dv * dv + e2);
        out[p] -= (dh + dv) * inv;
        out[r * W + cr] += dh * inv;
        out[rd * W + c] += dv * inv;
      }
    }
  }

  std::optional<double> potential(std::span<const double> x) const override {
    const std::size_t H = height_, W = width_;
    double acc = 0.0;
    for (std::size_t r = 0; r < H; ++r) {
      const std::size_t rd = (r + 1 == H) ? 0 : r + 1;
      for (std::size_t c = 0; c < W; ++c) {
        const std::size_t cr = (c + 1 == W) ? 0 : c + 1;
        const double dh = x[r * W + cr] - x[r * W + c];
        const double dv = x[rd * W + c] - x[r * W + c];
        acc += std::sqrt(dh * dh + dv * dv + eps_ * eps_);
      }
    }
    return acc;
  }

 private:
  std::size_t height_, width_;
  double eps_;
};

inline std::vector<double> smoothed_tv_score(const SmoothedTVParams& p, const ImageBuffer& img) {
  SmoothedTVPrior prior(img.height, img.width, p);
  return prior.score(img.channel(0));
}

/// Denoising operator D_nu with a declared Lipschitz bound.
class Denoiser {
 public:
  Denoiser(double strength, double lipschitz) : strength_(strength), lipschitz_(lipschitz) {
    if (!(strength > 0.0)) throw ParameterError("denoiser strength must be positive");
    if (!(lipschitz >= 0.0)) throw ParameterError("denoiser Lipschitz bound must be >= 0");
  }
  virtual ~Denoiser() = default;

  double strength() const noexcept { return strength_; }
  double lipschitz() const noexcept { return lipschitz_; }
  virtual bool is_linear_symmetric() const noexcept { return false; }
  virtual std::string describe() const = 0;
  virtual void denoise_into(std::span<const double> x, std::span<double> out) const = 0;

  std::vector<double> denoise(std::span<const double> x) const {
    std::vector<double> out(x.size());
    denoise_into(x, out);
    return out;
  }

 private:
  double strength_;
  double lipschitz_;
};

class IdentityDenoiser final : public Denoiser {
 public:
  IdentityDenoiser() : Denoiser(1.0, 1.0) {}
  bool is_linear_symmetric() const noexcept override { return true; }
  std::string describe() const override { return "identity"; }
  void denoise_into(std::span<const double> x, std::span<double> out) const override {
    std::copy(x.begin(), x.end(), out.begin());
  }
};

/// Periodic Gaussian smoothing with standard deviation equal to the strength.
/// Unit-mass nonnegative kernel, so the operator norm is at most 1.
class GaussianDenoiser final : public Denoiser {
 public:
  GaussianDenoiser(std::size_t height, std::size_t width, double sigma)
      : Denoiser(sigma, 1.0),
        conv_(gaussian_kernel(2 * static_cast<std::size_t>(std::ceil(3.0 * sigma)) + 1, sigma), height, width,
              Boundary::Periodic) {}

  bool is_linear_symmetric() const noexcept override { return true; }
  std::string describe() const override { return "gaussian(sigma=" + std::to_string(strength()) + ")"; }
  void denoise_into(std::span<const double> x, std::span<double> out) const override { conv_.apply_into(x, out); }
  const ConvolutionOperator& op() const noexcept { return conv_; }

 private:
  ConvolutionOperator conv_;
};

/// Out-of-process denoiser. The current image is written in the raw float
/// format to a temporary file, `command <in> <out> <strength>` is run through
/// /bin/sh, and the result is read back. One call in flight at a time.
class ExternalDenoiser final : public Denoiser {
 public:
  ExternalDenoiser(std::string command, std::size_t height, std::size_t width, double strength, double lipschitz,
                   std::chrono::milliseconds timeout = std::chrono::seconds(60))
      : Denoiser(strength, lipschitz), command_(std::move(command)), height_(height), width_(width), timeout_(timeout) {
    if (command_.empty()) throw ConfigError("external denoiser: empty command");
  }

  std::string describe() const override { return "external(" + command_ + ")"; }

  void denoise_into(std::span<const double> x, std::span<double> out) const override {
    std::lock_guard lock(mutex_);
    namespace fs = std::filesystem;
    const auto tag = std::to_string(::getpid()) + "_" + std::to_string(++calls_);
    const fs::path in = fs::temp_directory_path() / ("hrlsgs_den_in_" + tag + ".raw");
    const fs::path outp = fs::temp_directory_path() / ("hrlsgs_den_out_" + tag + ".raw");
    write_raw_float(in, height_, width_, x);
    const std::string cmd = command_ + " '" + in.string() + "' '" + outp.string() + "' " + std::to_string(strength());
    const int status = run_with_timeout(cmd);
    std::error_code ec;
    fs::remove(in, ec);
    if (status != 0) {
      fs::remove(outp, ec);
      throw NumericalError("external denoiser failed (status " + std::to_string(status) + "): " + command_);
    }
    ImageBuffer res = read_raw_float(outp);
    fs::remove(outp, ec);
    if (res.height != height_ || res.width != width_) throw NumericalError("external denoiser: wrong output shape");
    std::copy(res.data.begin(), res.data.end(), out.begin());
  }

 private:
  // Returns the exit status; -1 on timeout (the child is killed).
  int run_with_timeout(const std::string& cmd) const {
    const pid_t pid = ::fork();
    if (pid < 0) throw NumericalError("external denoiser: fork failed");
    if (pid == 0) {
      ::setpgid(0, 0);
      ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      int status = 0;
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      if (r < 0 && errno != EINTR) return -1;
      if (std::chrono::steady_clock::now() > deadline) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        return -1;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  std::string command_;
  std::size_t height_, width_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  mutable unsigned long calls_ = 0;
};

inline std::vector<double> red_score(const Denoiser& d, std::span<const double> x) {
  std::vector<double> out = d.denoise(x);
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - out[j];
  return out;
}

/// Regularization by denoising: g(x) = 1/2 x^T (x - D(x)), score x - D(x).
/// The score formula assumes local homogeneity and a symmetric Jacobian of D,
/// which is not checked for external denoisers.
class RedPrior final : public ScorePrior {
 public:
  RedPrior(std::shared_ptr<const Denoiser> d, double beta)
      : ScorePrior(beta, "red:" + d->describe()), denoiser_(std::move(d)) {}

  const Denoiser& denoiser() const noexcept { return *denoiser_; }

  void score_into(std::span<const double> x, std::span<double> out) const override {
    denoiser_->denoise_into(x, out);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - out[j];
  }
  /// Only reported for linear symmetric denoisers, where the score is its gradient.
  std::optional<double> potential(std::span<const double> x) const override {
    if (!denoiser_->is_linear_symmetric()) return std::nullopt;
    std::vector<double> dx = denoiser_->denoise(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += 0.5 * x[j] * (x[j] - dx[j]);
    return acc;
  }

 private:
  std::shared_ptr<const Denoiser> denoiser_;
};

struct ConvergenceConstants {
  double m;        // relative strong convexity
  double M;        // relative Lipschitz smoothness
  double rho_max;  // largest coupling keeping m >= 0
};

/// Relative convexity and smoothness constants of the z1 potential under a RED
/// prior with an L_D-Lipschitz denoiser and eps_z <= z_j <= C_z.
inline ConvergenceConstants check_convergence_constants(double eps_z, double C_z, double beta, double rho, double L_D) {
  if (!(eps_z > 0.0) || !(C_z > 0.0) || !(beta >= 0.0) || !(rho > 0.0) || !(L_D >= 0.0)) {
    throw ParameterError("check_convergence_constants: parameters out of domain");
  }
  if (eps_z > C_z) throw ParameterError("check_convergence_constants: need eps_z <= C_z");
  const double e4 = std::pow(eps_z, 4), c2 = C_z * C_z;
  ConvergenceConstants k{};
  k.m = 1.0 / rho - 1.0 + beta * (e4 / c2 - L_D * c2);
  k.M = beta * (1.0 + L_D) * c2 + std::fabs(1.0 / rho - 1.0);
  k.rho_max = (e4 / (c2 * c2) <= L_D) ? 1.0 / (1.0 + beta * (L_D * c2 - e4 / c2)) : 1.0;
  return k;
}

}  // namespace hrlsgs
