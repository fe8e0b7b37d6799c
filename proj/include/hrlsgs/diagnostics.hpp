#pragma once

// Figures of merit and uncertainty products computed from finished chains.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hrlsgs/errors.hpp"
#include "hrlsgs/sampler.hpp"

namespace hrlsgs {

struct ImageShape {
  std::size_t height;
  std::size_t width;
};

struct MetricsReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::vector<double> psnr_per_channel;
  std::vector<double> ssim_per_channel;
};

/// 10 log10(peak^2 / MSE); +inf when the images are identical.
inline double psnr(std::span<const double> ref, std::span<const double> est, double peak) {
  if (ref.size() != est.size() || ref.empty()) throw ParameterError("psnr: shape mismatch");
  if (!(peak > 0.0)) throw ParameterError("psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t j = 0; j < ref.size(); ++j) {
    const double d = ref[j] - est[j];
    mse += d * d;
  }
  mse /= static_cast<double>(ref.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

/// Mean SSIM over all 8x8 windows (stride 1), K1 = 0.01, K2 = 0.03,
/// unbiased window covariances.
inline double ssim(std::span<const double> ref, std::span<const double> est, ImageShape shape, double peak) {
  constexpr std::size_t win = 8;
  if (ref.size() != est.size() || ref.size() != shape.height * shape.width) throw ParameterError("ssim: shape mismatch");
  if (shape.height < win || shape.width < win) throw ParameterError("ssim: image smaller than 8x8");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const double npx = static_cast<double>(win * win);
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t r0 = 0; r0 + win <= shape.height; ++r0) {
    for (std::size_t c0 = 0; c0 + win <= shape.width; ++c0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t r = r0; r < r0 + win; ++r) {
        for (std::size_t c = c0; c < c0 + win; ++c) {
          const double a = ref[r * shape.width + c], b = est[r * shape.width + c];
          sa += a;
          sb += b;
          saa += a * a;
          sbb += b * b;
          sab += a * b;
        }
      }
      const double ma = sa / npx, mb = sb / npx;
      const double va = (saa - npx * ma * ma) / (npx - 1.0);
      const double vb = (sbb - npx * mb * mb) / (npx - 1.0);
      const double cov = (sab - npx * ma * mb) / (npx - 1.0);
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

/// Biased sample autocorrelation, acf[0] = 1.
inline std::vector<double> acf(std::span<const double> trace, std::size_t max_lag) {
  const std::size_t n = trace.size();
  if (max_lag == 0 || n <= max_lag + 1) throw ParameterError("acf: trace must be longer than max_lag + 1");
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : trace) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw NumericalError("acf: constant trace, autocorrelation undefined");
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (trace[t] - mean) * (trace[t + k] - mean);
    out[k] = ck / c0;
  }
  return out;
}

inline constexpr std::size_t kMinCoverageSamples = 50;

/// Per pixel, |2F - 1| where F is the empirical CDF of the samples at the
/// truth (ties count one half): the smallest central credible level whose
/// interval contains the truth.
inline std::vector<double> coverage_map(const ThinnedSamples& samples, std::span<const double> truth) {
  const std::size_t ns = samples.count();
  if (ns < kMinCoverageSamples) {
    throw ParameterError("coverage_map: need at least 50 samples, have " + std::to_string(ns));
  }
  if (truth.size() != samples.dim) throw ParameterError("coverage_map: truth size mismatch");
  std::vector<double> level(samples.dim);
  for (std::size_t j = 0; j < samples.dim; ++j) {
    double below = 0.0;
    for (std::size_t k = 0; k < ns; ++k) {
      const double v = samples.data[k * samples.dim + j];
      if (v < truth[j]) below += 1.0;
      else if (v == truth[j]) below += 0.5;
    }
    const double f = below / static_cast<double>(ns);
    level[j] = std::fabs(2.0 * f - 1.0);
  }
  return level;
}

struct CalibrationCurve {
  std::vector<double> targets;
  std::vector<double> achieved;
};

/// Fraction of pixels whose coverage level is at most c, for each target c.
inline CalibrationCurve calibration_from_levels(std::span<const double> levels, std::span<const double> targets) {
  CalibrationCurve cc{{targets.begin(), targets.end()}, std::vector<double>(targets.size())};
  for (std::size_t t = 0; t < targets.size(); ++t) {
    std::size_t hit = 0;
    for (double l : levels) hit += (l <= targets[t]) ? 1 : 0;
    cc.achieved[t] = static_cast<double>(hit) / static_cast<double>(levels.size());
  }
  return cc;
}

inline CalibrationCurve calibration_curve(const ThinnedSamples& samples, std::span<const double> truth,
                                          std::span<const double> targets) {
  const std::vector<double> levels = coverage_map(samples, truth);
  return calibration_from_levels(levels, targets);
}

/// Evenly spaced nominal levels 0, 1/(k-1), ..., 1.
inline std::vector<double> level_grid(std::size_t k) {
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = static_cast<double>(i) / static_cast<double>(k - 1);
  return g;
}

}  // namespace hrlsgs
