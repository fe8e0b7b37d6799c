#pragma once

// Goodness-of-fit statistics used by the oracle battery and the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hrlsgs/errors.hpp"

namespace hrlsgs::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Asymptotic Kolmogorov tail P(K > lambda).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov against a continuous CDF (Stephens' small-n correction).
inline TestResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("ks_one_sample: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample Kolmogorov-Smirnov.
inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

/// Two-sample KS critical value at level 0.01.
inline double ks_two_sample_critical_1pct(std::size_t na, std::size_t nb) {
  const double a = static_cast<double>(na), b = static_cast<double>(nb);
  return 1.628 * std::sqrt((a + b) / (a * b));
}

/// Pearson chi-square of observed counts against expected probabilities.
/// Cells with expected count below `min_expected` are pooled into one.
inline TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probs,
                                 double min_expected = 5.0) {
  if (observed.size() != probs.size() || observed.empty()) throw ParameterError("chi_square_gof: size mismatch");
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0, pooled_o = 0.0, pooled_e = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = probs[k] * total;
    if (e < min_expected) {
      pooled_o += observed[k];
      pooled_e += e;
      continue;
    }
    stat += (observed[k] - e) * (observed[k] - e) / e;
    ++cells;
  }
  if (pooled_e > 0.0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++cells;
  }
  if (cells < 2) return {stat, 1.0};
  const double dof = static_cast<double>(cells - 1);
  return {stat, boost::math::gamma_q(dof / 2.0, stat / 2.0)};
}

inline double gamma_cdf(double shape, double rate, double x) {
  return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, rate * x);
}

inline double invgamma_cdf(double shape, double scale, double x) {
  return x <= 0.0 ? 0.0 : boost::math::gamma_q(shape, scale / x);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double e : v) s += (e - m) * (e - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace hrlsgs::stats
