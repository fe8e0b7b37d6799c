// Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hrlsgs/hrlsgs.hpp"

namespace {

using namespace hrlsgs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& fn) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.passed) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double elapsed_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr std::uint64_t kSeed = 20261016;

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto r = validation::oracle_exact_augmentation(kSeed, 100, 1e-12);
  const double secs = elapsed_since(t0);
  return {r.passed && secs < 10.0, r.detail + ", " + num(secs, 3) + " s (limit 10 s)"};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  const auto dens = validation::oracle_conditional_densities(kSeed, 1e-10);
  bool ok = dens.passed;
  std::string detail = dens.name + ": " + dens.detail;
  for (const auto& r : validation::oracle_sampler_gof(kSeed, 100'000, 1e-3)) {
    ok = ok && r.passed;
    detail += "; " + r.name + ": " + r.detail;
  }
  const double secs = elapsed_since(t0);
  return {ok && secs < 60.0, detail + "; " + num(secs, 3) + " s (limit 60 s)"};
}

Outcome criterion3() {
  // One chain on n = 16 coordinates sharing z2; moments pooled over coordinates.
  const auto t0 = Clock::now();
  const std::size_t n = 16;
  const double rho = 0.5, z2v = 1.0;
  const std::vector<double> z2(n, z2v);
  SamplerConfig cfg;
  cfg.rho = rho;
  cfg.gamma_step = 1e-4;
  std::vector<double> z1 = z2;
  double sum = 0.0, sq = 0.0;
  const std::uint64_t burn = 10'000, steps = 1'000'000;
  std::uint64_t guards = 0;
  for (std::uint64_t t = 0; t < burn + steps; ++t) {
    auto r = step_z1_hrlmc(z1, z2, FlatPrior{}, cfg, SweepKey{kSeed, t});
    z1 = std::move(r.z1);
    guards += r.guard_hits;
    if (t < burn) continue;
    for (double v : z1) {
      sum += v;
      sq += v * v;
    }
  }
  const double count = static_cast<double>(steps * n);
  const double m = sum / count, v = sq / count - m * m;
  const double mean_err = std::fabs(m - z2v) / z2v, var_err = std::fabs(v - rho * z2v * z2v) / (rho * z2v * z2v);
  const double secs = elapsed_since(t0);
  const bool ok = mean_err <= 0.02 && var_err <= 0.05 && secs < 120.0;
  return {ok, "mean " + num(m, 5) + " vs " + num(z2v) + " (relative " + num(mean_err, 4) + ", limit 0.02), variance " +
                  num(v, 5) + " vs " + num(rho * z2v * z2v) + " (relative " + num(var_err, 4) +
                  ", limit 0.05), guard hits " + std::to_string(guards) + ", " + num(secs, 3) + " s (limit 120 s)"};
}

Outcome criterion4() {
  RandomStream rs(kSeed, substream_id(StreamKind::test, 4, 0));
  const std::size_t h = 6, w = 6, n = h * w;
  const FlatPrior flat;
  const TikhonovPrior tik(std::vector<double>{0.5}, 2.0);
  const SmoothedTVPrior tv(h, w, SmoothedTVParams{0.1, 1.5});
  const RedPrior red(std::make_shared<GaussianDenoiser>(h, w, 1.0), 0.8);
  const std::pair<const char*, const ScorePrior*> priors[] = {{"flat", &flat}, {"tikhonov", &tik}, {"tv", &tv}, {"red", &red}};
  std::string detail;
  bool ok = true;
  for (const auto& [name, p] : priors) {
    double worst = 0.0;
    for (int point = 0; point < 100; ++point) {
      std::vector<double> z1(n), z2(n);
      for (double& v : z1) v = 0.1 + 3.0 * rs.uniform();
      for (double& v : z2) v = 0.1 + 3.0 * rs.uniform();
      const double rho = 0.05 + rs.uniform();
      worst = std::max(worst, validation::grad_u_fd_error(*p, z1, z2, rho));
    }
    ok = ok && worst <= 1e-5;
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + num(worst, 3);
  }
  return {ok, "worst relative error over 100 points per prior: " + detail + " (limit 1e-5)"};
}

/// CDF of the 1-D toy posterior x^7 exp(-x) by composite trapezoid quadrature.
class QuadratureCdf {
 public:
  QuadratureCdf() : step_(1e-3), cdf_(static_cast<std::size_t>(80.0 / 1e-3) + 1, 0.0) {
    auto dens = [](double x) { return std::pow(x, 7.0) * std::exp(-x); };
    for (std::size_t k = 1; k < cdf_.size(); ++k) {
      const double a = (k - 1) * step_, b = k * step_;
      cdf_[k] = cdf_[k - 1] + 0.5 * step_ * (dens(a) + dens(b));
    }
    const double z = cdf_.back();
    for (double& v : cdf_) v /= z;
  }
  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    const double pos = x / step_;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= cdf_.size()) return 1.0;
    const double f = pos - static_cast<double>(k);
    return cdf_[k] + f * (cdf_[k + 1] - cdf_[k]);
  }

 private:
  double step_;
  std::vector<double> cdf_;
};

double ks_distance(std::vector<double> xs, const QuadratureCdf& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  const QuadratureCdf cdf;
  const auto op = std::make_shared<IdentityOperator>(1);
  const PoissonModel model{{7}, 1.0, op};
  std::vector<double> dist;
  std::string detail = "KS distance by rho:";
  for (double rho : {1.0, 0.3, 0.1, 0.03}) {
    SamplerConfig sc;
    sc.rho = rho;
    sc.gamma_step = 0.01 * rho;
    sc.n_bi = 10'000;
    sc.n_mc = sc.n_bi + 100'000;
    sc.thin = 1;
    sc.seed = kSeed;
    const auto res = run_chain(model, FlatPrior{}, sc);
    dist.push_back(ks_distance(res.summary.thinned.data, cdf));
    detail += " " + num(rho, 3) + "->" + num(dist.back(), 4);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < dist.size(); ++k) decreasing = decreasing && dist[k] < dist[k - 1];
  const double secs = elapsed_since(t0);
  return {decreasing && secs < 300.0,
          detail + (decreasing ? " (strictly decreasing)" : " (not strictly decreasing)") + ", " + num(secs, 3) +
              " s (limit 300 s)"};
}

Outcome criterion6() {
  const auto r = validation::oracle_convergence_constants();
  return {r.passed, r.detail};
}

Outcome criterion7() {
  const std::size_t n = 1'000'000;
  const double x = 1.3, z1 = 0.9;
  bool ok = true;
  std::string detail;
  double mean_small = 0.0;
  for (double rho : {1.0, 0.1, 0.01}) {
    const auto z2 = step_z2(std::vector<double>(n, x), std::vector<double>(n, z1), rho,
                            SweepKey{kSeed, static_cast<std::uint64_t>(1.0 / rho)});
    const double m = stats::mean(z2), se = std::sqrt(stats::variance(z2) / n);
    const double want = (x + z1) / (2.0 - rho);
    const double zscore = std::fabs(m - want) / se;
    ok = ok && zscore <= 3.0;
    detail += "rho " + num(rho, 3) + ": mean " + num(m, 6) + " vs " + num(want, 6) + " (" + num(zscore, 3) + " SE); ";
    if (rho == 0.01) mean_small = m;
  }
  const double rel = std::fabs(mean_small - (x + z1) / 2.0) / ((x + z1) / 2.0);
  ok = ok && rel <= 0.01;
  return {ok, detail + "rho 0.01 vs (x+z1)/2: relative " + num(rel, 4) + " (limit 0.01)"};
}

struct GridRun {
  double beta;
  ExperimentResult result;
};

std::vector<GridRun> grid_runs;
ExperimentConfig baseline;

Outcome criterion8() {
  const auto t0 = Clock::now();
  baseline = load_config(fs::path(HRLSGS_PRESETS) / "denoise_tv_alpha40.cfg");
  const fs::path root = fs::temp_directory_path() / "hrlsgs_acceptance";
  for (double beta : {5.0, 10.0, 20.0, 40.0, 80.0}) {
    ExperimentConfig c = baseline;
    c.beta = beta;
    c.out = (root / ("beta_" + num(beta))).string();
    grid_runs.push_back({beta, run_experiment(c)});
  }
  const auto best = std::max_element(grid_runs.begin(), grid_runs.end(), [](const GridRun& a, const GridRun& b) {
    return a.result.metrics.psnr_db < b.result.metrics.psnr_db;
  });
  const double obs = *best->result.observation_psnr_db;
  const double gain = best->result.metrics.psnr_db - obs;
  std::string detail = "PSNR by beta:";
  for (const auto& g : grid_runs) detail += " " + num(g.beta) + "->" + num(g.result.metrics.psnr_db, 4);
  const double secs = elapsed_since(t0);
  detail += "; best beta " + num(best->beta) + " gives " + num(best->result.metrics.psnr_db, 4) + " dB vs observation " +
            num(obs, 4) + " dB, gain " + num(gain, 3) + " dB (need >= 2), " + num(secs, 3) + " s (limit 600 s)";
  return {gain >= 2.0 && secs < 600.0, detail};
}

Outcome criterion9() {
  RandomStream rs(kSeed, substream_id(StreamKind::test, 9, 0));
  const std::size_t dim = 1000, ns = 1000;
  const double alpha = 40.0;
  std::vector<GammaParams> post(dim);
  std::vector<double> truth(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    // Identity H, flat prior: x | y ~ Gamma(y + 1, alpha).
    const double x0 = 0.05 + rs.uniform();
    const double y = static_cast<double>(draw_poisson(rs, alpha * x0));
    post[j] = {y + 1.0, alpha};
    truth[j] = draw_gamma(rs, post[j]);
  }
  ThinnedSamples samples{dim, {}};
  std::vector<double> row(dim);
  for (std::size_t k = 0; k < ns; ++k) {
    for (std::size_t j = 0; j < dim; ++j) row[j] = draw_gamma(rs, post[j]);
    samples.push(row);
  }
  const std::vector<double> targets{0.5, 0.8, 0.9, 0.95};
  const auto cc = calibration_curve(samples, truth, targets);
  bool ok = true;
  std::string detail = "achieved at target:";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ok = ok && std::fabs(cc.achieved[i] - targets[i]) <= 0.03;
    detail += " " + num(targets[i]) + "->" + num(cc.achieved[i], 4);
  }
  return {ok, detail + " (tolerance 0.03)"};
}

std::vector<std::pair<std::string, std::string>> read_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream is(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    out.emplace_back(e.path().filename().string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "hrlsgs_acceptance_determinism";
  std::vector<ExperimentConfig> cfgs;
  ExperimentConfig den = baseline;
  den.sampler.n_mc = 3000;
  den.sampler.n_bi = 1000;
  cfgs.push_back(den);
  ExperimentConfig deb = den;
  deb.task = Task::Deblur;
  deb.kernel_size = 9;
  cfgs.push_back(deb);
  ExperimentConfig tomo = den;
  tomo.task = Task::Tomography;
  tomo.phantom_size = 32;
  tomo.angles = 20;
  tomo.sampler.gamma_step = 1e-3;
  cfgs.push_back(tomo);
  std::size_t files = 0;
  std::string detail;
  for (auto& c : cfgs) {
    c.out = (root / to_string(c.task)).string();
    fs::remove_all(c.out);
    run_experiment(c);
    const auto first = read_tree(c.out);
    fs::remove_all(c.out);
    run_experiment(c);
    const auto second = read_tree(c.out);
    if (first != second) return {false, std::string(to_string(c.task)) + " run differs between identical reruns"};
    files += first.size();
    detail += std::string(detail.empty() ? "" : ", ") + to_string(c.task);
  }
  return {true, detail + ": " + std::to_string(files) + " artifact files bytewise identical across reruns"};
}

Outcome criterion11() {
  if (grid_runs.empty()) return {false, "criterion 8 runs unavailable"};
  std::uint64_t hits = 0, steps = 0;
  for (const auto& g : grid_runs) {
    hits += g.result.guard_hits;
    steps += g.result.component_steps;
  }
  const double rate = steps == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(steps);
  return {rate < 1e-4, "gamma " + num(baseline.sampler.gamma_step) + ": " + std::to_string(hits) + " guard hits in " +
                           std::to_string(steps) + " component steps, rate " + num(rate, 3) + " (limit 1e-4)"};
}

}  // namespace

int main() {
  report(1, "exact augmentation", criterion1);
  report(2, "conditional certification", criterion2);
  report(3, "HRLMC stationarity", criterion3);
  report(4, "grad U finite differences", criterion4);
  report(5, "small-rho limit", criterion5);
  report(6, "convergence constants", criterion6);
  report(7, "z2 limit", criterion7);
  report(8, "desk-scale denoising gain", criterion8);
  report(9, "calibration sanity", criterion9);
  report(10, "determinism", criterion10);
  report(11, "mirror guard rate", criterion11);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
