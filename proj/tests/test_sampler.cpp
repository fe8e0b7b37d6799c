#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "hrlsgs/sampler.hpp"
#include "hrlsgs/stats.hpp"

namespace {

using namespace hrlsgs;

std::uint64_t total(std::span<const std::uint64_t> v) { return std::accumulate(v.begin(), v.end(), std::uint64_t{0}); }

PoissonModel identity_model(std::vector<std::uint64_t> y, double alpha = 1.0) {
  auto op = std::make_shared<IdentityOperator>(y.size());
  return {std::move(y), alpha, op};
}

// Small blurred-phantom-like model: 12x10 periodic blur, Poisson counts around 20.
PoissonModel blur_model(std::uint64_t seed) {
  auto op = std::make_shared<ConvolutionOperator>(gaussian_kernel(5, 1.0), 12, 10, Boundary::Periodic);
  RandomStream rs(seed);
  std::vector<double> x(op->cols());
  for (auto& v : x) v = 0.2 + rs.uniform();
  const auto hx = op->apply(x);
  std::vector<std::uint64_t> y(hx.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = draw_poisson(rs, 20.0 * hx[i]);
  return {std::move(y), 20.0, op};
}

SamplerConfig small_config(std::uint64_t seed) {
  SamplerConfig c;
  c.rho = 0.5;
  c.gamma_step = 1e-3;
  c.n_mc = 60;
  c.n_bi = 20;
  c.thin = 3;
  c.seed = seed;
  return c;
}

TEST(StepCounts, ZeroObservationsGiveZero) {
  const auto m = identity_model({0, 0, 0});
  EXPECT_EQ(step_counts(m, std::vector<double>{1, 2, 3}, {1, 0}), (std::vector<std::uint64_t>{0, 0, 0}));
}

TEST(StepCounts, IdentityReturnsObservations) {
  const auto m = identity_model({4, 0, 17, 3});
  EXPECT_EQ(step_counts(m, std::vector<double>{0.1, 9, 2, 3}, {2, 5}), m.y);
}

TEST(StepCounts, TwoColumnProportions) {
  auto op = SparseOperator::from_dense(1, 2, std::vector<double>{1.0, 1.0});
  PoissonModel m{{300'000}, 1.0, op};
  const auto s = step_counts(m, std::vector<double>{1.0, 2.0}, {3, 0});
  ASSERT_EQ(total(s), 300'000u);
  const double n = 300'000.0, p = 1.0 / 3.0;
  EXPECT_NEAR(static_cast<double>(s[0]) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(StepCounts, ConservesTotalCount) {
  const auto m = blur_model(4);
  RandomStream rs(5);
  for (std::uint64_t sweep = 0; sweep < 50; ++sweep) {
    std::vector<double> x(m.n());
    for (auto& v : x) v = 0.01 + rs.uniform();
    ASSERT_EQ(total(step_counts(m, x, {6, sweep})), total(m.y));
  }
}

TEST(StepCounts, EmptyRowWithCountsIsModelError) {
  OperatorRow full;
  full.indices = {0, 1};
  full.weights = {1.0, 1.0};
  auto op = std::make_shared<SparseOperator>(2, std::vector<OperatorRow>{full, OperatorRow{}});
  PoissonModel bad{{3, 2}, 1.0, op};
  EXPECT_THROW(bad.validate(), ModelError);
  EXPECT_THROW(step_counts(bad, std::vector<double>{1.0, 1.0}, {0, 0}), ModelError);
  PoissonModel ok{{3, 0}, 1.0, op};
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(total(step_counts(ok, std::vector<double>{1.0, 1.0}, {0, 0})), 3u);
}

TEST(StepCounts, IndependentOfThreadCount) {
  const auto m = blur_model(7);
  const std::vector<double> x(m.n(), 0.8);
  const auto one = step_counts(m, x, {8, 3}, 1, 16);
  const auto four = step_counts(m, x, {8, 3}, 4, 16);
  EXPECT_EQ(one, four);
}

TEST(StepX, ConditionalMean) {
  const std::size_t n = 100'000;
  auto m = identity_model(std::vector<std::uint64_t>(n, 0), 1.0);
  const std::vector<std::uint64_t> s(n, 10);
  const std::vector<double> z2(n, 1.0);
  const auto x = step_x(m, s, z2, 0.1, {9, 0});
  const double shape = 10 + 10 + 1, rate = 1 + 10;
  EXPECT_NEAR(shape / rate, 21.0 / 11.0, 1e-15);
  EXPECT_NEAR(stats::mean(x), shape / rate, 3.0 * std::sqrt(shape / (rate * rate) / n));
  const auto r = stats::ks_one_sample(x, [&](double t) { return stats::gamma_cdf(shape, rate, t); });
  EXPECT_GT(r.p_value, 0.001);
}

TEST(StepX, WeakCouplingLimit) {
  const std::size_t n = 100'000;
  auto m = identity_model(std::vector<std::uint64_t>(n, 0), 2.0);
  const auto x = step_x(m, std::vector<std::uint64_t>(n, 4), std::vector<double>(n, 1.0), 1e12, {10, 0});
  const double shape = 5.0, rate = 2.0;
  EXPECT_NEAR(stats::mean(x), shape / rate, 3.0 * std::sqrt(shape / (rate * rate) / n));
}

TEST(StepX, NoCountsHugeZ2) {
  const std::size_t n = 100'000;
  auto m = identity_model(std::vector<std::uint64_t>(n, 0), 3.0);
  const double rho = 0.5;
  const auto x = step_x(m, std::vector<std::uint64_t>(n, 0), std::vector<double>(n, 1e12), rho, {11, 0});
  const double shape = 1 / rho + 1, rate = 3.0;
  EXPECT_NEAR(stats::mean(x), shape / rate, 3.0 * std::sqrt(shape / (rate * rate) / n));
}

TEST(StepX, UsesColumnSums) {
  auto op = std::make_shared<ConvolutionOperator>(Kernel2D{1, 3, {0.5, 1.0, 0.5}}, 1, 50'000, Boundary::ZeroPad);
  PoissonModel m{std::vector<std::uint64_t>(op->rows(), 0), 1.0, op};
  const auto x = step_x(m, std::vector<std::uint64_t>(op->cols(), 2), std::vector<double>(op->cols(), 1.0), 1.0,
                        {12, 0});
  // Interior colsum 2, boundary colsum 1.5: shape 4, rate colsum + 1.
  std::vector<double> interior(x.begin() + 1, x.end() - 1);
  EXPECT_NEAR(stats::mean(interior), 4.0 / 3.0, 3.0 * std::sqrt(4.0 / 9.0 / interior.size()));
}

TEST(StepZ2, SmallRhoMean) {
  const std::size_t n = 100'000;
  const double rho = 0.01;
  const auto z2 = step_z2(std::vector<double>(n, 1.0), std::vector<double>(n, 3.0), rho, {13, 0});
  const double a = 2 / rho, b = 4 / rho, mean = b / (a - 1), var = mean * mean / (a - 2);
  EXPECT_NEAR(mean, 2.0101, 1e-4);
  EXPECT_NEAR(stats::mean(z2), mean, 3.0 * std::sqrt(var / n));
}

TEST(StepZ2, SymmetricInArguments) {
  RandomStream rs(14);
  std::vector<double> a(100), b(100);
  for (std::size_t j = 0; j < a.size(); ++j) {
    a[j] = 0.1 + rs.uniform();
    b[j] = 0.1 + rs.uniform();
  }
  EXPECT_EQ(step_z2(a, b, 0.3, {15, 2}), step_z2(b, a, 0.3, {15, 2}));
}

TEST(StepZ2, RhoOneDistribution) {
  const std::size_t n = 100'000;
  const double x = 0.7, z1 = 1.8;
  const auto z2 = step_z2(std::vector<double>(n, x), std::vector<double>(n, z1), 1.0, {16, 0});
  const auto r = stats::ks_one_sample(z2, [&](double t) { return stats::invgamma_cdf(2.0, x + z1, t); });
  EXPECT_GT(r.p_value, 0.001);
  // Shape 2 has infinite variance; the median is a stable location check.
  std::vector<double> sorted = z2;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = (x + z1) / boost::math::gamma_q_inv(2.0, 0.5);
  EXPECT_NEAR(sorted[n / 2], median, 0.02 * median);
}

TEST(PotentialU, MatchesDefinition) {
  const std::vector<double> z1{0.5, 2.0}, z2{1.0, 4.0};
  const double rho = 0.25;
  const TikhonovPrior prior({1.0}, 3.0);
  double expected = 3.0 * 0.5 * (0.25 + 1.0);
  for (std::size_t j = 0; j < 2; ++j) {
    expected += std::log(z1[j]) + (z1[j] / z2[j] - std::log(z1[j])) / rho;
  }
  bool with = false;
  EXPECT_NEAR(potential_u(z1, z2, prior, rho, &with), expected, 1e-13);
  EXPECT_TRUE(with);
}

TEST(GradPotentialU, BetaAppliedOnce) {
  const std::vector<double> z1{0.5, 2.0, 1.5}, z2{1.0, 4.0, 0.2};
  const double rho = 0.3, beta = 3.0;
  const auto flat = grad_potential_u(z1, z2, FlatPrior{}, rho);
  const auto tik = grad_potential_u(z1, z2, TikhonovPrior({1.0}, beta), rho);
  for (std::size_t j = 0; j < z1.size(); ++j) {
    EXPECT_NEAR(flat[j], 1.0 / (rho * z2[j]) + (1.0 - 1.0 / rho) / z1[j], 1e-14);
    EXPECT_NEAR(tik[j] - flat[j], beta * (z1[j] - 1.0), 1e-12);
  }
}

TEST(StepZ1, ZeroStepLeavesStateUnchanged) {
  const std::vector<double> z1{0.3, 1.0, 7.5}, z2{1.0, 2.0, 3.0};
  SamplerConfig cfg;
  cfg.gamma_step = 0.0;
  const auto r = step_z1_hrlmc(z1, z2, FlatPrior{}, cfg, {17, 0});
  for (std::size_t j = 0; j < z1.size(); ++j) EXPECT_NEAR(r.z1[j], z1[j], 1e-15 * z1[j]);
  EXPECT_EQ(r.guard_hits, 0u);
  EXPECT_EQ(r.component_steps, 3u);
}

TEST(StepZ1, MatchesMirrorUpdateFormula) {
  const std::vector<double> z1{0.3, 1.0, 7.5}, z2{1.0, 2.0, 3.0};
  SamplerConfig cfg;
  cfg.gamma_step = 1e-3;
  cfg.rho = 0.4;
  cfg.block_size = 8;
  const SweepKey key{18, 4};
  const TikhonovPrior prior({1.0}, 2.0);
  const auto r = step_z1_hrlmc(z1, z2, prior, cfg, key);
  RandomStream rs(key.seed, substream_id(StreamKind::z1, key.sweep, 0));
  std::vector<double> e(3);
  fill_std_normal(rs, e);
  for (std::size_t j = 0; j < 3; ++j) {
    const double gu = 2.0 * (z1[j] - 1.0) + 1.0 / (cfg.rho * z2[j]) + (1.0 - 1.0 / cfg.rho) / z1[j];
    const double theta = -1.0 / z1[j] - cfg.gamma_step * gu + std::sqrt(2.0 * cfg.gamma_step) / z1[j] * e[j];
    EXPECT_NEAR(r.z1[j], -1.0 / theta, 1e-13 * r.z1[j]);
  }
}

TEST(StepZ1, GuardClampsAndCounts) {
  // Small rho and huge z2 make the gradient strongly negative, so a large
  // step pushes theta past zero.
  const std::size_t n = 1000;
  SamplerConfig cfg;
  cfg.gamma_step = 50.0;
  cfg.rho = 0.01;
  const auto r = step_z1_hrlmc(std::vector<double>(n, 1.0), std::vector<double>(n, 1e6), FlatPrior{}, cfg, {19, 0});
  EXPECT_GT(r.guard_hits, 0u);
  EXPECT_EQ(r.component_steps, n);
  for (double v : r.z1) {
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0 / cfg.theta_guard * (1 + 1e-12));
  }
}

TEST(StepZ1, InnerStepsCountComponents) {
  SamplerConfig cfg;
  cfg.inner_steps = 4;
  const auto r = step_z1_hrlmc(std::vector<double>(10, 1.0), std::vector<double>(10, 1.0), FlatPrior{}, cfg, {20, 0});
  EXPECT_EQ(r.component_steps, 40u);
}

TEST(StepZ1, FlatPriorStationaryGamma) {
  // Shorter variant of the acceptance check: the flat-prior conditional is
  // Gamma(1/rho, rate 1/(rho z2)), so the long-run mean is z2.
  const std::vector<double> levels{0.5, 1.0, 2.0, 4.0};
  const std::size_t per = 100;
  std::vector<double> z2;
  for (double v : levels) z2.insert(z2.end(), per, v);
  SamplerConfig cfg;
  cfg.rho = 0.5;
  cfg.gamma_step = 2e-3;
  std::vector<double> z1 = z2;
  std::vector<double> sum(levels.size(), 0.0), sq(levels.size(), 0.0);
  const std::uint64_t burn = 2'000, steps = 20'000;
  for (std::uint64_t t = 0; t < burn + steps; ++t) {
    z1 = step_z1_hrlmc(z1, z2, FlatPrior{}, cfg, {21, t}).z1;
    if (t < burn) continue;
    for (std::size_t j = 0; j < z1.size(); ++j) {
      sum[j / per] += z1[j] / z2[j];
      sq[j / per] += z1[j] * z1[j] / (z2[j] * z2[j]);
    }
  }
  const double count = static_cast<double>(steps * per);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double m = sum[k] / count;
    EXPECT_NEAR(m, 1.0, 0.04) << levels[k];
    EXPECT_NEAR(sq[k] / count - m * m, cfg.rho, 0.05) << levels[k];
  }
}

TEST(StepZ1, OneStepKeepsConditionalInvariant) {
  // z1 drawn from its flat-prior conditional Gamma(1/rho, 1/(rho z2)), one
  // HRLMC step, compared with fresh conditional draws.
  const std::size_t n = 100'000;
  const double rho = 0.5;
  SamplerConfig cfg;
  cfg.rho = rho;
  cfg.gamma_step = 1e-4;
  std::vector<double> start(n), fresh(n);
  RandomStream rs(22);
  for (std::size_t j = 0; j < n; ++j) start[j] = draw_gamma(rs, {1 / rho, 1 / rho});
  for (std::size_t j = 0; j < n; ++j) fresh[j] = draw_gamma(rs, {1 / rho, 1 / rho});
  const auto moved = step_z1_hrlmc(start, std::vector<double>(n, 1.0), FlatPrior{}, cfg, {23, 0}).z1;
  EXPECT_NE(moved, start);
  const auto r = stats::ks_two_sample(moved, fresh);
  EXPECT_LT(r.statistic, stats::ks_two_sample_critical_1pct(n, n));
}

TEST(ExactSteps, OneStepKeepsConditionalInvariant) {
  const std::size_t n = 100'000;
  const double rho = 0.2, alpha = 2.0;
  auto m = identity_model(std::vector<std::uint64_t>(n, 0), alpha);
  const std::vector<std::uint64_t> s(n, 3);
  const std::vector<double> z2(n, 0.8), z1(n, 1.3);
  const auto x_a = step_x(m, s, z2, rho, {24, 0});
  const auto x_b = step_x(m, s, z2, rho, {24, 1});
  EXPECT_LT(stats::ks_two_sample(x_a, x_b).statistic, stats::ks_two_sample_critical_1pct(n, n));
  const auto z2_a = step_z2(x_a, z1, rho, {25, 0});
  const auto z2_b = step_z2(x_b, z1, rho, {25, 1});
  EXPECT_LT(stats::ks_two_sample(z2_a, z2_b).statistic, stats::ks_two_sample_critical_1pct(n, n));
}

TEST(DefaultInit, ZeroObservationsFloor) {
  const auto st = default_init(identity_model({0, 0, 0}));
  EXPECT_EQ(st.x, std::vector<double>(3, 1e-3));
  EXPECT_EQ(st.z1, std::vector<double>(3, 1e-3));
  EXPECT_EQ(st.z2, std::vector<double>(3, 1e-3));
  EXPECT_EQ(st.s, std::vector<std::uint64_t>(3, 0));
}

TEST(DefaultInit, IdentityConstantObservation) {
  const auto st = default_init(identity_model({7, 7, 7, 7}));
  EXPECT_EQ(st.x, std::vector<double>(4, 7.0));
  EXPECT_TRUE(st.valid());
  EXPECT_TRUE(default_init(blur_model(26)).valid());
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  c.n_mc = 10;
  c.n_bi = 10;
  EXPECT_THROW(c.validate(), ParameterError);
  c.n_bi = 2;
  c.rho = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c.rho = 1.0;
  c.gamma_step = -1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c.gamma_step = 1e-3;
  c.thin = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c.thin = 1;
  EXPECT_NO_THROW(c.validate());
}

TEST(PosteriorSummary, RunningMomentsMatchTwoPass) {
  PosteriorSummary ps(2);
  std::vector<double> a, b;
  RandomStream rs(27);
  for (int k = 0; k < 500; ++k) {
    const double u = 1e6 + rs.uniform(), v = rs.uniform();
    a.push_back(u);
    b.push_back(v);
    ps.accumulate(std::vector<double>{u, v});
  }
  EXPECT_NEAR(ps.mean[0], stats::mean(a), 1e-8);
  EXPECT_NEAR(ps.variance()[0], stats::variance(a), 1e-9);
  EXPECT_NEAR(ps.variance()[1], stats::variance(b), 1e-12);
  for (double v : ps.variance()) EXPECT_GE(v, 0.0);
}

TEST(RunChain, SingleRetainedSample) {
  const auto m = blur_model(28);
  SamplerConfig c = small_config(29);
  c.n_mc = 11;
  c.n_bi = 10;
  c.thin = 1;
  ChainRunner runner(m, FlatPrior{}, c);
  runner.run_until(10);
  runner.step();
  const auto res = runner.result();
  EXPECT_EQ(res.summary.count, 1u);
  EXPECT_EQ(res.summary.thinned.count(), 1u);
  EXPECT_EQ(res.summary.mean, res.final_state.x);
  EXPECT_EQ(res.summary.mean, std::vector<double>(res.summary.thinned.sample(0).begin(),
                                                  res.summary.thinned.sample(0).end()));
}

TEST(RunChain, LikelihoodDominatedMean) {
  const auto m = identity_model(std::vector<std::uint64_t>(16, 10'000), 1.0);
  SamplerConfig c;
  c.rho = 1.0;
  c.gamma_step = 1e-3;
  c.n_mc = 2000;
  c.n_bi = 500;
  c.seed = 30;
  const auto res = run_chain(m, FlatPrior{}, c);
  for (double v : res.summary.mean) EXPECT_NEAR(v, 10'000.0, 200.0);
}

TEST(RunChain, Invariants) {
  const auto m = blur_model(31);
  const TikhonovPrior prior({0.5}, 1.0);
  ChainRunner runner(m, prior, small_config(32));
  while (!runner.done()) {
    runner.step();
    ASSERT_TRUE(runner.state().valid());
    ASSERT_EQ(total(runner.state().s), total(m.y));
  }
  const auto& d = runner.diagnostics();
  EXPECT_EQ(d.potential_trace.size(), 60u);
  EXPECT_EQ(d.mean_x_trace.size(), 60u);
  EXPECT_EQ(d.pixel_trace.size(), 60u);
  EXPECT_EQ(runner.summary().count, 40u);
  EXPECT_EQ(runner.summary().thinned.count(), 14u);
  EXPECT_TRUE(d.potential_includes_prior);
}

TEST(RunChain, BitwiseDeterministic) {
  const auto m = blur_model(33);
  const SmoothedTVPrior prior(12, 10, {0.1, 0.5});
  const auto a = run_chain(m, prior, small_config(34));
  const auto b = run_chain(m, prior, small_config(34));
  EXPECT_EQ(a.summary.mean, b.summary.mean);
  EXPECT_EQ(a.summary.m2, b.summary.m2);
  EXPECT_EQ(a.summary.thinned.data, b.summary.thinned.data);
  EXPECT_EQ(a.diagnostics.potential_trace, b.diagnostics.potential_trace);
  const auto c = run_chain(m, prior, small_config(35));
  EXPECT_NE(a.summary.mean, c.summary.mean);
}

TEST(RunChain, IndependentOfThreadCount) {
  const auto m = blur_model(36);
  SamplerConfig c1 = small_config(37);
  c1.block_size = 16;
  SamplerConfig c4 = c1;
  c4.threads = 4;
  const auto a = run_chain(m, FlatPrior{}, c1);
  const auto b = run_chain(m, FlatPrior{}, c4);
  EXPECT_EQ(a.summary.mean, b.summary.mean);
  EXPECT_EQ(a.final_state.z1, b.final_state.z1);
}

TEST(RunChain, CheckpointResumeIsBitIdentical) {
  const auto m = blur_model(38);
  const SmoothedTVPrior prior(12, 10, {0.1, 0.5});
  const SamplerConfig c = small_config(39);
  const auto full = run_chain(m, prior, c);

  ChainRunner first(m, prior, c);
  first.run_until(27);
  std::stringstream ck;
  first.save_checkpoint(ck);
  ChainRunner resumed = ChainRunner::resume(ck, m, prior, c);
  EXPECT_EQ(resumed.sweep(), 27u);
  resumed.run();
  const auto res = resumed.result();
  EXPECT_EQ(res.summary.mean, full.summary.mean);
  EXPECT_EQ(res.summary.m2, full.summary.m2);
  EXPECT_EQ(res.summary.thinned.data, full.summary.thinned.data);
  EXPECT_EQ(res.diagnostics.potential_trace, full.diagnostics.potential_trace);
  EXPECT_EQ(res.final_state.z2, full.final_state.z2);
}

TEST(RunChain, CheckpointRejectsMismatch) {
  const auto m = blur_model(40);
  const SamplerConfig c = small_config(41);
  ChainRunner r(m, FlatPrior{}, c);
  r.run_until(5);
  std::stringstream ck;
  r.save_checkpoint(ck);
  SamplerConfig other = c;
  other.seed = 99;
  EXPECT_THROW(ChainRunner::resume(ck, m, FlatPrior{}, other), ConfigError);
  std::stringstream junk("not a checkpoint");
  EXPECT_THROW(ChainRunner::resume(junk, m, FlatPrior{}, c), ConfigError);
}

TEST(RunChain, PhaseScheduleSwitchesPrior) {
  const auto m = blur_model(42);
  const TikhonovPrior strong({0.5}, 50.0), weak({0.5}, 0.1);
  SamplerConfig c = small_config(43);
  const auto both = run_chain(m, PriorSchedule(strong, weak), c);
  const auto weak_only = run_chain(m, weak, c);
  EXPECT_NE(both.summary.mean, weak_only.summary.mean);
  // After burn-in the weak prior drives the potential trace in both runs.
  const double u = potential_u(both.final_state.z1, both.final_state.z2, weak, c.rho);
  EXPECT_DOUBLE_EQ(both.diagnostics.potential_trace.back(), u);
}

class FailingDenoiser final : public Denoiser {
 public:
  FailingDenoiser() : Denoiser(1.0, 1.0) {}
  std::string describe() const override { return "failing"; }
  void denoise_into(std::span<const double>, std::span<double>) const override {
    throw NumericalError("denoiser exploded");
  }
};

TEST(RunChain, StepErrorsNameSweepAndStep) {
  const auto m = blur_model(44);
  const RedPrior prior(std::make_shared<FailingDenoiser>(), 1.0);
  try {
    run_chain(m, prior, small_config(45));
    FAIL();
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("sweep 0"), std::string::npos) << what;
    EXPECT_NE(what.find("z1 step"), std::string::npos) << what;
  }
}

TEST(RunChain, RejectsBadInitialState) {
  const auto m = identity_model({1, 2});
  ChainState st{{1.0, -1.0}, {0, 0}, {1.0, 1.0}, {1.0, 1.0}};
  EXPECT_THROW(ChainRunner(m, FlatPrior{}, small_config(1), st), ParameterError);
}

}  // namespace
