#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "vapors/diagnostics.hpp"
#include "vapors/errors.hpp"
#include "vapors/sampler_sin.hpp"
#include "vapors/sem.hpp"

using namespace vapors;
using namespace vapors::diag;
using namespace vapors::testing;

namespace {

constexpr double kPi = std::numbers::pi;

SampleSet draw_samples(const ApproxModel& m, int M, std::uint64_t seed) {
  SampleSet s;
  s.space = m.space;
  Rng rng(seed);
  for (int i = 0; i < M; ++i) s.samples.push_back(sample_from_model(m, rng).x);
  return s;
}

ApproxModel table_like_model() {
  return model_1d(0, kPi,
                  {gauss1(0.62, 0.017 * 0.017, 1.0), gauss1(0.68, 0.021 * 0.021, 0.22),
                   gauss1(0.73, 0.011 * 0.011, 0.97)},
                  0.25);
}

}  // namespace

TEST_CASE("approx_posterior_k hand cases") {
  auto p = approx_posterior_k(model_1d(0, 1, {gauss1(0.5, 0.01, 1.0)}, 0.0));
  CHECK(p.p[0] == 0.0);
  CHECK(p.p[1] == 1.0);
  p = approx_posterior_k(model_1d(0, 1, {gauss1(0.3, 0.01, 0.5), gauss1(0.7, 0.01, 0.5)}, 0.0));
  CHECK(p.p[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.p[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.p[2] == doctest::Approx(0.25).epsilon(1e-15));
  p = approx_posterior_k(model_1d(0, 1, {}, 0.1));
  for (std::size_t k = 0; k < p.p.size(); ++k)
    CHECK(p.p[k] == doctest::Approx(std::exp(-0.1) * std::pow(0.1, k) / std::tgamma(k + 1.0)).epsilon(1e-13));
  CHECK(p.p.size() == 0 + static_cast<std::size_t>(std::ceil(0.1 + 10 * std::sqrt(0.1))) + 5 + 1);
}

TEST_CASE("approx_posterior_k equals gate enumeration for L <= 10") {
  Rng rng(4);
  for (int L = 0; L <= 10; ++L) {
    std::vector<GaussianComponent> comps;
    std::vector<double> pis;
    for (int l = 0; l < L; ++l) {
      pis.push_back(uniform01(rng));
      comps.push_back(gauss1(uniform01(rng), 0.01, pis.back()));
    }
    const auto p = approx_posterior_k(model_1d(0, 1, comps, 0.0));
    const auto exact = oracle::gate_count_enumeration(pis);
    for (int k = 0; k <= L; ++k) CHECK(std::abs(p.p[k] - exact[k]) <= 1e-12);
    for (std::size_t k = L + 1; k < p.p.size(); ++k) CHECK(p.p[k] == 0.0);
  }
}

TEST_CASE("approx_posterior_k matches generative Monte Carlo with a point process") {
  const auto m = table_like_model();
  const auto p = approx_posterior_k(m);
  double total = 0.0;
  for (double v : p.p) total += v;
  CHECK(std::abs(total + p.tail_mass - 1.0) < 1e-12);
  CHECK(std::abs(total - 1.0) < 1e-9);

  const int n = 200000;
  std::vector<double> freq(p.p.size(), 0.0);
  Rng rng(12);
  for (int i = 0; i < n; ++i) {
    const auto k = sample_from_model(m, rng).x.k();
    if (k < freq.size()) freq[k] += 1.0 / n;
  }
  for (std::size_t k = 0; k < p.p.size(); ++k) {
    const double se = std::sqrt(p.p[k] * (1 - p.p[k]) / n);
    CHECK(std::abs(freq[k] - p.p[k]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("expected counts in boxes") {
  const auto m = table_like_model();
  CHECK(expected_count_interval(m, {{0.0, kPi}}) == doctest::Approx(1.0 + 0.22 + 0.97 + 0.25).epsilon(1e-15));
  CHECK(expected_count_interval(m, {{0.5, 0.5}}) == 0.0);
  const double a = expected_count_interval(m, {{0.0, 0.65}});
  const double b = expected_count_interval(m, {{0.65, 1.7}});
  const double c = expected_count_interval(m, {{1.7, kPi}});
  CHECK(a + b + c == doctest::Approx(expected_count_interval(m, {{0.0, kPi}})).epsilon(1e-14));
  CHECK_THROWS_AS(expected_count_interval(m, {{-1.0, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(expected_count_interval(m, {{0.0, 0.5}, {0.0, 0.5}}), InvalidArgument);

  const auto samples = draw_samples(m, 50000, 3);
  for (const auto& box : std::vector<std::vector<Interval>>{{{0.0, kPi / 4}}, {{kPi / 4, kPi / 2}}, {{0.0, kPi}}})
    CHECK(std::abs(expected_count_interval(m, box) - empirical_count_interval(samples, box)) < 0.03);
}

TEST_CASE("residuals") {
  SampleSet s;
  s.space = ParamSpace({{0.0, 1.0}});
  s.samples = {sample1({0.2, 0.5}), sample1({0.9})};
  CHECK(residuals(s, {{{1, 2}}, {{1}}}, 2).empty());
  const auto r = residuals(s, {{{3, 1}}, {{3}}}, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].sample == 0);
  CHECK(r[0].theta == std::vector<double>{0.2});
  CHECK(r[1].sample == 1);
  CHECK_THROWS_AS(residuals(s, {{{1}}}, 2), InvalidArgument);
}

TEST_CASE("planted outliers show up in the residuals") {
  // Two tight components plus five points planted far from both.
  const auto m = model_1d(0, kPi, {gauss1(0.8, 0.0001, 1.0), gauss1(2.2, 0.0001, 1.0)}, 0.0);
  auto samples = draw_samples(m, 2000, 21);
  const std::vector<double> planted = {0.2, 1.4, 1.6, 2.8, 3.0};
  for (std::size_t p = 0; p < planted.size(); ++p) {
    auto coords = samples.samples[p * 100].coords();
    coords.push_back(planted[p]);
    samples.samples[p * 100] = VariableDimSample(1, coords);
  }
  FitConfig cfg;
  cfg.fixed_L = 2;
  cfg.iterations = 40;
  cfg.averaging_window = 20;
  cfg.rng_seed = 2;
  const auto fit = sem_fit(samples, cfg);
  const auto res = residuals(samples, fit.allocations, fit.model.L());
  int found = 0;
  for (double t : planted)
    for (const auto& r : res)
      if (r.theta[0] == t) {
        ++found;
        break;
      }
  CHECK(found >= 4);
  const auto& last = fit.trace.iterations.back();
  CHECK(static_cast<double>(res.size()) / samples.size() ==
        doctest::Approx(last.model.lambda).epsilon(1e-12));
}

TEST_CASE("BMA histogram normalization") {
  SampleSet one;
  one.space = ParamSpace({{0.0, kPi}});
  one.samples = {sample1({0.5, 2.0})};
  CHECK(bma_histogram_intensity(one, 37).integral() == doctest::Approx(2.0).epsilon(1e-14));
  SampleSet empty;
  empty.space = one.space;
  CHECK_THROWS_AS(bma_histogram_intensity(empty, 10), InvalidArgument);
}

TEST_CASE("BMA histogram of generative samples follows the model intensity") {
  const auto m = model_1d(0, kPi, {gauss1(0.7, 0.01, 0.9), gauss1(2.0, 0.04, 0.4)}, 0.0);
  const int M = 40000, bins = 60;
  const auto samples = draw_samples(m, M, 8);
  const auto h = bma_histogram_intensity(samples, bins);
  CHECK(h.integral() == doctest::Approx(mean_k(samples)).epsilon(1e-12));
  double mad = 0.0, mean_se = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = h.lo + b * h.width(), hi = lo + h.width();
    const double expected = oracle::gauss_legendre(
                                [&](double t) {
                                  const double th[] = {t};
                                  return model_intensity(th, m);
                                },
                                lo, hi, 4) /
                            h.width();
    // Per-sample bin counts are Bernoulli sums; variance from the expected rate.
    const double p = expected * h.width();
    const double se = std::sqrt(std::max(p * (1 - std::min(p, 1.0)), 1e-12) / M) / h.width();
    mad += std::abs(h.heights[b] - expected) / bins;
    mean_se += se / bins;
  }
  CHECK(mad < 3.0 * mean_se);
}

TEST_CASE("intensity and normalized curves") {
  const auto m = table_like_model();
  const auto grid = uniform_grid({0.0, kPi}, 2001);
  const auto c = intensity_curve(m, grid);
  for (std::size_t i = 0; i < grid.size(); i += 100) {
    const double th[] = {grid[i]};
    CHECK(c.y[i] == model_intensity(th, m));
  }
  const auto norm = normalized_component_curves(m, uniform_grid({0.0, kPi}, 5001));
  REQUIRE(norm.size() == 3);
  for (int l = 0; l < 3; ++l) {
    const double top = *std::max_element(norm[l].y.begin(), norm[l].y.end());
    CHECK(top <= m.components[l].pi + 1e-15);
    CHECK(top == doctest::Approx(m.components[l].pi).epsilon(1e-3));
  }
  CHECK_THROWS_AS(intensity_curve(ApproxModel{ParamSpace({{0, 1}, {0, 1}}), {}, 0.0}, grid), InvalidArgument);
}

TEST_CASE("projected model keeps marginal box counts") {
  ApproxModel m;
  m.space = ParamSpace({{0.0, 10.0}, {0.0, 5.0}});
  m.components = {{{3.0, 1.0}, {0.5, 0.2}, 0.8}};
  m.lambda = 0.3;
  const auto p = project_model(m, 0);
  CHECK(expected_count_interval(p, {{2.0, 4.0}}) ==
        doctest::Approx(expected_count_interval(m, {{2.0, 4.0}, {0.0, 5.0}})).epsilon(1e-14));
}

TEST_CASE("reconstruction error in dB") {
  const std::vector<double> y = {1.0, -2.0, 0.5};
  CHECK(reconstruction_error_db(y, y) == kExactMatchDb);
  CHECK(reconstruction_error_db({2.0, -4.0, 1.0}, y) == doctest::Approx(0.0));
  const double s = std::sqrt(0.1);
  CHECK(reconstruction_error_db({1.0 + s * 1.0, -2.0 - s * 2.0, 0.5 + s * 0.5}, y) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(reconstruction_error_db({0.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(reconstruction_error_db({0.0, 1.0}, {1.0}), InvalidArgument);
}

TEST_CASE("reconstructions") {
  SampleSet empty_k;
  empty_k.space = ParamSpace({{0.0, kPi}});
  empty_k.samples.assign(10, VariableDimSample(1, {}));
  const std::vector<double> y(16, 1.0);
  CHECK(reconstruct_bma(empty_k, y, 20.0).y0 == std::vector<double>(16, 0.0));

  // Noiseless, well-separated pair: fixed-k chain then BMA.
  const auto sig = sinusoid::generate_synthetic_signal({0.9, 2.0}, {10.0, 10.0}, {0.0, 1.0},
                                                       std::numeric_limits<double>::infinity(), 64, 1);
  sinusoid::SinChainConfig cfg;
  cfg.p_birth = cfg.p_death = 0.0;
  cfg.initial_omega = {0.9, 2.0};
  cfg.sample_delta2 = false;
  cfg.initial_delta2 = 1e4;
  cfg.iterations = 3000;
  cfg.burn_in = 500;
  cfg.rng_seed = 3;
  const auto out = sinusoid::rjmcmc_run(sig, cfg);
  const auto bma = reconstruct_bma(out.samples, sig.y, 1e4);
  CHECK(reconstruction_error_db(bma.y0, sig.truth->noiseless) < -20.0);

  const auto m = model_1d(0, kPi, {gauss1(0.9, 1e-6, 1.0), gauss1(2.0, 1e-6, 1.0)}, 0.0);
  const auto vap = reconstruct_from_model(m, 2000, sig.y, 1e4, 5);
  CHECK(vap.used == 2000);
  CHECK(reconstruction_error_db(vap.y0, sig.truth->noiseless) < -20.0);
}

TEST_CASE("model reconstruction converges as R grows") {
  const auto sig = sinusoid::generate_synthetic_signal({0.63, 0.73}, {20.0, 20.0}, {0.0, 1.0}, 7.0, 64, 2);
  const auto m = table_like_model();
  const auto a = reconstruct_from_model(m, 100000, sig.y, 30.0, 1);
  const auto b = reconstruct_from_model(m, 100000, sig.y, 30.0, 2);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.y0.size(); ++i) {
    num += (a.y0[i] - b.y0[i]) * (a.y0[i] - b.y0[i]);
    den += a.y0[i] * a.y0[i];
  }
  CHECK(std::sqrt(num / den) < 0.01);
  const auto g = reconstruct_from_model(m, 1000, sig.y, 30.0, 1, false);
  CHECK(g.used + g.skipped == 1000);
}

TEST_CASE("summary report") {
  const auto m = table_like_model();
  const auto samples = draw_samples(m, 2000, 4);
  ReportOptions opt;
  opt.intervals = {{{0.0, kPi / 4}}, {{kPi / 4, kPi / 2}}};
  const auto r = build_report(m, samples, nullptr, opt);
  CHECK(r.components.size() == 3);
  CHECK(r.components[1].s[0] == doctest::Approx(0.021));
  CHECK(r.intervals.size() == 2);
  CHECK(r.bma_hist.integral() == doctest::Approx(mean_k(samples)));
  CHECK(r.intensity.x.size() == static_cast<std::size_t>(opt.grid_points));
  SampleSet two_d;
  two_d.space = ParamSpace({{0, 1}, {0, 1}});
  two_d.samples = {VariableDimSample(2, {0.5, 0.5})};
  CHECK_THROWS_AS(build_report(m, two_d, nullptr, opt), DataError);
}
