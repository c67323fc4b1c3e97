#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "vapors/io.hpp"
#include "vapors/sampler_sin.hpp"
#include "vapors/sem.hpp"

using namespace vapors;

namespace {

// Number of significant modes of a histogram: a peak ends once the counts
// drop below it by more than max(3 sqrt(peak), 5% of the tallest bin), and a
// new one starts once they rise that much above the following valley.
int count_modes(const std::vector<double>& x, double lo, double hi, int bins) {
  std::vector<double> h(bins, 0.0);
  for (double v : x) {
    const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    if (b >= 0 && b < bins) h[b] += 1.0;
  }
  const double tallest = *std::max_element(h.begin(), h.end());
  int modes = 0;
  bool in_peak = true;
  double peak = h[0], valley = h[0];
  for (int i = 1; i < bins; ++i) {
    const double v = h[i];
    if (in_peak) {
      peak = std::max(peak, v);
      if (peak - v > std::max(3.0 * std::sqrt(peak), 0.05 * tallest)) {
        ++modes;
        in_peak = false;
        valley = v;
      }
    } else {
      valley = std::min(valley, v);
      if (v - valley > std::max(3.0 * std::sqrt(v), 0.05 * tallest)) {
        in_peak = true;
        peak = v;
      }
    }
  }
  return modes + (in_peak ? 1 : 0);
}

struct BenchmarkRun {
  SampleSet samples;
  FitResult fit;
};

const BenchmarkRun& benchmark_run() {
  static const BenchmarkRun run = [] {
    const auto signal = sinusoid::generate_synthetic_signal(
        {0.63, 0.68, 0.73}, {20.0, 6.32, 20.0}, {0.0, std::numbers::pi / 4, std::numbers::pi / 3}, 7.0, 64, 1);
    sinusoid::SinChainConfig chain;
    chain.rng_seed = 1;
    BenchmarkRun r;
    r.samples = sinusoid::rjmcmc_run(signal, chain).samples;
    FitConfig fit;
    fit.rng_seed = 1;
    r.fit = sem_fit(r.samples, fit);
    return r;
  }();
  return run;
}

}  // namespace

TEST_CASE("mode counter") {
  std::vector<double> one, two;
  for (int i = 0; i < 2000; ++i) {
    const double u = (i + 0.5) / 2000.0;
    one.push_back(0.5 + 0.1 * std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * i * 0.618));
    two.push_back((i % 2 ? 0.3 : 0.7) + 0.03 * std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * i * 0.618));
  }
  CHECK(count_modes(one, 0.0, 1.0, 40) == 1);
  CHECK(count_modes(two, 0.0, 1.0, 40) == 2);
}

TEST_CASE("allocated histograms on the three-sinusoid benchmark are unimodal") {
  const auto& run = benchmark_run();
  const auto& model = run.fit.model;
  REQUIRE(model.L() >= 2);
  for (int l = 0; l < model.L(); ++l) {
    std::vector<double> x;
    for (std::size_t i = 0; i < run.samples.size(); ++i) {
      const auto& z = run.fit.allocations[i];
      for (std::size_t j = 0; j < z.k(); ++j)
        if (z.labels[j] == l + 1) x.push_back(run.samples.samples[i].component(j)[0]);
    }
    const auto& g = model.components[l];
    const double s = std::sqrt(g.sigma2[0]);
    CAPTURE(l);
    CAPTURE(g.mu[0]);
    REQUIRE(x.size() > 100);
    CHECK(count_modes(x, g.mu[0] - 5 * s, g.mu[0] + 5 * s, 40) == 1);
  }

  // The raw sorted-frequency marginals are not.
  std::vector<double> middle, pooled;
  for (const auto& x : run.samples.samples) {
    for (double w : x.coords()) pooled.push_back(w);
    if (x.k() != 3) continue;
    auto w = x.coords();
    std::sort(w.begin(), w.end());
    middle.push_back(w[1]);
  }
  CHECK(count_modes(middle, 0.55, 0.8, 40) >= 2);
  CHECK(count_modes(pooled, 0.55, 0.8, 40) >= 2);
}

TEST_CASE("fitting from a written samples file reproduces the in-memory fit") {
  const auto& run = benchmark_run();
  std::stringstream buf;
  io::write_samples(buf, run.samples);
  const auto back = io::read_samples(buf);
  FitConfig fit;
  fit.rng_seed = 1;
  fit.iterations = 20;
  fit.averaging_window = 10;
  const auto a = sem_fit(run.samples, fit);
  const auto b = sem_fit(back, fit);
  CHECK(io::to_json(a.model).dump() == io::to_json(b.model).dump());
  CHECK(a.allocations == b.allocations);
}
