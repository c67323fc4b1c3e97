#pragma once

// Replicated sinusoid experiment: fresh noise, RJ-MCMC, VAPoRS fit, then
// compare features of the fitted summary with the raw samples.

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "vapors/sampler_sin.hpp"
#include "vapors/sem.hpp"

namespace vapors::mc {

struct SinSignalSpec {
  int N = 64;
  std::vector<double> omega = {0.63, 0.68, 0.73};
  std::vector<double> energy = {20.0, 6.32, 20.0};
  std::vector<double> phase = {0.0, std::numbers::pi / 4, std::numbers::pi / 3};
  double snr_db = 7.0;

  sinusoid::SinusoidSignal generate(std::uint64_t seed) const;
};

struct MonteCarloConfig {
  SinSignalSpec signal;
  sinusoid::SinChainConfig chain;
  FitConfig fit;
  int replicates = 100;
  int reconstruction_draws = 1000;
  int threads = 1;
  std::uint64_t seed = 0;

  MonteCarloConfig();
  void validate() const;
};

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int initial_L = 0;
  int final_L = 0;
  double p_k2 = 0.0, p_k3 = 0.0;        // empirical p(k|y)
  double phat_k2 = 0.0, phat_k3 = 0.0;  // from the fitted model
  int k_map = 0, k_map_hat = 0;
  double error_db_bma = 0.0, error_db_vapors = 0.0;
  double en1_model = 0.0, en1_empirical = 0.0;  // T = (0, pi/4)
  double en2_model = 0.0, en2_empirical = 0.0;  // T = (pi/4, pi/2)
};

// Seed of replicate r: mix64(seed + r).
std::uint64_t replicate_seed(std::uint64_t seed, int r);

ReplicateResult run_replicate(const MonteCarloConfig& config, int r);

// All replicates, in replicate order regardless of thread count.
std::vector<ReplicateResult> run_montecarlo(const MonteCarloConfig& config);

void write_aggregate_csv(std::ostream& out, const std::vector<ReplicateResult>& results);

}  // namespace vapors::mc
