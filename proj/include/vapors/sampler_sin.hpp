#pragma once

// Reversible-jump MCMC for joint detection and estimation of sinusoids in
// white Gaussian noise, with amplitudes and noise variance integrated out.
//
// Model: y = D(omega) a + n, n ~ N(0, sigma2 I); g-prior
// a | sigma2, delta2 ~ N(0, delta2 sigma2 (D^T D)^{-1}); p(sigma2) ~ 1/sigma2;
// omega_j ~ U(0, pi) iid; k ~ Poisson(Lambda) truncated to 0..k_max;
// delta2 ~ IG(alpha_delta, beta_delta); Lambda ~ Gamma(alpha_Lambda, beta_Lambda).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vapors/sample_set.hpp"

namespace vapors::sinusoid {

struct SinusoidTruth {
  std::vector<double> omega;
  std::vector<double> energy;
  std::vector<double> phase;
  std::vector<double> amplitudes;  // (a_c1, a_s1, ..., a_ck, a_sk)
  double sigma2 = 0.0;
  double snr_db = 0.0;
  std::vector<double> noiseless;  // y0 = D a
};

struct SinusoidSignal {
  std::vector<double> y;
  std::optional<SinusoidTruth> truth;

  std::size_t N() const { return y.size(); }
};

struct SinChainConfig {
  int iterations = 100000;
  int burn_in = 20000;
  int thinning = 5;
  int k_max = 20;
  double alpha_delta = 2.0;
  double beta_delta = 20.0;
  double alpha_Lambda = 1.0;
  double beta_Lambda = 1.0;
  bool sample_delta2 = true;
  bool sample_Lambda = true;
  double initial_delta2 = 20.0;
  double initial_Lambda = 1.0;
  std::vector<double> initial_omega;
  double p_birth = 1.0 / 3.0;
  double p_death = 1.0 / 3.0;
  double rw_step = 0.01;
  // Fraction of per-component updates proposed uniformly on (0, pi)
  // instead of by random walk.
  double p_independent_update = 0.2;
  std::uint64_t rng_seed = 0;

  double p_update() const { return 1.0 - p_birth - p_death; }
  void validate() const;
};

struct MoveCounts {
  long proposed = 0;
  long accepted = 0;

  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct SinChainDiagnostics {
  MoveCounts birth, death, update, Lambda;
  long singular_designs = 0;
  double delta2_mean = 0.0;   // over retained iterations
  double Lambda_mean = 0.0;
};

struct SinChainOutput {
  SampleSet samples;  // d = 1, Theta = (0, pi)
  std::vector<double> delta2;  // per retained sample
  SinChainDiagnostics diagnostics;
};

struct SinChainState {
  std::vector<double> omega;
  double delta2 = 20.0;
  double Lambda = 1.0;

  std::size_t k() const { return omega.size(); }
  friend bool operator==(const SinChainState&, const SinChainState&) = default;
};

// N x 2k matrix: column 2j holds cos(omega_j i), column 2j+1 sin(omega_j i),
// i = 0..N-1.
Eigen::MatrixXd design_matrix(std::span<const double> omega, int N);

// log p(y | k, omega, delta2) with amplitudes and sigma2 integrated out,
// including all normalizing constants. -inf for a singular design.
double log_marginal_likelihood(std::span<const double> omega, std::span<const double> y,
                               double delta2);

// log p(k|Lambda) for the Poisson prior truncated to 0..k_max.
double log_truncated_poisson(int k, double Lambda, int k_max);

// log p(k, omega | y, delta2, Lambda) up to a constant. Exactly invariant
// under permutations of omega.
double log_target_marginal(std::span<const double> omega, std::span<const double> y, double delta2,
                           double Lambda, int k_max);

// Posterior mean of the amplitudes given omega: delta2/(1+delta2) (D^T D)^{-1} D^T y.
// Throws NumericalError for a singular design.
Eigen::VectorXd amplitude_posterior_mean(std::span<const double> omega, std::span<const double> y,
                                         double delta2);

// D(omega) times amplitude_posterior_mean.
Eigen::VectorXd posterior_mean_signal(std::span<const double> omega, std::span<const double> y,
                                      double delta2);

// Synthetic signal: a_c = sqrt(A) cos(-phi), a_s = sqrt(A) sin(-phi),
// sigma2 = ||D a||^2 / (N 10^(snr/10)). An infinite SNR gives y = D a.
SinusoidSignal generate_synthetic_signal(const std::vector<double>& omega,
                                         const std::vector<double>& energy,
                                         const std::vector<double>& phase, double snr_db, int N,
                                         std::uint64_t seed);

// State with omega appended / with component `index` removed.
SinChainState with_birth(const SinChainState& s, double omega);
SinChainState with_death(const SinChainState& s, std::size_t index);

// Reflects x into (0, pi).
double reflect_into_range(double x);

// Single-chain sampler; each move is exposed for testing.
class SinusoidChain {
 public:
  SinusoidChain(std::vector<double> y, SinChainConfig config);

  const SinChainState& state() const { return state_; }
  const SinChainDiagnostics& diagnostics() const { return diag_; }
  double log_target() const { return log_target_; }

  // One full sweep: a dimension move (birth, death or per-component
  // updates) followed by the hyperparameter updates.
  void sweep();

  bool birth_move();
  bool death_move();
  void update_moves();
  void update_hyperparameters();

 private:
  double target(const SinChainState& s) const;
  double birth_probability(std::size_t k) const;
  double death_probability(std::size_t k) const;

  std::vector<double> y_;
  SinChainConfig config_;
  SinChainState state_;
  double log_target_;
  Rng rng_;
  SinChainDiagnostics diag_;
};

// Runs the chain and records post-burn-in, thinned (k, omega) draws.
SinChainOutput rjmcmc_run(const SinusoidSignal& signal, const SinChainConfig& config);

}  // namespace vapors::sinusoid
