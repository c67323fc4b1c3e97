#pragma once

// Muon counting: photoelectron counts in fixed-width bins are independent
// Poisson variables whose means superimpose one rise-and-decay pulse per
// muon. RJ-MCMC over (k, {t_mu, a_mu}).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vapors/sample_set.hpp"
#include "vapors/sampler_sin.hpp"

namespace vapors::auger {

struct PulseShape {
  double rise_time = 15.0;  // t_d, ns
  double decay = 67.0;      // tau, ns

  void validate() const;
  // tau^2 / (t_d + tau)
  double normalizer() const { return decay * decay / (rise_time + decay); }
};

// (1 - exp(-t/t_d)) exp(-t/tau) / Z for t >= 0, 0 before.
double pulse_density(double t, const PulseShape& shape);
double pulse_cdf(double t, const PulseShape& shape);
// Integral of pulse_density over [a, b].
double pulse_mass(double a, double b, const PulseShape& shape);

// Bin i covers [t0 + i t_delta, t0 + (i+1) t_delta), i = 0..N-1.
struct BinGeometry {
  int N = 40;
  double t0 = 0.0;
  double t_delta = 25.0;

  double edge(int i) const { return t0 + i * t_delta; }
  double window_start() const { return t0; }
  double window_end() const { return edge(N); }
  void validate() const;
};

struct MuonParams {
  double t = 0.0;  // arrival, ns
  double a = 1.0;  // expected PE count

  friend bool operator==(const MuonParams&, const MuonParams&) = default;
};

struct PECountSignal {
  std::vector<long> n;
  double t0 = 0.0;
  double t_delta = 25.0;
  std::optional<std::vector<MuonParams>> truth;

  BinGeometry geometry() const { return {static_cast<int>(n.size()), t0, t_delta}; }
};

// Expected PE count per bin. Muons are summed in a canonical order so the
// result does not depend on their order.
std::vector<double> expected_bin_counts(std::span<const MuonParams> muons, const BinGeometry& geometry,
                                        const PulseShape& shape);

// sum_i n_i log nbar_i - nbar_i - log n_i!, with 0 log 0 = 0; -inf when a
// positive count meets a zero mean.
double log_likelihood_pe(std::span<const long> n, std::span<const double> nbar);

PECountSignal generate_pe_signal(const std::vector<MuonParams>& muons, const BinGeometry& geometry,
                                 const PulseShape& shape, std::uint64_t seed);

struct AugerChainConfig {
  int iterations = 100000;
  int burn_in = 20000;
  int thinning = 5;
  int k_max = 20;
  // Fixed rate of the truncated Poisson prior on k.
  double Lambda_mu = 1.0;
  // Gamma(shape, rate) prior on amplitudes, truncated to (0, a_max].
  double alpha_a = 1.0;
  double beta_a = 0.1;
  double a_max = 1000.0;
  PulseShape shape;
  double p_birth = 1.0 / 3.0;
  double p_death = 1.0 / 3.0;
  double t_step = 5.0;        // ns
  double log_a_step = 0.1;
  // Fraction of arrival-time updates drawn uniformly over the window.
  double p_independent_update = 0.2;
  std::vector<MuonParams> initial_muons;
  // Record only arrival times (d = 1) instead of (t, a) pairs.
  bool arrival_only = false;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct AugerChainDiagnostics {
  sinusoid::MoveCounts birth, death, update_t, update_a;
};

struct AugerChainState {
  std::vector<MuonParams> muons;
  std::size_t k() const { return muons.size(); }
  friend bool operator==(const AugerChainState&, const AugerChainState&) = default;
};

struct AugerChainOutput {
  SampleSet samples;  // d = 2: (t, a) in window x (0, a_max]; d = 1 if arrival_only
  AugerChainDiagnostics diagnostics;
};

// log p(k, muons | n) up to a constant: likelihood plus priors.
double log_target_auger(std::span<const MuonParams> muons, const PECountSignal& signal,
                        const AugerChainConfig& config);

class AugerChain {
 public:
  AugerChain(PECountSignal signal, AugerChainConfig config);

  const AugerChainState& state() const { return state_; }
  const AugerChainDiagnostics& diagnostics() const { return diag_; }
  double log_target() const { return log_target_; }

  void sweep();
  bool birth_move();
  bool death_move();
  void update_moves();

 private:
  double target(const AugerChainState& s) const;
  double log_prior_single(const MuonParams& m) const;
  double birth_probability(std::size_t k) const;
  double death_probability(std::size_t k) const;
  bool accept(double log_r);

  PECountSignal signal_;
  AugerChainConfig config_;
  AugerChainState state_;
  double log_target_;
  Rng rng_;
  AugerChainDiagnostics diag_;
};

AugerChainOutput rjmcmc_run_auger(const PECountSignal& signal, const AugerChainConfig& config);

}  // namespace vapors::auger
