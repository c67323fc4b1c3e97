#pragma once

// Stochastic-EM fitting of the approximating model to trans-dimensional
// posterior samples: initialization from p(k|y), an independence
// Metropolis-Hastings S-step over allocation vectors, a robust M-step,
// pruning of starving components and window-averaged final estimates.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vapors/core.hpp"
#include "vapors/random.hpp"
#include "vapors/sample_set.hpp"

namespace vapors {

enum class InitRule {
  percentile,  // smallest k whose empirical CDF reaches percentile_for_L
  threshold,   // largest k with p(k|y) >= threshold_for_L
};

enum class LocationScaleEstimator {
  robust,   // median and IQR / 1.349
  moments,  // sample mean and (1/n) variance
};

struct FitConfig {
  int iterations = 100;
  int imh_inner_steps = 1;
  int averaging_window = 50;
  int prune_threshold = 10;
  double init_pi = 0.9;
  double init_lambda = 0.1;
  InitRule init_rule = InitRule::percentile;
  double percentile_for_L = 0.9;
  double threshold_for_L = 0.05;
  std::optional<int> fixed_L;
  double sigma2_floor = 1e-10;
  LocationScaleEstimator estimator = LocationScaleEstimator::robust;
  std::uint64_t rng_seed = 0;
  int threads = 1;

  void validate() const;
};

struct IterationRecord {
  ApproxModel model;
  double criterion = 0.0;
  std::vector<int> allocated;  // per Gaussian component
  int outliers = 0;
  double acceptance_rate = 0.0;
};

struct FitTrace {
  std::vector<IterationRecord> iterations;
};

struct PruneEvent {
  int iteration = 0;
  int label = 0;      // label at the time of pruning
  int allocated = 0;  // samples allocated to it in that iteration
};

struct FitResult {
  ApproxModel model;  // window-averaged
  FitTrace trace;
  std::vector<AllocationVector> allocations;  // from the final iteration
  std::vector<PruneEvent> pruned;
  std::vector<std::string> log;
  int initial_L = 0;
  int averaged_iterations = 0;
};

// Type-7 (linear interpolation) quantile of an ascending-sorted sequence.
double quantile_sorted(const std::vector<double>& sorted, double p);

int choose_initial_L(const SampleSet& samples, const FitConfig& config);

ApproxModel initialize_model(const SampleSet& samples, const FitConfig& config,
                             std::vector<std::string>* log = nullptr);

// Draws an allocation from the sequential proposal (used to seed chains).
AllocationVector draw_proposal_allocation(const VariableDimSample& x, const DensityEvaluator& eval,
                                          Rng& rng);

// One independence Metropolis-Hastings transition targeting q(z | x).
// `accepted`, when given, receives whether the proposal was taken.
AllocationVector imh_allocation_step(const VariableDimSample& x, const AllocationVector& current,
                                     const DensityEvaluator& eval, Rng& rng,
                                     bool* accepted = nullptr);

struct MStepOptions {
  double sigma2_floor = 1e-10;
  LocationScaleEstimator estimator = LocationScaleEstimator::robust;
};

// Re-estimates (mu, sigma2, pi) for every component and lambda. Components
// without allocated points keep their previous mu and sigma2.
ApproxModel mstep_robust(const SampleSet& samples, const std::vector<AllocationVector>& allocations,
                         const ApproxModel& previous, const MStepOptions& options = {});

// -sum_i log q(x_i, z_i); +inf when any term is impossible.
double kl_criterion_estimate(const SampleSet& samples,
                             const std::vector<AllocationVector>& allocations,
                             const ApproxModel& model);

FitResult sem_fit(const SampleSet& samples, const FitConfig& config);

}  // namespace vapors
