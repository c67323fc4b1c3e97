#pragma once

// Summaries of a fitted model against the samples it was fitted on.

#include <cstdint>
#include <optional>
#include <vector>

#include "vapors/core.hpp"
#include "vapors/sample_set.hpp"

namespace vapors::diag {

struct PosteriorK {
  std::vector<double> p;   // k = 0..k_cap
  double tail_mass = 0.0;  // P(k > k_cap)
};

// Law of sum_l Bernoulli(pi_l) + Poisson(lambda), k_cap = L + ceil(lambda +
// 10 sqrt(lambda)) + 5.
PosteriorK approx_posterior_k(const ApproxModel& model);

// sum_l pi_l P_l(T) + lambda |T| / |Theta| for a box T inside Theta.
double expected_count_interval(const ApproxModel& model, const std::vector<Interval>& box);
// Mean number of sample points in T per sample. Boxes are half-open
// [lo, hi) except at the upper edge of Theta.
double empirical_count_interval(const SampleSet& samples, const std::vector<Interval>& box);

struct Residual {
  std::size_t sample = 0;
  std::size_t component = 0;
  std::vector<double> theta;
};

// Points allocated to the point process (label L+1).
std::vector<Residual> residuals(const SampleSet& samples, const std::vector<AllocationVector>& allocations,
                                int L);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> heights;

  double width() const { return (hi - lo) / static_cast<double>(heights.size()); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
  double integral() const;
};

// Pooled histogram of coordinate `coord` over all components of all
// samples, scaled so it integrates to the mean number of components.
Histogram bma_histogram_intensity(const SampleSet& samples, int bins, std::size_t coord = 0);

// Histogram of residual coordinate `coord`, scaled like the BMA histogram
// (integral = residual count / M).
Histogram residual_histogram(const std::vector<Residual>& res, std::size_t num_samples, const Interval& range,
                             int bins, std::size_t coord = 0);

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

std::vector<double> uniform_grid(const Interval& range, int points);

// One-dimensional marginal of the model along `coord`.
ApproxModel project_model(const ApproxModel& model, std::size_t coord);

// h(theta) on a grid, d = 1 models only.
Curve intensity_curve(const ApproxModel& model, const std::vector<double>& grid);

// Per component: pi_l * pdf_l(theta) / max_theta pdf_l, d = 1 only.
std::vector<Curve> normalized_component_curves(const ApproxModel& model, const std::vector<double>& grid);

struct Reconstruction {
  std::vector<double> y0;
  long used = 0;
  long skipped = 0;  // singular designs
};

// BMA estimate: average posterior-mean signal over the samples (sinusoid
// samples, d = 1).
Reconstruction reconstruct_bma(const SampleSet& samples, const std::vector<double>& y, double delta2);

// Same average over R draws from the fitted model.
Reconstruction reconstruct_from_model(const ApproxModel& model, int R, const std::vector<double>& y,
                                      double delta2, std::uint64_t seed,
                                      bool include_point_process = true);

// 10 log10(||yhat - y0||^2 / ||y0||^2); -300 for an exact match.
double reconstruction_error_db(const std::vector<double>& y0_hat, const std::vector<double>& y0);
constexpr double kExactMatchDb = -300.0;

struct ComponentSummary {
  std::vector<double> mu;
  std::vector<double> s;
  double pi = 0.0;
};

struct IntervalCount {
  std::vector<Interval> box;
  double model = 0.0;
  double empirical = 0.0;
};

struct SummaryReport {
  std::vector<ComponentSummary> components;
  double lambda = 0.0;
  PosteriorK approx_k;
  std::vector<double> empirical_k;
  std::vector<IntervalCount> intervals;
  std::size_t residual_count = 0;
  Histogram residual_hist;
  Histogram bma_hist;
  Curve intensity;
  std::vector<Curve> normalized;
  std::optional<double> error_db_bma;
  std::optional<double> error_db_model;
};

struct ReportOptions {
  int bins = 100;
  int grid_points = 500;
  std::size_t coord = 0;  // plotted coordinate for d > 1
  std::vector<std::vector<Interval>> intervals;
};

SummaryReport build_report(const ApproxModel& model, const SampleSet& samples,
                           const std::vector<AllocationVector>* allocations, const ReportOptions& options);

}  // namespace vapors::diag
