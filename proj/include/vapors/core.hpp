#pragma once

// Domain types and exact density evaluations for the variable-dimensional
// approximating model: L gated, box-truncated diagonal Gaussians plus a
// homogeneous Poisson point process on the parameter box.

#include <cstddef>
#include <span>
#include <vector>

#include "vapors/random.hpp"

namespace vapors {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned box Theta in R^d.
class ParamSpace {
 public:
  ParamSpace() = default;
  explicit ParamSpace(std::vector<Interval> bounds);

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Interval& bound(std::size_t c) const { return bounds_[c]; }
  double volume() const { return volume_; }
  double log_volume() const { return log_volume_; }
  // Closed-box membership.
  bool contains(std::span<const double> theta) const;

  friend bool operator==(const ParamSpace&, const ParamSpace&) = default;

 private:
  std::vector<Interval> bounds_;
  double volume_ = 0.0;
  double log_volume_ = 0.0;
};

// One draw (k, theta_1..theta_k); components are stored row-major, k x d.
class VariableDimSample {
 public:
  VariableDimSample() = default;
  VariableDimSample(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const { return dim_; }
  std::size_t k() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::span<const double> component(std::size_t j) const {
    return {coords_.data() + j * dim_, dim_};
  }
  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const VariableDimSample&, const VariableDimSample&) = default;

 private:
  std::size_t dim_ = 1;
  std::vector<double> coords_;
};

// Labels are 1-based: 1..L name Gaussian components, L+1 the point process.
struct AllocationVector {
  std::vector<int> labels;

  std::size_t k() const { return labels.size(); }
  friend bool operator==(const AllocationVector&, const AllocationVector&) = default;
};

struct IndicatorVector {
  std::vector<int> present;  // xi_1..xi_L, each 0 or 1
  int outliers = 0;          // xi_{L+1}
};

struct GaussianComponent {
  std::vector<double> mu;
  std::vector<double> sigma2;  // diagonal covariance
  double pi = 1.0;             // probability of presence
};

struct ApproxModel {
  ParamSpace space;
  std::vector<GaussianComponent> components;
  double lambda = 0.0;

  int L() const { return static_cast<int>(components.size()); }
  int outlier_label() const { return L() + 1; }
  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

struct LabeledSample {
  VariableDimSample x;
  AllocationVector z;
};

// Precomputed normalizing constants of the truncated Gaussian components,
// for repeated density evaluations against one model.
class DensityEvaluator {
 public:
  explicit DensityEvaluator(const ApproxModel& model);

  const ApproxModel& model() const { return model_; }
  // log N_trunc(theta | mu_l, Sigma_l), label in 1..L. No bounds check.
  double gaussian_log_density(std::span<const double> theta, int label) const;
  // log pi_l and log(1 - pi_l), label in 1..L.
  double log_pi(int label) const { return log_pi_[label - 1]; }
  double log_one_minus_pi(int label) const { return log_not_pi_[label - 1]; }
  // log(lambda / |Theta|); -inf when lambda == 0.
  double log_outlier_intensity() const { return log_outlier_intensity_; }

 private:
  ApproxModel model_;
  std::vector<double> log_norm_;
  std::vector<double> inv_two_sigma2_;
  std::vector<double> log_pi_;
  std::vector<double> log_not_pi_;
  double log_outlier_intensity_;
};

// Counts labels; throws InvalidArgument for an out-of-range label or a
// repeated Gaussian label.
IndicatorVector indicator_from_allocation(const AllocationVector& z, int L);

// log[q(z | xi) q(xi)]; may return -inf (e.g. pi_l = 0 with xi_l = 1).
double allocation_log_prior(const AllocationVector& z, const ApproxModel& model);

// log q(theta | label): truncated Gaussian for label <= L, uniform on Theta
// for label L+1. Throws for theta outside Theta.
double component_log_density(std::span<const double> theta, int label,
                             const ApproxModel& model);

// log q(x, z), the labeled-sample density.
double labeled_joint_log_density(const VariableDimSample& x, const AllocationVector& z,
                                 const ApproxModel& model);
double labeled_joint_log_density(const VariableDimSample& x, const AllocationVector& z,
                                 const DensityEvaluator& eval);

// Draws (x, z) from the generative model.
LabeledSample sample_from_model(const ApproxModel& model, Rng& rng);

// h(theta) = sum_l pi_l N_trunc(theta | mu_l, Sigma_l). The point process is
// excluded.
double model_intensity(std::span<const double> theta, const ApproxModel& model);

// Truncated-Gaussian mass of the box `box` (must lie within Theta) under
// component `label`, renormalized to Theta.
double component_box_probability(const ApproxModel& model, int label,
                                 const std::vector<Interval>& box);

// 0 * log(0) == 0 convention.
double xlogy(double x, double y);

}  // namespace vapors
