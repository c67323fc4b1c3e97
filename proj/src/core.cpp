#include "vapors/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vapors/errors.hpp"
#include "vapors/truncated_normal.hpp"

namespace vapors {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void require_inside(std::span<const double> theta, const ParamSpace& space) {
  if (theta.size() != space.dim())
    throw InvalidArgument("component dimension " + std::to_string(theta.size()) +
                          " does not match parameter space dimension " +
                          std::to_string(space.dim()));
  if (!space.contains(theta)) throw InvalidArgument("component lies outside the parameter space");
}

}  // namespace

double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

ParamSpace::ParamSpace(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw InvalidArgument("parameter space needs at least one dimension");
  volume_ = 1.0;
  log_volume_ = 0.0;
  for (const auto& b : bounds_) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
      throw InvalidArgument("parameter space bounds must be finite with lo < hi");
    volume_ *= b.width();
    log_volume_ += std::log(b.width());
  }
}

bool ParamSpace::contains(std::span<const double> theta) const {
  if (theta.size() != bounds_.size()) return false;
  for (std::size_t c = 0; c < theta.size(); ++c)
    if (!(theta[c] >= bounds_[c].lo && theta[c] <= bounds_[c].hi)) return false;
  return true;
}

VariableDimSample::VariableDimSample(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw InvalidArgument("sample dimension must be positive");
  if (coords_.size() % dim_ != 0)
    throw InvalidArgument("sample coordinate count is not a multiple of the dimension");
}

void ApproxModel::validate() const {
  const std::size_t d = space.dim();
  if (d == 0) throw InvalidArgument("model has no parameter space");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("lambda must be finite and nonnegative");
  for (const auto& c : components) {
    if (c.mu.size() != d || c.sigma2.size() != d)
      throw InvalidArgument("component dimension does not match parameter space");
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(c.mu[i])) throw InvalidArgument("component mean is not finite");
      if (!(c.sigma2[i] > 0.0) || !std::isfinite(c.sigma2[i]))
        throw InvalidArgument("component variance must be positive and finite");
    }
    if (!(c.pi >= 0.0 && c.pi <= 1.0)) throw InvalidArgument("probability of presence outside [0,1]");
  }
}

DensityEvaluator::DensityEvaluator(const ApproxModel& model) : model_(model) {
  model_.validate();
  const std::size_t d = model_.space.dim();
  for (const auto& c : model_.components) {
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sigma = std::sqrt(c.sigma2[i]);
      const auto& b = model_.space.bound(i);
      norm += -std::log(sigma) - kLogSqrt2Pi - truncnorm::log_interval_mass(b.lo, b.hi, c.mu[i], sigma);
      inv_two_sigma2_.push_back(0.5 / c.sigma2[i]);
    }
    log_norm_.push_back(norm);
    log_pi_.push_back(std::log(c.pi));
    log_not_pi_.push_back(std::log1p(-c.pi));
  }
  log_outlier_intensity_ =
      model_.lambda > 0.0 ? std::log(model_.lambda) - model_.space.log_volume() : kNegInf;
}

double DensityEvaluator::gaussian_log_density(std::span<const double> theta, int label) const {
  const std::size_t d = theta.size();
  const auto& mu = model_.components[label - 1].mu;
  const double* w = inv_two_sigma2_.data() + (label - 1) * d;
  double q = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = theta[i] - mu[i];
    q += r * r * w[i];
  }
  return log_norm_[label - 1] - q;
}

IndicatorVector indicator_from_allocation(const AllocationVector& z, int L) {
  if (L < 0) throw InvalidArgument("L must be nonnegative");
  IndicatorVector xi;
  xi.present.assign(static_cast<std::size_t>(L), 0);
  for (int label : z.labels) {
    if (label < 1 || label > L + 1)
      throw InvalidArgument("allocation label " + std::to_string(label) + " outside 1.." +
                            std::to_string(L + 1));
    if (label == L + 1) {
      ++xi.outliers;
    } else if (xi.present[label - 1]++ != 0) {
      throw InvalidArgument("Gaussian label " + std::to_string(label) +
                            " allocated more than once");
    }
  }
  return xi;
}

double allocation_log_prior(const AllocationVector& z, const ApproxModel& model) {
  const IndicatorVector xi = indicator_from_allocation(z, model.L());
  double lp = -log_factorial(z.k()) - model.lambda + xlogy(xi.outliers, model.lambda);
  for (int l = 0; l < model.L(); ++l) {
    const double pi = model.components[l].pi;
    lp += xi.present[l] ? xlogy(1.0, pi) : std::log1p(-pi);
  }
  return lp;
}

double component_log_density(std::span<const double> theta, int label, const ApproxModel& model) {
  require_inside(theta, model.space);
  if (label < 1 || label > model.L() + 1) throw InvalidArgument("label out of range");
  if (label == model.L() + 1) return -model.space.log_volume();
  const auto& c = model.components[label - 1];
  double ld = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double sigma = std::sqrt(c.sigma2[i]);
    const auto& b = model.space.bound(i);
    ld += truncnorm::log_pdf(theta[i], c.mu[i], sigma) -
          truncnorm::log_interval_mass(b.lo, b.hi, c.mu[i], sigma);
  }
  return ld;
}

double labeled_joint_log_density(const VariableDimSample& x, const AllocationVector& z,
                                 const DensityEvaluator& eval) {
  const ApproxModel& model = eval.model();
  if (x.k() != z.k()) throw InvalidArgument("sample and allocation sizes differ");
  if (x.k() > 0 && x.dim() != model.space.dim())
    throw InvalidArgument("sample dimension does not match the model");
  const int L = model.L();
  const IndicatorVector xi = indicator_from_allocation(z, L);

  double lq = -model.lambda - log_factorial(x.k());
  if (xi.outliers > 0) lq += xi.outliers * eval.log_outlier_intensity();
  for (int l = 1; l <= L; ++l)
    lq += xi.present[l - 1] ? eval.log_pi(l) : eval.log_one_minus_pi(l);
  for (std::size_t j = 0; j < x.k(); ++j) {
    const auto theta = x.component(j);
    if (!model.space.contains(theta)) throw InvalidArgument("component lies outside the parameter space");
    if (z.labels[j] <= L) lq += eval.gaussian_log_density(theta, z.labels[j]);
  }
  return lq;
}

double labeled_joint_log_density(const VariableDimSample& x, const AllocationVector& z,
                                 const ApproxModel& model) {
  return labeled_joint_log_density(x, z, DensityEvaluator(model));
}

LabeledSample sample_from_model(const ApproxModel& model, Rng& rng) {
  model.validate();
  const std::size_t d = model.space.dim();
  struct Point {
    int label;
    std::vector<double> theta;
  };
  std::vector<Point> points;
  for (int l = 1; l <= model.L(); ++l) {
    const auto& c = model.components[l - 1];
    if (!std::bernoulli_distribution(c.pi)(rng)) continue;
    std::vector<double> theta(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& b = model.space.bound(i);
      theta[i] = truncnorm::sample(rng, b.lo, b.hi, c.mu[i], std::sqrt(c.sigma2[i]));
    }
    points.push_back({l, std::move(theta)});
  }
  const int outliers = model.lambda > 0.0 ? std::poisson_distribution<int>(model.lambda)(rng) : 0;
  for (int n = 0; n < outliers; ++n) {
    std::vector<double> theta(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& b = model.space.bound(i);
      theta[i] = std::uniform_real_distribution<double>(b.lo, b.hi)(rng);
    }
    points.push_back({model.outlier_label(), std::move(theta)});
  }
  std::shuffle(points.begin(), points.end(), rng);

  std::vector<double> coords;
  coords.reserve(points.size() * d);
  AllocationVector z;
  for (auto& p : points) {
    coords.insert(coords.end(), p.theta.begin(), p.theta.end());
    z.labels.push_back(p.label);
  }
  return {VariableDimSample(d, std::move(coords)), std::move(z)};
}

double model_intensity(std::span<const double> theta, const ApproxModel& model) {
  require_inside(theta, model.space);
  double h = 0.0;
  for (int l = 1; l <= model.L(); ++l) {
    const double pi = model.components[l - 1].pi;
    if (pi > 0.0) h += pi * std::exp(component_log_density(theta, l, model));
  }
  return h;
}

double component_box_probability(const ApproxModel& model, int label,
                                 const std::vector<Interval>& box) {
  if (label < 1 || label > model.L()) throw InvalidArgument("label out of range");
  if (box.size() != model.space.dim()) throw InvalidArgument("box dimension mismatch");
  const auto& c = model.components[label - 1];
  double p = 1.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto& b = model.space.bound(i);
    const double lo = std::max(box[i].lo, b.lo);
    const double hi = std::min(box[i].hi, b.hi);
    if (!(hi > lo)) return 0.0;
    const double sigma = std::sqrt(c.sigma2[i]);
    const double inner = truncnorm::interval_mass(lo, hi, c.mu[i], sigma);
    const double outer = truncnorm::interval_mass(b.lo, b.hi, c.mu[i], sigma);
    p *= outer > 0.0 ? inner / outer
                     : std::exp(truncnorm::log_interval_mass(lo, hi, c.mu[i], sigma) -
                                truncnorm::log_interval_mass(b.lo, b.hi, c.mu[i], sigma));
  }
  return p;
}

}  // namespace vapors
