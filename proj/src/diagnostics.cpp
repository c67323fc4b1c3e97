#include "vapors/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "vapors/errors.hpp"
#include "vapors/sampler_sin.hpp"

namespace vapors::diag {

namespace {

void check_box(const ParamSpace& space, const std::vector<Interval>& box) {
  if (box.size() != space.dim()) throw InvalidArgument("interval dimension does not match the parameter space");
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto& b = space.bound(i);
    if (box[i].lo > box[i].hi) throw InvalidArgument("interval bounds are reversed");
    if (box[i].lo < b.lo || box[i].hi > b.hi) throw InvalidArgument("interval lies outside the parameter space");
  }
}

std::vector<double> poisson_pmf(double lambda, int k_cap) {
  std::vector<double> p(static_cast<std::size_t>(k_cap) + 1, 0.0);
  if (lambda == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double log_lambda = std::log(lambda);
  for (int j = 0; j <= k_cap; ++j) p[j] = std::exp(j * log_lambda - lambda - std::lgamma(j + 1.0));
  return p;
}

std::size_t bin_index(double x, double lo, double width, std::size_t bins) {
  const double f = std::floor((x - lo) / width);
  if (f < 0.0) return 0;
  return std::min(static_cast<std::size_t>(f), bins - 1);
}

}  // namespace

PosteriorK approx_posterior_k(const ApproxModel& model) {
  model.validate();
  const int L = model.L();
  const int k_cap = L + static_cast<int>(std::ceil(model.lambda + 10.0 * std::sqrt(model.lambda))) + 5;
  // Poisson-binomial part by iterative convolution.
  std::vector<double> gates(static_cast<std::size_t>(L) + 1, 0.0);
  gates[0] = 1.0;
  for (int l = 0; l < L; ++l) {
    const double pi = model.components[l].pi;
    for (int k = l + 1; k >= 0; --k) gates[k] = gates[k] * (1.0 - pi) + (k > 0 ? gates[k - 1] * pi : 0.0);
  }
  const auto pois = poisson_pmf(model.lambda, k_cap);
  PosteriorK out;
  out.p.assign(static_cast<std::size_t>(k_cap) + 1, 0.0);
  for (int k = 0; k <= k_cap; ++k)
    for (int j = 0; j <= std::min(k, L); ++j) out.p[k] += gates[j] * pois[k - j];
  double total = 0.0;
  for (double v : out.p) total += v;
  out.tail_mass = std::max(0.0, 1.0 - total);
  return out;
}

double expected_count_interval(const ApproxModel& model, const std::vector<Interval>& box) {
  check_box(model.space, box);
  double volume = 1.0;
  for (const auto& b : box) volume *= b.width();
  if (volume == 0.0) return 0.0;
  double total = 0.0;
  for (int l = 1; l <= model.L(); ++l)
    total += model.components[l - 1].pi * component_box_probability(model, l, box);
  return total + model.lambda * volume / model.space.volume();
}

double empirical_count_interval(const SampleSet& samples, const std::vector<Interval>& box) {
  check_box(samples.space, box);
  if (samples.empty()) throw InvalidArgument("empty sample set");
  auto inside = [&](std::span<const double> theta) {
    for (std::size_t i = 0; i < box.size(); ++i) {
      const bool closed = box[i].hi == samples.space.bound(i).hi;
      if (theta[i] < box[i].lo || theta[i] > box[i].hi || (!closed && theta[i] == box[i].hi)) return false;
    }
    return true;
  };
  std::size_t count = 0;
  for (const auto& s : samples.samples)
    for (std::size_t j = 0; j < s.k(); ++j) count += inside(s.component(j));
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

std::vector<Residual> residuals(const SampleSet& samples, const std::vector<AllocationVector>& allocations,
                                int L) {
  if (allocations.size() != samples.size()) throw InvalidArgument("allocations and samples differ in number");
  std::vector<Residual> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples.samples[i];
    const auto& z = allocations[i].labels;
    if (z.size() != s.k()) throw InvalidArgument("allocation length does not match sample size");
    for (std::size_t j = 0; j < z.size(); ++j)
      if (z[j] == L + 1) {
        const auto th = s.component(j);
        out.push_back({i, j, std::vector<double>(th.begin(), th.end())});
      }
  }
  return out;
}

double Histogram::integral() const {
  double s = 0.0;
  for (double h : heights) s += h;
  return s * width();
}

Histogram bma_histogram_intensity(const SampleSet& samples, int bins, std::size_t coord) {
  if (samples.empty()) throw InvalidArgument("empty sample set");
  if (bins < 1) throw InvalidArgument("bins must be positive");
  if (coord >= samples.space.dim()) throw InvalidArgument("coordinate out of range");
  Histogram h;
  h.lo = samples.space.bound(coord).lo;
  h.hi = samples.space.bound(coord).hi;
  const double w = (h.hi - h.lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const auto& s : samples.samples)
    for (std::size_t j = 0; j < s.k(); ++j) ++counts[bin_index(s.component(j)[coord], h.lo, w, counts.size())];
  const double scale = 1.0 / (static_cast<double>(samples.size()) * w);
  for (std::size_t c : counts) h.heights.push_back(static_cast<double>(c) * scale);
  return h;
}

Histogram residual_histogram(const std::vector<Residual>& res, std::size_t num_samples, const Interval& range,
                             int bins, std::size_t coord) {
  if (num_samples == 0) throw InvalidArgument("empty sample set");
  if (bins < 1) throw InvalidArgument("bins must be positive");
  Histogram h;
  h.lo = range.lo;
  h.hi = range.hi;
  const double w = (h.hi - h.lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const auto& r : res) ++counts[bin_index(r.theta.at(coord), h.lo, w, counts.size())];
  for (std::size_t c : counts) h.heights.push_back(static_cast<double>(c) / (static_cast<double>(num_samples) * w));
  return h;
}

std::vector<double> uniform_grid(const Interval& range, int points) {
  if (points < 2) throw InvalidArgument("a grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = range.lo + range.width() * i / (points - 1);
  return g;
}

ApproxModel project_model(const ApproxModel& model, std::size_t coord) {
  if (coord >= model.space.dim()) throw InvalidArgument("coordinate out of range");
  ApproxModel m;
  m.space = ParamSpace({model.space.bound(coord)});
  for (const auto& c : model.components) m.components.push_back({{c.mu[coord]}, {c.sigma2[coord]}, c.pi});
  // Expected outlier count is unchanged by marginalization.
  m.lambda = model.lambda;
  return m;
}

Curve intensity_curve(const ApproxModel& model, const std::vector<double>& grid) {
  if (model.space.dim() != 1) throw InvalidArgument("intensity curves need a one-dimensional model");
  Curve c;
  c.x = grid;
  for (double t : grid) {
    const double th[] = {t};
    c.y.push_back(model_intensity(th, model));
  }
  return c;
}

std::vector<Curve> normalized_component_curves(const ApproxModel& model, const std::vector<double>& grid) {
  if (model.space.dim() != 1) throw InvalidArgument("component curves need a one-dimensional model");
  const auto& b = model.space.bound(0);
  std::vector<Curve> out;
  for (int l = 1; l <= model.L(); ++l) {
    const auto& comp = model.components[l - 1];
    const double peak[] = {std::clamp(comp.mu[0], b.lo, b.hi)};
    const double log_max = component_log_density(peak, l, model);
    Curve c;
    c.x = grid;
    for (double t : grid) {
      const double th[] = {t};
      c.y.push_back(comp.pi * std::exp(component_log_density(th, l, model) - log_max));
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

void accumulate_signal(Reconstruction& acc, const std::vector<double>& omega, const std::vector<double>& y,
                       double delta2) {
  if (omega.empty()) {
    ++acc.used;
    return;
  }
  try {
    const Eigen::VectorXd s = sinusoid::posterior_mean_signal(omega, y, delta2);
    for (std::size_t i = 0; i < acc.y0.size(); ++i) acc.y0[i] += s(static_cast<Eigen::Index>(i));
    ++acc.used;
  } catch (const NumericalError&) {
    ++acc.skipped;
  }
}

void finish(Reconstruction& acc) {
  if (acc.used == 0) throw NumericalError("every reconstruction draw had a singular design");
  for (double& v : acc.y0) v /= static_cast<double>(acc.used);
}

}  // namespace

Reconstruction reconstruct_bma(const SampleSet& samples, const std::vector<double>& y, double delta2) {
  if (samples.empty()) throw InvalidArgument("empty sample set");
  if (samples.space.dim() != 1) throw InvalidArgument("signal reconstruction needs frequency samples (d = 1)");
  Reconstruction acc;
  acc.y0.assign(y.size(), 0.0);
  for (const auto& s : samples.samples) accumulate_signal(acc, s.coords(), y, delta2);
  finish(acc);
  return acc;
}

Reconstruction reconstruct_from_model(const ApproxModel& model, int R, const std::vector<double>& y,
                                      double delta2, std::uint64_t seed, bool include_point_process) {
  if (R < 1) throw InvalidArgument("R must be positive");
  if (model.space.dim() != 1) throw InvalidArgument("signal reconstruction needs a frequency model (d = 1)");
  Rng rng(seed);
  Reconstruction acc;
  acc.y0.assign(y.size(), 0.0);
  const int outlier = model.outlier_label();
  for (int r = 0; r < R; ++r) {
    const auto draw = sample_from_model(model, rng);
    std::vector<double> omega;
    for (std::size_t j = 0; j < draw.x.k(); ++j)
      if (include_point_process || draw.z.labels[j] != outlier) omega.push_back(draw.x.component(j)[0]);
    accumulate_signal(acc, omega, y, delta2);
  }
  finish(acc);
  return acc;
}

double reconstruction_error_db(const std::vector<double>& y0_hat, const std::vector<double>& y0) {
  if (y0_hat.size() != y0.size()) throw InvalidArgument("signals differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y0.size(); ++i) {
    num += (y0_hat[i] - y0[i]) * (y0_hat[i] - y0[i]);
    den += y0[i] * y0[i];
  }
  if (!(den > 0.0)) throw InvalidArgument("reference signal is zero");
  if (num == 0.0) return kExactMatchDb;
  return std::max(kExactMatchDb, 10.0 * std::log10(num / den));
}

SummaryReport build_report(const ApproxModel& model, const SampleSet& samples,
                           const std::vector<AllocationVector>* allocations, const ReportOptions& options) {
  if (model.space.dim() != samples.space.dim())
    throw DataError("model and samples have different dimensions");
  model.validate();
  SummaryReport r;
  for (const auto& c : model.components) {
    ComponentSummary s;
    s.mu = c.mu;
    for (double v : c.sigma2) s.s.push_back(std::sqrt(v));
    s.pi = c.pi;
    r.components.push_back(std::move(s));
  }
  r.lambda = model.lambda;
  r.approx_k = approx_posterior_k(model);
  r.empirical_k = empirical_k_distribution(samples);
  for (const auto& box : options.intervals)
    r.intervals.push_back({box, expected_count_interval(model, box), empirical_count_interval(samples, box)});

  const auto& range = samples.space.bound(options.coord);
  r.bma_hist = bma_histogram_intensity(samples, options.bins, options.coord);
  if (allocations) {
    const auto res = residuals(samples, *allocations, model.L());
    r.residual_count = res.size();
    r.residual_hist = residual_histogram(res, samples.size(), range, options.bins, options.coord);
  }
  const ApproxModel marginal = model.space.dim() == 1 ? model : project_model(model, options.coord);
  const auto grid = uniform_grid(range, options.grid_points);
  r.intensity = intensity_curve(marginal, grid);
  r.normalized = normalized_component_curves(marginal, grid);
  return r;
}

}  // namespace vapors::diag
