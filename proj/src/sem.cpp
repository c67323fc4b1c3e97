#include "vapors/sem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vapors/errors.hpp"
#include "vapors/parallel.hpp"

namespace vapors {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// IQR of a standard normal.
constexpr double kIqrToSigma = 1.349;

// Per-point Gaussian log weights log(pi_l N_trunc(theta_j | l)), k x L.
struct WeightTable {
  std::size_t L = 0;
  std::vector<double> gaussian;
  double outlier = kNegInf;

  double at(std::size_t j, int label) const { return gaussian[j * L + (label - 1)]; }
};

WeightTable weight_table(const VariableDimSample& x, const DensityEvaluator& eval) {
  const int L = eval.model().L();
  WeightTable t;
  t.L = static_cast<std::size_t>(L);
  t.gaussian.resize(x.k() * t.L);
  for (std::size_t j = 0; j < x.k(); ++j)
    for (int l = 1; l <= L; ++l)
      t.gaussian[j * t.L + (l - 1)] = eval.log_pi(l) + eval.gaussian_log_density(x.component(j), l);
  t.outlier = eval.log_outlier_intensity();
  return t;
}

// Walks the sequential proposal along `order`. When `draw` is set the labels
// are sampled into `labels`; otherwise the log probability of the given
// `labels` is evaluated.
double walk_proposal(const WeightTable& w, const std::vector<std::size_t>& order,
                     std::vector<int>& labels, Rng* draw) {
  const int L = static_cast<int>(w.L);
  std::vector<char> used(w.L, 0);
  std::vector<double> lw(w.L + 1);
  double log_rho = 0.0;
  for (std::size_t j : order) {
    double m = w.outlier;
    for (int l = 1; l <= L; ++l) {
      lw[l - 1] = used[l - 1] ? kNegInf : w.at(j, l);
      m = std::max(m, lw[l - 1]);
    }
    lw[w.L] = w.outlier;

    if (m == kNegInf) {
      // No label has positive weight: the point goes to the point process.
      if (draw) {
        labels[j] = L + 1;
      } else if (labels[j] != L + 1) {
        return kNegInf;
      }
      continue;
    }
    double total = 0.0;
    for (double v : lw) total += std::exp(v - m);
    const double log_total = m + std::log(total);

    int chosen;
    if (draw) {
      const double u = uniform01(*draw) * total;
      double acc = 0.0;
      chosen = L + 1;
      for (int l = 1; l <= L + 1; ++l) {
        const double p = std::exp(lw[l - 1] - m);
        if (p <= 0.0) continue;
        acc += p;
        if (u < acc) {
          chosen = l;
          break;
        }
      }
      if (lw[chosen - 1] == kNegInf) {
        // Round-off landed past the last positive weight.
        for (int l = L + 1; l >= 1; --l)
          if (lw[l - 1] > kNegInf) {
            chosen = l;
            break;
          }
      }
      labels[j] = chosen;
    } else {
      chosen = labels[j];
      if (chosen < 1 || chosen > L + 1 || lw[chosen - 1] == kNegInf) return kNegInf;
    }
    log_rho += lw[chosen - 1] - log_total;
    if (chosen <= L) used[chosen - 1] = 1;
  }
  return log_rho;
}

std::vector<std::size_t> random_order(std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void location_scale(std::vector<double>& values, LocationScaleEstimator estimator, double& mu,
                    double& sigma2) {
  if (estimator == LocationScaleEstimator::robust) {
    std::sort(values.begin(), values.end());
    mu = quantile_sorted(values, 0.5);
    const double s = (quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25)) / kIqrToSigma;
    sigma2 = s * s;
  } else {
    const double n = static_cast<double>(values.size());
    mu = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    sigma2 = ss / n;
  }
}

std::vector<int> allocation_counts(const std::vector<AllocationVector>& allocations, int L,
                                   int& outliers) {
  std::vector<int> counts(static_cast<std::size_t>(L), 0);
  outliers = 0;
  for (const auto& z : allocations)
    for (int label : z.labels) {
      if (label <= L)
        ++counts[label - 1];
      else
        ++outliers;
    }
  return counts;
}

// Mean of the models in records[first, last); all share one dimension.
ApproxModel average_models(const std::vector<IterationRecord>& records, std::size_t first,
                           std::size_t last) {
  ApproxModel avg = records[last - 1].model;
  const double n = static_cast<double>(last - first);
  avg.lambda = 0.0;
  for (auto& c : avg.components) {
    std::fill(c.mu.begin(), c.mu.end(), 0.0);
    std::fill(c.sigma2.begin(), c.sigma2.end(), 0.0);
    c.pi = 0.0;
  }
  for (std::size_t r = first; r < last; ++r) {
    const ApproxModel& m = records[r].model;
    avg.lambda += m.lambda / n;
    for (std::size_t l = 0; l < avg.components.size(); ++l) {
      auto& c = avg.components[l];
      const auto& s = m.components[l];
      for (std::size_t i = 0; i < c.mu.size(); ++i) {
        c.mu[i] += s.mu[i] / n;
        c.sigma2[i] += s.sigma2[i] / n;
      }
      c.pi += s.pi / n;
    }
  }
  for (auto& c : avg.components) c.pi = std::clamp(c.pi, 0.0, 1.0);
  return avg;
}

}  // namespace

void FitConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be positive");
  if (imh_inner_steps < 1) throw InvalidArgument("imh_inner_steps must be positive");
  if (averaging_window < 1 || averaging_window > iterations)
    throw InvalidArgument("averaging_window must lie in 1..iterations");
  if (prune_threshold < 0) throw InvalidArgument("prune_threshold must be nonnegative");
  if (!(init_pi > 0.0 && init_pi <= 1.0)) throw InvalidArgument("init_pi must lie in (0,1]");
  if (!(init_lambda >= 0.0)) throw InvalidArgument("init_lambda must be nonnegative");
  if (!(percentile_for_L > 0.0 && percentile_for_L < 1.0))
    throw InvalidArgument("percentile_for_L must lie in (0,1)");
  if (!(threshold_for_L > 0.0 && threshold_for_L <= 1.0))
    throw InvalidArgument("threshold_for_L must lie in (0,1]");
  if (fixed_L && *fixed_L < 0) throw InvalidArgument("L must be nonnegative");
  if (!(sigma2_floor > 0.0)) throw InvalidArgument("sigma2_floor must be positive");
  if (threads < 1) throw InvalidArgument("threads must be positive");
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sequence");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

int choose_initial_L(const SampleSet& samples, const FitConfig& config) {
  if (samples.empty()) throw InvalidArgument("cannot initialize from an empty sample set");
  if (config.fixed_L) return *config.fixed_L;
  const std::vector<double> pk = empirical_k_distribution(samples);
  if (config.init_rule == InitRule::percentile) {
    double cdf = 0.0;
    for (std::size_t k = 0; k < pk.size(); ++k) {
      cdf += pk[k];
      if (cdf >= config.percentile_for_L - 1e-12) return static_cast<int>(k);
    }
    return static_cast<int>(pk.size()) - 1;
  }
  for (std::size_t k = pk.size(); k-- > 0;)
    if (pk[k] >= config.threshold_for_L) return static_cast<int>(k);
  return 0;
}

ApproxModel initialize_model(const SampleSet& samples, const FitConfig& config,
                             std::vector<std::string>* log) {
  config.validate();
  const int L = choose_initial_L(samples, config);
  const std::size_t d = samples.space.dim();
  ApproxModel model;
  model.space = samples.space;
  model.lambda = config.init_lambda;
  if (L == 0) return model;

  const auto Lz = static_cast<std::size_t>(L);
  std::vector<const VariableDimSample*> pool;
  for (const auto& s : samples.samples)
    if (s.k() == Lz) pool.push_back(&s);
  if (pool.empty()) {
    for (const auto& s : samples.samples)
      if (s.k() >= Lz) pool.push_back(&s);
    if (log)
      log->push_back("no samples with k = " + std::to_string(L) + "; initialized from " +
                     std::to_string(pool.size()) + " samples with k >= L");
  }
  if (pool.empty()) throw DataError("no samples with at least L components to initialize from");

  // sorted[l][c] collects coordinate c of the l-th smallest component,
  // ordering by the first coordinate.
  std::vector<std::vector<std::vector<double>>> sorted(Lz, std::vector<std::vector<double>>(d));
  std::vector<std::size_t> idx;
  for (const VariableDimSample* s : pool) {
    idx.resize(s->k());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [s](std::size_t a, std::size_t b) {
      return s->component(a)[0] < s->component(b)[0];
    });
    for (std::size_t l = 0; l < Lz; ++l)
      for (std::size_t c = 0; c < d; ++c) sorted[l][c].push_back(s->component(idx[l])[c]);
  }
  for (std::size_t l = 0; l < Lz; ++l) {
    GaussianComponent comp;
    comp.pi = config.init_pi;
    for (std::size_t c = 0; c < d; ++c) {
      double mu, s2;
      location_scale(sorted[l][c], LocationScaleEstimator::robust, mu, s2);
      comp.mu.push_back(mu);
      comp.sigma2.push_back(std::max(s2, config.sigma2_floor));
    }
    model.components.push_back(std::move(comp));
  }
  return model;
}

AllocationVector draw_proposal_allocation(const VariableDimSample& x, const DensityEvaluator& eval,
                                          Rng& rng) {
  AllocationVector z;
  z.labels.assign(x.k(), 0);
  if (x.k() == 0) return z;
  const WeightTable w = weight_table(x, eval);
  walk_proposal(w, random_order(x.k(), rng), z.labels, &rng);
  return z;
}

AllocationVector imh_allocation_step(const VariableDimSample& x, const AllocationVector& current,
                                     const DensityEvaluator& eval, Rng& rng, bool* accepted) {
  if (accepted) *accepted = true;
  if (x.k() == 0) return current;
  if (current.k() != x.k()) throw InvalidArgument("allocation does not match the sample");

  const WeightTable w = weight_table(x, eval);
  const auto order = random_order(x.k(), rng);
  AllocationVector proposal;
  proposal.labels.assign(x.k(), 0);
  const double log_rho_proposal = walk_proposal(w, order, proposal.labels, &rng);
  std::vector<int> current_labels = current.labels;
  const double log_rho_current = walk_proposal(w, order, current_labels, nullptr);

  const double lq_proposal = labeled_joint_log_density(x, proposal, eval);
  const double lq_current = labeled_joint_log_density(x, current, eval);

  bool take;
  if (lq_proposal == kNegInf) {
    take = false;
  } else if (lq_current == kNegInf) {
    take = true;
  } else {
    const double log_alpha = (lq_proposal - lq_current) + (log_rho_current - log_rho_proposal);
    take = log_alpha >= 0.0 || std::log(uniform01(rng)) < log_alpha;
  }
  if (accepted) *accepted = take;
  return take ? proposal : current;
}

ApproxModel mstep_robust(const SampleSet& samples, const std::vector<AllocationVector>& allocations,
                         const ApproxModel& previous, const MStepOptions& options) {
  if (allocations.size() != samples.size())
    throw InvalidArgument("allocations are not aligned with samples");
  if (samples.empty()) throw InvalidArgument("M-step on an empty sample set");
  const int L = previous.L();
  const std::size_t d = previous.space.dim();
  const double M = static_cast<double>(samples.size());

  std::vector<std::vector<std::vector<double>>> values(
      static_cast<std::size_t>(L), std::vector<std::vector<double>>(d));
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples.samples[i];
    const auto& z = allocations[i];
    if (z.k() != x.k()) throw InvalidArgument("allocation size differs from sample size");
    for (std::size_t j = 0; j < x.k(); ++j) {
      const int label = z.labels[j];
      if (label < 1 || label > L + 1) throw InvalidArgument("allocation label out of range");
      if (label == L + 1) {
        ++outliers;
        continue;
      }
      for (std::size_t c = 0; c < d; ++c) values[label - 1][c].push_back(x.component(j)[c]);
    }
  }

  ApproxModel next = previous;
  next.lambda = static_cast<double>(outliers) / M;
  for (int l = 0; l < L; ++l) {
    auto& comp = next.components[l];
    const std::size_t n = values[l].empty() ? 0 : values[l][0].size();
    comp.pi = static_cast<double>(n) / M;
    if (n == 0) continue;
    for (std::size_t c = 0; c < d; ++c) {
      double mu, s2;
      location_scale(values[l][c], options.estimator, mu, s2);
      comp.mu[c] = mu;
      comp.sigma2[c] = std::max(s2, options.sigma2_floor);
    }
  }
  return next;
}

double kl_criterion_estimate(const SampleSet& samples,
                             const std::vector<AllocationVector>& allocations,
                             const ApproxModel& model) {
  if (allocations.size() != samples.size())
    throw InvalidArgument("allocations are not aligned with samples");
  const DensityEvaluator eval(model);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    total -= labeled_joint_log_density(samples.samples[i], allocations[i], eval);
  return total;
}

FitResult sem_fit(const SampleSet& samples, const FitConfig& config) {
  config.validate();
  if (samples.empty()) throw InvalidArgument("cannot fit an empty sample set");
  for (const auto& s : samples.samples)
    if (s.k() > 0 && s.dim() != samples.space.dim())
      throw DataError("sample dimension does not match the sample set");

  FitResult result;
  ApproxModel model = initialize_model(samples, config, &result.log);
  result.initial_L = model.L();
  const std::size_t M = samples.size();
  const MStepOptions mopts{config.sigma2_floor, config.estimator};

  std::vector<AllocationVector> z(M);
  {
    const DensityEvaluator eval(model);
    parallel_for(M, config.threads, [&](std::size_t i) {
      Rng rng(derive_seed(config.rng_seed, {0, i}));
      z[i] = draw_proposal_allocation(samples.samples[i], eval, rng);
    });
  }

  int last_prune_iteration = 0;
  std::vector<char> accepted(M);
  for (int r = 1; r <= config.iterations; ++r) {
    // S-step: each sample's chain continues from its previous allocation.
    {
      const DensityEvaluator eval(model);
      parallel_for(M, config.threads, [&](std::size_t i) {
        Rng rng(derive_seed(config.rng_seed, {static_cast<std::uint64_t>(r), i}));
        bool acc = false;
        std::size_t n_acc = 0;
        for (int s = 0; s < config.imh_inner_steps; ++s) {
          z[i] = imh_allocation_step(samples.samples[i], z[i], eval, rng, &acc);
          n_acc += acc;
        }
        accepted[i] = static_cast<char>(n_acc > 0);
      });
    }

    // M-step.
    model = mstep_robust(samples, z, model, mopts);

    int outliers = 0;
    std::vector<int> counts = allocation_counts(z, model.L(), outliers);

    // Prune components that attracted too few points; their points join
    // the point process and the remaining labels are compacted.
    std::vector<int> remap(static_cast<std::size_t>(model.L()) + 2, 0);
    std::vector<GaussianComponent> kept;
    bool pruned_now = false;
    for (int l = 1; l <= model.L(); ++l) {
      if (counts[l - 1] < config.prune_threshold) {
        result.pruned.push_back({r, l, counts[l - 1]});
        result.log.push_back("iteration " + std::to_string(r) + ": pruned component " +
                             std::to_string(l) + " (" + std::to_string(counts[l - 1]) +
                             " allocated)");
        pruned_now = true;
      } else {
        kept.push_back(model.components[l - 1]);
        remap[l] = static_cast<int>(kept.size());
      }
    }
    if (pruned_now) {
      const int new_out = static_cast<int>(kept.size()) + 1;
      for (int l = 1; l <= model.L(); ++l)
        if (remap[l] == 0) remap[l] = new_out;
      remap[model.L() + 1] = new_out;
      for (auto& zi : z)
        for (int& label : zi.labels) label = remap[label];
      model.components = std::move(kept);
      counts = allocation_counts(z, model.L(), outliers);
      model.lambda = static_cast<double>(outliers) / static_cast<double>(M);
      last_prune_iteration = r;
      if (model.L() == 0)
        result.log.push_back("all Gaussian components pruned; model is a pure point process");
    }

    IterationRecord rec;
    rec.model = model;
    rec.criterion = kl_criterion_estimate(samples, z, model);
    rec.allocated = counts;
    rec.outliers = outliers;
    rec.acceptance_rate =
        static_cast<double>(std::count(accepted.begin(), accepted.end(), 1)) / static_cast<double>(M);
    result.trace.iterations.push_back(std::move(rec));
  }

  // Average over the trailing window, restricted to iterations after the
  // last pruning event so that every averaged model has the same L.
  const auto& records = result.trace.iterations;
  const std::size_t last = records.size();
  std::size_t first = static_cast<std::size_t>(last_prune_iteration);
  if (first >= last) first = last - 1;
  first = std::max(first, last - std::min<std::size_t>(last, config.averaging_window));
  result.model = average_models(records, first, last);
  result.averaged_iterations = static_cast<int>(last - first);
  result.allocations = std::move(z);
  return result;
}

}  // namespace vapors
