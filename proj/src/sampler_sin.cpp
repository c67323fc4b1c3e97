#include "vapors/sampler_sin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vapors/errors.hpp"

namespace vapors::sinusoid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
// Designs whose Gram matrix is this badly conditioned count as singular.
constexpr double kMinRcond = 1e-12;

std::vector<double> sorted_copy(std::span<const double> omega) {
  std::vector<double> w(omega.begin(), omega.end());
  std::sort(w.begin(), w.end());
  return w;
}

bool frequencies_valid(std::span<const double> omega) {
  return std::all_of(omega.begin(), omega.end(), [](double w) { return w > 0.0 && w < kPi; });
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> y) {
  return {y.data(), static_cast<Eigen::Index>(y.size())};
}

// Shared pieces of the marginal: the Cholesky factor of D^T D, D^T y and
// y^T P y.
struct Projection {
  Eigen::MatrixXd D;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd Dty;
  double yPy = 0.0;
  bool ok = false;
};

Projection project(std::span<const double> sorted_omega, std::span<const double> y, double delta2) {
  Projection p;
  const auto yv = as_vector(y);
  const double yty = yv.squaredNorm();
  if (sorted_omega.empty()) {
    p.yPy = yty;
    p.ok = yty > 0.0;
    return p;
  }
  if (!frequencies_valid(sorted_omega)) return p;
  p.D = design_matrix(sorted_omega, static_cast<int>(y.size()));
  const Eigen::MatrixXd G = p.D.transpose() * p.D;
  p.llt.compute(G);
  if (p.llt.info() != Eigen::Success || p.llt.rcond() < kMinRcond) return p;
  p.Dty = p.D.transpose() * yv;
  const double shrink = delta2 / (1.0 + delta2);
  const double fitted = p.Dty.dot(p.llt.solve(p.Dty));
  p.yPy = yty - shrink * fitted;
  p.ok = p.yPy > 0.0;
  return p;
}

double log_sum_exp_poisson(double Lambda, int k_max) {
  // log sum_{j=0}^{k_max} Lambda^j / j!
  double m = kNegInf;
  std::vector<double> t(static_cast<std::size_t>(k_max) + 1);
  for (int j = 0; j <= k_max; ++j) {
    t[j] = j * std::log(Lambda) - std::lgamma(j + 1.0);
    m = std::max(m, t[j]);
  }
  double s = 0.0;
  for (double v : t) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

void SinChainConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw InvalidArgument("burn_in must lie in 0..iterations-1");
  if (thinning < 1) throw InvalidArgument("thinning must be positive");
  if (k_max < 0) throw InvalidArgument("k_max must be nonnegative");
  if (!(alpha_delta > 0 && beta_delta > 0 && alpha_Lambda > 0 && beta_Lambda > 0))
    throw InvalidArgument("hyperprior parameters must be positive");
  if (!(initial_delta2 > 0 && initial_Lambda > 0))
    throw InvalidArgument("initial hyperparameters must be positive");
  if (!(p_birth >= 0 && p_death >= 0 && p_birth + p_death <= 1.0 + 1e-12))
    throw InvalidArgument("move probabilities must be nonnegative and sum to at most 1");
  if (!(rw_step > 0)) throw InvalidArgument("rw_step must be positive");
  if (!(p_independent_update >= 0 && p_independent_update <= 1))
    throw InvalidArgument("p_independent_update must lie in [0,1]");
  if (static_cast<int>(initial_omega.size()) > k_max)
    throw InvalidArgument("initial state has more than k_max components");
  if (!frequencies_valid(initial_omega)) throw InvalidArgument("initial frequencies must lie in (0, pi)");
}

Eigen::MatrixXd design_matrix(std::span<const double> omega, int N) {
  if (N < 1) throw InvalidArgument("signal length must be positive");
  const auto k = static_cast<Eigen::Index>(omega.size());
  Eigen::MatrixXd D(N, 2 * k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (int i = 0; i < N; ++i) {
      D(i, 2 * j) = std::cos(omega[j] * i);
      D(i, 2 * j + 1) = std::sin(omega[j] * i);
    }
  return D;
}

double log_marginal_likelihood(std::span<const double> omega, std::span<const double> y,
                               double delta2) {
  if (y.size() < 2) throw InvalidArgument("signal needs at least two samples");
  if (!(delta2 > 0.0)) throw InvalidArgument("delta2 must be positive");
  const std::vector<double> w = sorted_copy(omega);
  const Projection p = project(w, y, delta2);
  if (!p.ok) return kNegInf;
  const double half_n = 0.5 * static_cast<double>(y.size());
  return -half_n * std::log(2.0 * kPi) + std::lgamma(half_n) + half_n * std::log(2.0) -
         static_cast<double>(w.size()) * std::log1p(delta2) - half_n * std::log(p.yPy);
}

double log_truncated_poisson(int k, double Lambda, int k_max) {
  if (k < 0 || k > k_max) return kNegInf;
  if (!(Lambda > 0.0)) throw InvalidArgument("Lambda must be positive");
  return k * std::log(Lambda) - std::lgamma(k + 1.0) - log_sum_exp_poisson(Lambda, k_max);
}

double log_target_marginal(std::span<const double> omega, std::span<const double> y, double delta2,
                           double Lambda, int k_max) {
  const int k = static_cast<int>(omega.size());
  const double prior = log_truncated_poisson(k, Lambda, k_max);
  if (prior == kNegInf) return kNegInf;
  return log_marginal_likelihood(omega, y, delta2) + prior - k * std::log(kPi);
}

Eigen::VectorXd amplitude_posterior_mean(std::span<const double> omega, std::span<const double> y,
                                         double delta2) {
  if (omega.empty()) return Eigen::VectorXd(0);
  if (!frequencies_valid(omega)) throw NumericalError("frequencies must lie in (0, pi)");
  const Eigen::MatrixXd D = design_matrix(omega, static_cast<int>(y.size()));
  Eigen::LLT<Eigen::MatrixXd> llt(D.transpose() * D);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond)
    throw NumericalError("singular design matrix");
  return (delta2 / (1.0 + delta2)) * llt.solve(D.transpose() * as_vector(y));
}

Eigen::VectorXd posterior_mean_signal(std::span<const double> omega, std::span<const double> y,
                                      double delta2) {
  if (omega.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(y.size()));
  return design_matrix(omega, static_cast<int>(y.size())) * amplitude_posterior_mean(omega, y, delta2);
}

SinusoidSignal generate_synthetic_signal(const std::vector<double>& omega,
                                         const std::vector<double>& energy,
                                         const std::vector<double>& phase, double snr_db, int N,
                                         std::uint64_t seed) {
  if (omega.size() != energy.size() || omega.size() != phase.size())
    throw InvalidArgument("frequencies, energies and phases must have equal lengths");
  if (N < 2) throw InvalidArgument("signal length must be at least 2");
  if (!frequencies_valid(omega)) throw InvalidArgument("frequencies must lie in (0, pi)");
  for (double A : energy)
    if (!(A > 0.0)) throw InvalidArgument("energies must be positive");

  SinusoidTruth truth;
  truth.omega = omega;
  truth.energy = energy;
  truth.phase = phase;
  truth.snr_db = snr_db;
  Eigen::VectorXd a(2 * static_cast<Eigen::Index>(omega.size()));
  for (std::size_t j = 0; j < omega.size(); ++j) {
    a(2 * j) = std::sqrt(energy[j]) * std::cos(-phase[j]);
    a(2 * j + 1) = std::sqrt(energy[j]) * std::sin(-phase[j]);
  }
  truth.amplitudes.assign(a.data(), a.data() + a.size());
  const Eigen::VectorXd y0 = design_matrix(omega, N) * a;
  truth.noiseless.assign(y0.data(), y0.data() + y0.size());
  truth.sigma2 = std::isinf(snr_db) && snr_db > 0
                     ? 0.0
                     : y0.squaredNorm() / (N * std::pow(10.0, snr_db / 10.0));

  SinusoidSignal signal;
  signal.y = truth.noiseless;
  if (truth.sigma2 > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(truth.sigma2));
    for (double& v : signal.y) v += noise(rng);
  }
  signal.truth = std::move(truth);
  return signal;
}

SinChainState with_birth(const SinChainState& s, double omega) {
  SinChainState out = s;
  out.omega.push_back(omega);
  return out;
}

SinChainState with_death(const SinChainState& s, std::size_t index) {
  if (index >= s.k()) throw InvalidArgument("death index out of range");
  SinChainState out = s;
  out.omega.erase(out.omega.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

double reflect_into_range(double x) {
  const double period = 2.0 * kPi;
  x = std::fmod(x, period);
  if (x < 0.0) x += period;
  if (x > kPi) x = period - x;
  // Boundaries themselves are excluded from the support.
  if (x <= 0.0) x = std::nextafter(0.0, 1.0);
  if (x >= kPi) x = std::nextafter(kPi, 0.0);
  return x;
}

SinusoidChain::SinusoidChain(std::vector<double> y, SinChainConfig config)
    : y_(std::move(y)), config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
  if (y_.size() < 2) throw InvalidArgument("signal needs at least two samples");
  state_.omega = config_.initial_omega;
  state_.delta2 = config_.initial_delta2;
  state_.Lambda = config_.initial_Lambda;
  log_target_ = target(state_);
  if (log_target_ == kNegInf) throw NumericalError("initial sinusoid state has zero posterior density");
}

double SinusoidChain::target(const SinChainState& s) const {
  return log_target_marginal(s.omega, y_, s.delta2, s.Lambda, config_.k_max);
}

double SinusoidChain::birth_probability(std::size_t k) const {
  return static_cast<int>(k) < config_.k_max ? config_.p_birth : 0.0;
}

double SinusoidChain::death_probability(std::size_t k) const {
  return k > 0 ? config_.p_death : 0.0;
}

void SinusoidChain::sweep() {
  const std::size_t k = state_.k();
  const double b = birth_probability(k);
  const double d = death_probability(k);
  const double u = uniform01(rng_);
  if (u < b)
    birth_move();
  else if (u < b + d)
    death_move();
  else
    update_moves();
  update_hyperparameters();
}

bool SinusoidChain::birth_move() {
  const std::size_t k = state_.k();
  ++diag_.birth.proposed;
  const double w = kPi * uniform01(rng_);
  const SinChainState next = with_birth(state_, w);
  const double t = target(next);
  if (t == kNegInf) {
    ++diag_.singular_designs;
    return false;
  }
  // Proposal density of the new frequency is 1/pi.
  const double log_r = t - log_target_ + std::log(death_probability(k + 1)) -
                       std::log(birth_probability(k)) + std::log(kPi);
  if (log_r >= 0.0 || std::log(uniform01(rng_)) < log_r) {
    state_ = next;
    log_target_ = t;
    ++diag_.birth.accepted;
    return true;
  }
  return false;
}

bool SinusoidChain::death_move() {
  const std::size_t k = state_.k();
  if (k == 0) return false;
  ++diag_.death.proposed;
  const auto j = static_cast<std::size_t>(
      std::uniform_int_distribution<std::size_t>(0, k - 1)(rng_));
  const SinChainState next = with_death(state_, j);
  const double t = target(next);
  if (t == kNegInf) {
    ++diag_.singular_designs;
    return false;
  }
  const double log_r = t - log_target_ + std::log(birth_probability(k - 1)) -
                       std::log(death_probability(k)) - std::log(kPi);
  if (log_r >= 0.0 || std::log(uniform01(rng_)) < log_r) {
    state_ = next;
    log_target_ = t;
    ++diag_.death.accepted;
    return true;
  }
  return false;
}

void SinusoidChain::update_moves() {
  std::normal_distribution<double> step(0.0, config_.rw_step);
  for (std::size_t j = 0; j < state_.k(); ++j) {
    ++diag_.update.proposed;
    SinChainState next = state_;
    if (uniform01(rng_) < config_.p_independent_update)
      next.omega[j] = reflect_into_range(kPi * uniform01(rng_));
    else
      next.omega[j] = reflect_into_range(state_.omega[j] + step(rng_));
    const double t = target(next);
    if (t == kNegInf) {
      ++diag_.singular_designs;
      continue;
    }
    const double log_r = t - log_target_;
    if (log_r >= 0.0 || std::log(uniform01(rng_)) < log_r) {
      state_ = std::move(next);
      log_target_ = t;
      ++diag_.update.accepted;
    }
  }
}

void SinusoidChain::update_hyperparameters() {
  const std::size_t k = state_.k();
  if (config_.sample_delta2) {
    // Gibbs through the integrated-out variables: sigma2 | rest, then
    // a | sigma2, rest, then delta2 | a, sigma2.
    double quad = 0.0;
    double sigma2 = 1.0;
    if (k > 0) {
      const std::vector<double> w = sorted_copy(state_.omega);
      const Projection p = project(w, y_, state_.delta2);
      if (p.ok) {
        const double n_half = 0.5 * static_cast<double>(y_.size());
        sigma2 = 1.0 / std::gamma_distribution<double>(n_half, 2.0 / p.yPy)(rng_);
        const double shrink = state_.delta2 / (1.0 + state_.delta2);
        const Eigen::VectorXd mean = shrink * p.llt.solve(p.Dty);
        Eigen::VectorXd z(mean.size());
        std::normal_distribution<double> std_normal;
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std_normal(rng_);
        // Cov = sigma2 * shrink * G^{-1}, G = L L^T.
        const Eigen::VectorXd a =
            mean + std::sqrt(sigma2 * shrink) * p.llt.matrixU().solve(z);
        quad = (p.D * a).squaredNorm();
      }
    }
    const double shape = config_.alpha_delta + static_cast<double>(k);
    const double rate = config_.beta_delta + quad / (2.0 * sigma2);
    state_.delta2 = 1.0 / std::gamma_distribution<double>(shape, 1.0 / rate)(rng_);
  }
  if (config_.sample_Lambda) {
    // Independence proposal from the untruncated conditional; the
    // truncation normalizer enters the acceptance ratio.
    ++diag_.Lambda.proposed;
    const double proposal = std::gamma_distribution<double>(
        config_.alpha_Lambda + static_cast<double>(k), 1.0 / (config_.beta_Lambda + 1.0))(rng_);
    if (proposal > 0.0) {
      const double log_F_cur = log_sum_exp_poisson(state_.Lambda, config_.k_max) - state_.Lambda;
      const double log_F_new = log_sum_exp_poisson(proposal, config_.k_max) - proposal;
      const double log_r = log_F_cur - log_F_new;
      if (log_r >= 0.0 || std::log(uniform01(rng_)) < log_r) {
        state_.Lambda = proposal;
        ++diag_.Lambda.accepted;
      }
    }
  }
  if (config_.sample_delta2 || config_.sample_Lambda) log_target_ = target(state_);
}

SinChainOutput rjmcmc_run(const SinusoidSignal& signal, const SinChainConfig& config) {
  SinusoidChain chain(signal.y, config);
  SinChainOutput out;
  out.samples.space = ParamSpace({{0.0, kPi}});
  double delta2_sum = 0.0, Lambda_sum = 0.0;
  for (int t = 1; t <= config.iterations; ++t) {
    chain.sweep();
    if (t > config.burn_in && (t - config.burn_in) % config.thinning == 0) {
      out.samples.samples.emplace_back(1, chain.state().omega);
      out.delta2.push_back(chain.state().delta2);
      delta2_sum += chain.state().delta2;
      Lambda_sum += chain.state().Lambda;
    }
  }
  out.diagnostics = chain.diagnostics();
  const double n = static_cast<double>(out.samples.size());
  if (n > 0) {
    out.diagnostics.delta2_mean = delta2_sum / n;
    out.diagnostics.Lambda_mean = Lambda_sum / n;
  }
  auto& prov = out.samples.provenance;
  prov["sampler"] = "rjmcmc-sinusoid";
  prov["seed"] = std::to_string(config.rng_seed);
  prov["iterations"] = std::to_string(config.iterations);
  prov["burn_in"] = std::to_string(config.burn_in);
  prov["thinning"] = std::to_string(config.thinning);
  prov["k_max"] = std::to_string(config.k_max);
  return out;
}

}  // namespace vapors::sinusoid
