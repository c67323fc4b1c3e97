#include "vapors/sampler_auger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "vapors/errors.hpp"

namespace vapors::auger {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<MuonParams> canonical(std::span<const MuonParams> muons) {
  std::vector<MuonParams> out(muons.begin(), muons.end());
  std::sort(out.begin(), out.end(),
            [](const MuonParams& x, const MuonParams& y) { return x.t < y.t || (x.t == y.t && x.a < y.a); });
  return out;
}

// exp(-a/s) - exp(-b/s) for 0 <= a <= b.
double exp_diff(double a, double b, double s) {
  return -std::exp(-a / s) * std::expm1(-(b - a) / s);
}

double reflect(double x, double lo, double hi) {
  const double w = hi - lo;
  double u = std::fmod(x - lo, 2.0 * w);
  if (u < 0.0) u += 2.0 * w;
  if (u > w) u = 2.0 * w - u;
  return std::clamp(lo + u, lo, std::nextafter(hi, lo));
}

}  // namespace

void PulseShape::validate() const {
  if (!(rise_time > 0.0 && decay > 0.0)) throw InvalidArgument("pulse rise time and decay must be positive");
}

void BinGeometry::validate() const {
  if (N < 1) throw InvalidArgument("signal needs at least one bin");
  if (!(t_delta > 0.0)) throw InvalidArgument("bin width must be positive");
}

double pulse_density(double t, const PulseShape& shape) {
  if (t < 0.0) return 0.0;
  return -std::expm1(-t / shape.rise_time) * std::exp(-t / shape.decay) / shape.normalizer();
}

double pulse_mass(double a, double b, const PulseShape& shape) {
  if (b <= 0.0 || b <= a) return 0.0;
  a = std::max(a, 0.0);
  const double tau = shape.decay;
  const double r = shape.rise_time * tau / (shape.rise_time + tau);
  const double m = (tau * exp_diff(a, b, tau) - r * exp_diff(a, b, r)) / shape.normalizer();
  return std::max(m, 0.0);
}

double pulse_cdf(double t, const PulseShape& shape) {
  return pulse_mass(0.0, t, shape);
}

std::vector<double> expected_bin_counts(std::span<const MuonParams> muons, const BinGeometry& geometry,
                                        const PulseShape& shape) {
  std::vector<double> nbar(static_cast<std::size_t>(geometry.N), 0.0);
  for (const MuonParams& m : canonical(muons))
    for (int i = 0; i < geometry.N; ++i)
      nbar[i] += m.a * pulse_mass(geometry.edge(i) - m.t, geometry.edge(i + 1) - m.t, shape);
  return nbar;
}

double log_likelihood_pe(std::span<const long> n, std::span<const double> nbar) {
  if (n.size() != nbar.size()) throw InvalidArgument("count and mean vectors differ in length");
  double ll = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0) throw InvalidArgument("negative photoelectron count");
    if (n[i] > 0) {
      if (nbar[i] <= 0.0) return kNegInf;
      ll += static_cast<double>(n[i]) * std::log(nbar[i]) - std::lgamma(static_cast<double>(n[i]) + 1.0);
    }
    ll -= nbar[i];
  }
  return ll;
}

PECountSignal generate_pe_signal(const std::vector<MuonParams>& muons, const BinGeometry& geometry,
                                 const PulseShape& shape, std::uint64_t seed) {
  geometry.validate();
  shape.validate();
  for (const auto& m : muons)
    if (!(m.a > 0.0)) throw InvalidArgument("muon amplitudes must be positive");
  const auto nbar = expected_bin_counts(muons, geometry, shape);
  PECountSignal s;
  s.t0 = geometry.t0;
  s.t_delta = geometry.t_delta;
  s.truth = muons;
  Rng rng(seed);
  for (double mean : nbar) s.n.push_back(mean > 0.0 ? std::poisson_distribution<long>(mean)(rng) : 0);
  return s;
}

void AugerChainConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw InvalidArgument("burn_in must lie in 0..iterations-1");
  if (thinning < 1) throw InvalidArgument("thinning must be positive");
  if (k_max < 0) throw InvalidArgument("k_max must be nonnegative");
  if (!(Lambda_mu > 0.0)) throw InvalidArgument("Lambda_mu must be positive");
  if (!(alpha_a > 0.0 && beta_a > 0.0 && a_max > 0.0))
    throw InvalidArgument("amplitude prior parameters must be positive");
  shape.validate();
  if (!(p_birth >= 0 && p_death >= 0 && p_birth + p_death <= 1.0 + 1e-12))
    throw InvalidArgument("move probabilities must be nonnegative and sum to at most 1");
  if (!(t_step > 0.0 && log_a_step > 0.0)) throw InvalidArgument("step sizes must be positive");
  if (!(p_independent_update >= 0 && p_independent_update <= 1))
    throw InvalidArgument("p_independent_update must lie in [0,1]");
  if (static_cast<int>(initial_muons.size()) > k_max)
    throw InvalidArgument("initial state has more than k_max muons");
}

double log_target_auger(std::span<const MuonParams> muons, const PECountSignal& signal,
                        const AugerChainConfig& config) {
  const auto g = signal.geometry();
  const int k = static_cast<int>(muons.size());
  double lp = sinusoid::log_truncated_poisson(k, config.Lambda_mu, config.k_max);
  if (lp == kNegInf) return kNegInf;
  const double log_width = std::log(g.window_end() - g.window_start());
  const double log_trunc = std::log(boost::math::gamma_p(config.alpha_a, config.beta_a * config.a_max));
  const double log_norm = config.alpha_a * std::log(config.beta_a) - std::lgamma(config.alpha_a) - log_trunc;
  for (const MuonParams& m : canonical(muons)) {
    if (m.t < g.window_start() || m.t >= g.window_end() || !(m.a > 0.0) || m.a > config.a_max)
      return kNegInf;
    lp += -log_width + log_norm + (config.alpha_a - 1.0) * std::log(m.a) - config.beta_a * m.a;
  }
  const auto nbar = expected_bin_counts(muons, g, config.shape);
  return lp + log_likelihood_pe(signal.n, nbar);
}

AugerChain::AugerChain(PECountSignal signal, AugerChainConfig config)
    : signal_(std::move(signal)), config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
  signal_.geometry().validate();
  state_.muons = config_.initial_muons;
  const auto g = signal_.geometry();
  for (const auto& m : state_.muons)
    if (m.t < g.window_start() || m.t >= g.window_end() || !(m.a > 0.0) || m.a > config_.a_max)
      throw InvalidArgument("initial muon outside the prior support");
  // May be -inf (e.g. no muons but positive counts); the first finite
  // proposal is then always accepted.
  log_target_ = target(state_);
}

double AugerChain::target(const AugerChainState& s) const {
  return log_target_auger(s.muons, signal_, config_);
}

double AugerChain::log_prior_single(const MuonParams& m) const {
  const auto g = signal_.geometry();
  const double log_trunc = std::log(boost::math::gamma_p(config_.alpha_a, config_.beta_a * config_.a_max));
  return -std::log(g.window_end() - g.window_start()) + config_.alpha_a * std::log(config_.beta_a) -
         std::lgamma(config_.alpha_a) - log_trunc + (config_.alpha_a - 1.0) * std::log(m.a) -
         config_.beta_a * m.a;
}

double AugerChain::birth_probability(std::size_t k) const {
  return static_cast<int>(k) < config_.k_max ? config_.p_birth : 0.0;
}

double AugerChain::death_probability(std::size_t k) const {
  return k > 0 ? config_.p_death : 0.0;
}

bool AugerChain::accept(double log_r) {
  return log_r >= 0.0 || std::log(uniform01(rng_)) < log_r;
}

void AugerChain::sweep() {
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
}

bool AugerChain::birth_move() {
  const std::size_t k = state_.k();
  ++diag_.birth.proposed;
  const auto g = signal_.geometry();
  // New muon drawn from its prior, so the prior and proposal cancel.
  MuonParams m;
  m.t = g.window_start() + (g.window_end() - g.window_start()) * uniform01(rng_);
  // Inverse CDF of the Gamma prior truncated to (0, a_max].
  const double top = boost::math::gamma_p(config_.alpha_a, config_.beta_a * config_.a_max);
  double u = 0.0;
  while (u == 0.0) u = uniform01(rng_);
  m.a = std::min(boost::math::gamma_p_inv(config_.alpha_a, u * top) / config_.beta_a, config_.a_max);
  if (!(m.a > 0.0)) return false;
  AugerChainState next = state_;
  next.muons.push_back(m);
  const double t = target(next);
  if (t == kNegInf) return false;
  const double log_r = t - log_target_ - log_prior_single(m) + std::log(death_probability(k + 1)) -
                       std::log(birth_probability(k));
  if (!accept(log_r)) return false;
  state_ = std::move(next);
  log_target_ = t;
  ++diag_.birth.accepted;
  return true;
}

bool AugerChain::death_move() {
  const std::size_t k = state_.k();
  if (k == 0) return false;
  ++diag_.death.proposed;
  const auto j = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng_);
  AugerChainState next = state_;
  const MuonParams removed = next.muons[j];
  next.muons.erase(next.muons.begin() + static_cast<std::ptrdiff_t>(j));
  const double t = target(next);
  if (t == kNegInf) return false;
  const double log_r = t - log_target_ + log_prior_single(removed) +
                       std::log(birth_probability(k - 1)) - std::log(death_probability(k));
  if (!accept(log_r)) return false;
  state_ = std::move(next);
  log_target_ = t;
  ++diag_.death.accepted;
  return true;
}

void AugerChain::update_moves() {
  const auto g = signal_.geometry();
  std::normal_distribution<double> std_normal;
  for (std::size_t j = 0; j < state_.k(); ++j) {
    {
      ++diag_.update_t.proposed;
      AugerChainState next = state_;
      double& t = next.muons[j].t;
      if (uniform01(rng_) < config_.p_independent_update)
        t = g.window_start() + (g.window_end() - g.window_start()) * uniform01(rng_);
      else
        t = reflect(t + config_.t_step * std_normal(rng_), g.window_start(), g.window_end());
      const double lt = target(next);
      if (lt != kNegInf && accept(lt - log_target_)) {
        state_ = std::move(next);
        log_target_ = lt;
        ++diag_.update_t.accepted;
      }
    }
    {
      ++diag_.update_a.proposed;
      AugerChainState next = state_;
      const double eps = config_.log_a_step * std_normal(rng_);
      next.muons[j].a = state_.muons[j].a * std::exp(eps);
      const double lt = target(next);
      // Multiplicative walk: Jacobian a'/a.
      if (lt != kNegInf && accept(lt - log_target_ + eps)) {
        state_ = std::move(next);
        log_target_ = lt;
        ++diag_.update_a.accepted;
      }
    }
  }
}

AugerChainOutput rjmcmc_run_auger(const PECountSignal& signal, const AugerChainConfig& config) {
  AugerChain chain(signal, config);
  const auto g = signal.geometry();
  AugerChainOutput out;
  const std::size_t dim = config.arrival_only ? 1 : 2;
  if (config.arrival_only)
    out.samples.space = ParamSpace({{g.window_start(), g.window_end()}});
  else
    out.samples.space = ParamSpace({{g.window_start(), g.window_end()}, {0.0, config.a_max}});
  for (int it = 1; it <= config.iterations; ++it) {
    chain.sweep();
    if (it > config.burn_in && (it - config.burn_in) % config.thinning == 0) {
      std::vector<double> coords;
      for (const auto& m : chain.state().muons) {
        coords.push_back(m.t);
        if (!config.arrival_only) coords.push_back(m.a);
      }
      out.samples.samples.emplace_back(dim, std::move(coords));
    }
  }
  out.diagnostics = chain.diagnostics();
  auto& prov = out.samples.provenance;
  prov["sampler"] = "rjmcmc-auger";
  prov["seed"] = std::to_string(config.rng_seed);
  prov["iterations"] = std::to_string(config.iterations);
  prov["burn_in"] = std::to_string(config.burn_in);
  prov["thinning"] = std::to_string(config.thinning);
  prov["k_max"] = std::to_string(config.k_max);
  prov["arrival_only"] = config.arrival_only ? "1" : "0";
  return out;
}

}  // namespace vapors::auger
