#include "vapors/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "vapors/diagnostics.hpp"
#include "vapors/errors.hpp"
#include "vapors/parallel.hpp"

namespace vapors::mc {

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::size_t argmax(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double at(const std::vector<double>& p, std::size_t k) { return k < p.size() ? p[k] : 0.0; }

}  // namespace

sinusoid::SinusoidSignal SinSignalSpec::generate(std::uint64_t seed) const {
  return sinusoid::generate_synthetic_signal(omega, energy, phase, snr_db, N, seed);
}

MonteCarloConfig::MonteCarloConfig() {
  fit.init_rule = InitRule::threshold;
}

void MonteCarloConfig::validate() const {
  if (replicates < 1) throw InvalidArgument("replicates must be positive");
  if (reconstruction_draws < 1) throw InvalidArgument("reconstruction_draws must be positive");
  chain.validate();
  fit.validate();
}

std::uint64_t replicate_seed(std::uint64_t seed, int r) {
  return mix64(seed + static_cast<std::uint64_t>(r));
}

ReplicateResult run_replicate(const MonteCarloConfig& config, int r) {
  ReplicateResult out;
  out.replicate = r;
  out.seed = replicate_seed(config.seed, r);
  try {
    const auto signal = config.signal.generate(derive_seed(out.seed, {0}));
    auto chain_cfg = config.chain;
    chain_cfg.rng_seed = derive_seed(out.seed, {1});
    const auto chain = sinusoid::rjmcmc_run(signal, chain_cfg);
    const SampleSet& samples = chain.samples;
    if (samples.empty()) throw NumericalError("chain recorded no samples");

    auto fit_cfg = config.fit;
    fit_cfg.rng_seed = derive_seed(out.seed, {2});
    fit_cfg.threads = 1;
    const auto fit = sem_fit(samples, fit_cfg);
    out.initial_L = fit.initial_L;
    out.final_L = fit.model.L();

    const auto emp = empirical_k_distribution(samples);
    const auto approx = diag::approx_posterior_k(fit.model).p;
    out.p_k2 = at(emp, 2);
    out.p_k3 = at(emp, 3);
    out.phat_k2 = at(approx, 2);
    out.phat_k3 = at(approx, 3);
    out.k_map = static_cast<int>(argmax(emp));
    out.k_map_hat = static_cast<int>(argmax(approx));

    const double delta2 = chain.diagnostics.delta2_mean;
    const auto& y0 = signal.truth->noiseless;
    out.error_db_bma = diag::reconstruction_error_db(diag::reconstruct_bma(samples, signal.y, delta2).y0, y0);
    out.error_db_vapors = diag::reconstruction_error_db(
        diag::reconstruct_from_model(fit.model, config.reconstruction_draws, signal.y, delta2,
                                     derive_seed(out.seed, {3}))
            .y0,
        y0);

    const std::vector<Interval> t1 = {{0.0, std::numbers::pi / 4}};
    const std::vector<Interval> t2 = {{std::numbers::pi / 4, std::numbers::pi / 2}};
    out.en1_model = diag::expected_count_interval(fit.model, t1);
    out.en1_empirical = diag::empirical_count_interval(samples, t1);
    out.en2_model = diag::expected_count_interval(fit.model, t2);
    out.en2_empirical = diag::empirical_count_interval(samples, t2);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

std::vector<ReplicateResult> run_montecarlo(const MonteCarloConfig& config) {
  config.validate();
  std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
  parallel_for(results.size(), config.threads,
               [&](std::size_t r) { results[r] = run_replicate(config, static_cast<int>(r)); });
  return results;
}

void write_aggregate_csv(std::ostream& out, const std::vector<ReplicateResult>& results) {
  out << "replicate,seed,status,initial_L,final_L,p_k2,phat_k2,p_k3,phat_k3,k_map,k_map_hat,"
         "error_db_bma,error_db_vapors,en_0_pi4_model,en_0_pi4_empirical,en_pi4_pi2_model,"
         "en_pi4_pi2_empirical,message\n";
  for (const auto& r : results) {
    out << r.replicate << ',' << r.seed << ',' << (r.ok ? "ok" : "error") << ',';
    if (r.ok) {
      out << r.initial_L << ',' << r.final_L << ',' << num(r.p_k2) << ',' << num(r.phat_k2) << ','
          << num(r.p_k3) << ',' << num(r.phat_k3) << ',' << r.k_map << ',' << r.k_map_hat << ','
          << num(r.error_db_bma) << ',' << num(r.error_db_vapors) << ',' << num(r.en1_model) << ','
          << num(r.en1_empirical) << ',' << num(r.en2_model) << ',' << num(r.en2_empirical) << ",\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,,,,,,,,,,,,," << msg << '\n';
    }
  }
}

}  // namespace vapors::mc
