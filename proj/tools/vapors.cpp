// vapors: simulate RJ-MCMC output, fit the approximating model, report,
// replicate, and run the reference oracles.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "vapors/diagnostics.hpp"
#include "vapors/errors.hpp"
#include "vapors/io.hpp"
#include "vapors/montecarlo.hpp"
#include "vapors/sampler_auger.hpp"
#include "vapors/sampler_sin.hpp"
#include "vapors/sem.hpp"

namespace fs = std::filesystem;
using namespace vapors;
using io::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  int threads = 1;
};

io::RunConfig load_config(const Common& c) {
  io::RunConfig cfg;
  if (!c.config_path.empty()) {
    auto in = io::open_input(c.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw DataError(c.config_path + ": " + e.what());
    }
    cfg = io::run_config_from_json(j);
  }
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

template <typename T>
void apply(const std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

void write_json(const fs::path& path, const json& j) {
  auto out = io::open_output(path);
  out << j.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(io::parse_double(tok));
  return out;
}

Interval parse_interval(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidArgument("interval must be lo:hi, got '" + s + "'");
  return {io::parse_double(s.substr(0, colon)), io::parse_double(s.substr(colon + 1))};
}

void print_table(std::ostream& out, const ApproxModel& m) {
  out << "l";
  for (std::size_t c = 0; c < m.space.dim(); ++c) out << "\tmu_" << c + 1 << "\ts_" << c + 1;
  out << "\tpi\n";
  for (int l = 0; l < m.L(); ++l) {
    const auto& g = m.components[l];
    out << l + 1;
    for (std::size_t c = 0; c < m.space.dim(); ++c) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f", g.mu[c], std::sqrt(g.sigma2[c]));
      out << buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "\t%.3f\n", g.pi);
    out << buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "lambda\t%.4f\n", m.lambda);
  out << buf;
}

json move_json(const sinusoid::MoveCounts& m) {
  return {{"proposed", m.proposed}, {"accepted", m.accepted}, {"rate", m.rate()}};
}

// ---------------------------------------------------------------- commands

struct SimSinArgs {
  Common common;
  std::string out, signal_in, signal_out, diagnostics_out;
  std::optional<int> N, iterations, burn_in, thinning, k_max;
  std::optional<double> snr_db;
};

int run_simulate_sin(const SimSinArgs& a) {
  auto cfg = load_config(a.common);
  apply(a.N, cfg.sin_signal.N);
  apply(a.snr_db, cfg.sin_signal.snr_db);
  apply(a.iterations, cfg.sin_chain.iterations);
  apply(a.burn_in, cfg.sin_chain.burn_in);
  apply(a.thinning, cfg.sin_chain.thinning);
  apply(a.k_max, cfg.sin_chain.k_max);

  sinusoid::SinusoidSignal signal;
  if (!a.signal_in.empty()) {
    auto in = io::open_input(a.signal_in);
    signal.y = io::read_signal_csv(in);
  } else {
    signal = cfg.sin_signal.generate(derive_seed(cfg.seed, {0}));
  }
  auto chain_cfg = cfg.sin_chain;
  chain_cfg.rng_seed = derive_seed(cfg.seed, {1});
  auto run = sinusoid::rjmcmc_run(signal, chain_cfg);
  run.samples.provenance["config_hash"] = io::config_hash(cfg);
  io::write_samples(fs::path(a.out), run.samples);

  if (!a.signal_out.empty()) {
    auto out = io::open_output(a.signal_out);
    io::write_signal_csv(out, signal.y);
  }
  const auto& d = run.diagnostics;
  const auto pk = empirical_k_distribution(run.samples);
  if (!a.diagnostics_out.empty()) {
    json j = {{"birth", move_json(d.birth)},     {"death", move_json(d.death)},
              {"update", move_json(d.update)},   {"Lambda", move_json(d.Lambda)},
              {"singular_designs", d.singular_designs}, {"delta2_mean", d.delta2_mean},
              {"Lambda_mean", d.Lambda_mean},    {"empirical_k", pk},
              {"samples", run.samples.size()},   {"config_hash", io::config_hash(cfg)}};
    if (signal.truth) j["sigma2"] = signal.truth->sigma2;
    write_json(a.diagnostics_out, j);
  }
  std::cout << "samples " << run.samples.size() << "  mean k " << mean_k(run.samples)
            << "  birth " << d.birth.rate() << "  death " << d.death.rate() << "  update " << d.update.rate()
            << '\n';
  return kOk;
}

struct SimAugerArgs {
  Common common;
  std::string out, counts_in, counts_out, diagnostics_out;
  std::optional<int> iterations, burn_in, thinning, k_max;
  std::optional<double> Lambda_mu;
  bool arrival_only = false;
};

int run_simulate_auger(const SimAugerArgs& a) {
  auto cfg = load_config(a.common);
  apply(a.iterations, cfg.auger_chain.iterations);
  apply(a.burn_in, cfg.auger_chain.burn_in);
  apply(a.thinning, cfg.auger_chain.thinning);
  apply(a.k_max, cfg.auger_chain.k_max);
  apply(a.Lambda_mu, cfg.auger_chain.Lambda_mu);
  if (a.arrival_only) cfg.auger_chain.arrival_only = true;

  auger::PECountSignal signal;
  if (!a.counts_in.empty()) {
    auto in = io::open_input(a.counts_in);
    signal.n = io::read_counts_csv(in);
    signal.t0 = cfg.auger_signal.geometry.t0;
    signal.t_delta = cfg.auger_signal.geometry.t_delta;
  } else {
    signal = auger::generate_pe_signal(cfg.auger_signal.muons, cfg.auger_signal.geometry, cfg.auger_chain.shape,
                                       derive_seed(cfg.seed, {0}));
  }
  auto chain_cfg = cfg.auger_chain;
  chain_cfg.rng_seed = derive_seed(cfg.seed, {1});
  auto run = auger::rjmcmc_run_auger(signal, chain_cfg);
  run.samples.provenance["config_hash"] = io::config_hash(cfg);
  io::write_samples(fs::path(a.out), run.samples);

  if (!a.counts_out.empty()) {
    auto out = io::open_output(a.counts_out);
    io::write_counts_csv(out, signal.n);
  }
  const auto& d = run.diagnostics;
  const auto pk = empirical_k_distribution(run.samples);
  if (!a.diagnostics_out.empty()) {
    write_json(a.diagnostics_out, {{"birth", move_json(d.birth)},
                                   {"death", move_json(d.death)},
                                   {"update_t", move_json(d.update_t)},
                                   {"update_a", move_json(d.update_a)},
                                   {"empirical_k", pk},
                                   {"samples", run.samples.size()},
                                   {"config_hash", io::config_hash(cfg)}});
  }
  std::cout << "samples " << run.samples.size() << "  mean k " << mean_k(run.samples) << "  birth "
            << d.birth.rate() << "  death " << d.death.rate() << '\n';
  return kOk;
}

struct FitArgs {
  Common common;
  std::string samples, out_dir;
  std::optional<int> iterations, fixed_L, window, prune;
  std::optional<std::string> init_rule;
  std::optional<std::size_t> coord;
};

InitRule parse_init_rule(const std::string& s) {
  if (s == "percentile") return InitRule::percentile;
  if (s == "threshold") return InitRule::threshold;
  throw InvalidArgument("--init-rule must be percentile or threshold");
}

SampleSet load_samples(const std::string& path, std::optional<std::size_t> coord) {
  std::size_t rejected = 0;
  auto set = io::read_samples(fs::path(path), &rejected);
  if (rejected) std::cerr << "skipped " << rejected << " samples outside the parameter space\n";
  if (coord) {
    if (*coord >= set.space.dim()) throw DataError("--coord out of range for d = " + std::to_string(set.space.dim()));
    set = project_coordinate(set, *coord);
  }
  return set;
}

int run_fit(const FitArgs& a) {
  auto cfg = load_config(a.common);
  apply(a.iterations, cfg.fit.iterations);
  apply(a.window, cfg.fit.averaging_window);
  apply(a.prune, cfg.fit.prune_threshold);
  if (a.fixed_L) cfg.fit.fixed_L = *a.fixed_L;
  if (a.init_rule) cfg.fit.init_rule = parse_init_rule(*a.init_rule);

  const auto samples = load_samples(a.samples, a.coord);
  auto fit_cfg = cfg.fit;
  fit_cfg.rng_seed = derive_seed(cfg.seed, {2});
  fit_cfg.threads = a.common.threads;
  const auto result = sem_fit(samples, fit_cfg);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_json(dir / "model.json", io::to_json(result.model));
  json fit = io::to_json(result);
  fit["config_hash"] = io::config_hash(cfg);
  write_json(dir / "fit.json", fit);
  {
    auto out = io::open_output(dir / "trace.csv");
    io::write_trace_csv(out, result.trace);
  }
  {
    auto out = io::open_output(dir / "allocations.txt");
    io::write_allocations(out, result.allocations);
  }
  std::cout << "L " << result.initial_L << " -> " << result.model.L() << " (" << samples.size() << " samples)\n";
  print_table(std::cout, result.model);
  return kOk;
}

struct ReportArgs {
  std::string model, samples, allocations, out_dir;
  int bins = 100, grid_points = 500;
  std::size_t plot_coord = 0;
  std::optional<std::size_t> coord;
  std::vector<std::string> intervals;
};

int run_report(const ReportArgs& a) {
  ApproxModel model;
  {
    auto in = io::open_input(a.model);
    try {
      model = io::model_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw DataError(a.model + ": " + e.what());
    }
  }
  const auto samples = load_samples(a.samples, a.coord);
  std::vector<AllocationVector> allocations;
  if (!a.allocations.empty()) {
    auto in = io::open_input(a.allocations);
    allocations = io::read_allocations(in);
  }
  diag::ReportOptions opt;
  opt.bins = a.bins;
  opt.grid_points = a.grid_points;
  opt.coord = a.plot_coord;
  for (const auto& s : a.intervals) {
    if (model.space.dim() != 1) throw InvalidArgument("--interval applies to d = 1 models only");
    opt.intervals.push_back({parse_interval(s)});
  }
  const auto report = diag::build_report(model, samples, a.allocations.empty() ? nullptr : &allocations, opt);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_json(dir / "report.json", io::to_json(report));
  io::write_report_csvs(dir, report);
  std::cout << "residuals " << report.residual_count << '\n';
  for (const auto& iv : report.intervals)
    std::cout << "E N([" << iv.box[0].lo << ", " << iv.box[0].hi << "])  model " << iv.model << "  empirical "
              << iv.empirical << '\n';
  return kOk;
}

struct MonteCarloArgs {
  Common common;
  std::string out;
  std::optional<int> replicates, iterations, burn_in, N, draws;
};

int run_montecarlo(const MonteCarloArgs& a) {
  auto cfg = load_config(a.common);
  apply(a.replicates, cfg.montecarlo_replicates);
  apply(a.iterations, cfg.sin_chain.iterations);
  apply(a.burn_in, cfg.sin_chain.burn_in);
  apply(a.N, cfg.sin_signal.N);
  apply(a.draws, cfg.reconstruction_draws);

  mc::MonteCarloConfig mcc;
  mcc.signal = cfg.sin_signal;
  mcc.chain = cfg.sin_chain;
  const auto init_rule = a.common.config_path.empty() ? InitRule::threshold : cfg.fit.init_rule;
  mcc.fit = cfg.fit;
  mcc.fit.init_rule = init_rule;
  mcc.replicates = cfg.montecarlo_replicates;
  mcc.reconstruction_draws = cfg.reconstruction_draws;
  mcc.threads = a.common.threads;
  mcc.seed = cfg.seed;
  const auto results = mc::run_montecarlo(mcc);
  auto out = io::open_output(a.out);
  mc::write_aggregate_csv(out, results);
  int failed = 0;
  for (const auto& r : results)
    if (!r.ok) {
      ++failed;
      std::cerr << "replicate " << r.replicate << ": " << r.error << '\n';
    }
  std::cout << results.size() - failed << " of " << results.size() << " replicates ok\n";
  return kOk;
}

struct OracleArgs {
  std::string pi, signal, model, sample;
  double omega = 0.5, delta2 = 20.0;
  double rise_time = 15.0, decay = 67.0, t_lo = 0.0, t_hi = 25.0;
};

int run_oracle_gates(const OracleArgs& a) {
  const auto pi = parse_list(a.pi);
  ApproxModel m;
  m.space = ParamSpace({{0.0, 1.0}});
  for (double p : pi) m.components.push_back({{0.5}, {0.01}, p});
  const auto exact = oracle::gate_count_enumeration(pi);
  const auto fast = diag::approx_posterior_k(m).p;
  double maxdiff = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) maxdiff = std::max(maxdiff, std::abs(exact[k] - fast[k]));
  std::cout << json{{"enumeration", exact}, {"convolution", fast}, {"max_abs_diff", maxdiff}}.dump(2) << '\n';
  return kOk;
}

int run_oracle_sin(const OracleArgs& a) {
  auto in = io::open_input(a.signal);
  const auto y = io::read_signal_csv(in);
  const double quad = oracle::sinusoid_log_evidence_quadrature(y, a.omega, a.delta2);
  const double closed = sinusoid::log_marginal_likelihood(std::span<const double>(&a.omega, 1), y, a.delta2);
  std::cout << json{{"quadrature", quad}, {"closed_form", closed}, {"abs_diff", std::abs(quad - closed)}}.dump(2)
            << '\n';
  return kOk;
}

int run_oracle_pulse(const OracleArgs& a) {
  auger::PulseShape shape{a.rise_time, a.decay};
  shape.validate();
  const auto f = oracle::pulse_density_numeric(a.rise_time, a.decay);
  const double quad = oracle::adaptive_quadrature(f, std::max(0.0, a.t_lo), std::max(0.0, a.t_hi));
  const double closed = auger::pulse_mass(a.t_lo, a.t_hi, shape);
  std::cout << json{{"quadrature", quad}, {"closed_form", closed}, {"abs_diff", std::abs(quad - closed)}}.dump(2)
            << '\n';
  return kOk;
}

int run_oracle_allocations(const OracleArgs& a) {
  ApproxModel model;
  {
    auto in = io::open_input(a.model);
    model = io::model_from_json(json::parse(in));
  }
  std::vector<double> coords = a.sample.empty() ? std::vector<double>{} : parse_list(a.sample);
  if (coords.size() % model.space.dim() != 0) throw InvalidArgument("--sample length is not a multiple of d");
  const VariableDimSample x(model.space.dim(), coords);
  const auto zs = oracle::enumerate_allocations(x.k(), model.L());
  const auto post = oracle::allocation_posterior(x, model);
  json rows = json::array();
  for (std::size_t i = 0; i < zs.size(); ++i)
    rows.push_back({{"z", zs[i].labels},
                    {"posterior", post[i]},
                    {"oracle_log_joint", std::log(oracle::labeled_joint_density(x, zs[i], model))},
                    {"log_joint", labeled_joint_log_density(x, zs[i], model)}});
  std::cout << json{{"allocations", rows}, {"density", oracle::unlabeled_density(x, model)}}.dump(2) << '\n';
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool needs_seed) {
  auto* seed = cmd->add_option("--seed", c.seed, "Master RNG seed");
  if (needs_seed) seed->required();
  cmd->add_option("--config", c.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VAPoRS: summarize variable-dimensional posteriors"};
  app.require_subcommand(1);

  SimSinArgs sin;
  auto* sim_sin = app.add_subcommand("simulate-sin", "Sinusoid signal + RJ-MCMC -> samples file");
  add_common(sim_sin, sin.common, true);
  sim_sin->add_option("--out", sin.out, "Samples file")->required();
  sim_sin->add_option("--signal", sin.signal_in, "Observed signal CSV (default: synthesize)")->check(CLI::ExistingFile);
  sim_sin->add_option("--signal-out", sin.signal_out, "Write the signal as CSV");
  sim_sin->add_option("--diagnostics", sin.diagnostics_out, "Write chain diagnostics JSON");
  sim_sin->add_option("--N", sin.N, "Signal length");
  sim_sin->add_option("--snr-db", sin.snr_db, "Synthetic SNR in dB");
  sim_sin->add_option("--iterations", sin.iterations, "RJ-MCMC iterations");
  sim_sin->add_option("--burn-in", sin.burn_in, "Discarded iterations");
  sim_sin->add_option("--thinning", sin.thinning, "Keep every n-th iteration");
  sim_sin->add_option("--k-max", sin.k_max, "Largest k");

  SimAugerArgs aug;
  auto* sim_aug = app.add_subcommand("simulate-auger", "PE counts + RJ-MCMC -> samples file");
  add_common(sim_aug, aug.common, true);
  sim_aug->add_option("--out", aug.out, "Samples file")->required();
  sim_aug->add_option("--counts", aug.counts_in, "Observed counts CSV (default: synthesize)")->check(CLI::ExistingFile);
  sim_aug->add_option("--counts-out", aug.counts_out, "Write the counts as CSV");
  sim_aug->add_option("--diagnostics", aug.diagnostics_out, "Write chain diagnostics JSON");
  sim_aug->add_option("--iterations", aug.iterations, "RJ-MCMC iterations");
  sim_aug->add_option("--burn-in", aug.burn_in, "Discarded iterations");
  sim_aug->add_option("--thinning", aug.thinning, "Keep every n-th iteration");
  sim_aug->add_option("--k-max", aug.k_max, "Largest k");
  sim_aug->add_option("--lambda-mu", aug.Lambda_mu, "Poisson rate of the prior on k");
  sim_aug->add_flag("--arrival-only", aug.arrival_only, "Record arrival times only (d = 1)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Samples -> model, trace and allocations");
  add_common(fit_cmd, fit.common, true);
  fit_cmd->add_option("--samples", fit.samples, "Samples file")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory")->required();
  fit_cmd->add_option("--iterations", fit.iterations, "SEM iterations");
  fit_cmd->add_option("--window", fit.window, "Averaging window");
  fit_cmd->add_option("--prune-threshold", fit.prune, "Prune components with fewer allocated points");
  fit_cmd->add_option("--L", fit.fixed_L, "Number of Gaussian components (overrides the init rule)");
  fit_cmd->add_option("--init-rule", fit.init_rule, "percentile or threshold")
      ->check(CLI::IsMember({"percentile", "threshold"}));
  fit_cmd->add_option("--coord", fit.coord, "Fit only this coordinate of each point");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Model + samples -> summary report and plot CSVs");
  rep_cmd->add_option("--model", rep.model, "Model JSON")->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--samples", rep.samples, "Samples file")->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--allocations", rep.allocations, "Allocations file from fit")->check(CLI::ExistingFile);
  rep_cmd->add_option("--out-dir", rep.out_dir, "Output directory")->required();
  rep_cmd->add_option("--bins", rep.bins, "Histogram bins")->check(CLI::PositiveNumber);
  rep_cmd->add_option("--grid-points", rep.grid_points, "Curve grid size")->check(CLI::PositiveNumber);
  rep_cmd->add_option("--plot-coord", rep.plot_coord, "Coordinate plotted for d > 1");
  rep_cmd->add_option("--coord", rep.coord, "Project samples onto this coordinate first");
  rep_cmd->add_option("--interval", rep.intervals, "lo:hi interval for E N(T), repeatable");

  MonteCarloArgs mca;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Replicated sinusoid study -> aggregate CSV");
  add_common(mc_cmd, mca.common, true);
  mc_cmd->add_option("--out", mca.out, "Aggregate CSV")->required();
  mc_cmd->add_option("--replicates", mca.replicates, "Number of replicates");
  mc_cmd->add_option("--iterations", mca.iterations, "RJ-MCMC iterations per replicate");
  mc_cmd->add_option("--burn-in", mca.burn_in, "Discarded iterations");
  mc_cmd->add_option("--N", mca.N, "Signal length");
  mc_cmd->add_option("--reconstruction-draws", mca.draws, "Draws for the model-based reconstruction");

  OracleArgs ora;
  auto* ora_cmd = app.add_subcommand("oracle", "Reference computations used by the tests");
  ora_cmd->require_subcommand(1);
  auto* ora_gates = ora_cmd->add_subcommand("gates", "Count distribution by gate enumeration");
  ora_gates->add_option("--pi", ora.pi, "Comma-separated presence probabilities")->required();
  auto* ora_sin = ora_cmd->add_subcommand("sin-evidence", "k = 1 marginal likelihood by quadrature");
  ora_sin->add_option("--signal", ora.signal, "Signal CSV")->required()->check(CLI::ExistingFile);
  ora_sin->add_option("--omega", ora.omega, "Frequency")->required();
  ora_sin->add_option("--delta2", ora.delta2, "g-prior scale");
  auto* ora_pulse = ora_cmd->add_subcommand("pulse-mass", "Pulse mass over [lo, hi] by quadrature");
  ora_pulse->add_option("--rise-time", ora.rise_time, "ns");
  ora_pulse->add_option("--decay", ora.decay, "ns");
  ora_pulse->add_option("--lo", ora.t_lo, "ns");
  ora_pulse->add_option("--hi", ora.t_hi, "ns");
  auto* ora_alloc = ora_cmd->add_subcommand("allocations", "Exact allocation posterior by enumeration");
  ora_alloc->add_option("--model", ora.model, "Model JSON")->required()->check(CLI::ExistingFile);
  ora_alloc->add_option("--sample", ora.sample, "Comma-separated coordinates, k x d");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*sim_sin) return run_simulate_sin(sin);
    if (*sim_aug) return run_simulate_auger(aug);
    if (*fit_cmd) return run_fit(fit);
    if (*rep_cmd) return run_report(rep);
    if (*mc_cmd) return run_montecarlo(mca);
    if (*ora_gates) return run_oracle_gates(ora);
    if (*ora_sin) return run_oracle_sin(ora);
    if (*ora_pulse) return run_oracle_pulse(ora);
    if (*ora_alloc) return run_oracle_allocations(ora);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
