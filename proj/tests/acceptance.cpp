// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <path to vapors CLI> [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "vapors/core.hpp"
#include "vapors/diagnostics.hpp"
#include "vapors/montecarlo.hpp"
#include "vapors/sampler_auger.hpp"
#include "vapors/sampler_sin.hpp"
#include "vapors/sem.hpp"

using namespace vapors;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

ApproxModel model_1d(std::vector<GaussianComponent> comps, double lambda) {
  ApproxModel m;
  m.space = ParamSpace({{0.0, 1.0}});
  m.components = std::move(comps);
  m.lambda = lambda;
  return m;
}

// ------------------------------------------------------------------ 1

double unlabeled(const VariableDimSample& x, const ApproxModel& m) {
  double s = 0.0;
  for (const auto& z : oracle::enumerate_allocations(x.k(), m.L())) s += std::exp(labeled_joint_log_density(x, z, m));
  return s;
}

Outcome labeled_density() {
  const auto m = model_1d({{{0.3}, {0.01}, 0.8}, {{0.65}, {0.0225}, 0.5}}, 0.4);
  const int bins = 5;
  const long draws = 1000000;

  // Cells: k = 0; k = 1 by bin; k = 2 by (bin of first point, bin of second).
  std::vector<double> freq(1 + bins + bins * bins, 0.0);
  auto bin = [&](double t) { return std::min(bins - 1, static_cast<int>(t * bins)); };
  Rng rng(20240101);
  for (long i = 0; i < draws; ++i) {
    const auto x = sample_from_model(m, rng).x;
    if (x.k() == 0)
      freq[0] += 1;
    else if (x.k() == 1)
      freq[1 + bin(x.coords()[0])] += 1;
    else if (x.k() == 2)
      freq[1 + bins + bins * bin(x.coords()[0]) + bin(x.coords()[1])] += 1;
  }

  std::vector<double> exact(freq.size());
  exact[0] = unlabeled(VariableDimSample(1, {}), m);
  const double w = 1.0 / bins;
  for (int a = 0; a < bins; ++a) {
    exact[1 + a] = oracle::gauss_legendre(
        [&](double t) { return unlabeled(VariableDimSample(1, {t}), m); }, a * w, (a + 1) * w, 4, 20);
    for (int b = 0; b < bins; ++b) {
      exact[1 + bins + bins * a + b] = oracle::gauss_legendre(
          [&](double s) {
            return oracle::gauss_legendre(
                [&](double t) { return unlabeled(VariableDimSample(1, {s, t}), m); }, b * w, (b + 1) * w, 4, 20);
          },
          a * w, (a + 1) * w, 4, 20);
    }
  }

  int bad = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < freq.size(); ++c) {
    const double p = freq[c] / draws;
    const double se = std::sqrt(exact[c] * (1.0 - exact[c]) / draws);
    const double z = se > 0 ? std::abs(p - exact[c]) / se : (p == exact[c] ? 0.0 : HUGE_VAL);
    worst = std::max(worst, z);
    if (z > 3.0) ++bad;
  }
  return {bad == 0, fmt("%zu cells, %d outside 3 SE, worst %.2f SE", freq.size(), bad, worst)};
}

// ------------------------------------------------------------------ 2

Outcome imh_stationarity() {
  const auto m = model_1d({{{0.4}, {0.01}, 0.7}, {{0.5}, {0.02}, 0.6}}, 0.5);
  const std::vector<std::vector<double>> points = {{0.45}, {0.42, 0.48}, {0.3, 0.9}};
  double worst = 0.0;
  for (const auto& theta : points) {
    const VariableDimSample x(1, theta);
    const auto all = oracle::enumerate_allocations(x.k(), m.L());
    const auto exact = oracle::allocation_posterior(x, m);
    const DensityEvaluator eval(m);
    Rng rng(7);
    AllocationVector z{std::vector<int>(x.k(), m.outlier_label())};
    std::vector<double> freq(all.size(), 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      z = imh_allocation_step(x, z, eval, rng);
      freq[std::find(all.begin(), all.end(), z) - all.begin()] += 1.0 / n;
    }
    worst = std::max(worst, tv(freq, exact));
  }
  return {worst < 0.02, fmt("largest TV %.4f over %zu configurations", worst, points.size())};
}

// ------------------------------------------------------------------ 3

Outcome synthetic_recovery() {
  const auto truth = model_1d({{{0.3}, {0.0004}, 0.9}, {{0.7}, {0.0004}, 0.5}}, 0.2);
  int passes = 0;
  std::string worst;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(derive_seed(seed, {0}));
    SampleSet set;
    set.space = truth.space;
    for (int i = 0; i < 20000; ++i) set.samples.push_back(sample_from_model(truth, rng).x);
    FitConfig cfg;
    cfg.rng_seed = derive_seed(seed, {1});
    const auto fit = sem_fit(set, cfg);
    bool ok = fit.model.L() == 2;
    if (ok) {
      for (int l = 0; l < 2; ++l) {
        ok = ok && std::abs(fit.model.components[l].pi - truth.components[l].pi) <= 0.05;
        ok = ok && std::abs(fit.model.components[l].mu[0] - truth.components[l].mu[0]) <= 0.02;
      }
      ok = ok && std::abs(fit.model.lambda - truth.lambda) <= 0.1;
    }
    if (ok)
      ++passes;
    else
      worst += fmt(" seed %d (L=%d)", static_cast<int>(seed), fit.model.L());
  }
  return {passes >= 9, fmt("%d/10 seeds recovered", passes) + (worst.empty() ? "" : ", failed:" + worst)};
}

// ------------------------------------------------------------------ 4

Outcome three_sinusoids() {
  const auto signal = sinusoid::generate_synthetic_signal(
      {0.63, 0.68, 0.73}, {20.0, 6.32, 20.0}, {0.0, std::numbers::pi / 4, std::numbers::pi / 3}, 7.0, 64, 1);
  sinusoid::SinChainConfig chain;
  chain.rng_seed = 1;
  const auto run = sinusoid::rjmcmc_run(signal, chain);
  const auto pk = empirical_k_distribution(run.samples);
  double p24 = 0.0;
  for (std::size_t k = 2; k <= 4 && k < pk.size(); ++k) p24 += pk[k];

  FitConfig fc;
  fc.rng_seed = 1;
  const auto fit = sem_fit(run.samples, fc);
  auto find = [&](double target, double lo_pi, double hi_pi) {
    for (const auto& g : fit.model.components)
      if (std::abs(g.mu[0] - target) <= 0.03 && g.pi > lo_pi && g.pi < hi_pi) return true;
    return false;
  };
  const bool outer = find(0.63, 0.85, 1.01) && find(0.73, 0.85, 1.01);
  const bool middle = find(0.68, 0.05, 0.85);
  const auto& tr = fit.trace.iterations;
  const double j50 = tr.at(49).criterion, j100 = tr.at(99).criterion;
  const double dj = std::abs(j100 - j50) / std::abs(j50);

  std::string table;
  for (const auto& g : fit.model.components)
    table += fmt(" (%.3f, s %.4f, pi %.2f)", g.mu[0], std::sqrt(g.sigma2[0]), g.pi);
  return {p24 >= 0.9 && outer && middle && dj < 0.01,
          fmt("p(2<=k<=4|y) %.3f; dJ(50,100) %.3f%%; components", p24, 100 * dj) + table};
}

// ------------------------------------------------------------------ 5

Outcome approx_pk() {
  Rng rng(5);
  double worst = 0.0;
  for (int L = 0; L <= 10; ++L) {
    std::vector<GaussianComponent> comps;
    std::vector<double> pis;
    for (int l = 0; l < L; ++l) {
      pis.push_back(uniform01(rng));
      comps.push_back({{uniform01(rng)}, {0.01}, pis.back()});
    }
    const auto p = diag::approx_posterior_k(model_1d(comps, 0.0)).p;
    const auto exact = oracle::gate_count_enumeration(pis);
    for (int k = 0; k <= L; ++k) worst = std::max(worst, std::abs(p[k] - exact[k]));
  }
  const auto m = model_1d({{{0.2}, {0.01}, 0.95}, {{0.5}, {0.01}, 0.3}, {{0.8}, {0.01}, 0.6}}, 0.7);
  const auto p = diag::approx_posterior_k(m).p;
  const int n = 200000;
  std::vector<double> freq(p.size(), 0.0);
  Rng mc(55);
  for (int i = 0; i < n; ++i) {
    const auto k = sample_from_model(m, mc).x.k();
    if (k < freq.size()) freq[k] += 1.0 / n;
  }
  int outside = 0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (std::abs(freq[k] - p[k]) > 3.0 * std::sqrt(p[k] * (1 - p[k]) / n) + 1e-15) ++outside;
  return {worst <= 1e-12 && outside == 0,
          fmt("enumeration max diff %.2e (L<=10); %d of %zu k values outside 3 sigma", worst, outside, p.size())};
}

// ------------------------------------------------------------------ 6

Outcome marginal_likelihood() {
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double w0 = 0.3 + 2.5 * uniform01(rng);
    const auto sig = sinusoid::generate_synthetic_signal({w0}, {1.0 + 4.0 * uniform01(rng)},
                                                         {std::numbers::pi * uniform01(rng)}, 3.0, 8, 600 + trial);
    const double w = 0.2 + 2.7 * uniform01(rng);
    const double delta2 = 2.0 + 20.0 * uniform01(rng);
    const double wv[] = {w};
    const double ours = sinusoid::log_marginal_likelihood(wv, sig.y, delta2);
    const double quad = oracle::sinusoid_log_evidence_quadrature(sig.y, w, delta2);
    worst = std::max(worst, std::abs(ours - quad));
  }
  return {worst < 1e-3, fmt("max |closed form - quadrature| %.2e over 5 signals", worst)};
}

// ------------------------------------------------------------------ 7

Outcome auger_forward() {
  const auger::PulseShape shape;
  const auger::BinGeometry g{40, 0.0, 25.0};
  const auto numeric = oracle::pulse_density_numeric(shape.rise_time, shape.decay);
  double worst = 0.0;
  for (const auger::MuonParams mu : {auger::MuonParams{117.3, 12.5}, auger::MuonParams{3.0, 40.0},
                                     auger::MuonParams{612.9, 1.0}}) {
    const std::vector<auger::MuonParams> one = {mu};
    const auto nbar = auger::expected_bin_counts(one, g, shape);
    for (int i = 0; i < g.N; ++i) {
      const double lo = std::max(g.edge(i), mu.t), hi = g.edge(i + 1);
      if (hi <= lo) {
        if (nbar[i] != 0.0) worst = HUGE_VAL;
        continue;
      }
      const double q = mu.a * oracle::adaptive_quadrature([&](double t) { return numeric(t - mu.t); }, lo, hi);
      worst = std::max(worst, std::abs(nbar[i] - q) / q);
    }
  }
  const auger::BinGeometry wide{static_cast<int>(20 * shape.decay), 0.0, 1.0};
  const std::vector<auger::MuonParams> muons = {{0.0, 30.0}, {0.0, 7.5}, {0.0, 0.25}};
  double total = 0.0;
  for (double v : auger::expected_bin_counts(muons, wide, shape)) total += v;
  const double mass_err = std::abs(total - 37.75);
  return {worst < 1e-8 && mass_err < 1e-6,
          fmt("max per-bin relative error %.2e; 20 tau mass error %.2e", worst, mass_err)};
}

// ------------------------------------------------------------------ 8

Outcome auger_end_to_end() {
  const std::vector<auger::MuonParams> truth = {{105, 30}, {169, 30}, {267, 30}, {268, 30}, {498, 30}};
  const auger::PulseShape shape;
  const auto signal = auger::generate_pe_signal(truth, {40, 0.0, 25.0}, shape, 1);
  auger::AugerChainConfig chain;
  chain.rng_seed = 1;
  const auto run = auger::rjmcmc_run_auger(signal, chain);
  const auto pk = empirical_k_distribution(run.samples);
  double p456 = 0.0;
  for (std::size_t k = 4; k <= 6 && k < pk.size(); ++k) p456 += pk[k];

  FitConfig fc;
  fc.fixed_L = 6;
  fc.rng_seed = 1;
  const auto fit = sem_fit(project_coordinate(run.samples, 0), fc);
  int strong = 0;
  std::string table;
  for (const auto& g : fit.model.components) {
    if (g.pi > 0.7) ++strong;
    table += fmt(" (%.0f ns, pi %.2f)", g.mu[0], g.pi);
  }
  return {p456 >= 0.7 && strong >= 4,
          fmt("p(4<=k<=6|n) %.3f; %d components with pi > 0.7:", p456, strong) + table};
}

// ------------------------------------------------------------------ 9

Outcome montecarlo_reduced() {
  mc::MonteCarloConfig cfg;
  cfg.replicates = 20;
  cfg.chain.iterations = 20000;
  cfg.chain.burn_in = 4000;
  cfg.seed = 2024;
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto results = mc::run_montecarlo(cfg);
  std::vector<double> gaps;
  int agree = 0, ok = 0;
  for (const auto& r : results) {
    if (!r.ok) continue;
    ++ok;
    gaps.push_back(std::abs(r.error_db_vapors - r.error_db_bma));
    if (std::abs(r.en1_model - r.en1_empirical) <= 0.15 && std::abs(r.en2_model - r.en2_empirical) <= 0.15) ++agree;
  }
  if (gaps.empty()) return {false, "no replicate finished"};
  std::sort(gaps.begin(), gaps.end());
  const std::size_t n = gaps.size();
  const double median = n % 2 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
  const bool pass = median <= 1.0 && agree >= 0.8 * static_cast<double>(results.size());
  return {pass, fmt("%d/%zu replicates ok; median |gap| %.3f dB; E N agreement %d/%zu", ok, results.size(), median,
                    agree, results.size())};
}

// ------------------------------------------------------------------ 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  const fs::path root = fs::temp_directory_path() / fmt("vapors_acceptance_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate-sin", "simulate-sin --seed 3 --iterations 20000 --burn-in 4000 --out {d}/sin.txt "
                       "--signal-out {d}/y.csv --diagnostics {d}/sin.json"},
      {"simulate-auger", "simulate-auger --seed 4 --iterations 20000 --burn-in 4000 --out {d}/auger.txt "
                         "--counts-out {d}/n.csv --diagnostics {d}/auger.json"},
      {"fit", "fit --seed 5 --samples {d}/sin.txt --out-dir {d}/fit"},
      {"fit (auger)", "fit --seed 6 --samples {d}/auger.txt --coord 0 --L 6 --out-dir {d}/afit"},
      {"report", "report --model {d}/fit/model.json --samples {d}/sin.txt --allocations {d}/fit/allocations.txt "
                 "--interval 0:0.7853981633974483 --out-dir {d}/report"},
      {"montecarlo", "montecarlo --seed 7 --replicates 3 --N 32 --iterations 5000 --burn-in 1000 "
                     "--out {d}/mc.csv"},
  };
  for (int run = 1; run <= 2; ++run) {
    const std::string d = (root / fmt("run%d", run)).string();
    fs::create_directories(d);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      std::string a = commands[i].second;
      for (std::size_t pos; (pos = a.find("{d}")) != std::string::npos;) a.replace(pos, 3, d);
      const std::string cmd = "\"" + cli + "\" " + a + " > \"" + d + "/stdout_" + std::to_string(i) + ".txt\" 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        fs::remove_all(root);
        return {false, commands[i].first + " exited with an error"};
      }
    }
  }
  std::size_t files = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::recursive_directory_iterator(root / "run1")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "run1");
    ++files;
    if (slurp(e.path()) != slurp(root / "run2" / rel)) differ.push_back(rel.string());
  }
  fs::remove_all(root);
  std::string detail = fmt("%zu output files from %zu commands compared across two runs", files, commands.size());
  for (const auto& f : differ) detail += "; differs: " + f;
  return {differ.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "labeled-density correctness", 60, labeled_density},
      {2, "IMH stationarity", 30, imh_stationarity},
      {3, "synthetic recovery", 120, synthetic_recovery},
      {4, "three-sinusoid benchmark", 600, three_sinusoids},
      {5, "approximate p(k)", 60, approx_pk},
      {6, "marginal-likelihood oracle", 60, marginal_likelihood},
      {7, "Auger forward model", 60, auger_forward},
      {8, "Auger end-to-end", 600, auger_end_to_end},
      {9, "Monte Carlo harness, reduced scale", 1800, montecarlo_reduced},
      {10, "determinism", 600, [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %s: %s (%s) [%.1f s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", out.detail.c_str(),
                secs, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
