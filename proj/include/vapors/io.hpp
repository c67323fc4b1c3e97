#pragma once

// File formats: text sample files, JSON models/results/reports/configs and
// CSV plot data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vapors/diagnostics.hpp"
#include "vapors/montecarlo.hpp"
#include "vapors/sample_set.hpp"
#include "vapors/sampler_auger.hpp"
#include "vapors/sem.hpp"

namespace vapors::io {

using nlohmann::json;

constexpr int kSampleFormatVersion = 1;

// Shortest text that round-trips through from_chars (17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view s);

// Sample file:
//   vapors-samples <version>
//   dim <d>
//   bounds <lo_1> <hi_1> ... <lo_d> <hi_d>
//   meta <key> <value>        (zero or more)
//   data
//   <k> <theta_1_1> ... <theta_k_d>   (one line per sample)
void write_samples(std::ostream& out, const SampleSet& set);
void write_samples(const std::filesystem::path& path, const SampleSet& set);

// Streaming reader, one record in memory at a time.
class SampleReader {
 public:
  explicit SampleReader(std::istream& in, std::string source = "<stream>");

  const ParamSpace& space() const { return space_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }
  // False at end of file. Records with points outside Theta are skipped and
  // counted.
  bool next(VariableDimSample& sample);
  std::size_t rejected() const { return rejected_; }
  std::size_t line() const { return line_; }

 private:
  bool next_line(std::string& line);
  [[noreturn]] void fail(const std::string& what) const;

  std::istream& in_;
  std::string source_;
  ParamSpace space_;
  std::map<std::string, std::string> provenance_;
  std::size_t line_ = 0;
  std::size_t rejected_ = 0;
};

SampleSet read_samples(std::istream& in, std::size_t* rejected = nullptr);
SampleSet read_samples(const std::filesystem::path& path, std::size_t* rejected = nullptr);

json to_json(const ParamSpace& space);
ParamSpace space_from_json(const json& j);
json to_json(const ApproxModel& model);
ApproxModel model_from_json(const json& j);
json to_json(const FitResult& result);
json to_json(const diag::SummaryReport& report);

// One line per sample: the labels of its allocation vector.
void write_allocations(std::ostream& out, const std::vector<AllocationVector>& allocations);
std::vector<AllocationVector> read_allocations(std::istream& in);

void write_trace_csv(std::ostream& out, const FitTrace& trace);
void write_report_csvs(const std::filesystem::path& dir, const diag::SummaryReport& report);

// One value per line.
void write_signal_csv(std::ostream& out, const std::vector<double>& y);
std::vector<double> read_signal_csv(std::istream& in);
// "bin,count" per line.
void write_counts_csv(std::ostream& out, const std::vector<long>& n);
std::vector<long> read_counts_csv(std::istream& in);

struct AugerSignalSpec {
  std::vector<auger::MuonParams> muons = {{105, 30}, {169, 30}, {267, 30}, {268, 30}, {498, 30}};
  auger::BinGeometry geometry;
};

// Everything a run's output depends on (thread counts are not part of it).
// Unknown keys are rejected when parsing.
struct RunConfig {
  mc::SinSignalSpec sin_signal;
  sinusoid::SinChainConfig sin_chain;
  AugerSignalSpec auger_signal;
  auger::AugerChainConfig auger_chain;
  FitConfig fit;
  int montecarlo_replicates = 100;
  int reconstruction_draws = 1000;
  std::uint64_t seed = 0;
};

json to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& j);
// Sorted-key compact JSON; the hash is FNV-1a 64 of it, as 16 hex digits.
std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace vapors::io
