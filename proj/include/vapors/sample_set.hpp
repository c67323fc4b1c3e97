#pragma once

#include <map>
#include <string>
#include <vector>

#include "vapors/core.hpp"

namespace vapors {

// Ordered draws from a trans-dimensional posterior plus provenance
// key/value metadata (sampler id, seed, chain settings, ...).
struct SampleSet {
  ParamSpace space;
  std::vector<VariableDimSample> samples;
  std::map<std::string, std::string> provenance;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Empirical p(k | y) over 0..max k.
std::vector<double> empirical_k_distribution(const SampleSet& set);

// Mean number of components per sample.
double mean_k(const SampleSet& set);

// Keeps only coordinate `coord` of every component (d -> 1).
SampleSet project_coordinate(const SampleSet& set, std::size_t coord);

}  // namespace vapors
