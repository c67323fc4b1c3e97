#include "vapors/sample_set.hpp"

#include <algorithm>

#include "vapors/errors.hpp"

namespace vapors {

std::vector<double> empirical_k_distribution(const SampleSet& set) {
  std::size_t kmax = 0;
  for (const auto& s : set.samples) kmax = std::max(kmax, s.k());
  std::vector<double> p(kmax + 1, 0.0);
  if (set.empty()) return p;
  for (const auto& s : set.samples) p[s.k()] += 1.0;
  for (double& v : p) v /= static_cast<double>(set.size());
  return p;
}

double mean_k(const SampleSet& set) {
  if (set.empty()) throw InvalidArgument("empty sample set");
  std::size_t total = 0;
  for (const auto& s : set.samples) total += s.k();
  return static_cast<double>(total) / static_cast<double>(set.size());
}

SampleSet project_coordinate(const SampleSet& set, std::size_t coord) {
  if (coord >= set.space.dim()) throw InvalidArgument("projection coordinate out of range");
  SampleSet out;
  out.space = ParamSpace({set.space.bound(coord)});
  out.provenance = set.provenance;
  out.provenance["projection"] = std::to_string(coord);
  out.samples.reserve(set.size());
  for (const auto& s : set.samples) {
    std::vector<double> c;
    c.reserve(s.k());
    for (std::size_t j = 0; j < s.k(); ++j) c.push_back(s.component(j)[coord]);
    out.samples.emplace_back(1, std::move(c));
  }
  return out;
}

}  // namespace vapors
