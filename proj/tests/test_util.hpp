#pragma once

#include <cmath>
#include <vector>

#include "vapors/core.hpp"

namespace vapors::testing {

inline ApproxModel model_1d(double lo, double hi, std::vector<GaussianComponent> comps,
                            double lambda) {
  ApproxModel m;
  m.space = ParamSpace({{lo, hi}});
  m.components = std::move(comps);
  m.lambda = lambda;
  return m;
}

inline GaussianComponent gauss1(double mu, double sigma2, double pi) {
  return {{mu}, {sigma2}, pi};
}

inline VariableDimSample sample1(std::vector<double> thetas) {
  return VariableDimSample(1, std::move(thetas));
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace vapors::testing
