#pragma once

#include "vapors/random.hpp"

namespace vapors::truncnorm {

// Standard normal lower and upper tail probabilities.
double std_cdf(double x);
double std_sf(double x);

// Mass of N(mu, sigma^2) on (lo, hi), computed on whichever tail keeps
// relative precision.
double interval_mass(double lo, double hi, double mu, double sigma);

// log of interval_mass; falls back to the Mills-ratio asymptote when the
// mass underflows.
double log_interval_mass(double lo, double hi, double mu, double sigma);

double log_pdf(double x, double mu, double sigma);

// Inverse-CDF draw from N(mu, sigma^2) restricted to (lo, hi).
double sample(Rng& rng, double lo, double hi, double mu, double sigma);

}  // namespace vapors::truncnorm
