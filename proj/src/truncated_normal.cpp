#include "vapors/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace vapors::truncnorm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Inverse of std_cdf and std_sf, p in (0, 1).
double std_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }
double std_isf(double q) { return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q); }

double log_upper_tail_asymptote(double a) {
  return -0.5 * a * a - std::log(a) - kLogSqrt2Pi;
}

}  // namespace

double std_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double std_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double interval_mass(double lo, double hi, double mu, double sigma) {
  if (!(hi > lo)) return 0.0;
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  if (a >= 0.0) return std_sf(a) - std_sf(b);
  if (b <= 0.0) return std_cdf(b) - std_cdf(a);
  return 1.0 - std_cdf(a) - std_sf(b);
}

double log_interval_mass(double lo, double hi, double mu, double sigma) {
  const double m = interval_mass(lo, hi, mu, sigma);
  if (m > 0.0) return std::log(m);
  if (!(hi > lo)) return -std::numeric_limits<double>::infinity();
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  if (a > 0.0) return log_upper_tail_asymptote(a);
  if (b < 0.0) return log_upper_tail_asymptote(-b);
  return -std::numeric_limits<double>::infinity();
}

double log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double sample(Rng& rng, double lo, double hi, double mu, double sigma) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  constexpr double tiny = std::numeric_limits<double>::min();
  double z;
  if (a >= 0.0) {
    const double qa = std_sf(a);
    const double qb = std_sf(b);
    if (qa <= tiny) {
      // Both bounds deep in the upper tail: exponential approximation.
      z = a + std::exponential_distribution<double>(a)(rng);
    } else {
      const double q = std::max(qb + (qa - qb) * uniform01(rng), tiny);
      z = std_isf(q);
    }
  } else if (b <= 0.0) {
    const double pa = std_cdf(a);
    const double pb = std_cdf(b);
    if (pb <= tiny) {
      z = b - std::exponential_distribution<double>(-b)(rng);
    } else {
      const double p = std::max(pa + (pb - pa) * uniform01(rng), tiny);
      z = std_quantile(p);
    }
  } else {
    const double pa = std_cdf(a);
    const double pb = std_cdf(b);
    const double p = std::clamp(pa + (pb - pa) * uniform01(rng), tiny, std::nextafter(1.0, 0.0));
    z = std_quantile(p);
  }
  return std::clamp(mu + sigma * z, lo, hi);
}

}  // namespace vapors::truncnorm
