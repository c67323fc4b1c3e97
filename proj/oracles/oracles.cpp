#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace vapors::oracle {

namespace {

double normal_pdf(double x, double mu, double s2) {
  return std::exp(-(x - mu) * (x - mu) / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
}

double normal_mass(double lo, double hi, double mu, double s2) {
  const double s = std::sqrt(2.0 * s2);
  return 0.5 * (std::erf((hi - mu) / s) - std::erf((lo - mu) / s));
}

void extend(std::vector<AllocationVector>& out, AllocationVector& cur, std::size_t k, int L,
            std::vector<char>& used) {
  if (cur.labels.size() == k) {
    out.push_back(cur);
    return;
  }
  for (int l = 1; l <= L + 1; ++l) {
    if (l <= L && used[l - 1]) continue;
    if (l <= L) used[l - 1] = 1;
    cur.labels.push_back(l);
    extend(out, cur, k, L, used);
    cur.labels.pop_back();
    if (l <= L) used[l - 1] = 0;
  }
}

}  // namespace

std::vector<AllocationVector> enumerate_allocations(std::size_t k, int L) {
  std::vector<AllocationVector> out;
  AllocationVector cur;
  std::vector<char> used(static_cast<std::size_t>(L), 0);
  extend(out, cur, k, L, used);
  return out;
}

double labeled_joint_density(const VariableDimSample& x, const AllocationVector& z,
                             const ApproxModel& model) {
  const int L = model.L();
  const std::size_t k = x.k();
  double volume = 1.0;
  for (const auto& b : model.space.bounds()) volume *= b.hi - b.lo;

  std::vector<int> present(static_cast<std::size_t>(L), 0);
  int outliers = 0;
  double q = std::exp(-model.lambda) / std::tgamma(static_cast<double>(k) + 1.0);
  for (std::size_t j = 0; j < k; ++j) {
    const int l = z.labels[j];
    if (l == L + 1) {
      ++outliers;
      q *= model.lambda / volume;
      continue;
    }
    if (present[l - 1]++) return 0.0;
    const auto& c = model.components[l - 1];
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const auto& b = model.space.bound(i);
      q *= normal_pdf(x.component(j)[i], c.mu[i], c.sigma2[i]) /
           normal_mass(b.lo, b.hi, c.mu[i], c.sigma2[i]);
    }
  }
  for (int l = 0; l < L; ++l) q *= present[l] ? model.components[l].pi : 1.0 - model.components[l].pi;
  return q;
}

double unlabeled_density(const VariableDimSample& x, const ApproxModel& model) {
  double total = 0.0;
  for (const auto& z : enumerate_allocations(x.k(), model.L()))
    total += labeled_joint_density(x, z, model);
  return total;
}

std::vector<double> allocation_posterior(const VariableDimSample& x, const ApproxModel& model) {
  const auto zs = enumerate_allocations(x.k(), model.L());
  std::vector<double> p;
  double total = 0.0;
  for (const auto& z : zs) {
    p.push_back(labeled_joint_density(x, z, model));
    total += p.back();
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> gate_count_enumeration(const std::vector<double>& pi) {
  const std::size_t L = pi.size();
  std::vector<double> p(L + 1, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
    double w = 1.0;
    int count = 0;
    for (std::size_t l = 0; l < L; ++l) {
      if (mask >> l & 1U) {
        w *= pi[l];
        ++count;
      } else {
        w *= 1.0 - pi[l];
      }
    }
    p[count] += w;
  }
  return p;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                      int order) {
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double hi = lo + h;
    if (order <= 10)
      total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
    else
      total += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
  }
  return total;
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, tol);
}

double sinusoid_log_evidence_quadrature(const std::vector<double>& y, double omega, double delta2) {
  const std::size_t N = y.size();
  std::vector<double> cc(N), ss(N);
  for (std::size_t i = 0; i < N; ++i) {
    cc[i] = std::cos(omega * static_cast<double>(i));
    ss[i] = std::sin(omega * static_cast<double>(i));
  }
  // Gram matrix G = D^T D and D^T y.
  double g11 = 0, g12 = 0, g22 = 0, b1 = 0, b2 = 0, yty = 0;
  for (std::size_t i = 0; i < N; ++i) {
    g11 += cc[i] * cc[i];
    g12 += cc[i] * ss[i];
    g22 += ss[i] * ss[i];
    b1 += cc[i] * y[i];
    b2 += ss[i] * y[i];
    yty += y[i] * y[i];
  }
  const double detG = g11 * g22 - g12 * g12;

  // Integration variables: u = log sigma2 and whitened amplitudes w, with
  // a = m + sigma * C w, C C^T = (G (1 + 1/delta2))^{-1}. Only the location
  // and scale of the grid depend on these; the integrand is evaluated in
  // full at every node.
  const double shrink = delta2 / (1.0 + delta2);
  const double m1 = shrink * (g22 * b1 - g12 * b2) / detG;
  const double m2 = shrink * (-g12 * b1 + g11 * b2) / detG;
  const double f = 1.0 + 1.0 / delta2;
  const double h11 = g22 / (detG * f), h12 = -g12 / (detG * f), h22 = g11 / (detG * f);
  const double c11 = std::sqrt(h11);
  const double c21 = h12 / c11;
  const double c22 = std::sqrt(h22 - c21 * c21);
  const double detC = c11 * c22;

  const double two_pi = 2.0 * std::numbers::pi;
  const double Nd = static_cast<double>(N);
  auto log_integrand = [&](double sigma2, double a1, double a2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double r = y[i] - a1 * cc[i] - a2 * ss[i];
      rss += r * r;
    }
    const double quad = g11 * a1 * a1 + 2.0 * g12 * a1 * a2 + g22 * a2 * a2;
    const double log_lik = -0.5 * Nd * std::log(two_pi * sigma2) - rss / (2.0 * sigma2);
    const double log_prior_a = -std::log(two_pi) - std::log(delta2 * sigma2) + 0.5 * std::log(detG) -
                               quad / (2.0 * delta2 * sigma2);
    return log_lik + log_prior_a - std::log(sigma2);
  };

  const double u0 = std::log(yty / Nd);
  const double ulo = u0 - 14.0, uhi = u0 + 14.0;
  const int nu = 700;
  const int nw = 121;
  const double wmax = 9.0;
  const double du = (uhi - ulo) / (nu - 1);
  const double dw = 2.0 * wmax / (nw - 1);

  // Reference offset to keep exponentials in range.
  const double ref = log_integrand(std::exp(u0), m1, m2) + u0 + u0 + std::log(detC);
  double total = 0.0;
  for (int iu = 0; iu < nu; ++iu) {
    const double u = ulo + iu * du;
    const double sigma2 = std::exp(u);
    const double sigma = std::sqrt(sigma2);
    const double wu = (iu == 0 || iu == nu - 1) ? 0.5 : 1.0;
    double inner = 0.0;
    for (int i1 = 0; i1 < nw; ++i1) {
      const double w1 = -wmax + i1 * dw;
      const double ww1 = (i1 == 0 || i1 == nw - 1) ? 0.5 : 1.0;
      for (int i2 = 0; i2 < nw; ++i2) {
        const double w2 = -wmax + i2 * dw;
        const double ww2 = (i2 == 0 || i2 == nw - 1) ? 0.5 : 1.0;
        const double a1 = m1 + sigma * c11 * w1;
        const double a2 = m2 + sigma * (c21 * w1 + c22 * w2);
        // Jacobian: d sigma2 = sigma2 du, da = sigma^2 |C| dw.
        const double lj = u + u + std::log(detC);
        inner += ww1 * ww2 * std::exp(log_integrand(sigma2, a1, a2) + lj - ref);
      }
    }
    total += wu * inner;
  }
  return ref + std::log(total * du * dw * dw);
}

std::function<double(double)> pulse_density_numeric(double rise_time, double decay) {
  auto shape = [rise_time, decay](double t) {
    return t < 0.0 ? 0.0 : (1.0 - std::exp(-t / rise_time)) * std::exp(-t / decay);
  };
  const double span = 80.0 * (decay + rise_time);
  const double Z = adaptive_quadrature(shape, 0.0, span, 1e-15);
  return [shape, Z](double t) { return shape(t) / Z; };
}

}  // namespace vapors::oracle
