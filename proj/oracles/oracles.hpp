#pragma once

// Independent reference computations used by the test suites and the
// `oracle` CLI subcommand. Nothing here calls into the density or sampler
// code paths it is meant to check; only the plain data types are shared.

#include <cstdint>
#include <functional>
#include <vector>

#include "vapors/core.hpp"

namespace vapors::oracle {

// Every allocation vector of length k over L Gaussian labels plus the point
// process label L+1, Gaussian labels used at most once.
std::vector<AllocationVector> enumerate_allocations(std::size_t k, int L);

// q(x, z) evaluated term by term in linear space with erf-based truncation
// masses.
double labeled_joint_density(const VariableDimSample& x, const AllocationVector& z,
                             const ApproxModel& model);

// q(x) = sum over all z of q(x, z).
double unlabeled_density(const VariableDimSample& x, const ApproxModel& model);

// Exact q(z | x) over enumerate_allocations(x.k(), L), same order.
std::vector<double> allocation_posterior(const VariableDimSample& x, const ApproxModel& model);

// P(sum_l Bernoulli(pi_l) = k), k = 0..L, by enumerating all 2^L gate
// outcomes.
std::vector<double> gate_count_enumeration(const std::vector<double>& pi);

// 1-d composite Gauss-Legendre rule on [a, b] with `panels` panels of
// `order` nodes (order <= 20).
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                      int order = 10);

// Adaptive Gauss-Kronrod quadrature with relative tolerance `tol`.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-13);

// log p(y | omega, delta2) for the sinusoid model with amplitudes and noise
// variance integrated out numerically. Integrand: Gaussian likelihood x
// g-prior on the 2k amplitudes x Jeffreys 1/sigma2. Only k = 1.
double sinusoid_log_evidence_quadrature(const std::vector<double>& y, double omega, double delta2);

// Pulse shape (1 - exp(-t/td)) exp(-t/tau) / Z with Z obtained by numerical
// quadrature, returned as a callable density.
std::function<double(double)> pulse_density_numeric(double rise_time, double decay);

}  // namespace vapors::oracle
