#pragma once

#include <cstdint>
#include <vector>

namespace pbgd {

// Finite-population sampling statistics behind the worker-count estimate:
// the variance of a without-replacement sample mean, the confidence-based
// sample size, and the machine-count formula derived from it.

struct Population {
    std::vector<double> values;

    long long size() const { return static_cast<long long>(values.size()); }
    double mean() const;
    // Divisor-N variance; the finite-population identity is exact only with
    // this convention. Sample-based estimates elsewhere use divisor n-1.
    double variance() const;
};

struct ConfidenceSpec {
    double alpha = 0.0;         // two-sided confidence coefficient
    double u_half_alpha = 0.0;  // upper alpha/2 standard-normal quantile
    double xi = 0.0;            // relative error target
    double delta = 0.0;         // absolute error target

    static ConfidenceSpec from_alpha(double alpha, double xi, double delta);
};

// Variance of the mean of n draws without replacement from a population of
// size N with divisor-N variance sigma2: sigma2 * (N-n) / (n*(N-1)).
double sample_mean_variance(long long N, long long n, double sigma2);

// Literal enumeration oracle: walks every C(N,n) subset and returns the
// variance of the subset means. Guarded at C(N,n) <= 1e6.
double brute_force_sample_variance(const Population& pop, int n);

double normal_cdf(double x);

// Standard-normal quantile: Acklam's rational approximation polished with one
// Newton step on the CDF. |Phi(result) - p| <= 1e-9 over (0,1), and
// inverse_normal_cdf(1-p) == -inverse_normal_cdf(p) whenever 1-p is exact.
double inverse_normal_cdf(double p);

// Smallest n with N*u^2*s2 / (delta^2*N + u^2*s2) <= n, clamped to [1, N].
long long required_sample_size(long long N, const ConfidenceSpec& spec, double s2);

// Machine count: ceil(N*u^2 / ((xi^2*N + u^2) * zeta)), clamped to
// [1, ceil(N/zeta)].
long long estimate_gamma(long long N, double alpha, double xi, long long zeta);

// Monte-Carlo estimate of P[|sample mean - population mean| < delta] for
// without-replacement samples of size n. Deterministic given the seed.
double coverage_probe(const Population& pop, int n, double delta, int trials,
                      std::uint64_t seed);

}  // namespace pbgd
