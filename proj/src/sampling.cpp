#include "pbgd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pbgd/rng.hpp"

namespace pbgd {

double Population::mean() const {
    if (values.empty()) throw std::invalid_argument("Population: empty");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double Population::variance() const {
    const double mu = mean();
    double s = 0.0;
    for (double v : values) s += (v - mu) * (v - mu);
    return s / static_cast<double>(values.size());
}

ConfidenceSpec ConfidenceSpec::from_alpha(double alpha, double xi, double delta) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ConfidenceSpec: alpha must be in (0,1)");
    ConfidenceSpec s;
    s.alpha = alpha;
    s.u_half_alpha = inverse_normal_cdf(1.0 - alpha / 2.0);
    s.xi = xi;
    s.delta = delta;
    return s;
}

double sample_mean_variance(long long N, long long n, double sigma2) {
    if (N < 2) throw std::invalid_argument("sample_mean_variance: N must be >= 2");
    if (n < 1 || n > N) throw std::invalid_argument("sample_mean_variance: need 1 <= n <= N");
    if (sigma2 < 0.0) throw std::invalid_argument("sample_mean_variance: sigma2 < 0");
    return sigma2 * static_cast<double>(N - n) /
           (static_cast<double>(n) * static_cast<double>(N - 1));
}

namespace {

double binomial_guarded(int N, int n) {
    double c = 1.0;
    for (int i = 1; i <= n; ++i) {
        c *= static_cast<double>(N - n + i) / static_cast<double>(i);
        if (c > 1e7) return c;  // caller rejects anyway
    }
    return c;
}

}  // namespace

double brute_force_sample_variance(const Population& pop, int n) {
    const int N = static_cast<int>(pop.size());
    if (n < 1 || n > N) throw std::invalid_argument("brute_force_sample_variance: bad n");
    if (binomial_guarded(N, n) > 1e6)
        throw std::invalid_argument("brute_force_sample_variance: C(N,n) exceeds 1e6 guard");

    // Enumerate subsets in lexicographic index order; long double headroom so
    // the enumeration stays a trustworthy oracle for the closed formula.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<long double> means;
    while (true) {
        long double s = 0.0L;
        for (int i : idx) s += pop.values[static_cast<std::size_t>(i)];
        means.push_back(s / n);
        int j = n - 1;
        while (j >= 0 && idx[j] == N - n + j) --j;
        if (j < 0) break;
        ++idx[j];
        for (int k = j + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
    }
    long double mu = 0.0L;
    for (long double v : means) mu += v;
    mu /= static_cast<long double>(means.size());
    long double var = 0.0L;
    for (long double v : means) var += (v - mu) * (v - mu);
    var /= static_cast<long double>(means.size());
    return static_cast<double>(var);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation to the standard-normal quantile
// (P. J. Acklam, 2003; max abs error ~1.15e-9 before refinement).
double acklam_lower_half(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // One Newton step against the erfc-based CDF.
    double err = normal_cdf(x) - p;
    double pdf = std::exp(-0.5 * x * x) / 2.5066282746310002;  // sqrt(2*pi)
    if (pdf > 0.0) x -= err / pdf;
    return x;
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
    if (p == 0.5) return 0.0;
    // For p > 0.5, 1-p is exact (Sterbenz), so the mirrored evaluation makes
    // the quantile exactly antisymmetric around 0.5.
    if (p > 0.5) return -acklam_lower_half(1.0 - p);
    return acklam_lower_half(p);
}

long long required_sample_size(long long N, const ConfidenceSpec& spec, double s2) {
    if (N < 1) throw std::invalid_argument("required_sample_size: N must be >= 1");
    if (!(spec.delta > 0.0)) throw std::invalid_argument("required_sample_size: delta must be > 0");
    if (!(s2 > 0.0)) throw std::invalid_argument("required_sample_size: s2 must be > 0");
    const double u2 = spec.u_half_alpha * spec.u_half_alpha;
    const double x = static_cast<double>(N) * u2 * s2 /
                     (spec.delta * spec.delta * static_cast<double>(N) + u2 * s2);
    long long n = static_cast<long long>(std::ceil(x));
    return std::clamp(n, 1ll, N);
}

long long estimate_gamma(long long N, double alpha, double xi, long long zeta) {
    if (N < 1) throw std::invalid_argument("estimate_gamma: N must be >= 1");
    if (zeta < 1) throw std::invalid_argument("estimate_gamma: zeta must be >= 1");
    if (!(xi > 0.0)) throw std::invalid_argument("estimate_gamma: xi must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("estimate_gamma: alpha must be in (0,1)");
    const double u = inverse_normal_cdf(1.0 - alpha / 2.0);
    const double u2 = u * u;
    const double x = static_cast<double>(N) * u2 /
                     ((xi * xi * static_cast<double>(N) + u2) * static_cast<double>(zeta));
    long long gamma = static_cast<long long>(std::ceil(x));
    const long long machines = (N + zeta - 1) / zeta;
    return std::clamp(gamma, 1ll, machines);
}

double coverage_probe(const Population& pop, int n, double delta, int trials,
                      std::uint64_t seed) {
    const int N = static_cast<int>(pop.size());
    if (n < 1 || n > N) throw std::invalid_argument("coverage_probe: bad n");
    if (trials < 1) throw std::invalid_argument("coverage_probe: trials must be >= 1");
    const double mu = pop.mean();

    Rng rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(N));
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        std::iota(idx.begin(), idx.end(), 0);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(N - j)));
            std::swap(idx[j], idx[pick]);
            s += pop.values[static_cast<std::size_t>(idx[j])];
        }
        if (std::fabs(s / n - mu) < delta) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

}  // namespace pbgd
