#include "pbgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pbgd {

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

double descent_check(const Vec& full_grad, const Vec& partial_agg) {
    if (full_grad.size() != partial_agg.size())
        throw std::invalid_argument("descent_check: length mismatch");
    return dot(full_grad, partial_agg);
}

double strong_convexity_gap(const Vec& theta, const Vec& theta_star, const Dataset& data,
                            double lambda) {
    return (objective(theta, data, lambda) - objective(theta_star, data, lambda)) -
           lambda * dist_sq(theta, theta_star);
}

double inner_product_bound_check(const Vec& theta_t, const Vec& theta_star, const Vec& b_t,
                                 double lambda) {
    double ip = 0.0;
    for (std::size_t i = 0; i < b_t.size(); ++i) ip += (theta_star[i] - theta_t[i]) * b_t[i];
    return ip + 0.5 * lambda * dist_sq(theta_t, theta_star);
}

double theta_norm_bound(const DataBounds& bounds, double lambda, int l) {
    if (!(lambda > 0.0)) throw std::invalid_argument("theta_norm_bound: lambda must be > 0");
    return bounds.y_max * bounds.k_max / (lambda * static_cast<double>(l));
}

double bt_norm_bound(const DataBounds& bounds, double lambda, int l) {
    if (!(lambda > 0.0)) throw std::invalid_argument("bt_norm_bound: lambda must be > 0");
    const double yk = bounds.y_max * bounds.k_max;
    return yk * bounds.k_max * bounds.k_max / lambda +
           std::sqrt(static_cast<double>(l)) * yk + yk / static_cast<double>(l);
}

RateReport contraction_check(const std::vector<IterationRecord>& trace, const Vec& theta_star,
                             double eta, double lambda, const DataBounds& bounds, int l) {
    if (trace.size() < 2) throw std::invalid_argument("contraction_check: trace too short");

    const double c = bt_norm_bound(bounds, lambda, l);
    const double noise = eta * eta * c * c;
    const double shrink = 1.0 - lambda * eta;

    RateReport report;
    const long long steps = static_cast<long long>(trace.size()) - 1;
    report.burn_in = std::max<int>(5, static_cast<int>(steps / 10));

    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double d_prev_sq = dist_sq(trace[i - 1].theta, theta_star);
        const double d_sq = dist_sq(trace[i].theta, theta_star);
        // Written so a non-finite distance counts as a violation.
        if (!(d_sq <= shrink * d_prev_sq + noise)) report.violations.push_back(trace[i].t);
        if (d_prev_sq > 0.0) report.ratios.push_back(std::sqrt(d_sq / d_prev_sq));
    }

    double log_sum = 0.0;
    int count = 0;
    bool hit_zero = false;
    for (std::size_t i = static_cast<std::size_t>(report.burn_in); i < report.ratios.size(); ++i) {
        if (report.ratios[i] == 0.0) {
            hit_zero = true;
            continue;
        }
        log_sum += std::log(report.ratios[i]);
        ++count;
    }
    if (hit_zero)
        report.fitted_q = 0.0;
    else if (count > 0)
        report.fitted_q = std::exp(log_sum / count);
    else
        report.fitted_q = std::numeric_limits<double>::quiet_NaN();
    return report;
}

Vec finite_diff_gradient(const Vec& theta, const Dataset& data, double lambda, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
    Vec g(theta.size());
    Vec probe = theta;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double hj = h * (1.0 + std::fabs(theta[j]));
        probe[j] = theta[j] + hj;
        const double up = objective(probe, data, lambda);
        probe[j] = theta[j] - hj;
        const double down = objective(probe, data, lambda);
        probe[j] = theta[j];
        g[j] = (up - down) / (2.0 * hj);
    }
    return g;
}

}  // namespace pbgd
