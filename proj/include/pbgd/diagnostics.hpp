#pragma once

#include <vector>

#include "pbgd/features.hpp"
#include "pbgd/solver.hpp"

namespace pbgd {

// Post-hoc numerical certification of the convergence analysis over a solver
// trace. Everything here is pure and reentrant.

struct RateReport {
    std::vector<double> ratios;  // |theta_{t+1}-theta*| / |theta_t-theta*| where defined
    double fitted_q = 0.0;       // geometric mean of post-burn-in ratios
    int burn_in = 0;             // leading iterations excluded from the fit
    std::vector<long long> violations;  // iterations where the contraction bound failed
};

// Inner product of the full gradient with a partial aggregate; the caller
// interprets the sign (positive means the partial step is a descent step).
double descent_check(const Vec& full_grad, const Vec& partial_agg);

// [f(theta) - f(theta*)] - lambda*|theta-theta*|^2, which strong convexity
// keeps >= 0 (up to roundoff) when theta* is the optimum.
double strong_convexity_gap(const Vec& theta, const Vec& theta_star, const Dataset& data,
                            double lambda);

// <theta*-theta_t, b_t> + (lambda/2)*|theta_t-theta*|^2; <= 0 for the
// full-batch update term. For partial aggregates the sign carries sampling
// noise, so callers log rather than assert it.
double inner_product_bound_check(const Vec& theta_t, const Vec& theta_star, const Vec& b_t,
                                 double lambda);

// y*k / (lambda*l): the analysis' claimed iterate-norm ceiling. Runners log
// per-iteration norms against both this and the relaxed y*k/lambda form.
double theta_norm_bound(const DataBounds& bounds, double lambda, int l);

// y*k^3/lambda + sqrt(l)*y*k + y*k/l: ceiling for the update-term norm.
double bt_norm_bound(const DataBounds& bounds, double lambda, int l);

// Verifies the per-iteration contraction
//   |theta_{t+1}-theta*|^2 <= (1-lambda*eta)*|theta_t-theta*|^2 + eta^2*C^2
// with C = bt_norm_bound, and fits the Q-linear rate over the post-burn-in
// window (first 10% of iterations, minimum 5, excluded).
RateReport contraction_check(const std::vector<IterationRecord>& trace, const Vec& theta_star,
                             double eta, double lambda, const DataBounds& bounds, int l);

// Central differences of `objective`, step h*(1+|theta_j|) per coordinate.
// This is the true derivative, i.e. exactly twice `gradient`.
Vec finite_diff_gradient(const Vec& theta, const Dataset& data, double lambda, double h);

}  // namespace pbgd
