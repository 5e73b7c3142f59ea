#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace pbgd {

using Vec = std::vector<double>;

// One labelled example: n-dimensional input, scalar target.
struct Example {
    Vec x;
    double y = 0.0;
};

// Ordering of `examples` is stable; shard assignment depends on it.
struct Dataset {
    std::vector<Example> examples;
    int n = 0;  // input dimension, shared by every example

    int m() const { return static_cast<int>(examples.size()); }
};

struct ModelSpec {
    double lambda = 0.0;  // regularization weight, > 0
    int n = 0;
    int l = 0;  // feature dimension, n(n+1)/2 + n + 1
};

// Data-dependent constants used by the step-size policy and the norm bounds.
struct DataBounds {
    double k_max = 0.0;   // largest |entry| over all feature vectors
    double y_max = 0.0;   // largest |target|
    double lip_hat = 0.0; // max_i squared feature norm (data-term curvature)
};

// Length of the quadratic feature expansion: n(n+1)/2 monomials x_j*x_k with
// j <= k, then the n linear terms, then the constant 1.
int feature_dim(int n);

// Expands x into (x1^2, x1x2, .., x1xn, x2^2, .., xn^2, x1, .., xn, 1).
Vec kernel_map(const Vec& x);
void kernel_map_into(std::span<const double> x, std::span<double> out);

// (1/m) sum_i (theta.K[x_i] - y_i)^2 + lambda*|theta|^2, summed in example
// index order so runs are reproducible.
double objective(const Vec& theta, const Dataset& data, double lambda);

// The update direction of the iterative scheme:
//   (1/|subset|) sum_i (theta.K[x_i] - y_i) K[x_i] + lambda*theta,
// summed in subset order. Note this is half the derivative of `objective`;
// comparisons against finite differences must account for the factor 2.
Vec gradient(const Vec& theta, std::span<const Example> subset, double lambda);

// Oracle optimum: solves (Phi^T Phi / m + lambda I) theta = Phi^T y / m with
// a dense symmetric factorization, independent of the iterative path.
// Throws NumericalError (with a condition estimate) if the solve fails the
// residual post-check.
Vec solve_closed_form(const Dataset& data, double lambda);

DataBounds compute_bounds(const Dataset& data);

// CSV dataset format: header "x1,...,xn,y", one example per row, decimal
// ASCII floats. The loader rejects rows of the wrong arity and non-finite
// values; an empty file is a ConfigError.
Dataset load_dataset_csv(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace pbgd
