#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pbgd/cluster_sim.hpp"
#include "pbgd/features.hpp"

namespace pbgd {

struct GammaPolicy {
    enum class Kind { Explicit, Algorithm1 };
    Kind kind = Kind::Explicit;
    int gamma = 1;       // Explicit
    double alpha = 0.0;  // Algorithm1
    double xi = 0.0;

    static GammaPolicy explicit_gamma(int g) { return {Kind::Explicit, g, 0.0, 0.0}; }
    static GammaPolicy algorithm1(double alpha, double xi) {
        return {Kind::Algorithm1, 0, alpha, xi};
    }
};

struct SolverConfig {
    double lambda = 0.0;
    std::optional<double> eta;  // constant step size; default_eta(bounds) when unset
    long long t_max = 1;
    double tol = 0.0;            // full-gradient-norm stopping threshold
    GammaPolicy gamma_policy;
    bool compute_oracle = true;  // fill dist_to_opt from the closed-form solution
};

struct IterationRecord {
    long long t = 0;
    double sim_time = 0.0;
    Vec theta;
    double objective = 0.0;
    double grad_norm = 0.0;  // full gradient, diagnostics only; costs no simulated time
    std::vector<int> responders;  // arrival order; empty on the initial record
    double round_duration = 0.0;
    double dist_to_opt = 0.0;  // NaN when the oracle was not computed
    Vec step_direction;        // aggregated payload average that produced this iterate
};

struct RunResult {
    std::vector<IterationRecord> trace;
    int gamma = 0;
    double eta = 0.0;
    Vec theta_star;  // empty when compute_oracle is off
    DataBounds bounds;
};

// Alias for the per-shard update term the workers send:
// (1/zeta) sum_shard (theta.K[x]-y) K[x] + lambda*theta.
Vec worker_step(const Vec& theta, std::span<const Example> shard, double lambda);

// theta - (eta/gamma) * sum(payloads). Payloads are consumed in the order
// given (arrival order); each coordinate is accumulated exactly, so the
// result does not depend on that order.
Vec master_update(const Vec& theta, const std::vector<Vec>& payloads, double eta,
                  int gamma);

// 1/(lambda + lip_hat): at most 1/lambda, and below the data-term curvature,
// so full-batch steps are monotone and the contraction factor stays in (0,1).
double default_eta(const DataBounds& bounds, double lambda);

bool has_converged(const IterationRecord& record, const SolverConfig& cfg);

// The full iterative protocol from theta0 = 0: simulate_round, then
// master_update, until has_converged. Starvation is rethrown with the
// iteration index attached. Deterministic given the seed.
RunResult run(const Dataset& data, const ClusterSpec& cluster, const SolverConfig& cfg,
              std::uint64_t seed);

// Serial full-batch reference: same sharding, worker-id order, same exact
// reduction, no simulator. run() with gamma = M produces bit-identical
// iterates for any latency model.
std::vector<Vec> full_batch_reference(const Dataset& data, int workers, double lambda,
                                      double eta, long long t_max, double tol);

}  // namespace pbgd
