#include "pbgd/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbgd/errors.hpp"
#include "pbgd/exact_sum.hpp"
#include "pbgd/sampling.hpp"

namespace pbgd {

Vec worker_step(const Vec& theta, std::span<const Example> shard, double lambda) {
    if (shard.empty()) throw std::invalid_argument("worker_step: empty shard");
    return gradient(theta, shard, lambda);
}

Vec master_update(const Vec& theta, const std::vector<Vec>& payloads, double eta,
                  int gamma) {
    if (gamma < 1 || static_cast<int>(payloads.size()) != gamma)
        throw std::invalid_argument("master_update: expected exactly gamma payloads");
    const std::size_t l = theta.size();
    for (const Vec& p : payloads)
        if (p.size() != l) throw std::invalid_argument("master_update: payload length mismatch");

    const double scale = eta / static_cast<double>(gamma);
    Vec out(l);
    ExactSum acc;
    for (std::size_t c = 0; c < l; ++c) {
        acc.reset();
        for (const Vec& p : payloads) acc.add(p[c]);
        out[c] = theta[c] - scale * acc.value();
    }
    return out;
}

double default_eta(const DataBounds& bounds, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("default_eta: lambda must be > 0");
    return 1.0 / (lambda + bounds.lip_hat);
}

bool has_converged(const IterationRecord& record, const SolverConfig& cfg) {
    return record.grad_norm <= cfg.tol || record.t >= cfg.t_max;
}

namespace {

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dist2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

int resolve_gamma(const GammaPolicy& policy, int workers, int zeta, int m) {
    switch (policy.kind) {
        case GammaPolicy::Kind::Explicit:
            if (policy.gamma < 1 || policy.gamma > workers)
                throw ConfigError("gamma must be in [1, workers]");
            return policy.gamma;
        case GammaPolicy::Kind::Algorithm1:
            return static_cast<int>(
                estimate_gamma(m, policy.alpha, policy.xi, zeta));
    }
    throw std::logic_error("resolve_gamma: bad policy");
}

}  // namespace

RunResult run(const Dataset& data, const ClusterSpec& cluster, const SolverConfig& cfg,
              std::uint64_t seed) {
    if (cfg.t_max < 0) throw ConfigError("t_max must be >= 0");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (!(cfg.lambda > 0.0)) throw ConfigError("lambda must be > 0");
    cluster.latency.validate(cluster.workers);

    auto workers = make_cluster(data, cluster.workers, seed);
    const int zeta = data.m() / cluster.workers;

    RunResult result;
    result.bounds = compute_bounds(data);
    result.gamma = resolve_gamma(cfg.gamma_policy, cluster.workers, zeta, data.m());
    result.eta = cfg.eta.value_or(default_eta(result.bounds, cfg.lambda));
    if (!(result.eta > 0.0)) throw ConfigError("eta must be > 0");
    if (cfg.compute_oracle) result.theta_star = solve_closed_form(data, cfg.lambda);

    const int l = feature_dim(data.n);
    Vec theta(static_cast<std::size_t>(l), 0.0);
    const auto all = std::span<const Example>(data.examples);

    auto make_record = [&](long long t, double sim_time, Vec theta_snapshot) {
        IterationRecord rec;
        rec.t = t;
        rec.sim_time = sim_time;
        rec.objective = objective(theta_snapshot, data, cfg.lambda);
        rec.grad_norm = norm2(gradient(theta_snapshot, all, cfg.lambda));
        rec.dist_to_opt = result.theta_star.empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : dist2(theta_snapshot, result.theta_star);
        rec.theta = std::move(theta_snapshot);
        return rec;
    };

    result.trace.push_back(make_record(0, 0.0, theta));
    double clock = 0.0;
    while (!has_converged(result.trace.back(), cfg)) {
        const long long t = result.trace.back().t + 1;
        RoundOutcome outcome;
        try {
            outcome = simulate_round(theta, workers, cluster.latency, result.gamma,
                                     cfg.lambda, clock);
        } catch (const StarvationError& e) {
            throw StarvationError(std::string(e.what()) + " (iteration " + std::to_string(t) + ")",
                                  e.responded, t);
        }
        theta = master_update(theta, outcome.payloads, result.eta, result.gamma);
        clock += outcome.round_duration;

        auto rec = make_record(t, clock, theta);
        rec.responders = std::move(outcome.responders);
        rec.round_duration = outcome.round_duration;
        // Reconstruct the consumed aggregate for the diagnostics: the average
        // payload is (theta_prev - theta_next) / eta, but we keep the exact
        // sum instead of differencing.
        ExactSum acc;
        rec.step_direction.resize(static_cast<std::size_t>(l));
        for (int c = 0; c < l; ++c) {
            acc.reset();
            for (const Vec& p : outcome.payloads) acc.add(p[static_cast<std::size_t>(c)]);
            rec.step_direction[static_cast<std::size_t>(c)] =
                acc.value() / static_cast<double>(result.gamma);
        }
        result.trace.push_back(std::move(rec));
    }
    return result;
}

std::vector<Vec> full_batch_reference(const Dataset& data, int workers, double lambda,
                                      double eta, long long t_max, double tol) {
    auto cluster = assign_shards(data, workers);
    const auto all = std::span<const Example>(data.examples);
    const int l = feature_dim(data.n);

    std::vector<Vec> iterates;
    Vec theta(static_cast<std::size_t>(l), 0.0);
    iterates.push_back(theta);
    for (long long t = 1; t <= t_max; ++t) {
        if (norm2(gradient(theta, all, lambda)) <= tol) break;
        std::vector<Vec> payloads;
        payloads.reserve(cluster.size());
        for (const auto& w : cluster) payloads.push_back(worker_step(theta, w.shard, lambda));
        theta = master_update(theta, payloads, eta, workers);
        iterates.push_back(theta);
    }
    return iterates;
}

}  // namespace pbgd
