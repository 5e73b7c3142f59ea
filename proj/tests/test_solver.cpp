#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pbgd/config.hpp"
#include "pbgd/errors.hpp"
#include "pbgd/solver.hpp"

using namespace pbgd;

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool bit_equal(const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("worker_step equals the shard gradient") {
    const Dataset data = generate_dataset(2, 12, 3, 0.1);
    auto shards = assign_shards(data, 3);
    Vec theta(6, 0.2);

    // One-worker cluster: the step is the full gradient.
    auto whole = assign_shards(data, 1);
    CHECK(worker_step(theta, whole[0].shard, 0.3) ==
          gradient(theta, data.examples, 0.3));

    // Zero parameters, zero targets -> zero step.
    Dataset zeros = data;
    for (auto& e : zeros.examples) e.y = 0.0;
    auto zshards = assign_shards(zeros, 3);
    const Vec zstep = worker_step(Vec(6, 0.0), zshards[0].shard, 0.3);
    for (double v : zstep) CHECK(v == 0.0);

    CHECK_THROWS_AS(worker_step(theta, std::span<const Example>{}, 0.3),
                    std::invalid_argument);
}

TEST_CASE("averaging all shard steps recovers the full gradient") {
    const Dataset data = generate_dataset(2, 24, 5, 0.2);
    const double lambda = 0.4;
    Vec theta(6);
    for (std::size_t i = 0; i < 6; ++i) theta[i] = 0.1 * static_cast<double>(i) - 0.2;
    const Vec full = gradient(theta, data.examples, lambda);

    for (int M : {2, 3, 4, 6}) {
        auto shards = assign_shards(data, M);
        Vec avg(6, 0.0);
        for (const auto& w : shards) {
            const Vec b = worker_step(theta, w.shard, lambda);
            for (std::size_t c = 0; c < 6; ++c) avg[c] += b[c] / M;
        }
        for (std::size_t c = 0; c < 6; ++c) CHECK(std::fabs(avg[c] - full[c]) <= 1e-12);
    }
}

TEST_CASE("master_update arithmetic") {
    CHECK(master_update(Vec{1, 0}, {Vec{0, 0}, Vec{0, 0}}, 0.5, 2) == Vec{1, 0});
    CHECK(master_update(Vec{1, 0}, {Vec{1, 0}, Vec{0, 1}}, 0.5, 2) ==
          Vec{0.75, -0.25});
    CHECK_THROWS_AS(master_update(Vec{1, 0}, {Vec{1, 0}}, 0.5, 2), std::invalid_argument);
    CHECK_THROWS_AS(master_update(Vec{1, 0}, {Vec{1, 0}, Vec{1}}, 0.5, 2),
                    std::invalid_argument);
}

TEST_CASE("one full-barrier update is one full-batch descent step") {
    const Dataset data = generate_dataset(2, 30, 9, 0.1);
    const double lambda = 0.2, eta = 0.1;
    Vec theta(6, 0.15);
    auto shards = assign_shards(data, 5);
    std::vector<Vec> payloads;
    for (const auto& w : shards) payloads.push_back(worker_step(theta, w.shard, lambda));
    const Vec stepped = master_update(theta, payloads, eta, 5);
    const Vec g = gradient(theta, data.examples, lambda);
    for (std::size_t c = 0; c < 6; ++c)
        CHECK(std::fabs(stepped[c] - (theta[c] - eta * g[c])) <= 1e-12);
}

TEST_CASE("has_converged predicate") {
    SolverConfig cfg;
    cfg.t_max = 100;
    cfg.tol = 1e-6;
    IterationRecord rec;
    rec.t = 5;
    rec.grad_norm = 0.0;
    CHECK(has_converged(rec, cfg));
    rec.grad_norm = 2e-6;
    CHECK_FALSE(has_converged(rec, cfg));
    rec.t = 100;
    CHECK(has_converged(rec, cfg));
}

TEST_CASE("default_eta") {
    DataBounds b;
    b.lip_hat = 1.0;
    CHECK(default_eta(b, 1.0) == 0.5);
    CHECK(default_eta(b, 1e9) <= 1e-9);
    CHECK_THROWS_AS(default_eta(b, 0.0), std::invalid_argument);

    // Descent property: full-batch steps with the default step size never
    // increase the objective.
    const Dataset data = generate_dataset(2, 40, 13, 0.2);
    const double lambda = 0.15;
    const double eta = default_eta(compute_bounds(data), lambda);
    Vec theta(6, 0.0);
    double prev = objective(theta, data, lambda);
    for (int t = 0; t < 200; ++t) {
        const Vec g = gradient(theta, data.examples, lambda);
        for (std::size_t c = 0; c < 6; ++c) theta[c] -= eta * g[c];
        const double cur = objective(theta, data, lambda);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("full-barrier run reaches the closed-form optimum") {
    const Dataset data = generate_dataset(2, 80, 17, 0.1);
    ClusterSpec cluster;
    cluster.workers = 4;
    cluster.latency.jitter_log_sigma = 0.25;

    SolverConfig cfg;
    cfg.lambda = 0.1;
    cfg.t_max = 20000;
    cfg.tol = 1e-9;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(4);

    const RunResult res = run(data, cluster, cfg, 42);
    REQUIRE_FALSE(res.theta_star.empty());
    CHECK(dist(res.trace.back().theta, res.theta_star) <= 1e-6);
    CHECK(res.trace.back().dist_to_opt <= 1e-6);
    // Objective is monotone for the full barrier with the default step size,
    // and the trace clock and iteration index only move forward.
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
        CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-15);
        CHECK(res.trace[i].t == res.trace[i - 1].t + 1);
        CHECK(res.trace[i].sim_time >= res.trace[i - 1].sim_time);
    }
}

TEST_CASE("t_max = 0 yields only the initial record") {
    const Dataset data = generate_dataset(1, 10, 1, 0.0);
    ClusterSpec cluster;
    cluster.workers = 2;
    SolverConfig cfg;
    cfg.lambda = 0.5;
    cfg.t_max = 0;
    cfg.tol = 1e-12;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(2);
    const RunResult res = run(data, cluster, cfg, 1);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].t == 0);
    CHECK(res.trace[0].sim_time == 0.0);
    for (double v : res.trace[0].theta) CHECK(v == 0.0);
}

TEST_CASE("full barrier is bit-identical to the serial reference") {
    const Dataset data = generate_dataset(2, 48, 23, 0.15);
    SolverConfig cfg;
    cfg.lambda = 0.2;
    cfg.t_max = 400;
    cfg.tol = 1e-10;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(6);
    cfg.compute_oracle = false;

    ClusterSpec jittered;
    jittered.workers = 6;
    jittered.latency.jitter_log_sigma = 0.5;

    ClusterSpec straggly;
    straggly.workers = 6;
    straggly.latency.jitter_log_sigma = 0.1;
    straggly.latency.straggle_prob = 0.3;
    straggly.latency.straggle_factor = 8.0;

    const RunResult run_a = run(data, jittered, cfg, 1);
    const RunResult run_b = run(data, straggly, cfg, 777);
    const auto reference =
        full_batch_reference(data, 6, cfg.lambda, run_a.eta, cfg.t_max, cfg.tol);

    REQUIRE(run_a.trace.size() == reference.size());
    REQUIRE(run_b.trace.size() == reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        CHECK(bit_equal(run_a.trace[i].theta, reference[i]));
        CHECK(bit_equal(run_b.trace[i].theta, reference[i]));
    }
}

TEST_CASE("runs are deterministic and seeds only perturb within tolerance") {
    const Dataset data = generate_dataset(2, 240, 29, 0.1);
    ClusterSpec cluster;
    cluster.workers = 6;
    cluster.latency.jitter_log_sigma = 0.3;
    SolverConfig cfg;
    cfg.lambda = 0.2;
    cfg.t_max = 5000;
    // Above the partial-barrier sampling-noise floor, so runs terminate via
    // the gradient rule rather than t_max.
    cfg.tol = 0.02;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(4);

    const RunResult a1 = run(data, cluster, cfg, 5);
    const RunResult a2 = run(data, cluster, cfg, 5);
    REQUIRE(a1.trace.size() == a2.trace.size());
    for (std::size_t i = 0; i < a1.trace.size(); ++i) {
        CHECK(bit_equal(a1.trace[i].theta, a2.trace[i].theta));
        CHECK(a1.trace[i].sim_time == a2.trace[i].sim_time);
        CHECK(a1.trace[i].responders == a2.trace[i].responders);
    }

    const RunResult b = run(data, cluster, cfg, 6);
    REQUIRE(a1.trace.back().grad_norm <= cfg.tol);
    REQUIRE(b.trace.back().grad_norm <= cfg.tol);
    REQUIRE(a1.trace.back().t < cfg.t_max);
    REQUIRE(b.trace.back().t < cfg.t_max);
    CHECK(std::fabs(a1.trace.back().objective - b.trace.back().objective) <= 10.0 * cfg.tol);
}

TEST_CASE("iterate norms stay under the relaxed ceiling") {
    const Dataset data = generate_dataset(2, 60, 31, 0.2);
    const DataBounds bounds = compute_bounds(data);
    ClusterSpec cluster;
    cluster.workers = 6;
    cluster.latency.jitter_log_sigma = 0.3;
    SolverConfig cfg;
    cfg.lambda = 0.1;
    cfg.t_max = 2000;
    cfg.tol = 1e-8;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(3);
    const RunResult res = run(data, cluster, cfg, 8);
    const double ceiling = bounds.y_max * bounds.k_max / cfg.lambda;
    for (const auto& rec : res.trace) CHECK(norm(rec.theta) <= ceiling);
}

TEST_CASE("starvation carries the iteration index") {
    const Dataset data = generate_dataset(1, 8, 2, 0.0);
    ClusterSpec cluster;
    cluster.workers = 4;
    cluster.latency.fail_prob = 1.0;
    SolverConfig cfg;
    cfg.lambda = 0.5;
    cfg.t_max = 10;
    cfg.tol = 1e-12;
    cfg.gamma_policy = GammaPolicy::explicit_gamma(2);
    try {
        run(data, cluster, cfg, 3);
        FAIL("expected starvation");
    } catch (const StarvationError& e) {
        CHECK(e.iteration == 1);
        CHECK(e.responded == 0);
    }
}

TEST_CASE("algorithm-1 gamma policy resolves through the sampling module") {
    const Dataset data = generate_dataset(2, 2000, 37, 0.1);
    ClusterSpec cluster;
    cluster.workers = 20;
    cluster.latency.jitter_log_sigma = 0.25;
    SolverConfig cfg;
    cfg.lambda = 0.1;
    cfg.t_max = 1;
    cfg.tol = 1e-12;
    cfg.gamma_policy = GammaPolicy::algorithm1(0.05, 0.05);
    cfg.compute_oracle = false;
    const RunResult res = run(data, cluster, cfg, 4);
    CHECK(res.gamma == 9);  // 2000*u^2 / ((0.0025*2000 + u^2) * 100) = 8.69 -> 9
}
