#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbgd/features.hpp"
#include "pbgd/rng.hpp"

namespace pbgd {

// Per-round latency of one worker:
//   rtt_total = 2*rtt + base_per_example * zeta * speed * jitter * straggle
// where jitter is a fresh lognormal multiplier each round, straggle applies
// straggle_factor with probability straggle_prob, and with probability
// fail_prob the worker never responds at all this round (forever, when
// permanent_failures is set). speed_factors, when non-empty, gives each
// worker a persistent multiplier; that regime makes the responder set biased
// toward fast workers instead of exchangeable.
struct LatencyModel {
    double base_per_example = 1e-3;
    double jitter_log_mu = 0.0;
    double jitter_log_sigma = 0.0;
    double straggle_prob = 0.0;
    double straggle_factor = 1.0;
    double fail_prob = 0.0;
    bool permanent_failures = false;
    double rtt = 0.0;
    std::vector<double> speed_factors;

    void validate(int workers) const;  // throws ConfigError
};

struct WorkerState {
    int id = 0;
    std::span<const Example> shard;  // view into the dataset; ordering fixed
    std::uint64_t seed = 0;          // stream identifier for this worker
    Rng rng;
    bool alive = true;  // cleared by a permanent failure

    // Every round consumes exactly this many uniforms per live worker, so
    // streams stay aligned whichever branches are taken.
    static constexpr int kDrawsPerRound = 3;
};

// Marker written into the payload slots of abandoned workers; tests assert it
// never reaches the master's reduction.
inline constexpr double kAbandonedPayloadMarker = -9.2233720368547758e18;

struct RoundOutcome {
    std::vector<int> responders;        // worker ids in arrival order, size gamma
    std::vector<double> arrival_times;  // absolute simulated timestamps
    double round_duration = 0.0;        // broadcast to gamma-th arrival
    std::vector<int> abandoned;         // dispatched workers whose results were discarded
    std::vector<Vec> payloads;          // gradients, aligned with responders
    std::vector<Vec> abandoned_payloads;  // marker-filled, aligned with abandoned
};

struct ClusterSpec {
    int workers = 1;
    LatencyModel latency;
};

// Contiguous blocks of zeta = m/M examples in dataset order. Rejects m not
// divisible by M; no silent padding.
std::vector<WorkerState> assign_shards(const Dataset& data, int workers);

// Shards plus per-worker latency streams derived from the root seed.
std::vector<WorkerState> make_cluster(const Dataset& data, int workers,
                                      std::uint64_t root_seed);

// One partial-barrier round: draws every live worker's round-trip time,
// takes the gamma earliest (ties to the lower id), computes their gradient
// payloads at theta, and abandons the rest. Throws StarvationError when
// fewer than gamma workers respond.
RoundOutcome simulate_round(const Vec& theta, std::vector<WorkerState>& workers,
                            const LatencyModel& model, int gamma, double lambda,
                            double clock);

// Monte-Carlo estimate of E[max round-trip] / E[gamma-th order statistic]
// for a cluster of M unit shards. Deterministic given the seed.
double expected_speedup_probe(const LatencyModel& model, int workers, int gamma,
                              int trials, std::uint64_t seed);

}  // namespace pbgd
