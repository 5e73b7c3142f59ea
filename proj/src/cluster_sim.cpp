#include "pbgd/cluster_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pbgd/errors.hpp"
#include "pbgd/sampling.hpp"

namespace pbgd {

void LatencyModel::validate(int workers) const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError(std::string("latency: ") + name + " must be in [0,1]");
    };
    prob(straggle_prob, "straggle_prob");
    prob(fail_prob, "fail_prob");
    if (!(straggle_factor >= 1.0)) throw ConfigError("latency: straggle_factor must be >= 1");
    if (!(base_per_example >= 0.0)) throw ConfigError("latency: base_per_example must be >= 0");
    if (!(rtt >= 0.0)) throw ConfigError("latency: rtt must be >= 0");
    if (!(jitter_log_sigma >= 0.0)) throw ConfigError("latency: jitter_log_sigma must be >= 0");
    if (!std::isfinite(jitter_log_mu)) throw ConfigError("latency: jitter_log_mu must be finite");
    if (!speed_factors.empty()) {
        if (static_cast<int>(speed_factors.size()) != workers)
            throw ConfigError("latency: speed_factors size must equal worker count");
        for (double f : speed_factors)
            if (!(f > 0.0)) throw ConfigError("latency: speed_factors must be > 0");
    }
}

std::vector<WorkerState> assign_shards(const Dataset& data, int workers) {
    if (workers < 1) throw ConfigError("assign_shards: need at least one worker");
    const int m = data.m();
    if (m % workers != 0)
        throw ConfigError("assign_shards: " + std::to_string(m) + " examples are not divisible by " +
                          std::to_string(workers) + " workers; resize the dataset or the cluster");
    const int zeta = m / workers;
    std::vector<WorkerState> out;
    out.reserve(static_cast<std::size_t>(workers));
    for (int j = 0; j < workers; ++j) {
        WorkerState w;
        w.id = j;
        w.shard = std::span<const Example>(data.examples.data() + static_cast<std::size_t>(j) * zeta,
                                           static_cast<std::size_t>(zeta));
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WorkerState> make_cluster(const Dataset& data, int workers,
                                      std::uint64_t root_seed) {
    auto cluster = assign_shards(data, workers);
    for (auto& w : cluster) {
        w.seed = derive_stream(root_seed, "latency", static_cast<std::uint64_t>(w.id));
        w.rng = Rng(w.seed);
    }
    return cluster;
}

namespace {

// Draws one round worth of randomness for a worker and returns its total
// round-trip time, or +inf if it fails to respond.
double draw_round_trip(WorkerState& w, const LatencyModel& model, std::size_t zeta) {
    const double u_jitter = w.rng.uniform01();
    const double u_straggle = w.rng.uniform01();
    const double u_fail = w.rng.uniform01();
    static_assert(WorkerState::kDrawsPerRound == 3);

    if (u_fail < model.fail_prob) {
        if (model.permanent_failures) w.alive = false;
        return std::numeric_limits<double>::infinity();
    }
    double jitter = 1.0;
    if (model.jitter_log_sigma > 0.0 || model.jitter_log_mu != 0.0)
        jitter = std::exp(model.jitter_log_mu +
                          model.jitter_log_sigma * inverse_normal_cdf(u_jitter));
    const double speed =
        model.speed_factors.empty() ? 1.0 : model.speed_factors[static_cast<std::size_t>(w.id)];
    double compute = model.base_per_example * static_cast<double>(zeta) * speed * jitter;
    if (u_straggle < model.straggle_prob) compute *= model.straggle_factor;
    return 2.0 * model.rtt + compute;
}

}  // namespace

RoundOutcome simulate_round(const Vec& theta, std::vector<WorkerState>& workers,
                            const LatencyModel& model, int gamma, double lambda,
                            double clock) {
    const int M = static_cast<int>(workers.size());
    if (gamma < 1 || gamma > M)
        throw std::invalid_argument("simulate_round: need 1 <= gamma <= workers");

    // (round-trip, id), id order; the pair ordering makes ties deterministic.
    std::vector<std::pair<double, int>> finished;
    std::vector<int> silent;
    for (auto& w : workers) {
        if (!w.alive) {
            silent.push_back(w.id);
            continue;
        }
        const double t = draw_round_trip(w, model, w.shard.size());
        if (std::isfinite(t))
            finished.emplace_back(t, w.id);
        else
            silent.push_back(w.id);
    }
    if (static_cast<int>(finished.size()) < gamma)
        throw StarvationError("simulate_round: only " + std::to_string(finished.size()) +
                                  " of " + std::to_string(M) + " workers responded, need " +
                                  std::to_string(gamma),
                              static_cast<int>(finished.size()));
    std::sort(finished.begin(), finished.end());

    RoundOutcome out;
    out.responders.reserve(static_cast<std::size_t>(gamma));
    out.payloads.reserve(static_cast<std::size_t>(gamma));
    for (int r = 0; r < gamma; ++r) {
        const auto [t, id] = finished[static_cast<std::size_t>(r)];
        out.responders.push_back(id);
        out.arrival_times.push_back(clock + t);
        out.payloads.push_back(
            gradient(theta, workers[static_cast<std::size_t>(id)].shard, lambda));
    }
    out.round_duration = finished[static_cast<std::size_t>(gamma - 1)].first;

    for (std::size_t r = static_cast<std::size_t>(gamma); r < finished.size(); ++r)
        out.abandoned.push_back(finished[r].second);
    out.abandoned.insert(out.abandoned.end(), silent.begin(), silent.end());
    std::sort(out.abandoned.begin(), out.abandoned.end());
    out.abandoned_payloads.assign(out.abandoned.size(),
                                  Vec(theta.size(), kAbandonedPayloadMarker));
    return out;
}

double expected_speedup_probe(const LatencyModel& model, int workers, int gamma,
                              int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("expected_speedup_probe: trials must be >= 1");
    if (gamma < 1 || gamma > workers)
        throw std::invalid_argument("expected_speedup_probe: need 1 <= gamma <= workers");
    model.validate(workers);

    std::vector<WorkerState> probe(static_cast<std::size_t>(workers));
    for (int j = 0; j < workers; ++j) {
        probe[static_cast<std::size_t>(j)].id = j;
        probe[static_cast<std::size_t>(j)].rng =
            Rng(derive_stream(seed, "latency", static_cast<std::uint64_t>(j)));
    }

    double sum_max = 0.0;
    double sum_gamma = 0.0;
    std::vector<double> times;
    for (int t = 0; t < trials; ++t) {
        times.clear();
        for (auto& w : probe) {
            if (!w.alive) continue;
            const double rt = draw_round_trip(w, model, 1);
            if (std::isfinite(rt)) times.push_back(rt);
        }
        if (static_cast<int>(times.size()) < gamma)
            throw StarvationError("expected_speedup_probe: starved trial",
                                  static_cast<int>(times.size()));
        std::sort(times.begin(), times.end());
        sum_max += times.back();
        sum_gamma += times[static_cast<std::size_t>(gamma - 1)];
    }
    return sum_max / sum_gamma;
}

}  // namespace pbgd
