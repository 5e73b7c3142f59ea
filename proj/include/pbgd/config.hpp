#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pbgd/cluster_sim.hpp"
#include "pbgd/solver.hpp"

namespace pbgd {

// Synthetic data source: y = theta_true . K[x] + noise, x uniform in
// [-1,1]^n, all draws from streams split off the run seed.
struct SyntheticSpec {
    int n = 0;
    int m = 0;
    std::uint64_t theta_seed = 0;
    double noise_sd = 0.0;
};

// One run configuration document (JSON). Unknown keys anywhere are hard
// errors; silent misconfiguration would invalidate regression constants.
struct RunConfig {
    std::optional<std::filesystem::path> dataset_path;  // exactly one source
    std::optional<SyntheticSpec> synthetic;
    ClusterSpec cluster;
    std::optional<int> declared_zeta;  // must equal m/workers when present
    SolverConfig solver;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> output_dir;
};

// Parses and validates; throws ConfigError on any schema or consistency
// problem (unknown key, both/neither dataset source, missing file, bad
// ranges, m not equal to workers*zeta).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

// Materializes the dataset (loads the CSV or generates the synthetic data)
// and checks divisibility by the worker count.
Dataset realize_dataset(const RunConfig& cfg);

// Deterministic synthetic generator, shared by the config path and the
// gen-data subcommand. Inputs and noise come from streams split off
// root_seed; theta_true from its own stream off theta_seed, so the ground
// truth can be held fixed while the sample varies.
Dataset generate_dataset(int n, int m, std::uint64_t root_seed, std::uint64_t theta_seed,
                         double noise_sd, Vec* theta_true_out = nullptr);
inline Dataset generate_dataset(int n, int m, std::uint64_t seed, double noise_sd) {
    return generate_dataset(n, m, seed, seed, noise_sd);
}

}  // namespace pbgd
