#include "pbgd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pbgd/errors.hpp"
#include "pbgd/rng.hpp"
#include "pbgd/sampling.hpp"

namespace pbgd {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    if (!obj[key].is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

long long require_integer(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    if (!obj[key].is_number_integer())
        throw ConfigError("key '" + key + "' in " + where + " must be an integer");
    return obj[key].get<long long>();
}

LatencyModel parse_latency(const json& obj, int workers) {
    reject_unknown_keys(obj,
                        {"base_per_example", "jitter_log_mu", "jitter_log_sigma", "straggle_prob",
                         "straggle_factor", "fail_prob", "permanent_failures", "rtt",
                         "speed_factors"},
                        "cluster.latency");
    LatencyModel m;
    if (obj.contains("base_per_example")) m.base_per_example = obj["base_per_example"].get<double>();
    if (obj.contains("jitter_log_mu")) m.jitter_log_mu = obj["jitter_log_mu"].get<double>();
    if (obj.contains("jitter_log_sigma")) m.jitter_log_sigma = obj["jitter_log_sigma"].get<double>();
    if (obj.contains("straggle_prob")) m.straggle_prob = obj["straggle_prob"].get<double>();
    if (obj.contains("straggle_factor")) m.straggle_factor = obj["straggle_factor"].get<double>();
    if (obj.contains("fail_prob")) m.fail_prob = obj["fail_prob"].get<double>();
    if (obj.contains("permanent_failures")) {
        if (!obj["permanent_failures"].is_boolean())
            throw ConfigError("cluster.latency.permanent_failures must be a boolean");
        m.permanent_failures = obj["permanent_failures"].get<bool>();
    }
    if (obj.contains("rtt")) m.rtt = obj["rtt"].get<double>();
    if (obj.contains("speed_factors")) {
        if (!obj["speed_factors"].is_array())
            throw ConfigError("cluster.latency.speed_factors must be an array");
        for (const auto& v : obj["speed_factors"]) m.speed_factors.push_back(v.get<double>());
    }
    m.validate(workers);
    return m;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(doc, {"dataset", "cluster", "solver", "gamma", "seed", "output"},
                        "config root");

    RunConfig cfg;

    if (!doc.contains("dataset")) throw ConfigError("missing 'dataset' block");
    {
        const json& ds = doc["dataset"];
        reject_unknown_keys(ds, {"path", "synthetic"}, "dataset");
        const bool has_path = ds.contains("path");
        const bool has_synth = ds.contains("synthetic");
        if (has_path == has_synth)
            throw ConfigError("dataset must have exactly one of 'path' or 'synthetic'");
        if (has_path) {
            std::filesystem::path p = ds["path"].get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!std::filesystem::exists(p))
                throw ConfigError("dataset file does not exist: " + p.string());
            cfg.dataset_path = p;
        } else {
            const json& syn = ds["synthetic"];
            reject_unknown_keys(syn, {"n", "m", "theta_seed", "noise_sd"}, "dataset.synthetic");
            SyntheticSpec s;
            s.n = static_cast<int>(require_integer(syn, "n", "dataset.synthetic"));
            s.m = static_cast<int>(require_integer(syn, "m", "dataset.synthetic"));
            s.theta_seed = static_cast<std::uint64_t>(require_integer(syn, "theta_seed",
                                                                      "dataset.synthetic"));
            s.noise_sd = require_number(syn, "noise_sd", "dataset.synthetic");
            if (s.n < 1 || s.m < 1) throw ConfigError("synthetic n and m must be >= 1");
            if (s.noise_sd < 0.0) throw ConfigError("synthetic noise_sd must be >= 0");
            cfg.synthetic = s;
        }
    }

    if (!doc.contains("cluster")) throw ConfigError("missing 'cluster' block");
    {
        const json& cl = doc["cluster"];
        reject_unknown_keys(cl, {"workers", "zeta", "latency"}, "cluster");
        cfg.cluster.workers = static_cast<int>(require_integer(cl, "workers", "cluster"));
        if (cfg.cluster.workers < 1) throw ConfigError("cluster.workers must be >= 1");
        if (cl.contains("zeta")) {
            cfg.declared_zeta = static_cast<int>(require_integer(cl, "zeta", "cluster"));
            if (*cfg.declared_zeta < 1) throw ConfigError("cluster.zeta must be >= 1");
        }
        if (cl.contains("latency"))
            cfg.cluster.latency = parse_latency(cl["latency"], cfg.cluster.workers);
        else
            cfg.cluster.latency.validate(cfg.cluster.workers);
    }

    if (!doc.contains("solver")) throw ConfigError("missing 'solver' block");
    {
        const json& so = doc["solver"];
        reject_unknown_keys(so, {"lambda", "eta", "t_max", "tol", "compute_oracle"}, "solver");
        cfg.solver.lambda = require_number(so, "lambda", "solver");
        if (!(cfg.solver.lambda > 0.0)) throw ConfigError("solver.lambda must be > 0");
        if (so.contains("eta")) {
            cfg.solver.eta = so["eta"].get<double>();
            if (!(*cfg.solver.eta > 0.0)) throw ConfigError("solver.eta must be > 0");
        }
        cfg.solver.t_max = require_integer(so, "t_max", "solver");
        if (cfg.solver.t_max < 1) throw ConfigError("solver.t_max must be >= 1");
        cfg.solver.tol = require_number(so, "tol", "solver");
        if (!(cfg.solver.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
        if (so.contains("compute_oracle")) {
            if (!so["compute_oracle"].is_boolean())
                throw ConfigError("solver.compute_oracle must be a boolean");
            cfg.solver.compute_oracle = so["compute_oracle"].get<bool>();
        }
    }

    if (!doc.contains("gamma")) throw ConfigError("missing 'gamma' block");
    {
        const json& ga = doc["gamma"];
        reject_unknown_keys(ga, {"explicit", "algorithm1"}, "gamma");
        const bool has_explicit = ga.contains("explicit");
        const bool has_alg1 = ga.contains("algorithm1");
        if (has_explicit == has_alg1)
            throw ConfigError("gamma must have exactly one of 'explicit' or 'algorithm1'");
        if (has_explicit) {
            cfg.solver.gamma_policy =
                GammaPolicy::explicit_gamma(static_cast<int>(require_integer(ga, "explicit", "gamma")));
        } else {
            const json& a1 = ga["algorithm1"];
            reject_unknown_keys(a1, {"alpha", "xi"}, "gamma.algorithm1");
            const double alpha = require_number(a1, "alpha", "gamma.algorithm1");
            const double xi = require_number(a1, "xi", "gamma.algorithm1");
            if (!(alpha > 0.0 && alpha < 1.0))
                throw ConfigError("gamma.algorithm1.alpha must be in (0,1)");
            if (!(xi > 0.0)) throw ConfigError("gamma.algorithm1.xi must be > 0");
            cfg.solver.gamma_policy = GammaPolicy::algorithm1(alpha, xi);
        }
    }

    if (!doc.contains("seed")) throw ConfigError("missing 'seed'");
    cfg.seed = static_cast<std::uint64_t>(require_integer(doc, "seed", "config root"));

    if (doc.contains("output")) {
        std::filesystem::path p = doc["output"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        cfg.output_dir = p;
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

Dataset generate_dataset(int n, int m, std::uint64_t root_seed, std::uint64_t theta_seed,
                         double noise_sd, Vec* theta_true_out) {
    if (n < 1 || m < 1) throw ConfigError("generate_dataset: n and m must be >= 1");
    if (noise_sd < 0.0) throw ConfigError("generate_dataset: noise_sd must be >= 0");

    const int l = feature_dim(n);
    Rng theta_rng(derive_stream(theta_seed, "theta"));
    Vec theta_true(static_cast<std::size_t>(l));
    for (double& v : theta_true) v = theta_rng.uniform(-1.0, 1.0);

    Rng data_rng(derive_stream(root_seed, "data"));
    Rng noise_rng(derive_stream(root_seed, "noise"));

    Dataset data;
    data.n = n;
    data.examples.reserve(static_cast<std::size_t>(m));
    Vec phi(static_cast<std::size_t>(l));
    for (int i = 0; i < m; ++i) {
        Example e;
        e.x.resize(static_cast<std::size_t>(n));
        for (double& v : e.x) v = data_rng.uniform(-1.0, 1.0);
        kernel_map_into(e.x, phi);
        double y = 0.0;
        for (int c = 0; c < l; ++c) y += theta_true[static_cast<std::size_t>(c)] * phi[static_cast<std::size_t>(c)];
        if (noise_sd > 0.0) y += noise_sd * inverse_normal_cdf(noise_rng.uniform01());
        e.y = y;
        data.examples.push_back(std::move(e));
    }
    if (theta_true_out) *theta_true_out = std::move(theta_true);
    return data;
}

Dataset realize_dataset(const RunConfig& cfg) {
    Dataset data;
    if (cfg.dataset_path) {
        data = load_dataset_csv(*cfg.dataset_path);
    } else {
        const SyntheticSpec& s = *cfg.synthetic;
        data = generate_dataset(s.n, s.m, cfg.seed, s.theta_seed, s.noise_sd);
    }
    if (data.m() % cfg.cluster.workers != 0)
        throw ConfigError("dataset size " + std::to_string(data.m()) +
                          " is not divisible by cluster.workers = " +
                          std::to_string(cfg.cluster.workers));
    const int zeta = data.m() / cfg.cluster.workers;
    if (cfg.declared_zeta && *cfg.declared_zeta != zeta)
        throw ConfigError("cluster.zeta = " + std::to_string(*cfg.declared_zeta) +
                          " but dataset gives m/workers = " + std::to_string(zeta));
    return data;
}

}  // namespace pbgd
