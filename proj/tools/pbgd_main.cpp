#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pbgd/config.hpp"
#include "pbgd/diagnostics.hpp"
#include "pbgd/errors.hpp"
#include "pbgd/sampling.hpp"
#include "pbgd/trace.hpp"
#include "verify_suite.hpp"

namespace fs = std::filesystem;
using namespace pbgd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStarvation = 3;
constexpr int kExitNumerical = 4;

double vec_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

int cmd_gen_data(int n, int m, std::uint64_t seed, double noise_sd, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Dataset data = generate_dataset(n, m, seed, noise_sd);
    const fs::path out = out_dir / "dataset.csv";
    save_dataset_csv(data, out);
    std::cout << "wrote " << out.string() << " (" << m << " examples, n=" << n << ")\n";
    return kExitOk;
}

int cmd_estimate_gamma(long long capacity, double alpha, double xi, long long zeta,
                       std::optional<double> variance, std::optional<double> delta) {
    const double u = inverse_normal_cdf(1.0 - alpha / 2.0);
    const long long gamma = estimate_gamma(capacity, alpha, xi, zeta);
    std::printf("u_alpha_over_2 = %.6f\n", u);
    std::printf("gamma = %lld\n", gamma);
    if (variance) {
        if (!delta)
            throw ConfigError("--variance requires --delta (absolute error for the sample size)");
        auto spec = ConfidenceSpec::from_alpha(alpha, xi, *delta);
        const long long n = required_sample_size(capacity, spec, *variance);
        const long long machines =
            std::min((capacity + zeta - 1) / zeta, (n + zeta - 1) / zeta);
        std::printf("required_n = %lld\n", n);
        std::printf("machines_for_required_n = %lld\n", std::max(1ll, machines));
    }
    return kExitOk;
}

// Trace-level statistics appended to summary.txt for one run.
void append_run_stats(std::ostream& out, const std::string& prefix, const RunResult& res,
                      const Dataset& data, double lambda, double tol) {
    const auto& last = res.trace.back();
    out << prefix << "gamma: " << res.gamma << '\n';
    out << prefix << "eta: " << format_double(res.eta) << '\n';
    out << prefix << "iterations: " << last.t << '\n';
    out << prefix << "sim_time: " << format_double(last.sim_time) << '\n';
    out << prefix << "final_objective: " << format_double(last.objective) << '\n';
    out << prefix << "final_grad_norm: " << format_double(last.grad_norm) << '\n';
    out << prefix << "final_dist_to_opt: " << format_double(last.dist_to_opt) << '\n';

    const int l = feature_dim(data.n);
    const double bt_bound = bt_norm_bound(res.bounds, lambda, l);
    const double th_bound_l = theta_norm_bound(res.bounds, lambda, l);
    const double th_bound_relaxed = res.bounds.y_max * res.bounds.k_max / lambda;

    long long descent_pos = 0, descent_total = 0;
    long long eq30_viol = -1, bt_viol = 0, th_l_viol = 0, th_relaxed_viol = 0;
    const auto all = std::span<const Example>(data.examples);
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const double th_norm = vec_norm(res.trace[i].theta);
        if (!(th_norm <= th_bound_l)) ++th_l_viol;
        if (!(th_norm <= th_bound_relaxed)) ++th_relaxed_viol;
        if (i == 0) continue;
        const auto& prev = res.trace[i - 1];
        if (!(vec_norm(res.trace[i].step_direction) <= bt_bound)) ++bt_viol;
        if (prev.grad_norm > tol) {
            ++descent_total;
            if (descent_check(gradient(prev.theta, all, lambda), res.trace[i].step_direction) > 0.0)
                ++descent_pos;
        }
    }
    if (!res.theta_star.empty() && res.trace.size() >= 2) {
        const auto rate =
            contraction_check(res.trace, res.theta_star, res.eta, lambda, res.bounds, l);
        eq30_viol = static_cast<long long>(rate.violations.size());
        out << prefix << "fitted_q: " << format_double(rate.fitted_q) << '\n';
    }
    out << prefix << "descent_positive_fraction: "
        << format_double(descent_total ? static_cast<double>(descent_pos) / descent_total : 1.0)
        << '\n';
    out << prefix << "eq30_violations: " << eq30_viol << '\n';
    out << prefix << "bt_bound_violations: " << bt_viol << '\n';
    out << prefix << "theta_bound_l_violations: " << th_l_viol << '\n';
    out << prefix << "theta_bound_relaxed_violations: " << th_relaxed_viol << '\n';
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed_override,
            bool baseline, std::optional<fs::path> out_override) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    fs::path out_dir = out_override.value_or(cfg.output_dir.value_or(fs::path(".")));
    fs::create_directories(out_dir);

    const Dataset data = realize_dataset(cfg);
    const RunResult result = run(data, cfg.cluster, cfg.solver, cfg.seed);
    write_trace_csv(out_dir / "trace.csv", to_trace_rows(result));

    std::optional<RunResult> base;
    if (baseline) {
        SolverConfig base_cfg = cfg.solver;
        base_cfg.gamma_policy = GammaPolicy::explicit_gamma(cfg.cluster.workers);
        base = run(data, cfg.cluster, base_cfg, cfg.seed);
        write_trace_csv(out_dir / "baseline_trace.csv", to_trace_rows(*base));
    }

    std::ostringstream summary;
    const int zeta = data.m() / cfg.cluster.workers;
    summary << "workers: " << cfg.cluster.workers << '\n';
    summary << "zeta: " << zeta << '\n';
    summary << "examples: " << data.m() << '\n';
    summary << "lambda: " << format_double(cfg.solver.lambda) << '\n';
    append_run_stats(summary, "", result, data, cfg.solver.lambda, cfg.solver.tol);
    if (base) {
        append_run_stats(summary, "baseline_", *base, data, cfg.solver.lambda, cfg.solver.tol);
        const double speedup = base->trace.back().sim_time / result.trace.back().sim_time;
        summary << "speedup: " << format_double(speedup) << '\n';
        const double fb = base->trace.back().objective;
        const double fp = result.trace.back().objective;
        summary << "objective_rel_diff_vs_baseline: "
                << format_double(std::fabs(fp - fb) / std::max(std::fabs(fb), 1e-300)) << '\n';
    }

    std::ofstream sf(out_dir / "summary.txt", std::ios::binary);
    sf << summary.str();
    sf.close();
    std::cout << summary.str();
    return kExitOk;
}

int cmd_verify(std::optional<fs::path> config_path, std::optional<std::uint64_t> seed_override,
               std::optional<fs::path> out_override) {
    RunConfig cfg;
    if (config_path) {
        cfg = load_run_config(*config_path);
    } else {
        // Small built-in instance: 12 workers, Algorithm-1 gamma, mild jitter.
        cfg = parse_run_config(R"({
            "dataset": {"synthetic": {"n": 2, "m": 1200, "theta_seed": 7, "noise_sd": 0.1}},
            "cluster": {"workers": 12,
                        "latency": {"base_per_example": 0.001, "jitter_log_sigma": 0.25}},
            "solver": {"lambda": 0.1, "t_max": 4000, "tol": 1e-8},
            "gamma": {"algorithm1": {"alpha": 0.05, "xi": 0.05}},
            "seed": 42
        })",
                               fs::current_path());
    }
    if (seed_override) cfg.seed = *seed_override;
    fs::path out_dir = out_override.value_or(cfg.output_dir.value_or(fs::path(".")));
    const bool color = std::getenv("NO_COLOR") == nullptr;
    return run_verify(cfg, out_dir, color);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial-barrier distributed gradient descent: simulator, estimator, diagnostics"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    int gd_n = 2, gd_m = 100;
    double gd_noise = 0.1;
    std::uint64_t gd_seed = 1;
    std::string gd_out = ".";
    gen->add_option("--n", gd_n, "input dimension")->required();
    gen->add_option("--m", gd_m, "number of examples")->required();
    gen->add_option("--noise-sd", gd_noise, "target noise standard deviation");
    gen->add_option("--seed", gd_seed, "generator seed");
    gen->add_option("--out", gd_out, "output directory");

    // run
    auto* runc = app.add_subcommand("run", "Execute a configured experiment");
    std::string run_config;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false, run_baseline = false;
    std::string run_out;
    runc->add_option("--config", run_config, "run configuration file")->required();
    runc->add_option("--seed", run_seed, "override the config seed")
        ->each([&](const std::string&) { run_seed_set = true; });
    runc->add_flag("--baseline", run_baseline, "also run the full-barrier baseline");
    runc->add_option("--out", run_out, "output directory");

    // estimate-gamma
    auto* est = app.add_subcommand("estimate-gamma", "Least worker count for the partial barrier");
    long long eg_capacity = 0, eg_zeta = 1;
    double eg_alpha = 0.05, eg_xi = 0.05;
    double eg_variance = 0.0, eg_delta = 0.0;
    bool eg_variance_set = false, eg_delta_set = false;
    est->add_option("--capacity", eg_capacity, "total number of examples N")->required();
    est->add_option("--alpha", eg_alpha, "confidence coefficient")->required();
    est->add_option("--xi", eg_xi, "relative error")->required();
    est->add_option("--zeta", eg_zeta, "examples per machine")->required();
    est->add_option("--variance", eg_variance, "explicit population variance for the sample size")
        ->each([&](const std::string&) { eg_variance_set = true; });
    est->add_option("--delta", eg_delta, "absolute error used with --variance")
        ->each([&](const std::string&) { eg_delta_set = true; });

    // verify
    auto* ver = app.add_subcommand("verify", "Run the numerical certification suites");
    std::string ver_config, ver_out;
    std::uint64_t ver_seed = 0;
    bool ver_seed_set = false;
    ver->add_option("--config", ver_config, "run configuration file (built-in default if omitted)");
    ver->add_option("--seed", ver_seed, "override the config seed")
        ->each([&](const std::string&) { ver_seed_set = true; });
    ver->add_option("--out", ver_out, "output directory for report.txt and verify_checks.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gd_n, gd_m, gd_seed, gd_noise, gd_out);
        if (est->parsed())
            return cmd_estimate_gamma(
                eg_capacity, eg_alpha, eg_xi, eg_zeta,
                eg_variance_set ? std::optional<double>(eg_variance) : std::nullopt,
                eg_delta_set ? std::optional<double>(eg_delta) : std::nullopt);
        if (runc->parsed())
            return cmd_run(run_config,
                           run_seed_set ? std::optional<std::uint64_t>(run_seed) : std::nullopt,
                           run_baseline,
                           run_out.empty() ? std::nullopt : std::optional<fs::path>(run_out));
        if (ver->parsed())
            return cmd_verify(
                ver_config.empty() ? std::nullopt : std::optional<fs::path>(ver_config),
                ver_seed_set ? std::optional<std::uint64_t>(ver_seed) : std::nullopt,
                ver_out.empty() ? std::nullopt : std::optional<fs::path>(ver_out));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StarvationError& e) {
        std::cerr << "starvation: " << e.what() << '\n';
        return kExitStarvation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    return kExitOk;
}
