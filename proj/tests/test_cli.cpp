#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbgd/config.hpp"
#include "pbgd/features.hpp"
#include "subprocess.hpp"

using namespace pbgd;
using testutil::find_value;
using testutil::run_command;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PBGD_CLI_PATH;

fs::path fresh_dir(const char* name) {
    const fs::path d = fs::temp_directory_path() / "pbgd_cli_tests" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string straggler_config(int gamma, const std::string& extra_solver = "") {
    std::ostringstream cfg;
    cfg << R"({
      "dataset": {"synthetic": {"n": 2, "m": 1000, "theta_seed": 5, "noise_sd": 0.1}},
      "cluster": {"workers": 50,
                  "latency": {"base_per_example": 0.001, "jitter_log_sigma": 0.25,
                              "straggle_prob": 0.1, "straggle_factor": 10}},
      "solver": {"lambda": 0.1, "t_max": 600, "tol": 1e-10)"
        << extra_solver << R"(},
      "gamma": {"explicit": )"
        << gamma << R"(},
      "seed": 4242
    })";
    return cfg.str();
}

}  // namespace

TEST_CASE("estimate-gamma prints the quantile and the machine count") {
    const auto res = run_command(kCli + " estimate-gamma --capacity 10000 --alpha 0.05"
                                        " --xi 0.05 --zeta 100");
    CHECK(res.exit_code == 0);
    CHECK(find_value(res.output, "gamma") == "14");
    const double u = std::stod(find_value(res.output, "u_alpha_over_2"));
    CHECK(std::fabs(u - 1.959964) <= 1e-5);

    // Clamp case: enormous relative error needs a single machine.
    const auto clamp = run_command(kCli + " estimate-gamma --capacity 100 --alpha 0.05"
                                          " --xi 10.0 --zeta 1");
    CHECK(clamp.exit_code == 0);
    CHECK(find_value(clamp.output, "gamma") == "1");

    // alpha = 0.32 case equals a fresh evaluation of the formula.
    const auto res2 = run_command(kCli + " estimate-gamma --capacity 1000 --alpha 0.32"
                                         " --xi 0.1 --zeta 10");
    CHECK(res2.exit_code == 0);
    const double u2 = std::stod(find_value(res2.output, "u_alpha_over_2"));
    CHECK(std::fabs(u2 - 0.9945) <= 1e-4);
    const double expect = std::ceil(1000.0 * u2 * u2 / ((0.01 * 1000.0 + u2 * u2) * 10.0));
    CHECK(std::stod(find_value(res2.output, "gamma")) == expect);

    // Explicit-variance mode reports the Eq-14 sample size as well.
    const auto var = run_command(kCli + " estimate-gamma --capacity 10000 --alpha 0.05"
                                        " --xi 0.05 --zeta 100 --variance 1.0 --delta 0.05");
    CHECK(var.exit_code == 0);
    CHECK(find_value(var.output, "required_n") == "1332");

    const auto bad = run_command(kCli + " estimate-gamma --capacity 10000 --alpha 0.05"
                                        " --xi 0.05 --zeta 100 --variance 1.0");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("gen-data is deterministic and recovers the planted model") {
    const fs::path d1 = fresh_dir("gen1");
    const fs::path d2 = fresh_dir("gen2");
    const std::string args = " gen-data --n 2 --m 1000 --seed 31 --noise-sd 0.1 --out ";
    CHECK(run_command(kCli + args + d1.string()).exit_code == 0);
    CHECK(run_command(kCli + args + d2.string()).exit_code == 0);
    const std::string bytes1 = slurp(d1 / "dataset.csv");
    CHECK(!bytes1.empty());
    CHECK(bytes1 == slurp(d2 / "dataset.csv"));

    // Closed form at small lambda recovers the generator's coefficients.
    const Dataset data = load_dataset_csv(d1 / "dataset.csv");
    Vec theta_true;
    generate_dataset(2, 1000, 31, 31, 0.1, &theta_true);
    const Vec star = solve_closed_form(data, 1e-4);
    double err = 0.0;
    for (std::size_t c = 0; c < star.size(); ++c)
        err += (star[c] - theta_true[c]) * (star[c] - theta_true[c]);
    CHECK(std::sqrt(err) <= 0.15);
}

TEST_CASE("run writes reproducible traces and a summary") {
    const fs::path dir = fresh_dir("run");
    write_text(dir / "cfg.json", straggler_config(40));

    const auto r1 = run_command(kCli + " run --config " + (dir / "cfg.json").string() +
                                " --out " + (dir / "out1").string());
    REQUIRE(r1.exit_code == 0);
    const auto r2 = run_command(kCli + " run --config " + (dir / "cfg.json").string() +
                                " --out " + (dir / "out2").string());
    REQUIRE(r2.exit_code == 0);

    const std::string t1 = slurp(dir / "out1" / "trace.csv");
    CHECK(!t1.empty());
    CHECK(t1 == slurp(dir / "out2" / "trace.csv"));

    const std::string summary = slurp(dir / "out1" / "summary.txt");
    CHECK(find_value(summary, "gamma") == "40");
    CHECK(find_value(summary, "workers") == "50");
    CHECK(find_value(summary, "zeta") == "20");

    // A different seed changes the trace.
    const auto r3 = run_command(kCli + " run --config " + (dir / "cfg.json").string() +
                                " --seed 777 --out " + (dir / "out3").string());
    REQUIRE(r3.exit_code == 0);
    CHECK(t1 != slurp(dir / "out3" / "trace.csv"));
}

TEST_CASE("run --baseline reports the speedup") {
    const fs::path dir = fresh_dir("baseline");
    write_text(dir / "cfg.json", straggler_config(40));
    const auto res = run_command(kCli + " run --config " + (dir / "cfg.json").string() +
                                 " --baseline --out " + (dir / "out").string());
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "baseline_trace.csv"));
    const std::string summary = slurp(dir / "out" / "summary.txt");
    const double partial_time = std::stod(find_value(summary, "sim_time"));
    const double base_time = std::stod(find_value(summary, "baseline_sim_time"));
    const double speedup = std::stod(find_value(summary, "speedup"));
    CHECK(speedup == doctest::Approx(base_time / partial_time).epsilon(1e-12));
    CHECK(speedup > 1.0);

    // gamma = M baseline against itself is exactly 1.
    write_text(dir / "full.json", straggler_config(50));
    const auto full = run_command(kCli + " run --config " + (dir / "full.json").string() +
                                  " --baseline --out " + (dir / "outfull").string());
    REQUIRE(full.exit_code == 0);
    CHECK(find_value(slurp(dir / "outfull" / "summary.txt"), "speedup") == "1");
}

TEST_CASE("exit codes follow the documented families") {
    const fs::path dir = fresh_dir("exits");

    // Config validation: unknown key.
    write_text(dir / "bad.json", R"({"datasets": {}})");
    CHECK(run_command(kCli + " run --config " + (dir / "bad.json").string()).exit_code == 2);

    // Config validation: missing file.
    CHECK(run_command(kCli + " run --config " + (dir / "nope.json").string()).exit_code == 2);

    // Starvation: everyone always fails.
    write_text(dir / "starve.json", R"({
      "dataset": {"synthetic": {"n": 1, "m": 8, "theta_seed": 1, "noise_sd": 0}},
      "cluster": {"workers": 4, "latency": {"fail_prob": 1.0}},
      "solver": {"lambda": 0.5, "t_max": 5, "tol": 1e-9},
      "gamma": {"explicit": 2},
      "seed": 1
    })");
    CHECK(run_command(kCli + " run --config " + (dir / "starve.json").string() + " --out " +
                      dir.string())
              .exit_code == 3);

    // Bad CLI usage maps to the config family as well.
    CHECK(run_command(kCli + " run").exit_code == 2);
    CHECK(run_command(kCli + " estimate-gamma --capacity 10").exit_code == 2);

    // Numerical failure: features of a finite but enormous input overflow,
    // so the closed-form solve cannot meet its residual contract.
    write_text(dir / "huge.csv", "x1,y\n1e200,1.0\n-1e200,2.0\n");
    write_text(dir / "huge.json", R"({
      "dataset": {"path": "huge.csv"},
      "cluster": {"workers": 1},
      "solver": {"lambda": 0.1, "eta": 0.1, "t_max": 5, "tol": 1e-9},
      "gamma": {"explicit": 1},
      "seed": 1
    })");
    CHECK(run_command(kCli + " run --config " + (dir / "huge.json").string() + " --out " +
                      (dir / "huge_out").string())
              .exit_code == 4);
}

TEST_CASE("verify passes on the default instance and rejects a broken step size") {
    const fs::path dir = fresh_dir("verify");
    const auto ok = run_command("NO_COLOR=1 " + kCli + " verify --out " + dir.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("PASS") != std::string::npos);
    CHECK(ok.output.find("\033[") == std::string::npos);  // NO_COLOR honored
    CHECK(fs::exists(dir / "report.txt"));
    CHECK(fs::exists(dir / "verify_checks.csv"));

    // Deliberately broken step size: eta = 10/lambda diverges, the hard
    // monotonicity and contraction checks must fail.
    write_text(dir / "hot.json", R"({
      "dataset": {"synthetic": {"n": 2, "m": 240, "theta_seed": 5, "noise_sd": 0.1}},
      "cluster": {"workers": 4, "latency": {"jitter_log_sigma": 0.25}},
      "solver": {"lambda": 0.1, "eta": 100.0, "t_max": 200, "tol": 1e-9},
      "gamma": {"explicit": 3},
      "seed": 2
    })");
    const auto hot = run_command("NO_COLOR=1 " + kCli + " verify --config " +
                                 (dir / "hot.json").string() + " --out " +
                                 (dir / "hot").string());
    CHECK(hot.exit_code == 1);
    CHECK(hot.output.find("FAIL") != std::string::npos);

    // Empty dataset file is a config error.
    write_text(dir / "empty.csv", "x1,y\n");
    write_text(dir / "empty.json", R"({
      "dataset": {"path": "empty.csv"},
      "cluster": {"workers": 1},
      "solver": {"lambda": 0.1, "t_max": 5, "tol": 1e-9},
      "gamma": {"explicit": 1},
      "seed": 1
    })");
    CHECK(run_command(kCli + " verify --config " + (dir / "empty.json").string()).exit_code == 2);
}
