#pragma once

#include <filesystem>

#include "pbgd/config.hpp"

namespace pbgd {

// Runs the numerical certification suites against the configured instance and
// writes report.txt plus verify_checks.csv under out_dir. Returns the process
// exit code: 0 when every hard assertion passes, 1 otherwise (the first
// failing check is named on stderr). Soft checks are reported, never fatal.
int run_verify(const RunConfig& cfg, const std::filesystem::path& out_dir, bool color);

}  // namespace pbgd
