#pragma once

#include <stdexcept>
#include <string>

namespace pbgd {

// Error families map one-to-one onto CLI exit codes (see tools/): config
// validation -> 2, simulator starvation -> 3, numerical failure -> 4.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StarvationError : std::runtime_error {
    StarvationError(const std::string& msg, int responded_, long long iteration_ = -1)
        : std::runtime_error(msg), responded(responded_), iteration(iteration_) {}
    int responded;        // how many workers did respond in the failed round
    long long iteration;  // filled in by the solver when it propagates
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pbgd
