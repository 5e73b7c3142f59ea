#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "pbgd/exact_sum.hpp"
#include "pbgd/rng.hpp"

using pbgd::ExactSum;

namespace {

double fsum(const std::vector<double>& v) {
    ExactSum s;
    for (double x : v) s.add(x);
    return s.value();
}

}  // namespace

TEST_CASE("cancellation that defeats naive summation") {
    CHECK(fsum({1e100, 1.0, -1e100}) == 1.0);
    CHECK(fsum({1e100, 1.0, -1e100, -1.0}) == 0.0);
    CHECK(fsum({1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0}) == 4e-16);
    // Naive accumulation would lose the tail entirely.
    double naive = 0.0;
    for (double x : {1e100, 1.0, -1e100}) naive += x;
    CHECK(naive != 1.0);
}

TEST_CASE("empty and singleton") {
    ExactSum s;
    CHECK(s.value() == 0.0);
    s.add(-0.75);
    CHECK(s.value() == -0.75);
    s.reset();
    CHECK(s.value() == 0.0);
}

TEST_CASE("result is independent of addition order") {
    pbgd::Rng rng(20240517);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> values;
        const int count = 3 + static_cast<int>(rng.below(40));
        for (int i = 0; i < count; ++i) {
            const double mag = std::pow(10.0, rng.uniform(-12.0, 12.0));
            values.push_back((rng.uniform01() < 0.5 ? -1.0 : 1.0) * mag * rng.uniform01());
        }
        const double reference = fsum(values);
        for (int shuffle = 0; shuffle < 20; ++shuffle) {
            for (std::size_t i = values.size(); i > 1; --i)
                std::swap(values[i - 1], values[rng.below(i)]);
            const double got = fsum(values);
            CHECK(std::memcmp(&got, &reference, sizeof got) == 0);
        }
    }
}

TEST_CASE("matches long double accumulation on benign magnitudes") {
    pbgd::Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> values;
        long double acc = 0.0L;
        for (int i = 0; i < 200; ++i) {
            const double v = rng.uniform(-1.0, 1.0);
            values.push_back(v);
            acc += static_cast<long double>(v);
        }
        CHECK(fsum(values) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-15));
    }
}
