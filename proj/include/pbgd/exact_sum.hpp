#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pbgd {

// Exact (correctly rounded) sum of doubles via Shewchuk's non-overlapping
// partials, same scheme as CPython's math.fsum. The result is the nearest
// double to the exact real sum and therefore does not depend on the order in
// which values are added. The master's reduction relies on this: payloads are
// consumed in arrival order, yet the aggregate is bit-identical to a serial
// reference that sums in worker-id order.
class ExactSum {
public:
    void add(double x) {
        std::size_t used = 0;
        for (double y : partials_) {
            if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
            double hi = x + y;
            double lo = y - (hi - x);
            if (lo != 0.0) partials_[used++] = lo;
            x = hi;
        }
        partials_.resize(used);
        partials_.push_back(x);
    }

    double value() const {
        std::size_t i = partials_.size();
        if (i == 0) return 0.0;
        double total = partials_[--i];
        double err = 0.0;
        while (i > 0) {
            double x = total;
            double y = partials_[--i];
            total = x + y;
            err = y - (total - x);
            if (err != 0.0) break;
        }
        // Half-way case: round to the side the remaining partials point to.
        if (i > 0 && ((err < 0.0 && partials_[i - 1] < 0.0) ||
                      (err > 0.0 && partials_[i - 1] > 0.0))) {
            double y = err * 2.0;
            double x = total + y;
            if (y == x - total) total = x;
        }
        return total;
    }

    void reset() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

}  // namespace pbgd
