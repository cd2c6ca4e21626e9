#pragma once

#include <cmath>
#include <span>

#include "sfps/core.hpp"

namespace sfps::harness {

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for a single value
};

inline Summary aggregate_over_seeds(std::span<const double> values) {
    require(!values.empty(), "aggregate_over_seeds: no results");
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    Summary s;
    s.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

}  // namespace sfps::harness
