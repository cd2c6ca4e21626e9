#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "sfps/core.hpp"

namespace sfps::ml {

/// One supervised example: normalized input vector and scalar target.
struct Example {
    std::vector<double> x;
    double y = 0.0;

    friend bool operator==(const Example&, const Example&) = default;
};

struct EvalReport {
    double mse = 0.0;
    double mae = 0.0;
    std::vector<std::pair<double, double>> scatter;  // (predicted, true), test order
};

/// Random train/test partition. The test part has ceil(n * test_fraction)
/// elements; the permutation is drawn from `seed` only.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(std::span<const T> data, double test_fraction,
                                                        std::uint64_t seed) {
    require(test_fraction > 0.0 && test_fraction < 1.0, "split_dataset: test_fraction must be in (0,1)");
    const std::size_t n = data.size();
    require(n >= 2, "split_dataset: need at least 2 samples");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(perm[i], perm[j]);
    }

    auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction - 1e-12));
    if (n_test >= n) n_test = n - 1;
    if (n_test == 0) n_test = 1;

    std::vector<T> train, test;
    train.reserve(n - n_test);
    test.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_test)
            test.push_back(data[perm[i]]);
        else
            train.push_back(data[perm[i]]);
    }
    return {std::move(train), std::move(test)};
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& data, double test_fraction,
                                                        std::uint64_t seed) {
    return split_dataset(std::span<const T>(data), test_fraction, seed);
}

/// Scores `predict(x)` against labels. `predict` is any callable double(span<const double>).
template <typename Predict>
EvalReport evaluate(Predict&& predict, std::span<const Example> test) {
    require(!test.empty(), "evaluate: empty test set");
    EvalReport rep;
    rep.scatter.reserve(test.size());
    double se = 0.0, ae = 0.0;
    for (const auto& ex : test) {
        const double p = predict(std::span<const double>(ex.x));
        const double d = p - ex.y;
        se += d * d;
        ae += std::abs(d);
        rep.scatter.emplace_back(p, ex.y);
    }
    const auto n = static_cast<double>(test.size());
    rep.mse = se / n;
    rep.mae = ae / n;
    return rep;
}

inline void write_scatter_csv(std::ostream& os, const EvalReport& rep) {
    os << "predicted,true\n";
    for (const auto& [p, t] : rep.scatter) os << format_double(p) << ',' << format_double(t) << '\n';
}

}  // namespace sfps::ml
