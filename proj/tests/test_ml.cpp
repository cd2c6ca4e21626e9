#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfps/ml/activation.hpp"
#include "sfps/ml/dataset.hpp"
#include "sfps/ml/knn.hpp"
#include "sfps/ml/mlp.hpp"
#include "sfps/ml/replay_buffer.hpp"

using namespace sfps;
using namespace sfps::ml;

namespace {

// straight-line forward pass used as an oracle
double oracle_forward(const MLPModel& m, const std::vector<double>& x) {
    std::vector<double> a = x;
    const auto& layers = m.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<double> z(layers[l].out);
        for (std::size_t o = 0; o < layers[l].out; ++o) {
            double s = layers[l].b[o];
            for (std::size_t i = 0; i < layers[l].in; ++i) s += layers[l].w[o * layers[l].in + i] * a[i];
            z[o] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
        }
        a = z;
    }
    switch (m.activation()) {
        case OutputActivation::Identity: return a[0];
        case OutputActivation::Exponential: return std::exp(a[0]);
        case OutputActivation::Softplus: return std::log(1.0 + std::exp(a[0]));
    }
    return a[0];
}

std::vector<Example> random_examples(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < n; ++i) {
        Example e;
        for (std::size_t d = 0; d < dim; ++d) e.x.push_back(rng.uniform() * 2.0 - 1.0);
        e.y = rng.uniform();
        out.push_back(e);
    }
    return out;
}

}  // namespace

TEST(Activation, ClosedForms) {
    EXPECT_NEAR(activation_eval(OutputActivation::Softplus, 0.0), std::log(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(activation_eval(OutputActivation::Exponential, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(activation_eval(OutputActivation::Identity, -3.5), -3.5);
}

TEST(Activation, SoftplusLargeInputsDoNotOverflow) {
    EXPECT_NEAR(softplus(50.0), 50.0, 1e-9);
    EXPECT_TRUE(std::isfinite(softplus(1000.0)));
    EXPECT_GT(softplus(-1000.0), -1e-300);
    EXPECT_GE(softplus(-1000.0), 0.0);
}

TEST(Activation, SoftplusPositiveAndIncreasing) {
    double prev = -1.0;
    for (double z = -40.0; z <= 40.0; z += 0.25) {
        const double v = softplus(z);
        EXPECT_GT(v, 0.0);
        EXPECT_GT(v, prev);
        prev = v;
        EXPECT_GT(activation_eval(OutputActivation::Exponential, z), 0.0);
    }
}

TEST(Activation, NamesRoundTrip) {
    for (auto a : {OutputActivation::Identity, OutputActivation::Exponential, OutputActivation::Softplus})
        EXPECT_EQ(output_activation_from_string(to_string(a)), a);
    EXPECT_THROW(output_activation_from_string("tanh"), ConfigError);
}

TEST(MlpForward, ZeroNetworkIdentityIsZero) {
    MLPModel m({3, 4, 1}, OutputActivation::Identity, 1);
    for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) = 0.0;
    EXPECT_DOUBLE_EQ(m.forward(std::vector<double>{1.0, -2.0, 3.0}), 0.0);
}

TEST(MlpForward, BiasOnlySoftplus) {
    MLPModel m({2, 3, 1}, OutputActivation::Softplus, 1);
    for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) = 0.0;
    m.layers().back().b[0] = 0.7;
    EXPECT_NEAR(m.forward(std::vector<double>{5.0, -1.0}), std::log1p(std::exp(0.7)), 1e-12);
}

TEST(MlpForward, MatchesStraightLineOracle) {
    for (auto act : {OutputActivation::Identity, OutputActivation::Exponential, OutputActivation::Softplus}) {
        MLPModel m({4, 6, 5, 1}, act, 11);
        Rng rng(2);
        for (int q = 0; q < 20; ++q) {
            std::vector<double> x;
            for (int i = 0; i < 4; ++i) x.push_back(rng.uniform() * 2 - 1);
            EXPECT_NEAR(m.forward(x), oracle_forward(m, x), 1e-12);
        }
    }
}

TEST(MlpForward, DimensionMismatchThrows) {
    MLPModel m({3, 2, 1}, OutputActivation::Identity, 1);
    EXPECT_THROW((void)m.forward(std::vector<double>{1.0}), Error);
}

TEST(MlpModel, InvalidShapesThrow) {
    EXPECT_THROW(MLPModel({3}, OutputActivation::Identity, 1), Error);
    EXPECT_THROW(MLPModel({3, 2}, OutputActivation::Identity, 1), Error);
    EXPECT_THROW(MLPModel({0, 1}, OutputActivation::Identity, 1), Error);
}

TEST(MlpModel, ParameterCountAndLayout) {
    MLPModel m({3, 4, 1}, OutputActivation::Identity, 1);
    EXPECT_EQ(m.parameter_count(), 3u * 4 + 4 + 4 + 1);
    EXPECT_EQ(m.layer_sizes(), (std::vector<std::size_t>{3, 4, 1}));
    EXPECT_THROW((void)m.parameter(m.parameter_count()), Error);
}

TEST(MlpGradient, MatchesCentralDifferences) {
    for (auto act : {OutputActivation::Identity, OutputActivation::Exponential, OutputActivation::Softplus}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            MLPModel m({3, 5, 4, 1}, act, seed);
            Rng rng(seed + 100);
            const auto batch = random_examples(rng, 6, 3);
            const auto g = m.gradient(batch);
            const double eps = 1e-5;
            for (std::size_t i = 0; i < m.parameter_count(); ++i) {
                const double orig = m.parameter(i);
                m.parameter(i) = orig + eps;
                const double up = m.half_mse(batch);
                m.parameter(i) = orig - eps;
                const double down = m.half_mse(batch);
                m.parameter(i) = orig;
                const double fd = (up - down) / (2 * eps);
                const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-7});
                EXPECT_LT(std::abs(fd - g[i]) / denom, 1e-4) << "param " << i;
            }
        }
    }
}

TEST(MlpTrain, SingleStepByHand) {
    // one weight, one bias, both zero; loss 0.5 (w x + b - y)^2 with x = y = 1
    MLPModel m({1, 1}, OutputActivation::Identity, 1);
    m.parameter(0) = 0.0;
    m.parameter(1) = 0.0;
    const std::vector<Example> data{{{1.0}, 1.0}};
    mlp_train(m, data, 0.1, 1, 1, 0);
    EXPECT_NEAR(m.parameter(0), 0.1, 1e-15);
    EXPECT_NEAR(m.parameter(1), 0.1, 1e-15);
}

TEST(MlpTrain, FitsALine) {
    std::vector<Example> data;
    for (int i = 0; i <= 40; ++i) {
        const double x = i / 40.0;
        data.push_back({{x}, 2 * x + 1});
    }
    // least-squares line through the data; residual is the floor any model can reach
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& e : data) {
        sx += e.x[0];
        sy += e.y;
        sxx += e.x[0] * e.x[0];
        sxy += e.x[0] * e.y;
    }
    const double n = static_cast<double>(data.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    EXPECT_NEAR(slope, 2.0, 1e-12);
    EXPECT_NEAR(icpt, 1.0, 1e-12);

    MLPModel m({1, 16, 1}, OutputActivation::Identity, 3);
    const auto rep = mlp_train(m, data, 0.05, 400, 8, 9);
    EXPECT_LT(rep.final_loss, 1e-2);
    EXPECT_EQ(rep.n_samples, data.size());
}

TEST(MlpTrain, DeterministicWeights) {
    Rng rng(8);
    const auto data = random_examples(rng, 50, 3);
    MLPModel a({3, 8, 1}, OutputActivation::Softplus, 4), b({3, 8, 1}, OutputActivation::Softplus, 4);
    mlp_train(a, data, 0.01, 5, 7, 21);
    mlp_train(b, data, 0.01, 5, 7, 21);
    for (std::size_t i = 0; i < a.parameter_count(); ++i) EXPECT_EQ(a.parameter(i), b.parameter(i));
}

TEST(MlpTrain, EmptyDataThrows) {
    MLPModel m({1, 1}, OutputActivation::Identity, 1);
    EXPECT_THROW(mlp_train(m, std::span<const Example>{}, 0.1, 1, 1, 0), TrainingError);
}

TEST(MlpTrain, DivergenceIsReported) {
    MLPModel m({1, 1}, OutputActivation::Identity, 1);
    const std::vector<Example> data{{{10.0}, 1e6}, {{-10.0}, -1e6}};
    EXPECT_THROW(mlp_train(m, data, 10.0, 500, 1, 0), TrainingError);
}

TEST(Knn, HandExample) {
    KNNModel k(2);
    k.fit(std::vector<Example>{{{0.0}, 0.0}, {{1.0}, 1.0}, {{2.0}, 2.0}});
    EXPECT_DOUBLE_EQ(k.predict(std::vector<double>{0.4}), 0.5);
}

TEST(Knn, ExactMatchWithK1) {
    KNNModel k(1);
    k.fit(std::vector<Example>{{{0.0, 0.0}, 3.0}, {{1.0, 1.0}, 7.0}});
    EXPECT_DOUBLE_EQ(k.predict(std::vector<double>{1.0, 1.0}), 7.0);
}

TEST(Knn, TiesGoToLowerIndex) {
    KNNModel k(1);
    k.fit(std::vector<Example>{{{-1.0}, 10.0}, {{1.0}, 20.0}});
    EXPECT_DOUBLE_EQ(k.predict(std::vector<double>{0.0}), 10.0);
}

TEST(Knn, KLargerThanStoreUsesAll) {
    KNNModel k(10);
    k.fit(std::vector<Example>{{{0.0}, 1.0}, {{5.0}, 3.0}});
    EXPECT_DOUBLE_EQ(k.predict(std::vector<double>{100.0}), 2.0);
}

TEST(Knn, EmptyModelThrows) {
    KNNModel k(3);
    EXPECT_THROW((void)k.predict(std::vector<double>{0.0}), Error);
    EXPECT_THROW(KNNModel(0), Error);
}

TEST(Knn, MatchesExhaustiveScan) {
    Rng rng(17);
    std::vector<Example> store = random_examples(rng, 300, 3);
    for (int k : {1, 3, 7}) {
        KNNModel m(k);
        m.fit(store);
        for (int q = 0; q < 30; ++q) {
            std::vector<double> x{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
            std::vector<std::size_t> idx(store.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            auto dist = [&](std::size_t i) {
                double s = 0;
                for (int d = 0; d < 3; ++d) s += (store[i].x[d] - x[d]) * (store[i].x[d] - x[d]);
                return s;
            };
            std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return dist(a) < dist(b); });
            double sum = 0;
            for (int i = 0; i < k; ++i) sum += store[idx[i]].y;
            EXPECT_DOUBLE_EQ(m.predict(x), sum / k);
        }
    }
}

TEST(Knn, PredictionWithinLabelRange) {
    Rng rng(5);
    const auto store = random_examples(rng, 100, 2);
    KNNModel m(4);
    m.fit(store);
    double lo = 1e9, hi = -1e9;
    for (const auto& e : store) {
        lo = std::min(lo, e.y);
        hi = std::max(hi, e.y);
    }
    for (int q = 0; q < 100; ++q) {
        const double p = m.predict(std::vector<double>{rng.uniform() * 4 - 2, rng.uniform() * 4 - 2});
        EXPECT_GE(p, lo);
        EXPECT_LE(p, hi);
    }
}

TEST(ConstantModel, IgnoresInput) {
    ConstantModel c{100.0};
    EXPECT_DOUBLE_EQ(c.predict(std::vector<double>{1, 2, 3}), 100.0);
}

TEST(SplitDataset, Sizes) {
    std::vector<int> data(10);
    std::iota(data.begin(), data.end(), 0);
    auto [train, test] = split_dataset(data, 0.2, 1);
    EXPECT_EQ(train.size(), 8u);
    EXPECT_EQ(test.size(), 2u);
}

TEST(SplitDataset, DeterministicAndPartition) {
    std::vector<int> data(37);
    std::iota(data.begin(), data.end(), 0);
    auto a = split_dataset(data, 0.3, 9);
    auto b = split_dataset(data, 0.3, 9);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    std::vector<int> all = a.first;
    all.insert(all.end(), a.second.begin(), a.second.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, data);
    EXPECT_EQ(a.second.size(), static_cast<std::size_t>(std::ceil(37 * 0.3)));
}

TEST(SplitDataset, Errors) {
    std::vector<int> one{1};
    EXPECT_THROW(split_dataset(one, 0.5, 1), Error);
    std::vector<int> two{1, 2};
    EXPECT_THROW(split_dataset(two, 0.0, 1), Error);
    EXPECT_THROW(split_dataset(two, 1.0, 1), Error);
}

TEST(Evaluate, PerfectConstant) {
    const std::vector<Example> test{{{0.0}, 2.0}, {{1.0}, 2.0}};
    const auto rep = evaluate([](std::span<const double>) { return 2.0; }, std::span<const Example>(test));
    EXPECT_DOUBLE_EQ(rep.mse, 0.0);
    EXPECT_EQ(rep.scatter.size(), 2u);
}

TEST(Evaluate, ZeroOnPlusMinusOne) {
    const std::vector<Example> test{{{0.0}, 1.0}, {{0.0}, -1.0}};
    const auto rep = evaluate([](std::span<const double>) { return 0.0; }, std::span<const Example>(test));
    EXPECT_DOUBLE_EQ(rep.mse, 1.0);
    EXPECT_DOUBLE_EQ(rep.mae, 1.0);
    EXPECT_EQ(rep.scatter[0], std::make_pair(0.0, 1.0));
}

TEST(Evaluate, MaeSquaredBoundedByMse) {
    Rng rng(3);
    const auto test = random_examples(rng, 64, 2);
    MLPModel m({2, 4, 1}, OutputActivation::Identity, 2);
    const auto rep = evaluate([&](std::span<const double> x) { return m.forward(x); }, std::span<const Example>(test));
    EXPECT_LE(rep.mae * rep.mae, rep.mse + 1e-15);
}

TEST(Evaluate, EmptyThrows) {
    EXPECT_THROW(evaluate([](std::span<const double>) { return 0.0; }, std::span<const Example>{}), Error);
}

TEST(ReplayBuffer, KeepsLastWindowInOrder) {
    ReplayBuffer<int> buf(3);
    for (int i = 1; i <= 5; ++i) {
        buf.append({i, i * 10});
        EXPECT_EQ(buf.batch_count(), static_cast<std::size_t>(std::min(i, 3)));
    }
    EXPECT_EQ(buf.flatten(), (std::vector<int>{3, 30, 4, 40, 5, 50}));
    EXPECT_EQ(buf.total_size(), 6u);
    EXPECT_THROW(ReplayBuffer<int>(0), Error);
}
