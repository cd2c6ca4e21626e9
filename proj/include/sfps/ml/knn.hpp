#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/ml/dataset.hpp"

namespace sfps::ml {

/// k-nearest-neighbors regression over stored (already normalized) inputs.
class KNNModel {
public:
    explicit KNNModel(int k = 5) : k_(k) { require(k >= 1, "KNNModel: k must be >= 1"); }

    void fit(std::span<const Example> data) {
        inputs_.clear();
        labels_.clear();
        inputs_.reserve(data.size());
        labels_.reserve(data.size());
        for (const auto& ex : data) add(ex.x, ex.y);
    }

    void add(std::span<const double> x, double y) {
        if (!inputs_.empty())
            require(x.size() == inputs_.front().size(), "KNNModel: inconsistent input dimension");
        inputs_.emplace_back(x.begin(), x.end());
        labels_.push_back(y);
    }

    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] bool empty() const { return labels_.empty(); }
    [[nodiscard]] const std::vector<std::vector<double>>& inputs() const { return inputs_; }
    [[nodiscard]] const std::vector<double>& labels() const { return labels_; }

    /// Mean label of the k nearest stored inputs (Euclidean). Ties on distance
    /// go to the lower stored index; k larger than the store uses everything.
    [[nodiscard]] double predict(std::span<const double> x) const {
        require(!empty(), "knn_predict: empty model");
        require(x.size() == inputs_.front().size(), "knn_predict: input dimension mismatch");
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(inputs_.size());
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            double s = 0.0;
            const auto& v = inputs_[i];
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double t = v[j] - x[j];
                s += t * t;
            }
            d.emplace_back(s, i);
        }
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += labels_[d[i].second];
        return sum / static_cast<double>(k);
    }

private:
    int k_;
    std::vector<std::vector<double>> inputs_;
    std::vector<double> labels_;
};

struct ConstantModel {
    double value = 0.0;

    [[nodiscard]] double predict(std::span<const double>) const { return value; }
};

}  // namespace sfps::ml
