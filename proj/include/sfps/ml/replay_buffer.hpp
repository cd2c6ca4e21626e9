#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "sfps/core.hpp"

namespace sfps::ml {

/// Keeps the most recent `window` batches (one per training iteration) in
/// arrival order; older batches are dropped.
template <typename T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t window = 4) : window_(window) {
        require(window >= 1, "ReplayBuffer: window must be >= 1");
    }

    void append(std::vector<T> batch) {
        batches_.push_back(std::move(batch));
        while (batches_.size() > window_) batches_.pop_front();
    }

    [[nodiscard]] std::vector<T> flatten() const {
        std::vector<T> out;
        out.reserve(total_size());
        for (const auto& b : batches_) out.insert(out.end(), b.begin(), b.end());
        return out;
    }

    [[nodiscard]] std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& b : batches_) n += b.size();
        return n;
    }

    [[nodiscard]] std::size_t window() const { return window_; }
    [[nodiscard]] std::size_t batch_count() const { return batches_.size(); }
    [[nodiscard]] const std::deque<std::vector<T>>& batches() const { return batches_; }

private:
    std::size_t window_;
    std::deque<std::vector<T>> batches_;
};

}  // namespace sfps::ml
