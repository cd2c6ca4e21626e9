#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/ml/activation.hpp"
#include "sfps/ml/dataset.hpp"

namespace sfps::ml {

class TrainingError : public Error {
public:
    using Error::Error;
};

struct MlpHyper {
    std::vector<std::size_t> hidden{32, 32};
    double learning_rate = 0.01;
    int epochs = 30;
    int batch_size = 32;
    OutputActivation activation = OutputActivation::Softplus;
    std::uint64_t seed = 7;
};

struct TrainReport {
    std::size_t n_samples = 0;
    double final_loss = 0.0;  // mean squared error over the training set
};

/// Dense feedforward regressor: rectifier hidden layers, one scalar output
/// passed through a configurable output activation.
class MLPModel {
public:
    struct Layer {
        std::size_t in = 0, out = 0;
        std::vector<double> w;  // out x in, row-major
        std::vector<double> b;  // out
    };

    MLPModel() = default;

    /// `sizes` = {input, hidden..., 1}. Weights are He-initialized from `seed`.
    MLPModel(std::vector<std::size_t> sizes, OutputActivation activation, std::uint64_t seed)
        : activation_(activation) {
        require(sizes.size() >= 2, "MLPModel: need at least input and output layer");
        require(sizes.back() == 1, "MLPModel: output layer must have one unit");
        for (auto s : sizes) require(s >= 1, "MLPModel: layer size must be positive");
        Rng rng(mix_seed(seed, 0x41A1));
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            Layer layer;
            layer.in = sizes[l];
            layer.out = sizes[l + 1];
            layer.w.resize(layer.in * layer.out);
            layer.b.assign(layer.out, 0.0);
            const double scale = std::sqrt(2.0 / static_cast<double>(layer.in));
            for (auto& w : layer.w) w = rng.normal() * scale;
            layers_.push_back(std::move(layer));
        }
    }

    [[nodiscard]] std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
    [[nodiscard]] OutputActivation activation() const { return activation_; }
    [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
    [[nodiscard]] std::vector<Layer>& layers() { return layers_; }

    [[nodiscard]] std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> s;
        if (layers_.empty()) return s;
        s.push_back(layers_.front().in);
        for (const auto& l : layers_) s.push_back(l.out);
        return s;
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.w.size() + l.b.size();
        return n;
    }

    /// Flat parameter view: layer by layer, weights then biases.
    double& parameter(std::size_t i) {
        for (auto& l : layers_) {
            if (i < l.w.size()) return l.w[i];
            i -= l.w.size();
            if (i < l.b.size()) return l.b[i];
            i -= l.b.size();
        }
        throw Error("MLPModel::parameter: index out of range");
    }
    [[nodiscard]] double parameter(std::size_t i) const { return const_cast<MLPModel*>(this)->parameter(i); }

    [[nodiscard]] bool all_finite() const {
        for (const auto& l : layers_) {
            for (double v : l.w)
                if (!std::isfinite(v)) return false;
            for (double v : l.b)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }

    [[nodiscard]] double forward(std::span<const double> x) const {
        require(!layers_.empty(), "mlp_forward: empty model");
        require(x.size() == input_size(), "mlp_forward: input dimension mismatch");
        std::vector<double> a(x.begin(), x.end()), z;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            affine(layers_[l], a, z);
            if (l + 1 < layers_.size())
                for (auto& v : z) v = relu(v);
            a.swap(z);
        }
        return activation_eval(activation_, a[0]);
    }

    [[nodiscard]] double predict(std::span<const double> x) const { return forward(x); }

    /// Mean over `batch` of 0.5 * (prediction - y)^2.
    [[nodiscard]] double half_mse(std::span<const Example> batch) const {
        double s = 0.0;
        for (const auto& ex : batch) {
            const double d = forward(ex.x) - ex.y;
            s += 0.5 * d * d;
        }
        return batch.empty() ? 0.0 : s / static_cast<double>(batch.size());
    }

    /// Gradient of half_mse(batch) in flat parameter order.
    [[nodiscard]] std::vector<double> gradient(std::span<const Example> batch) const {
        std::vector<const Example*> ptrs;
        ptrs.reserve(batch.size());
        for (const auto& ex : batch) ptrs.push_back(&ex);
        return gradient(std::span<const Example* const>(ptrs));
    }

    [[nodiscard]] std::vector<double> gradient(std::span<const Example* const> batch) const {
        std::vector<double> grad(parameter_count(), 0.0);
        accumulate_gradient(batch, grad);
        const double inv = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
        for (auto& g : grad) g *= inv;
        return grad;
    }

    /// One SGD step on `batch` with learning rate `lr`.
    void sgd_step(std::span<const Example* const> batch, double lr) {
        const auto grad = gradient(batch);
        std::size_t k = 0;
        for (auto& l : layers_) {
            for (auto& w : l.w) w -= lr * grad[k++];
            for (auto& b : l.b) b -= lr * grad[k++];
        }
    }

private:
    static void affine(const Layer& layer, std::span<const double> in, std::vector<double>& out) {
        out.assign(layer.out, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + o * layer.in;
            double s = layer.b[o];
            for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * in[i];
            out[o] = s;
        }
    }

    void accumulate_gradient(std::span<const Example* const> batch, std::vector<double>& grad) const {
        const std::size_t L = layers_.size();
        std::vector<std::vector<double>> acts(L + 1), pre(L);
        std::vector<std::size_t> offset(L);
        for (std::size_t l = 0, k = 0; l < L; ++l) {
            offset[l] = k;
            k += layers_[l].w.size() + layers_[l].b.size();
        }
        std::vector<double> delta, next_delta;
        for (const Example* exp : batch) {
            const Example& ex = *exp;
            require(ex.x.size() == input_size(), "mlp gradient: input dimension mismatch");
            acts[0].assign(ex.x.begin(), ex.x.end());
            for (std::size_t l = 0; l < L; ++l) {
                affine(layers_[l], acts[l], pre[l]);
                acts[l + 1] = pre[l];
                if (l + 1 < L)
                    for (auto& v : acts[l + 1]) v = relu(v);
            }
            const double z_out = pre[L - 1][0];
            const double y_hat = activation_eval(activation_, z_out);
            delta.assign(1, (y_hat - ex.y) * activation_derivative(activation_, z_out));

            for (std::size_t li = L; li-- > 0;) {
                const Layer& layer = layers_[li];
                const std::vector<double>& a_in = acts[li];
                double* gw = grad.data() + offset[li];
                double* gb = gw + layer.w.size();
                for (std::size_t o = 0; o < layer.out; ++o) {
                    const double d = delta[o];
                    if (d == 0.0) continue;
                    for (std::size_t i = 0; i < layer.in; ++i) gw[o * layer.in + i] += d * a_in[i];
                    gb[o] += d;
                }
                if (li == 0) break;
                next_delta.assign(layer.in, 0.0);
                for (std::size_t o = 0; o < layer.out; ++o) {
                    const double d = delta[o];
                    if (d == 0.0) continue;
                    const double* row = layer.w.data() + o * layer.in;
                    for (std::size_t i = 0; i < layer.in; ++i) next_delta[i] += row[i] * d;
                }
                const std::vector<double>& z_prev = pre[li - 1];
                for (std::size_t i = 0; i < layer.in; ++i)
                    if (z_prev[i] <= 0.0) next_delta[i] = 0.0;
                delta.swap(next_delta);
            }
        }
    }

    std::vector<Layer> layers_;
    OutputActivation activation_ = OutputActivation::Identity;
};

inline double mean_squared_error(const MLPModel& model, std::span<const Example> data) {
    double s = 0.0;
    for (const auto& ex : data) {
        const double d = model.forward(ex.x) - ex.y;
        s += d * d;
    }
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

/// Mini-batch SGD on squared error. Each epoch reshuffles the data with a
/// stream derived from `seed` and the epoch index, so the result depends only
/// on (model, data, hyper, seed).
inline TrainReport mlp_train(MLPModel& model, std::span<const Example> data, double lr, int epochs,
                             int batch_size, std::uint64_t seed) {
    if (data.empty()) throw TrainingError("mlp_train: empty data");
    require(lr > 0.0, "mlp_train: learning rate must be positive");
    require(epochs >= 0 && batch_size >= 1, "mlp_train: bad epochs/batch size");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const Example*> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));

    for (int e = 0; e < epochs; ++e) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(e)));
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(order[i], order[j]);
        }
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
            batch.clear();
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
            for (std::size_t k = start; k < end; ++k) batch.push_back(&data[order[k]]);
            model.sgd_step(batch, lr);
        }
        if (!model.all_finite()) throw TrainingError("mlp_train: parameters diverged (non-finite)");
    }

    TrainReport rep;
    rep.n_samples = data.size();
    rep.final_loss = mean_squared_error(model, data);
    if (!std::isfinite(rep.final_loss)) throw TrainingError("mlp_train: non-finite training loss");
    return rep;
}

inline TrainReport mlp_train(MLPModel& model, std::span<const Example> data, const MlpHyper& hyper) {
    return mlp_train(model, data, hyper.learning_rate, hyper.epochs, hyper.batch_size, hyper.seed);
}

}  // namespace sfps::ml
