#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/estimator/feature.hpp"
#include "sfps/estimator/snapshot.hpp"
#include "sfps/ml/dataset.hpp"
#include "sfps/ml/knn.hpp"
#include "sfps/ml/mlp.hpp"
#include "sfps/ml/replay_buffer.hpp"

namespace sfps::est {

/// Predicate over the snapshots strictly after the observation up to and
/// including the label tick.
struct ValidityGuard {
    enum class Kind { AlwaysValid, ModeNever } kind = Kind::AlwaysValid;
    DroneMode mode = DroneMode::Charging;

    static ValidityGuard always_valid() { return {}; }
    static ValidityGuard mode_never(DroneMode m) { return {Kind::ModeNever, m}; }

    [[nodiscard]] bool holds(std::span<const Snapshot* const> interval) const {
        if (kind == Kind::AlwaysValid) return true;
        return std::none_of(interval.begin(), interval.end(), [&](const Snapshot* s) { return s->mode == mode; });
    }

    [[nodiscard]] std::string describe() const {
        return kind == Kind::AlwaysValid ? "always_valid" : "mode_never:" + std::string(sfps::to_string(mode));
    }
};

struct Backend {
    enum class Kind { Constant, Mlp, Knn } kind = Kind::Constant;
    double constant = 0.0;
    ml::MlpHyper mlp;
    int k = 5;

    static Backend constant_value(double v) { return {Kind::Constant, v, {}, 5}; }
    static Backend mlp_with(ml::MlpHyper h) { return {Kind::Mlp, 0.0, std::move(h), 5}; }
    static Backend knn_with(int k) { return {Kind::Knn, 0.0, {}, k}; }
};

/// Horizon estimators label an observation with the output feature `delta`
/// ticks later. Event estimators are labeled when an outside event fires for
/// the entity (e.g. charging begins), via resolve_event.
enum class LabelSource { Horizon, Event };

struct EstimatorSpec {
    std::string id;
    std::vector<FeatureSpec> inputs;
    FeatureSpec output;
    Tick horizon_min = 1;
    Tick horizon_max = 1;
    ValidityGuard guard;
    Backend backend;
    double bootstrap_value = 0.0;
    LabelSource label_source = LabelSource::Horizon;
    std::size_t replay_window = 4;

    [[nodiscard]] bool multi_horizon() const {
        return label_source == LabelSource::Horizon && horizon_max > horizon_min;
    }

    void validate() const {
        require_config(!id.empty(), "estimator id must not be empty");
        require_config(horizon_min >= 1 && horizon_min <= horizon_max,
                       "estimator " + id + ": horizon must satisfy 1 <= min <= max");
        require_config(std::isfinite(bootstrap_value), "estimator " + id + ": bootstrap value must be finite");
        require_config(replay_window >= 1, "estimator " + id + ": replay window must be >= 1");
        std::set<std::string> names;
        for (const auto& f : inputs)
            require_config(names.insert(f.name).second, "estimator " + id + ": duplicate feature name " + f.name);
        if (backend.kind == Backend::Kind::Knn) require_config(backend.k >= 1, "estimator " + id + ": k must be >= 1");
        if (backend.kind == Backend::Kind::Constant)
            require_config(std::isfinite(backend.constant), "estimator " + id + ": constant must be finite");
    }
};

struct PendingSample {
    std::vector<double> input_vector;
    Tick delta = 0;  // 0 for event-labeled samples until resolved
    Tick t_observed = 0;
    EntityId entity_id = 0;
};

struct TrainingSample {
    std::vector<double> input_vector;
    double label = 0.0;
    Tick t_observed = 0;
    Tick t_resolved = 0;
    EntityId entity_id = 0;

    friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

struct TrainingReport {
    std::size_t n_samples = 0;
    double final_loss = 0.0;  // MSE in label units over the training window
};

using BackendModel = std::variant<ml::ConstantModel, ml::MLPModel, ml::KNNModel>;

/// A declared estimator together with its model state, pending-label ledger
/// and replay buffer. Not thread-safe; predictions are const.
class EstimatorHandle {
public:
    explicit EstimatorHandle(EstimatorSpec spec) : spec_(std::move(spec)), buffer_(1) {
        spec_.validate();
        buffer_ = ml::ReplayBuffer<TrainingSample>(spec_.replay_window);
        switch (spec_.backend.kind) {
            case Backend::Kind::Constant: model_ = ml::ConstantModel{spec_.backend.constant}; break;
            case Backend::Kind::Mlp: model_ = ml::MLPModel{}; break;
            case Backend::Kind::Knn: model_ = ml::KNNModel{spec_.backend.k}; break;
        }
    }

    [[nodiscard]] const EstimatorSpec& spec() const { return spec_; }
    [[nodiscard]] const BackendModel& model() const { return model_; }
    [[nodiscard]] BackendModel& model() { return model_; }
    [[nodiscard]] bool trained() const { return trained_; }
    void set_trained(bool t) { trained_ = t; }
    [[nodiscard]] const std::vector<PendingSample>& pending() const { return pending_; }
    [[nodiscard]] const ml::ReplayBuffer<TrainingSample>& buffer() const { return buffer_; }
    [[nodiscard]] std::size_t discarded() const { return discarded_; }
    [[nodiscard]] std::size_t update_count() const { return updates_; }

    /// Feature dimensions excluding the horizon input.
    [[nodiscard]] std::size_t feature_dimension() const {
        std::size_t n = 0;
        for (const auto& f : spec_.inputs) n += f.width();
        return n;
    }

    [[nodiscard]] std::size_t input_dimension() const {
        return feature_dimension() + (spec_.multi_horizon() ? 1 : 0);
    }

    [[nodiscard]] std::vector<std::string> input_names() const {
        std::vector<std::string> names;
        for (const auto& f : spec_.inputs) f.append_names(names);
        if (spec_.multi_horizon()) names.emplace_back("horizon_fraction");
        return names;
    }

    [[nodiscard]] bool in_horizon(Tick delta) const {
        return delta >= spec_.horizon_min && delta <= spec_.horizon_max;
    }

    [[nodiscard]] std::vector<double> extract(const Snapshot& s, Tick delta) const {
        std::vector<double> x;
        x.reserve(input_dimension());
        for (const auto& f : spec_.inputs) f.append_to(s, x);
        if (spec_.multi_horizon()) x.push_back(static_cast<double>(delta) / static_cast<double>(spec_.horizon_max));
        return x;
    }

    /// Prediction on an already extracted input vector, in label units.
    [[nodiscard]] double predict_input(std::span<const double> x) const {
        if (!trained_) return spec_.bootstrap_value;
        const double raw = std::visit([&](const auto& m) { return m.predict(x); }, model_);
        if (std::holds_alternative<ml::ConstantModel>(model_)) return raw;
        return spec_.output.normalization.invert(raw);
    }

    [[nodiscard]] double predict(const Snapshot& s, Tick delta) const {
        require(in_horizon(delta), "predict(" + spec_.id + "): delta " + std::to_string(delta) + " outside horizon");
        if (!trained_) return spec_.bootstrap_value;
        const auto x = extract(s, delta);
        const double y = predict_input(x);
        require(std::isfinite(y), "predict(" + spec_.id + "): non-finite prediction");
        return y;
    }

    PendingSample observe(const Snapshot& s, Tick t, Tick delta) {
        require(spec_.label_source == LabelSource::Horizon, "observe(" + spec_.id + "): event-labeled estimator");
        require(in_horizon(delta), "observe(" + spec_.id + "): delta " + std::to_string(delta) + " outside horizon");
        PendingSample p{extract(s, delta), delta, t, s.entity};
        pending_.push_back(p);
        return p;
    }

    /// Moves ripe pending samples (t_observed + delta <= t_now) out of the
    /// ledger. Each becomes a TrainingSample if the guard holds over
    /// (t_observed, t_observed + delta], otherwise it is counted as discarded.
    std::vector<TrainingSample> resolve_pending(const SnapshotLog& history, Tick t_now) {
        std::vector<TrainingSample> out;
        std::vector<PendingSample> keep;
        std::vector<const Snapshot*> interval;
        for (auto& p : pending_) {
            if (spec_.label_source == LabelSource::Event || p.t_observed + p.delta > t_now) {
                keep.push_back(std::move(p));
                continue;
            }
            const Tick t_label = p.t_observed + p.delta;
            interval.clear();
            for (Tick t = p.t_observed + 1; t <= t_label; ++t) {
                const Snapshot* s = history.at(p.entity_id, t);
                if (!s) throw Error("resolve_pending(" + spec_.id + "): missing history for entity " +
                                    std::to_string(p.entity_id) + " at tick " + std::to_string(t));
                interval.push_back(s);
            }
            if (!spec_.guard.holds(interval)) {
                ++discarded_;
                continue;
            }
            const double label = read_scalar(*interval.back(), spec_.output.accessor);
            require(std::isfinite(label), "resolve_pending: non-finite label");
            out.push_back(TrainingSample{std::move(p.input_vector), label, p.t_observed, t_label, p.entity_id});
        }
        pending_ = std::move(keep);
        return out;
    }

    PendingSample observe_event(const Snapshot& s, Tick t) {
        require(spec_.label_source == LabelSource::Event, "observe_event(" + spec_.id + "): horizon estimator");
        PendingSample p{extract(s, spec_.horizon_min), 0, t, s.entity};
        pending_.push_back(p);
        return p;
    }

    /// Labels the oldest pending event sample of `entity` with `label`.
    std::optional<TrainingSample> resolve_event(EntityId entity, Tick t_now, double label) {
        require(std::isfinite(label), "resolve_event: non-finite label");
        auto it = std::find_if(pending_.begin(), pending_.end(),
                               [&](const PendingSample& p) { return p.entity_id == entity; });
        if (it == pending_.end()) return std::nullopt;
        TrainingSample ts{std::move(it->input_vector), label, it->t_observed, t_now, entity};
        pending_.erase(it);
        return ts;
    }

    /// Drops every pending sample of `entity` (its label can no longer occur).
    std::size_t discard_entity(EntityId entity) {
        const auto before = pending_.size();
        std::erase_if(pending_, [&](const PendingSample& p) { return p.entity_id == entity; });
        const auto n = before - pending_.size();
        discarded_ += n;
        return n;
    }

    void reset_ledger() {
        pending_.clear();
        discarded_ = 0;
    }

    /// Appends `new_data` to the replay buffer as one iteration and retrains
    /// the backend on the buffer contents. MLPs continue from their current
    /// weights; k-NN refits; the constant backend ignores the data.
    TrainingReport train_update(std::vector<TrainingSample> new_data) {
        return train_update(std::move(new_data), spec_.backend.mlp);
    }

    TrainingReport train_update(std::vector<TrainingSample> new_data, const ml::MlpHyper& hyper) {
        const bool learnable = spec_.backend.kind != Backend::Kind::Constant;
        if (learnable && new_data.empty())
            throw ml::TrainingError("train_update(" + spec_.id + "): no training data");
        buffer_.append(std::move(new_data));
        const auto window = buffer_.flatten();
        std::vector<ml::Example> examples;
        examples.reserve(window.size());
        for (const auto& s : window) {
            require(s.input_vector.size() == input_dimension(), "train_update: sample dimension mismatch");
            examples.push_back({s.input_vector, learnable ? spec_.output.normalization.apply(s.label) : s.label});
        }

        if (auto* mlp = std::get_if<ml::MLPModel>(&model_)) {
            if (mlp->layer_sizes().empty()) {
                std::vector<std::size_t> sizes{input_dimension()};
                sizes.insert(sizes.end(), hyper.hidden.begin(), hyper.hidden.end());
                sizes.push_back(1);
                *mlp = ml::MLPModel(sizes, hyper.activation, hyper.seed);
            }
            ml::mlp_train(*mlp, examples, hyper.learning_rate, hyper.epochs, hyper.batch_size,
                          mix_seed(hyper.seed, updates_ + 1));
        } else if (auto* knn = std::get_if<ml::KNNModel>(&model_)) {
            knn->fit(examples);
        }
        trained_ = true;
        ++updates_;

        TrainingReport rep;
        rep.n_samples = window.size();
        if (!window.empty()) {
            double se = 0.0;
            for (const auto& s : window) {
                const double d = predict_input(s.input_vector) - s.label;
                se += d * d;
            }
            rep.final_loss = se / static_cast<double>(window.size());
        }
        require(std::isfinite(rep.final_loss), "train_update: non-finite loss");
        return rep;
    }

    [[nodiscard]] ml::EvalReport evaluate(std::span<const TrainingSample> test) const {
        std::vector<ml::Example> ex;
        ex.reserve(test.size());
        for (const auto& s : test) ex.push_back({s.input_vector, s.label});
        return ml::evaluate([&](std::span<const double> x) { return predict_input(x); },
                            std::span<const ml::Example>(ex));
    }

private:
    EstimatorSpec spec_;
    BackendModel model_;
    std::vector<PendingSample> pending_;
    ml::ReplayBuffer<TrainingSample> buffer_;
    bool trained_ = false;
    std::size_t discarded_ = 0;
    std::size_t updates_ = 0;
};

inline EstimatorHandle make_estimator(EstimatorSpec spec) { return EstimatorHandle(std::move(spec)); }

/// CSV: t_observed,t_resolved,<input names...>,label
inline void write_dataset_csv(std::ostream& os, const EstimatorHandle& h, std::span<const TrainingSample> data) {
    os << "t_observed,t_resolved";
    for (const auto& n : h.input_names()) os << ',' << n;
    os << ",label\n";
    for (const auto& s : data) {
        os << s.t_observed << ',' << s.t_resolved;
        for (double v : s.input_vector) os << ',' << format_double(v);
        os << ',' << format_double(s.label) << '\n';
    }
}

}  // namespace sfps::est
