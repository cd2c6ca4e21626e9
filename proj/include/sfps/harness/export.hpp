#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "sfps/harness/config_io.hpp"
#include "sfps/harness/experiment.hpp"

namespace sfps::harness {

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file " + path.string());
    return os;
}

inline void write_timeseries_csv(std::ostream& os, const world::SimResult& r) {
    os << "tick,attacking_birds,detected_birds,drones_charging,drones_protecting,mean_battery\n";
    for (const auto& t : r.series)
        os << t.tick << ',' << t.attacking_birds << ',' << t.detected_birds << ',' << t.drones_charging << ','
           << t.drones_protecting << ',' << format_double(t.mean_battery) << '\n';
}

inline void write_decisions_csv(std::ostream& os, std::span<const world::DecisionRecord> decisions) {
    os << "tick,drone,rule,decision,threshold,prediction\n";
    for (const auto& d : decisions)
        os << d.tick << ',' << d.drone << ',' << d.rule << ',' << rules::to_string(d.decision) << ','
           << format_double(d.threshold) << ',' << format_double(d.prediction) << '\n';
}

inline nlohmann::ordered_json metrics_json(const world::SimResult& r, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["damage_rate"] = r.damage_rate;
    j["survived_drones"] = r.survived_drones;
    j["n_drones"] = r.n_drones;
    j["ticks"] = r.series.size();
    j["mean_prediction"] = r.mean_prediction();
    return j;
}

/// sweep CSV: param columns, mean/sd of both metrics, pareto flag
inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
    for (const auto& n : s.param_names) os << n << ',';
    os << "mean_damage,sd_damage,mean_survived,sd_survived,pareto\n";
    for (const auto& r : s.rows) {
        for (double p : r.params) os << format_double(p) << ',';
        os << format_double(r.damage.mean) << ',' << format_double(r.damage.sd) << ','
           << format_double(r.survived.mean) << ',' << format_double(r.survived.sd) << ',' << (r.pareto ? 1 : 0)
           << '\n';
    }
}

inline void write_report_csv(std::ostream& os, std::span<const IterationReport> report) {
    os << "iteration,mean_damage,mean_survived,estimator_mse,discarded_samples\n";
    for (const auto& r : report)
        os << r.iteration << ',' << format_double(r.mean_damage) << ',' << format_double(r.mean_survived) << ','
           << format_double(r.estimator_mse) << ',' << r.discarded_samples << '\n';
}

inline nlohmann::ordered_json model_json(const est::EstimatorHandle& h) {
    nlohmann::ordered_json j;
    const auto& spec = h.spec();
    j["id"] = spec.id;
    j["inputs"] = h.input_names();
    j["output"] = spec.output.name;
    j["horizon"] = {spec.horizon_min, spec.horizon_max};
    j["guard"] = spec.guard.describe();
    j["trained"] = h.trained();
    j["bootstrap_value"] = spec.bootstrap_value;
    j["updates"] = h.update_count();
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ml::ConstantModel>) {
                j["backend"] = "constant";
                j["value"] = m.value;
            } else if constexpr (std::is_same_v<M, ml::MLPModel>) {
                j["backend"] = "mlp";
                j["layer_sizes"] = m.layer_sizes();
                j["activation"] = ml::to_string(m.activation());
                std::vector<double> params;
                for (std::size_t i = 0; i < m.parameter_count(); ++i) params.push_back(m.parameter(i));
                j["parameters"] = params;
            } else {
                j["backend"] = "knn";
                j["k"] = m.k();
                j["inputs_stored"] = m.inputs();
                j["labels_stored"] = m.labels();
            }
        },
        h.model());
    return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    auto os = open_output(path);
    os << j.dump(2) << '\n';
}

inline void write_resolved_config(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
    auto os = open_output(dir / "config.resolved");
    write_config(os, cfg);
}

}  // namespace sfps::harness
