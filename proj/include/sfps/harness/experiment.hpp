#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/estimator/estimator.hpp"
#include "sfps/harness/parallel.hpp"
#include "sfps/harness/pareto.hpp"
#include "sfps/harness/stats.hpp"
#include "sfps/rules/rules.hpp"
#include "sfps/world/simulation.hpp"

namespace sfps::harness {

enum class Selection { Last, Best };

inline std::string_view to_string(Selection s) { return s == Selection::Last ? "last" : "best"; }

inline Selection selection_from_string(std::string_view s) {
    if (s == "last") return Selection::Last;
    if (s == "best") return Selection::Best;
    throw ConfigError("unknown selection: " + std::string(s));
}

/// Where the charging rule gets its future battery from.
enum class BatterySource { LowerBound, UpperBound, Estimator };

inline std::string_view to_string(BatterySource s) {
    switch (s) {
        case BatterySource::LowerBound: return "lower_bound";
        case BatterySource::UpperBound: return "upper_bound";
        case BatterySource::Estimator: return "estimator";
    }
    return "?";
}

inline BatterySource battery_source_from_string(std::string_view s) {
    if (s == "lower_bound") return BatterySource::LowerBound;
    if (s == "upper_bound") return BatterySource::UpperBound;
    if (s == "estimator") return BatterySource::Estimator;
    throw ConfigError("unknown battery source: " + std::string(s));
}

struct ExperimentConfig {
    world::WorldConfig world;
    rules::Scenario scenario = rules::Scenario::Charging;
    rules::ChargingRuleParams charging;
    rules::ProtectionRuleParams protection{0.4, 0.0, 0.3};
    Tick birds_horizon = 150;
    BatterySource battery_source = BatterySource::LowerBound;

    double waiting_bootstrap = 0.0;
    double waiting_scale = 100.0;  // waiting-time labels are min-max scaled over [0, waiting_scale]
    ml::MlpHyper waiting_mlp;
    double battery_bootstrap = 1.0;
    Tick battery_horizon = 200;
    int battery_stride = 10;
    ml::MlpHyper battery_mlp{.learning_rate = 0.05, .epochs = 100};
    int birds_k = 5;
    double birds_bootstrap = 0.0;

    int n_iterations = 6;
    int runs_per_iteration = 3;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    Selection selection = Selection::Last;
    std::size_t replay_window = 4;
    double test_fraction = 0.2;
    unsigned threads = 1;

    void validate() const {
        world.validate();
        charging.validate();
        protection.validate();
        require_config(n_iterations >= 1, "n_iterations must be >= 1");
        require_config(runs_per_iteration >= 1, "runs_per_iteration must be >= 1");
        require_config(!seeds.empty(), "seeds must not be empty");
        require_config(replay_window >= 1, "replay window must be >= 1");
        require_config(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must be in (0,1)");
        require_config(birds_horizon >= 1, "birds horizon must be >= 1");
        require_config(battery_horizon >= 1, "battery horizon must be >= 1");
        require_config(battery_stride >= 1, "battery stride must be >= 1");
        require_config(waiting_scale > 0.0, "waiting scale must be positive");
        require_config(birds_k >= 1, "k must be >= 1");
    }

    /// Seed of run r within an iteration. The same list is used in every
    /// iteration so utilities differ only through the estimators.
    [[nodiscard]] std::uint64_t run_seed(int r) const {
        const auto n = seeds.size();
        const auto i = static_cast<std::size_t>(r);
        return i < n ? seeds[i] : mix_seed(seeds[i % n], i / n);
    }
};

inline est::EstimatorSpec waiting_time_spec(const ExperimentConfig& cfg) {
    using est::Accessor;
    using est::Normalization;
    const double n = cfg.world.n_drones;
    est::EstimatorSpec s;
    s.id = "waiting_time";
    s.inputs = {est::feature(Accessor::QueueLength, Normalization::min_max(0.0, n)),
                est::feature(Accessor::DronesProtecting, Normalization::min_max(0.0, n)),
                est::feature(Accessor::DronesMoving, Normalization::min_max(0.0, n)),
                est::feature(Accessor::DronesCharging, Normalization::min_max(0.0, n)),
                est::feature(Accessor::Battery),
                est::feature(Accessor::TimeOfDay)};
    s.output = {"waiting_time", Accessor::QueueLength, Normalization::min_max(0.0, cfg.waiting_scale)};
    s.label_source = est::LabelSource::Event;
    s.backend = est::Backend::mlp_with(cfg.waiting_mlp);
    s.bootstrap_value = cfg.waiting_bootstrap;
    s.replay_window = cfg.replay_window;
    return s;
}

inline est::EstimatorSpec future_battery_spec(const ExperimentConfig& cfg,
                                              est::ValidityGuard guard = est::ValidityGuard::mode_never(
                                                  DroneMode::Charging)) {
    using est::Accessor;
    est::EstimatorSpec s;
    s.id = "future_battery";
    s.inputs = {est::feature(Accessor::Battery), est::feature(Accessor::Mode)};
    s.output = est::feature(Accessor::Battery);
    s.horizon_min = 1;
    s.horizon_max = cfg.battery_horizon;
    s.guard = guard;
    s.backend = est::Backend::mlp_with(cfg.battery_mlp);
    s.bootstrap_value = cfg.battery_bootstrap;
    s.replay_window = cfg.replay_window;
    return s;
}

inline est::EstimatorSpec future_birds_spec(const ExperimentConfig& cfg) {
    using est::Accessor;
    est::EstimatorSpec s;
    s.id = "future_birds";
    s.inputs = {est::feature(Accessor::TimeOfDaySin), est::feature(Accessor::TimeOfDayCos)};
    s.output = est::feature(Accessor::DetectedBirds,
                            est::Normalization::min_max(0.0, std::max(1, cfg.world.n_birds)));
    s.horizon_min = s.horizon_max = cfg.birds_horizon;
    s.backend = est::Backend::knn_with(cfg.birds_k);
    s.bootstrap_value = cfg.birds_bootstrap;
    s.replay_window = cfg.replay_window;
    return s;
}

/// An estimator trained by the iterative loop, with how it collects data.
struct LearnedSpec {
    est::EstimatorSpec spec;
    world::Subject subject = world::Subject::Drones;
    int stride = 1;
};

/// Estimators the scenario's policy consults; the first one is the primary
/// estimator whose error is reported.
inline std::vector<LearnedSpec> learned_specs(const ExperimentConfig& cfg) {
    std::vector<LearnedSpec> out;
    if (cfg.scenario == rules::Scenario::Charging) {
        out.push_back({waiting_time_spec(cfg), world::Subject::Drones, 1});
        if (cfg.battery_source == BatterySource::Estimator)
            out.push_back({future_battery_spec(cfg), world::Subject::Drones, cfg.battery_stride});
    } else {
        out.push_back({future_birds_spec(cfg), world::Subject::Field, 1});
    }
    return out;
}

/// True if every input depends on the time of day alone.
inline bool time_of_day_only(const est::EstimatorSpec& spec) {
    using est::Accessor;
    for (const auto& f : spec.inputs)
        if (f.accessor != Accessor::TimeOfDay && f.accessor != Accessor::TimeOfDaySin &&
            f.accessor != Accessor::TimeOfDayCos)
            return false;
    return true;
}

/// Precomputes one prediction per tick of day at a fixed horizon. Valid only
/// for estimators whose inputs are functions of the time of day.
inline rules::Predictor tabulated_predictor(const est::EstimatorHandle& h, Tick ticks_per_day, Tick horizon) {
    require(time_of_day_only(h.spec()), "tabulated_predictor: inputs depend on more than the time of day");
    auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(ticks_per_day));
    est::Snapshot s;
    for (Tick t = 0; t < ticks_per_day; ++t) {
        s.time_of_day = static_cast<double>(t) / static_cast<double>(ticks_per_day);
        (*table)[static_cast<std::size_t>(t)] = h.predict(s, horizon);
    }
    const auto tpd = static_cast<double>(ticks_per_day);
    return {[table, tpd, ticks_per_day](const est::Snapshot& snap, Tick) {
                const auto i = static_cast<Tick>(std::llround(snap.time_of_day * tpd)) % ticks_per_day;
                return (*table)[static_cast<std::size_t>(i)];
            },
            horizon, horizon};
}

inline rules::Predictor battery_predictor(const ExperimentConfig& cfg) {
    switch (cfg.battery_source) {
        case BatterySource::LowerBound: return rules::battery_bound_predictor(rules::BoundKind::Lower, cfg.world);
        case BatterySource::UpperBound: return rules::battery_bound_predictor(rules::BoundKind::Upper, cfg.world);
        case BatterySource::Estimator: break;
    }
    throw ConfigError("battery source 'estimator' needs a trained future_battery estimator");
}

/// Policy for the configured scenario, reading predictions from `learned`
/// (in learned_specs order). The handles are copied, so later training does
/// not affect the returned policy.
inline rules::Policy make_policy(const ExperimentConfig& cfg, std::span<const est::EstimatorHandle> learned) {
    rules::Policy p;
    p.scenario = cfg.scenario;
    p.charging = cfg.charging;
    p.protection = cfg.protection;
    p.birds_horizon = cfg.birds_horizon;
    const auto specs = learned_specs(cfg);
    require(learned.size() == specs.size(), "make_policy: estimator count mismatch");
    if (cfg.scenario == rules::Scenario::Charging) {
        p.waiting_time = rules::Predictor::from_estimator(std::make_shared<const est::EstimatorHandle>(learned[0]));
        if (cfg.battery_source == BatterySource::Estimator)
            p.future_battery =
                rules::Predictor::from_estimator(std::make_shared<const est::EstimatorHandle>(learned[1]));
        else
            p.future_battery = battery_predictor(cfg);
    } else {
        p.future_birds = tabulated_predictor(learned[0], cfg.world.ticks_per_day, cfg.birds_horizon);
    }
    return p;
}

struct IterationReport {
    int iteration = 0;
    double mean_damage = 0.0;
    double mean_survived = 0.0;
    double estimator_mse = std::numeric_limits<double>::quiet_NaN();  // primary estimator in use, on held-out new data
    std::size_t discarded_samples = 0;
    double mean_prediction = 0.0;  // primary estimator's mean prediction as consulted by the rules
    std::size_t new_samples = 0;
    std::string training_error;    // empty if training succeeded or was not attempted
};

/// composite utility used for best-iteration selection
inline double composite_utility(double mean_survived, int n_drones, double mean_damage) {
    return mean_survived / static_cast<double>(n_drones) - mean_damage;
}

struct TrainingOutcome {
    std::vector<IterationReport> report;
    std::vector<est::EstimatorHandle> estimators;  // selected, in learned_specs order
    std::size_t selected_iteration = 0;
    std::vector<std::vector<est::TrainingSample>> last_data;  // data collected in the final iteration
};

/// Simulate with the current estimators, collect labeled samples, update the
/// estimators on their replay windows, repeat. Iteration 0 uses bootstrap
/// values. No update follows the final iteration.
inline TrainingOutcome iterative_training(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto specs = learned_specs(cfg);
    std::vector<est::EstimatorHandle> current;
    for (const auto& s : specs) current.push_back(est::make_estimator(s.spec));

    TrainingOutcome out;
    std::vector<std::vector<est::EstimatorHandle>> used;
    double best_utility = -std::numeric_limits<double>::infinity();

    for (int it = 0; it < cfg.n_iterations; ++it) {
        const rules::Policy policy = make_policy(cfg, current);
        auto runs = parallel_map(
            static_cast<std::size_t>(cfg.runs_per_iteration),
            [&](std::size_t r) {
                std::vector<world::Collector> collectors;
                for (const auto& s : specs) collectors.push_back({est::make_estimator(s.spec), s.subject, s.stride});
                world::SimOptions opt;
                opt.keep_drone_series = false;
                return world::run_simulation(cfg.world, policy, collectors, cfg.run_seed(static_cast<int>(r)), opt);
            },
            cfg.threads);

        IterationReport rep;
        rep.iteration = it;
        std::vector<double> dmg, surv;
        std::vector<std::vector<est::TrainingSample>> data(specs.size());
        for (const auto& r : runs) {
            dmg.push_back(r.damage_rate);
            surv.push_back(r.survived_drones);
            rep.mean_prediction += r.mean_prediction() / static_cast<double>(runs.size());
            for (std::size_t e = 0; e < specs.size(); ++e) {
                data[e].insert(data[e].end(), r.datasets[e].begin(), r.datasets[e].end());
                rep.discarded_samples += r.discarded[e];
            }
        }
        rep.mean_damage = aggregate_over_seeds(dmg).mean;
        rep.mean_survived = aggregate_over_seeds(surv).mean;
        rep.new_samples = data[0].size();

        std::vector<std::vector<est::TrainingSample>> train(specs.size());
        for (std::size_t e = 0; e < specs.size(); ++e) {
            if (data[e].size() < 2) {
                train[e] = data[e];
                continue;
            }
            auto [tr, te] = ml::split_dataset(data[e], cfg.test_fraction, mix_seed(cfg.seeds[0], 1000 + it));
            if (e == 0) rep.estimator_mse = current[0].evaluate(te).mse;
            train[e] = std::move(tr);
        }

        used.push_back(current);
        if (cfg.selection == Selection::Last) {
            out.selected_iteration = static_cast<std::size_t>(it);
        } else {
            const double u = composite_utility(rep.mean_survived, cfg.world.n_drones, rep.mean_damage);
            if (u >= best_utility) {
                best_utility = u;
                out.selected_iteration = static_cast<std::size_t>(it);
            }
        }
        if (it + 1 == cfg.n_iterations) out.last_data = std::move(data);

        if (it + 1 < cfg.n_iterations) {
            for (std::size_t e = 0; e < specs.size(); ++e) {
                auto backup = current[e];
                try {
                    current[e].train_update(std::move(train[e]));
                } catch (const Error& err) {
                    current[e] = std::move(backup);
                    if (!rep.training_error.empty()) rep.training_error += "; ";
                    rep.training_error += specs[e].spec.id + ": " + err.what();
                }
            }
        }
        out.report.push_back(std::move(rep));
    }
    out.estimators = std::move(used[out.selected_iteration]);
    return out;
}

struct SweepRow {
    std::vector<double> params;
    Summary damage;
    Summary survived;
    std::vector<double> damage_per_seed;
    std::vector<double> survived_per_seed;
    bool pareto = false;
};

struct SweepResult {
    std::vector<std::string> param_names;
    std::vector<SweepRow> rows;

    [[nodiscard]] std::vector<UtilityPoint> utilities() const {
        std::vector<UtilityPoint> pts;
        for (const auto& r : rows) pts.push_back({r.damage.mean, r.survived.mean});
        return pts;
    }
};

namespace detail {

/// Runs every (point, seed) pair and folds them into rows in point order.
template <class MakePolicy>
SweepResult run_sweep(const ExperimentConfig& cfg, std::vector<std::string> names,
                      std::vector<std::vector<double>> points, std::span<const std::uint64_t> seeds,
                      MakePolicy&& make) {
    require_config(!points.empty(), "sweep: empty grid");
    require_config(!seeds.empty(), "sweep: no seeds");
    std::vector<rules::Policy> policies;
    policies.reserve(points.size());
    for (const auto& p : points) policies.push_back(make(p));

    const std::size_t ns = seeds.size();
    auto results = parallel_map(
        points.size() * ns,
        [&](std::size_t job) {
            world::SimOptions opt;
            opt.keep_drone_series = false;
            auto r = world::run_simulation(cfg.world, policies[job / ns], {}, seeds[job % ns], opt);
            return std::pair<double, double>(r.damage_rate, r.survived_drones);
        },
        cfg.threads);

    SweepResult out;
    out.param_names = std::move(names);
    for (std::size_t i = 0; i < points.size(); ++i) {
        SweepRow row;
        row.params = std::move(points[i]);
        for (std::size_t s = 0; s < ns; ++s) {
            row.damage_per_seed.push_back(results[i * ns + s].first);
            row.survived_per_seed.push_back(results[i * ns + s].second);
        }
        row.damage = aggregate_over_seeds(row.damage_per_seed);
        row.survived = aggregate_over_seeds(row.survived_per_seed);
        out.rows.push_back(std::move(row));
    }
    const auto flags = pareto_flags(out.utilities());
    for (std::size_t i = 0; i < out.rows.size(); ++i) out.rows[i].pareto = flags[i];
    return out;
}

}  // namespace detail

/// Charging scenario with the waiting-time estimator replaced by each constant.
inline SweepResult grid_search_constant(const ExperimentConfig& cfg, std::span<const double> values,
                                        std::span<const std::uint64_t> seeds) {
    require_config(!values.empty(), "grid_search_constant: no values");
    std::vector<std::vector<double>> points;
    for (double v : values) points.push_back({v});
    const auto battery = battery_predictor(cfg);
    return detail::run_sweep(cfg, {"waiting_time"}, std::move(points), seeds, [&](const std::vector<double>& p) {
        rules::Policy pol;
        pol.scenario = rules::Scenario::Charging;
        pol.charging = cfg.charging;
        pol.waiting_time = rules::Predictor::constant(p[0]);
        pol.future_battery = battery;
        return pol;
    });
}

/// Default (b, c, f) grid: b in {0, 0.05, ..., 0.4}, c and f in {0, 0.1, ..., 0.6},
/// keeping only points with b + c + f < 1.
inline std::vector<rules::ProtectionRuleParams> default_bcf_grid() {
    std::vector<rules::ProtectionRuleParams> g;
    for (int bi = 0; bi <= 8; ++bi)
        for (int ci = 0; ci <= 6; ++ci)
            for (int fi = 0; fi <= 6; ++fi)
                if (bi * 5 + ci * 10 + fi * 10 < 100) g.push_back({bi / 20.0, ci / 10.0, fi / 10.0});
    return g;
}

inline std::vector<double> default_constant_values() {
    std::vector<double> v;
    for (int i = 0; i <= 20; ++i) v.push_back(5.0 * i);
    return v;
}

/// Protection scenario over a (b, c, f) grid. `future_birds` is consulted only
/// at points with f != 0.
inline SweepResult grid_search_bcf(const ExperimentConfig& cfg, std::span<const rules::ProtectionRuleParams> grid,
                                   std::span<const std::uint64_t> seeds, const rules::Predictor& future_birds) {
    require_config(!grid.empty(), "grid_search_bcf: empty grid");
    std::vector<std::vector<double>> points;
    for (const auto& g : grid) {
        g.validate();
        points.push_back({g.b, g.c, g.f});
    }
    return detail::run_sweep(cfg, {"b", "c", "f"}, std::move(points), seeds, [&](const std::vector<double>& p) {
        rules::Policy pol;
        pol.scenario = rules::Scenario::Protection;
        pol.protection = {p[0], p[1], p[2]};
        pol.future_birds = future_birds;
        pol.birds_horizon = cfg.birds_horizon;
        return pol;
    });
}

/// A drone's flight to the charger and wait for a slot: observed at the last
/// tick before release, labeled with the battery on the tick before charging
/// starts.
struct ApproachSample {
    EntityId drone = 0;
    Tick t_observed = 0;
    Tick delta = 0;
    double battery = 0.0;
    double observed = 0.0;
};

inline std::vector<ApproachSample> charger_approach_samples(const world::SimResult& r) {
    require(!r.drone_mode.empty() || r.series.empty(), "charger_approach_samples: run kept no drone series");
    std::vector<ApproachSample> out;
    const auto n_ticks = static_cast<Tick>(r.drone_mode.size());
    for (int d = 0; d < r.n_drones; ++d) {
        const auto di = static_cast<std::size_t>(d);
        for (Tick t = 1; t < n_ticks; ++t) {
            const auto prev = r.drone_mode[static_cast<std::size_t>(t - 1)][di];
            if (r.drone_mode[static_cast<std::size_t>(t)][di] != DroneMode::MovingToCharger ||
                prev == DroneMode::MovingToCharger)
                continue;
            Tick s = t;
            while (s < n_ticks && r.drone_mode[static_cast<std::size_t>(s)][di] == DroneMode::MovingToCharger) ++s;
            if (s >= n_ticks || r.drone_mode[static_cast<std::size_t>(s)][di] != DroneMode::Charging) continue;
            const Tick obs = t - 1;
            out.push_back({d, obs, s - 1 - obs, r.drone_battery[static_cast<std::size_t>(obs)][di],
                           r.drone_battery[static_cast<std::size_t>(s - 1)][di]});
        }
    }
    return out;
}

}  // namespace sfps::harness
