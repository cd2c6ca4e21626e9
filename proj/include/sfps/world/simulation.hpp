#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/estimator/estimator.hpp"
#include "sfps/rules/rules.hpp"
#include "sfps/world/world.hpp"

namespace sfps::world {

/// Entity id used for field-level snapshots (time of day, bird counts).
inline constexpr EntityId kFieldEntity = -1;

/// What an attached estimator observes each tick.
enum class Subject { Drones, Field };

/// An estimator attached to a run for data collection. Horizon estimators
/// observe their subjects every `stride` ticks with a uniformly drawn delta;
/// event estimators observe a drone when it enqueues and are labeled with the
/// ticks it waited once charging begins.
struct Collector {
    est::EstimatorHandle handle;
    Subject subject = Subject::Drones;
    int stride = 1;
};

struct TickRecord {
    Tick tick = 0;
    int attacking_birds = 0;
    int detected_birds = 0;
    int drones_charging = 0;
    int drones_protecting = 0;
    double mean_battery = 0.0;
};

struct DecisionRecord {
    Tick tick = 0;
    EntityId drone = 0;
    std::string_view rule;
    rules::Decision decision = rules::Decision::Stay;
    double threshold = 0.0;
    double prediction = 0.0;
};

struct SimOptions {
    bool keep_log = false;        // retain the full per-entity snapshot log
    bool log_decisions = false;   // retain every rule evaluation
    bool keep_drone_series = true;
};

struct SimResult {
    double damage_rate = 0.0;
    int survived_drones = 0;
    int n_drones = 0;
    std::vector<TickRecord> series;
    std::vector<std::vector<double>> drone_battery;    // [tick][drone]
    std::vector<std::vector<DroneMode>> drone_mode;    // [tick][drone]
    std::vector<std::vector<est::TrainingSample>> datasets;  // per collector
    std::vector<std::size_t> discarded;                      // per collector
    std::vector<std::size_t> still_pending;                  // per collector
    std::vector<DecisionRecord> decisions;
    double prediction_sum = 0.0;  // over rule evaluations that consulted a predictor
    std::size_t prediction_count = 0;
    std::shared_ptr<est::SnapshotLog> log;

    [[nodiscard]] double mean_prediction() const {
        return prediction_count ? prediction_sum / static_cast<double>(prediction_count) : 0.0;
    }
};

/// Steps one world through the fixed phase order: birds, policy, drones,
/// charger, estimators, clock.
class Simulation {
public:
    Simulation(World world, const rules::Policy& policy, std::span<Collector> collectors, std::uint64_t sample_seed,
               SimOptions options = {})
        : world_(std::move(world)), policy_(policy), collectors_(collectors), sample_rng_(sample_seed),
          options_(options) {
        log_ = std::make_shared<est::SnapshotLog>();
        result_.n_drones = static_cast<int>(world_.drones.size());
        result_.datasets.resize(collectors_.size());
    }

    [[nodiscard]] const World& world() const { return world_; }
    [[nodiscard]] World& world() { return world_; }
    [[nodiscard]] const est::SnapshotLog& log() const { return *log_; }

    void step() {
        require(world_.clock < world_.config.run_length, "world_step: clock past run length");
        bird_phase();
        policy_phase();
        drone_phase();
        charger_phase();
        estimator_phase();
        record_tick();
        ++world_.clock;
    }

    SimResult finish() {
        result_.damage_rate = world_.damage_rate();
        result_.survived_drones = world_.survived_drones();
        for (const auto& c : collectors_) {
            result_.discarded.push_back(c.handle.discarded());
            result_.still_pending.push_back(c.handle.pending().size());
        }
        if (options_.keep_log) result_.log = log_;
        return std::move(result_);
    }

    [[nodiscard]] est::Snapshot drone_snapshot(const Drone& d) const {
        est::Snapshot s = base_snapshot();
        s.entity = d.id;
        s.mode = d.mode;
        s.battery = d.battery;
        s.queued = d.queued;
        s.distance_to_charger = distance(d.position, world_.charger.position);
        return s;
    }

    [[nodiscard]] est::Snapshot field_snapshot() const {
        est::Snapshot s = base_snapshot();
        s.entity = kFieldEntity;
        return s;
    }

private:
    [[nodiscard]] est::Snapshot base_snapshot() const {
        est::Snapshot s;
        s.tick = world_.clock;
        s.time_of_day = static_cast<double>(world_.time_of_day()) / static_cast<double>(world_.config.ticks_per_day);
        s.queue_length = static_cast<double>(world_.charger.queue.size());
        s.drones_protecting = world_.count_mode(DroneMode::Protecting) + world_.count_mode(DroneMode::Idle);
        s.drones_moving = world_.count_mode(DroneMode::MovingToCharger);
        s.drones_charging = world_.count_mode(DroneMode::Charging);
        s.detected_birds = world_.detected_birds;
        s.attacking_birds = world_.attacking_birds;
        return s;
    }

    void bird_phase() {
        const auto& cfg = world_.config;
        const double p = attack_probability(world_.time_of_day(), cfg) * cfg.bird_activity;
        const int n_cells = cfg.cell_count();

        for (auto& b : world_.birds) {
            switch (b.state) {
                case BirdState::Fleeing:
                    if (--b.cooldown <= 0) {
                        b.cooldown = 0;
                        b.state = BirdState::Idle;
                        b.target_cell = -1;
                    }
                    break;
                case BirdState::Idle:
                    if (world_.rng.uniform() < p) {
                        b.state = BirdState::Attacking;
                        b.target_cell = static_cast<int>(world_.rng.uniform_int(0, n_cells - 1));
                    }
                    break;
                case BirdState::Attacking:
                    if (cfg.attack_duration > 0.0 && world_.rng.uniform() < 1.0 / cfg.attack_duration) {
                        b.state = BirdState::Fleeing;
                        b.cooldown = cfg.flee_cooldown;
                    }
                    break;
            }
        }

        covered_.assign(static_cast<std::size_t>(n_cells), false);
        for (const auto& d : world_.drones) {
            if (!d.alive() || !d.guarding()) continue;
            for (int c = 0; c < n_cells; ++c)
                if (distance(cfg.cell_center(c), d.position) <= cfg.scare_radius) covered_[static_cast<std::size_t>(c)] = true;
        }

        int attacking = 0, fleeing = 0;
        for (auto& b : world_.birds) {
            if (b.state == BirdState::Attacking && covered_[static_cast<std::size_t>(b.target_cell)]) {
                b.state = BirdState::Fleeing;
                b.cooldown = cfg.flee_cooldown;
            }
            if (b.state == BirdState::Attacking) {
                ++attacking;
                auto& integrity = world_.cell_integrity[static_cast<std::size_t>(b.target_cell)];
                integrity = std::max(0.0, integrity - cfg.bird_damage_per_tick);
            } else if (b.state == BirdState::Fleeing) {
                ++fleeing;
            }
        }
        world_.attacking_birds = attacking;
        world_.detected_birds = attacking + fleeing;
    }

    void policy_phase() {
        const auto& cfg = world_.config;
        double current_fraction = 0.0, predicted_fraction = 0.0;
        bool have_prediction = false;
        if (policy_.scenario == rules::Scenario::Protection && cfg.n_birds > 0) {
            current_fraction = world_.detected_birds / static_cast<double>(cfg.n_birds);
            if (policy_.protection.f != 0.0) {
                predicted_fraction =
                    policy_.future_birds(field_snapshot(), policy_.birds_horizon) / static_cast<double>(cfg.n_birds);
                have_prediction = true;
            }
        }

        for (auto& d : world_.drones) {
            if (!d.alive()) continue;
            if (d.queued) {
                const auto dec = rules::release_decision(world_, d);
                if (options_.log_decisions)
                    result_.decisions.push_back({world_.clock, d.id, "release", dec, 0.0, 0.0});
                if (dec == rules::Decision::FlyToCharger) {
                    d.queued = false;
                    d.mode = DroneMode::MovingToCharger;
                    d.target = world_.charger.position;
                }
                continue;
            }
            if (d.mode != DroneMode::Protecting && d.mode != DroneMode::Idle) continue;

            const est::Snapshot snap = drone_snapshot(d);
            rules::RuleOutcome out;
            std::string_view rule;
            if (policy_.scenario == rules::Scenario::Charging) {
                out = rules::charging_decision(d, world_, snap, policy_.waiting_time, policy_.future_battery,
                                               policy_.charging);
                rule = "charging";
                result_.prediction_sum += out.prediction;
                ++result_.prediction_count;
            } else {
                out = rules::protection_decision(d, current_fraction, predicted_fraction, policy_.protection, world_);
                rule = "protection";
                if (have_prediction) {
                    result_.prediction_sum += out.prediction;
                    ++result_.prediction_count;
                }
            }
            if (options_.log_decisions)
                result_.decisions.push_back({world_.clock, d.id, rule, out.decision, out.threshold, out.prediction});
            if (out.decision == rules::Decision::Enqueue) {
                d.queued = true;
                d.enqueued_at = world_.clock;
                world_.charger.queue.push_back(d.id);
                for (auto& c : collectors_)
                    if (c.handle.spec().label_source == est::LabelSource::Event) c.handle.observe_event(snap, world_.clock);
            }
        }
    }

    void drone_phase() {
        const auto& cfg = world_.config;
        for (auto& d : world_.drones) {
            if (!d.alive()) continue;
            if (d.in_transit()) {
                const double dist = distance(d.position, d.target);
                if (dist <= cfg.drone_speed) {
                    d.position = d.target;
                } else {
                    d.position.x += (d.target.x - d.position.x) / dist * cfg.drone_speed;
                    d.position.y += (d.target.y - d.position.y) / dist * cfg.drone_speed;
                }
                d.battery -= cfg.moving_consumption;
            } else if (d.mode == DroneMode::Charging) {
                d.battery = std::min(1.0, d.battery + cfg.charging_rate);
                if (d.battery >= 1.0 - 1e-9) d.battery = 1.0;
            } else {
                d.battery -= cfg.hovering_consumption;
            }
            if (d.battery <= 1e-12) terminate(d);
        }
    }

    void terminate(Drone& d) {
        d.battery = 0.0;
        d.mode = DroneMode::Terminated;
        d.queued = false;
        d.target = d.position;
        auto& ch = world_.charger;
        std::erase(ch.queue, d.id);
        std::erase(ch.occupants, d.id);
        for (auto& c : collectors_)
            if (c.handle.spec().label_source == est::LabelSource::Event) c.handle.discard_entity(d.id);
    }

    void charger_phase() {
        auto& ch = world_.charger;
        for (auto it = ch.occupants.begin(); it != ch.occupants.end();) {
            auto& d = world_.drones[static_cast<std::size_t>(*it)];
            if (d.battery >= 1.0) {
                d.mode = DroneMode::Protecting;
                d.target = d.hover_point;
                it = ch.occupants.erase(it);
            } else {
                ++it;
            }
        }
        while (ch.free_slots() > 0 && !ch.queue.empty()) {
            auto& head = world_.drones[static_cast<std::size_t>(ch.queue.front())];
            if (head.mode != DroneMode::MovingToCharger || head.in_transit()) break;
            ch.queue.pop_front();
            head.mode = DroneMode::Charging;
            ch.occupants.push_back(head.id);
            const auto waited = static_cast<double>(world_.clock - head.enqueued_at);
            for (std::size_t i = 0; i < collectors_.size(); ++i) {
                auto& c = collectors_[i];
                if (c.handle.spec().label_source != est::LabelSource::Event) continue;
                if (auto s = c.handle.resolve_event(head.id, world_.clock, waited)) result_.datasets[i].push_back(*s);
            }
        }
    }

    void estimator_phase() {
        const Tick t = world_.clock;
        for (const auto& d : world_.drones) log_->record(drone_snapshot(d));
        log_->record(field_snapshot());

        for (std::size_t i = 0; i < collectors_.size(); ++i) {
            auto& c = collectors_[i];
            auto& h = c.handle;
            if (h.spec().label_source == est::LabelSource::Event) continue;
            if (c.stride <= 1 || t % c.stride == 0) {
                const auto& spec = h.spec();
                if (c.subject == Subject::Field) {
                    h.observe(*log_->at(kFieldEntity, t), t, draw_delta(spec));
                } else {
                    for (const auto& d : world_.drones)
                        if (d.alive()) h.observe(*log_->at(d.id, t), t, draw_delta(spec));
                }
            }
            auto samples = h.resolve_pending(*log_, t);
            auto& ds = result_.datasets[i];
            ds.insert(ds.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
        }
    }

    Tick draw_delta(const est::EstimatorSpec& spec) {
        if (spec.horizon_min == spec.horizon_max) return spec.horizon_min;
        return sample_rng_.uniform_int(spec.horizon_min, spec.horizon_max);
    }

    void record_tick() {
        TickRecord r;
        r.tick = world_.clock;
        r.attacking_birds = world_.attacking_birds;
        r.detected_birds = world_.detected_birds;
        r.drones_charging = world_.count_mode(DroneMode::Charging);
        r.drones_protecting = world_.count_mode(DroneMode::Protecting) + world_.count_mode(DroneMode::Idle);
        double sum = 0.0;
        for (const auto& d : world_.drones) sum += d.battery;
        r.mean_battery = world_.drones.empty() ? 0.0 : sum / static_cast<double>(world_.drones.size());
        result_.series.push_back(r);
        if (options_.keep_drone_series) {
            std::vector<double> b;
            std::vector<DroneMode> m;
            for (const auto& d : world_.drones) {
                b.push_back(d.battery);
                m.push_back(d.mode);
            }
            result_.drone_battery.push_back(std::move(b));
            result_.drone_mode.push_back(std::move(m));
        }
    }

    World world_;
    const rules::Policy& policy_;
    std::span<Collector> collectors_;
    Rng sample_rng_;
    SimOptions options_;
    std::shared_ptr<est::SnapshotLog> log_;
    SimResult result_;
    std::vector<bool> covered_;
};

/// One full run. The world seed and the data-collection stream both derive
/// from `seed`, so identical inputs give identical results.
inline SimResult run_simulation(WorldConfig config, const rules::Policy& policy, std::span<Collector> collectors,
                                std::uint64_t seed, SimOptions options = {}) {
    config.seed = seed;
    if (policy.scenario == rules::Scenario::Charging) {
        policy.charging.validate();
        require_config(static_cast<bool>(policy.future_battery), "charging policy needs a future battery source");
    } else {
        policy.protection.validate();
    }
    Simulation sim(world_init(config), policy, collectors, mix_seed(seed, 0xDA7A), options);
    for (Tick t = 0; t < config.run_length; ++t) sim.step();
    return sim.finish();
}

}  // namespace sfps::world
