#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/world/config.hpp"

namespace sfps::world {

struct Drone {
    EntityId id = 0;
    Point position;
    Point hover_point;
    Point target;
    double battery = 1.0;
    DroneMode mode = DroneMode::Protecting;
    bool queued = false;        // waiting in the charger queue at its hover point
    Tick enqueued_at = -1;      // tick of the last ENQUEUE, -1 if never

    [[nodiscard]] bool alive() const { return mode != DroneMode::Terminated; }
    [[nodiscard]] bool in_transit() const { return !(position == target); }

    /// Hovering on station: the only state in which a drone scares birds.
    [[nodiscard]] bool guarding() const {
        return (mode == DroneMode::Protecting || mode == DroneMode::Idle) && !in_transit();
    }
};

struct Charger {
    Point position;
    int slots = 1;
    std::vector<EntityId> occupants;  // drones currently charging
    std::deque<EntityId> queue;       // FIFO: enqueued, not yet charging

    [[nodiscard]] bool in_queue(EntityId id) const {
        return std::find(queue.begin(), queue.end(), id) != queue.end();
    }
    [[nodiscard]] int free_slots() const { return slots - static_cast<int>(occupants.size()); }
};

enum class BirdState { Idle, Attacking, Fleeing };

struct Bird {
    EntityId id = 0;
    BirdState state = BirdState::Idle;
    int target_cell = -1;
    int cooldown = 0;
};

struct World {
    WorldConfig config;
    std::vector<Drone> drones;
    std::vector<Bird> birds;
    std::vector<double> cell_integrity;
    Charger charger;
    Tick clock = 0;
    Rng rng;

    // bird counts from the last bird phase
    int attacking_birds = 0;
    int detected_birds = 0;

    [[nodiscard]] Tick time_of_day() const { return clock % config.ticks_per_day; }

    [[nodiscard]] double damage_rate() const {
        if (cell_integrity.empty()) return 0.0;
        double s = 0.0;
        for (double c : cell_integrity) s += c;
        return 1.0 - s / static_cast<double>(cell_integrity.size());
    }

    [[nodiscard]] int survived_drones() const {
        return static_cast<int>(std::count_if(drones.begin(), drones.end(), [](const Drone& d) { return d.alive(); }));
    }

    [[nodiscard]] int count_mode(DroneMode m) const {
        return static_cast<int>(std::count_if(drones.begin(), drones.end(), [&](const Drone& d) { return d.mode == m; }));
    }

    /// 0-based position of `id` in the charger queue, or nullopt.
    [[nodiscard]] std::optional<std::size_t> queue_position(EntityId id) const {
        auto it = std::find(charger.queue.begin(), charger.queue.end(), id);
        if (it == charger.queue.end()) return std::nullopt;
        return static_cast<std::size_t>(it - charger.queue.begin());
    }
};

/// Probability that an idle bird starts an attack at tick-of-day `t`.
inline double attack_probability(Tick t, const WorldConfig& cfg) {
    if (t < 0 || t >= cfg.ticks_per_day) throw Error("attack_probability: tick outside the day");
    const auto& a = cfg.attack;
    const double td = static_cast<double>(t);
    const double m = (td - a.morning_peak) / a.morning_sigma;
    const double n = (td - a.afternoon_peak) / a.afternoon_sigma;
    const double p = a.morning_amplitude * std::exp(-0.5 * m * m) + a.afternoon_amplitude * std::exp(-0.5 * n * n);
    return std::clamp(p, 0.0, 1.0);
}

inline Tick time_to_fly(Point from, Point to, double speed) {
    require(speed > 0.0, "time_to_fly: speed must be positive");
    const double d = distance(from, to);
    return static_cast<Tick>(std::ceil(d / speed - 1e-9));
}

inline Tick time_to_fly_to_charger(const Drone& d, const Charger& c, double speed) {
    return time_to_fly(d.position, c.position, speed);
}

inline double energy_to_fly_to_charger(const Drone& d, const Charger& c, double speed, const WorldConfig& cfg) {
    return static_cast<double>(time_to_fly_to_charger(d, c, speed)) * cfg.moving_consumption;
}

inline World world_init(const WorldConfig& cfg) {
    cfg.validate();
    const auto hovers = cfg.resolved_hover_points();
    require_config(static_cast<int>(hovers.size()) >= cfg.n_drones, "more drones than hover points");

    World w;
    w.config = cfg;
    w.rng = Rng(cfg.seed);
    for (int i = 0; i < cfg.n_drones; ++i) {
        Drone d;
        d.id = i;
        d.hover_point = d.position = d.target = hovers[static_cast<std::size_t>(i)];
        w.drones.push_back(d);
    }
    for (int i = 0; i < cfg.n_birds; ++i) w.birds.push_back(Bird{i, BirdState::Idle, -1, 0});
    w.cell_integrity.assign(static_cast<std::size_t>(cfg.cell_count()), 1.0);
    w.charger.position = cfg.charger_position;
    w.charger.slots = cfg.charger_slots;
    return w;
}

}  // namespace sfps::world
