#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string_view>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/estimator/estimator.hpp"
#include "sfps/world/world.hpp"

namespace sfps::rules {

enum class Decision { Stay, Enqueue, FlyToCharger, Protect };

inline std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Stay: return "STAY";
        case Decision::Enqueue: return "ENQUEUE";
        case Decision::FlyToCharger: return "FLY_TO_CHARGER";
        case Decision::Protect: return "PROTECT";
    }
    return "?";
}

struct ChargingRuleParams {
    double safety_threshold = 0.2;

    void validate() const {
        require_config(safety_threshold > 0.0 && safety_threshold < 1.0, "safety threshold must be in (0,1)");
    }
};

struct ProtectionRuleParams {
    double b = 0.0;  // intercept
    double c = 0.0;  // weight of the current attacking-bird fraction
    double f = 0.0;  // weight of the predicted attacking-bird fraction

    void validate() const {
        require_config(std::isfinite(b) && std::isfinite(c) && std::isfinite(f), "b, c, f must be finite");
        require_config(b + c + f < 1.0, "b + c + f must be < 1");
    }
};

/// A future-value source usable by the rules: a constant, a domain-expert
/// bound, or a trained estimator. Horizon arguments are clamped into
/// [horizon_min, horizon_max] before the call.
struct Predictor {
    std::function<double(const est::Snapshot&, Tick)> fn;
    Tick horizon_min = 1;
    Tick horizon_max = std::numeric_limits<Tick>::max();

    [[nodiscard]] Tick clamp_horizon(Tick delta) const { return std::clamp(delta, horizon_min, horizon_max); }
    [[nodiscard]] double operator()(const est::Snapshot& s, Tick delta) const { return fn(s, clamp_horizon(delta)); }
    [[nodiscard]] explicit operator bool() const { return static_cast<bool>(fn); }

    static Predictor constant(double v) {
        return {[v](const est::Snapshot&, Tick) { return v; }, 1, std::numeric_limits<Tick>::max()};
    }

    static Predictor from_estimator(std::shared_ptr<const est::EstimatorHandle> h) {
        const auto& spec = h->spec();
        const Tick lo = spec.horizon_min, hi = spec.horizon_max;
        return {[h = std::move(h)](const est::Snapshot& s, Tick d) { return h->predict(s, d); }, lo, hi};
    }
};

enum class BoundKind { Upper, Lower };

/// Battery expected at `target_time` assuming constant consumption: hovering
/// rate for the upper bound, moving rate for the lower bound.
inline double future_battery_bound(double current_battery, Tick now, Tick target_time, BoundKind kind,
                                   const world::WorldConfig& cfg) {
    require(target_time >= now, "future_battery_bound: target time in the past");
    const double rate = kind == BoundKind::Upper ? cfg.hovering_consumption : cfg.moving_consumption;
    return std::clamp(current_battery - static_cast<double>(target_time - now) * rate, 0.0, 1.0);
}

inline Predictor battery_bound_predictor(BoundKind kind, const world::WorldConfig& cfg) {
    const double hover = cfg.hovering_consumption, moving = cfg.moving_consumption;
    return {[kind, hover, moving](const est::Snapshot& s, Tick delta) {
                const double rate = kind == BoundKind::Upper ? hover : moving;
                return std::clamp(s.battery - static_cast<double>(delta) * rate, 0.0, 1.0);
            },
            0, std::numeric_limits<Tick>::max()};
}

struct RuleOutcome {
    Decision decision = Decision::Stay;
    double threshold = 0.0;
    double prediction = 0.0;  // waiting time (charging rule) or predicted bird fraction (protection rule)
};

/// Enqueue when the battery predicted for the moment charging could start
/// (predicted wait + flight to the charger) falls below the safety threshold.
inline RuleOutcome charging_decision(const world::Drone& drone, const world::World& w, const est::Snapshot& snap,
                                     const Predictor& waiting_time, const Predictor& future_battery,
                                     const ChargingRuleParams& params) {
    RuleOutcome out;
    out.threshold = params.safety_threshold;
    if (!drone.alive() || drone.queued || drone.mode == DroneMode::Charging ||
        drone.mode == DroneMode::MovingToCharger)
        return out;
    const double wait = waiting_time(snap, 1);
    out.prediction = wait;
    const double fly = static_cast<double>(world::time_to_fly_to_charger(drone, w.charger, w.config.drone_speed));
    const double till = std::max(0.0, wait) + fly;
    const auto horizon = static_cast<Tick>(std::llround(till));
    const double battery_then = future_battery(snap, horizon);
    out.decision = battery_then < params.safety_threshold ? Decision::Enqueue : Decision::Stay;
    return out;
}

/// Ticks until charging could complete for a drone of the given battery.
inline Tick remaining_charge_ticks(double battery, double rate) {
    const double need = std::max(0.0, 1.0 - battery) / rate;
    return static_cast<Tick>(std::ceil(need - 1e-9));
}

/// Absolute tick at which a slot is expected to be free for `drone_id`,
/// scheduling the occupants' remaining charge and every drone ahead of it in
/// the queue greedily onto the earliest-free slot.
inline Tick expected_slot_free_time(const world::World& w, EntityId drone_id) {
    const auto pos = w.queue_position(drone_id);
    require(pos.has_value(), "expected_slot_free_time: drone not in queue");
    const auto& cfg = w.config;
    const Tick now = w.clock;

    std::vector<Tick> free_at(static_cast<std::size_t>(w.charger.slots), now);
    for (std::size_t i = 0; i < w.charger.occupants.size() && i < free_at.size(); ++i) {
        const auto& occ = w.drones[static_cast<std::size_t>(w.charger.occupants[i])];
        free_at[i] = now + remaining_charge_ticks(occ.battery, cfg.charging_rate);
    }
    for (std::size_t q = 0; q < *pos; ++q) {
        const auto& ahead = w.drones[static_cast<std::size_t>(w.charger.queue[q])];
        const Tick fly = world::time_to_fly(ahead.position, w.charger.position, cfg.drone_speed);
        const double battery_at_arrival =
            std::max(0.0, ahead.battery - static_cast<double>(fly) * cfg.moving_consumption);
        auto slot = std::min_element(free_at.begin(), free_at.end());
        const Tick start = std::max(*slot, now + fly);
        *slot = start + remaining_charge_ticks(battery_at_arrival, cfg.charging_rate);
    }
    return *std::min_element(free_at.begin(), free_at.end());
}

/// A queued drone leaves for the charger once a slot is expected to be free
/// by the time it would arrive.
/// Drones are released strictly in queue order: nobody leaves while a drone
/// ahead of it is still waiting at its hover point.
inline Decision release_decision(const world::World& w, const world::Drone& drone) {
    const auto pos = w.queue_position(drone.id);
    require(pos.has_value() && drone.queued, "release_decision: drone is not queued");
    for (std::size_t q = 0; q < *pos; ++q)
        if (w.drones[static_cast<std::size_t>(w.charger.queue[q])].queued) return Decision::Stay;
    const Tick fly = world::time_to_fly_to_charger(drone, w.charger, w.config.drone_speed);
    return expected_slot_free_time(w, drone.id) - w.clock <= fly ? Decision::FlyToCharger : Decision::Stay;
}

/// threshold = b + c * current + f * predicted (both as fractions of the bird
/// population); enqueue when the battery left after reaching the charger
/// would fall below it.
inline RuleOutcome protection_decision(const world::Drone& drone, double current_birds_fraction,
                                       double predicted_birds_fraction, const ProtectionRuleParams& params,
                                       const world::World& w) {
    RuleOutcome out;
    const double predicted = std::clamp(predicted_birds_fraction, 0.0, 1.0);
    out.prediction = predicted;
    out.threshold = params.b + params.c * current_birds_fraction + params.f * predicted;
    out.decision = Decision::Protect;
    if (!drone.alive() || drone.queued || drone.mode == DroneMode::Charging ||
        drone.mode == DroneMode::MovingToCharger)
        return out;
    const double energy = world::energy_to_fly_to_charger(drone, w.charger, w.config.drone_speed, w.config);
    if (drone.battery - energy < out.threshold) out.decision = Decision::Enqueue;
    return out;
}

enum class Scenario { Charging, Protection };

inline std::string_view to_string(Scenario s) { return s == Scenario::Charging ? "charging" : "protection"; }

inline Scenario scenario_from_string(std::string_view s) {
    if (s == "charging") return Scenario::Charging;
    if (s == "protection") return Scenario::Protection;
    throw ConfigError("unknown scenario: " + std::string(s));
}

/// Everything the policy phase needs: which rule runs and where its
/// predictions come from.
struct Policy {
    Scenario scenario = Scenario::Charging;
    ChargingRuleParams charging;
    ProtectionRuleParams protection;
    Predictor waiting_time = Predictor::constant(0.0);
    Predictor future_battery;
    Predictor future_birds = Predictor::constant(0.0);
    Tick birds_horizon = 150;
};

}  // namespace sfps::rules
