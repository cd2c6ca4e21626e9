#pragma once

#include <map>
#include <vector>

#include "sfps/core.hpp"

namespace sfps::est {

/// Everything an estimator may read about one entity at one tick. Drones fill
/// the drone fields; the field-level entity fills time and bird counts.
struct Snapshot {
    Tick tick = 0;
    EntityId entity = 0;
    DroneMode mode = DroneMode::Idle;
    double battery = 0.0;
    bool queued = false;
    double time_of_day = 0.0;  // fraction of the day, [0,1)
    double queue_length = 0.0;
    double drones_protecting = 0.0;
    double drones_moving = 0.0;
    double drones_charging = 0.0;
    double distance_to_charger = 0.0;
    double detected_birds = 0.0;
    double attacking_birds = 0.0;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Per-entity snapshot history, one entry per tick starting at each entity's
/// first recorded tick.
class SnapshotLog {
public:
    void record(const Snapshot& s) {
        auto& series = log_[s.entity];
        if (series.empty()) first_tick_[s.entity] = s.tick;
        else require(s.tick == series.back().tick + 1, "SnapshotLog: ticks must be contiguous per entity");
        series.push_back(s);
    }

    [[nodiscard]] const Snapshot* at(EntityId e, Tick t) const {
        auto it = log_.find(e);
        if (it == log_.end()) return nullptr;
        const Tick first = first_tick_.at(e);
        if (t < first || t >= first + static_cast<Tick>(it->second.size())) return nullptr;
        return &it->second[static_cast<std::size_t>(t - first)];
    }

    [[nodiscard]] bool covers(EntityId e, Tick from, Tick to) const { return at(e, from) && at(e, to); }

    [[nodiscard]] const std::map<EntityId, std::vector<Snapshot>>& entities() const { return log_; }

private:
    std::map<EntityId, std::vector<Snapshot>> log_;
    std::map<EntityId, Tick> first_tick_;
};

}  // namespace sfps::est
