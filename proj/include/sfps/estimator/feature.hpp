#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "sfps/core.hpp"
#include "sfps/estimator/snapshot.hpp"

namespace sfps::est {

enum class Accessor {
    Battery,
    Mode,  // categorical, one-hot over all drone modes
    TimeOfDay,
    TimeOfDaySin,
    TimeOfDayCos,
    QueueLength,
    DronesProtecting,
    DronesMoving,
    DronesCharging,
    DistanceToCharger,
    DetectedBirds,
    AttackingBirds,
};

struct AccessorName {
    Accessor accessor;
    std::string_view name;
};

inline constexpr AccessorName kAccessorNames[] = {
    {Accessor::Battery, "battery"},
    {Accessor::Mode, "mode"},
    {Accessor::TimeOfDay, "time_of_day"},
    {Accessor::TimeOfDaySin, "time_of_day_sin"},
    {Accessor::TimeOfDayCos, "time_of_day_cos"},
    {Accessor::QueueLength, "queue_length"},
    {Accessor::DronesProtecting, "drones_protecting"},
    {Accessor::DronesMoving, "drones_moving"},
    {Accessor::DronesCharging, "drones_charging"},
    {Accessor::DistanceToCharger, "distance_to_charger"},
    {Accessor::DetectedBirds, "detected_birds"},
    {Accessor::AttackingBirds, "attacking_birds"},
};

inline std::string_view to_string(Accessor a) {
    for (const auto& n : kAccessorNames)
        if (n.accessor == a) return n.name;
    return "?";
}

inline Accessor accessor_from_string(std::string_view s) {
    for (const auto& n : kAccessorNames)
        if (n.name == s) return n.accessor;
    throw ConfigError("unknown feature accessor: " + std::string(s));
}

inline bool is_categorical(Accessor a) { return a == Accessor::Mode; }

inline double read_scalar(const Snapshot& s, Accessor a) {
    constexpr double two_pi = 6.283185307179586476925;
    switch (a) {
        case Accessor::Battery: return s.battery;
        case Accessor::Mode: return static_cast<double>(s.mode);
        case Accessor::TimeOfDay: return s.time_of_day;
        case Accessor::TimeOfDaySin: return std::sin(two_pi * s.time_of_day);
        case Accessor::TimeOfDayCos: return std::cos(two_pi * s.time_of_day);
        case Accessor::QueueLength: return s.queue_length;
        case Accessor::DronesProtecting: return s.drones_protecting;
        case Accessor::DronesMoving: return s.drones_moving;
        case Accessor::DronesCharging: return s.drones_charging;
        case Accessor::DistanceToCharger: return s.distance_to_charger;
        case Accessor::DetectedBirds: return s.detected_birds;
        case Accessor::AttackingBirds: return s.attacking_birds;
    }
    return 0.0;
}

struct Normalization {
    enum class Kind { None, MinMax } kind = Kind::None;
    double lo = 0.0, hi = 1.0;

    static Normalization none() { return {}; }
    static Normalization min_max(double lo, double hi) {
        require_config(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "min-max range must satisfy lo < hi");
        return {Kind::MinMax, lo, hi};
    }

    [[nodiscard]] double apply(double v) const { return kind == Kind::MinMax ? (v - lo) / (hi - lo) : v; }
    [[nodiscard]] double invert(double v) const { return kind == Kind::MinMax ? lo + v * (hi - lo) : v; }
};

struct FeatureSpec {
    std::string name;
    Accessor accessor = Accessor::Battery;
    Normalization normalization;

    [[nodiscard]] std::size_t width() const { return is_categorical(accessor) ? kDroneModeCount : 1; }

    void append_to(const Snapshot& s, std::vector<double>& out) const {
        if (is_categorical(accessor)) {
            for (auto m : kAllDroneModes) out.push_back(s.mode == m ? 1.0 : 0.0);
            return;
        }
        out.push_back(normalization.apply(read_scalar(s, accessor)));
    }

    /// Column names this feature contributes (one per input dimension).
    void append_names(std::vector<std::string>& out) const {
        if (is_categorical(accessor)) {
            for (auto m : kAllDroneModes) out.push_back(name + "=" + std::string(sfps::to_string(m)));
            return;
        }
        out.push_back(name);
    }
};

inline FeatureSpec feature(Accessor a, Normalization n = Normalization::none()) {
    return FeatureSpec{std::string(to_string(a)), a, n};
}

}  // namespace sfps::est
